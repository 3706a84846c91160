#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uodf/gep.hpp"
#include "uodf/vec.hpp"

namespace uodf {

struct PointIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PointFormat { Ply, Xyz };

namespace detail {

inline void write_f32_le(std::ostream& os, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    unsigned char b[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                          static_cast<unsigned char>(bits >> 16), static_cast<unsigned char>(bits >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline float read_f32_le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

} // namespace detail

// Binary little-endian PLY with x y z nx ny nz as f32 per point.
inline void write_ply_points(const std::vector<Vec3>& points, const std::vector<Vec3>& normals,
                             const std::string& path) {
    if (!normals.empty() && normals.size() != points.size())
        throw PointIoError(path + ": normal count does not match point count");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw PointIoError(path + ": cannot open for writing");
    os << "ply\nformat binary_little_endian 1.0\n";
    os << "element vertex " << points.size() << "\n";
    os << "property float x\nproperty float y\nproperty float z\n";
    os << "property float nx\nproperty float ny\nproperty float nz\n";
    os << "end_header\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Vec3& p = points[i];
        Vec3 n = normals.empty() ? Vec3{0, 0, 1} : normals[i];
        detail::write_f32_le(os, static_cast<float>(p.x));
        detail::write_f32_le(os, static_cast<float>(p.y));
        detail::write_f32_le(os, static_cast<float>(p.z));
        detail::write_f32_le(os, static_cast<float>(n.x));
        detail::write_f32_le(os, static_cast<float>(n.y));
        detail::write_f32_le(os, static_cast<float>(n.z));
    }
    if (!os) throw PointIoError(path + ": write failed");
}

// One "x y z" line per point.
inline void write_xyz_points(const std::vector<Vec3>& points, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw PointIoError(path + ": cannot open for writing");
    os << std::setprecision(17);
    for (const auto& p : points) os << p.x << " " << p.y << " " << p.z << "\n";
    if (!os) throw PointIoError(path + ": write failed");
}

inline void export_points(const GepSet& gep, const std::string& path,
                          PointFormat format = PointFormat::Ply) {
    std::vector<Vec3> pts;
    pts.reserve(gep.fused.size());
    for (const auto& g : gep.fused) pts.push_back(g.p);
    if (format == PointFormat::Xyz) {
        write_xyz_points(pts, path);
    } else {
        std::vector<Vec3> normals = estimate_normals(gep.fused, gep.tau);
        write_ply_points(pts, normals, path);
    }
}

inline std::vector<Vec3> read_ply_points(const std::string& path, std::vector<Vec3>* normals = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PointIoError(path + ": cannot open");
    std::string line;
    std::size_t count = 0;
    bool has_normals = false;
    std::getline(is, line);
    if (line.substr(0, 3) != "ply") throw PointIoError(path + ": not a PLY file");
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "element") {
            std::string name;
            ls >> name >> count;
        } else if (tag == "property") {
            std::string type, name;
            ls >> type >> name;
            if (name == "nx") has_normals = true;
        } else if (tag == "end_header") {
            break;
        }
    }
    std::vector<Vec3> pts(count);
    if (normals) normals->resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        float x = detail::read_f32_le(is), y = detail::read_f32_le(is), z = detail::read_f32_le(is);
        pts[i] = {x, y, z};
        if (has_normals) {
            float nx = detail::read_f32_le(is), ny = detail::read_f32_le(is), nz = detail::read_f32_le(is);
            if (normals) (*normals)[i] = {nx, ny, nz};
        }
    }
    if (!is) throw PointIoError(path + ": truncated file");
    return pts;
}

inline std::vector<Vec3> read_xyz_points(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw PointIoError(path + ": cannot open");
    std::vector<Vec3> pts;
    double x, y, z;
    while (is >> x >> y >> z) pts.push_back({x, y, z});
    return pts;
}

} // namespace uodf
