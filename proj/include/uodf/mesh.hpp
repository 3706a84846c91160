#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uodf/vec.hpp"

namespace uodf {

struct MeshError : std::runtime_error {
    enum class Kind { ParseFailure, EmptyMesh, UnsupportedFormat, IndexOutOfRange, AllDegenerate, Io };
    Kind kind;
    MeshError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Indexed triangle soup. Degenerate (zero-area) triangles stay in the index
// buffer but are flagged and skipped by intersection queries.
struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::vector<std::uint8_t> degenerate; // parallel to triangles
    Aabb bbox;
    bool normalized = false;

    std::size_t degenerate_count() const {
        std::size_t n = 0;
        for (auto d : degenerate) n += d;
        return n;
    }

    Vec3 triangle_normal(std::size_t t) const {
        const auto& tri = triangles[t];
        return normalized(cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]));
    }

    double triangle_area(std::size_t t) const {
        const auto& tri = triangles[t];
        return 0.5 * norm(cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]));
    }

    void recompute_bbox() {
        bbox = Aabb{};
        for (const auto& v : vertices) bbox.expand(v);
    }

    void flag_degenerates() {
        degenerate.assign(triangles.size(), 0);
        for (std::size_t t = 0; t < triangles.size(); ++t) {
            const auto& tri = triangles[t];
            Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
            Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
            double n2 = norm2(cross(e1, e2));
            if (n2 <= 1e-24 * norm2(e1) * norm2(e2)) degenerate[t] = 1;
        }
    }

    // Validates indices, flags degenerates and computes the bbox.
    void finalize(const std::string& source) {
        if (triangles.empty())
            throw MeshError(MeshError::Kind::EmptyMesh, source + ": mesh has no faces");
        for (std::size_t t = 0; t < triangles.size(); ++t)
            for (int k = 0; k < 3; ++k)
                if (triangles[t][k] >= vertices.size())
                    throw MeshError(MeshError::Kind::IndexOutOfRange,
                                    source + ": face " + std::to_string(t) + " references vertex " +
                                        std::to_string(triangles[t][k]) + " of " +
                                        std::to_string(vertices.size()));
        flag_degenerates();
        if (degenerate_count() == triangles.size())
            throw MeshError(MeshError::Kind::AllDegenerate, source + ": every face is degenerate");
        recompute_bbox();
    }
};

namespace detail {

inline void parse_obj(std::istream& in, TriangleMesh& mesh, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z))
                throw MeshError(MeshError::Kind::ParseFailure,
                                source + ":" + std::to_string(lineno) + ": malformed vertex line");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<std::uint32_t> poly;
            std::string tok;
            while (ls >> tok) {
                // "i", "i/t", "i//n", "i/t/n"; negative indices are relative.
                std::size_t slash = tok.find('/');
                std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                long idx = 0;
                try {
                    idx = std::stol(head);
                } catch (const std::exception&) {
                    throw MeshError(MeshError::Kind::ParseFailure,
                                    source + ":" + std::to_string(lineno) + ": bad face token '" + tok + "'");
                }
                long resolved = idx > 0 ? idx - 1 : static_cast<long>(mesh.vertices.size()) + idx;
                if (resolved < 0)
                    throw MeshError(MeshError::Kind::IndexOutOfRange,
                                    source + ":" + std::to_string(lineno) + ": face references vertex " +
                                        std::to_string(idx) + " of " + std::to_string(mesh.vertices.size()));
                poly.push_back(static_cast<std::uint32_t>(resolved));
            }
            if (poly.size() < 3)
                throw MeshError(MeshError::Kind::ParseFailure,
                                source + ":" + std::to_string(lineno) + ": face with fewer than 3 vertices");
            for (std::size_t k = 1; k + 1 < poly.size(); ++k)
                mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
        }
        // everything else (vn, vt, comments, groups) is ignored
    }
}

struct PlyProperty {
    std::string type;
    std::string name;
    bool is_list = false;
    std::string count_type;
};

inline std::size_t ply_type_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32") return 4;
    if (t == "double" || t == "float64") return 8;
    throw MeshError(MeshError::Kind::ParseFailure, "unknown PLY type '" + t + "'");
}

inline double ply_read_binary_scalar(std::istream& in, const std::string& type) {
    unsigned char buf[8];
    std::size_t n = ply_type_size(type);
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n));
    auto le = [&](int bytes) {
        std::uint64_t v = 0;
        for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | buf[i];
        return v;
    };
    if (type == "float" || type == "float32") {
        std::uint32_t bits = static_cast<std::uint32_t>(le(4));
        float f;
        std::memcpy(&f, &bits, 4);
        return f;
    }
    if (type == "double" || type == "float64") {
        std::uint64_t bits = le(8);
        double d;
        std::memcpy(&d, &bits, 8);
        return d;
    }
    std::uint64_t raw = le(static_cast<int>(n));
    if (type[0] == 'u') return static_cast<double>(raw);
    // sign-extend
    std::int64_t s = static_cast<std::int64_t>(raw << (64 - 8 * n)) >> (64 - 8 * n);
    return static_cast<double>(s);
}

inline void parse_ply(std::istream& in, TriangleMesh& mesh, const std::string& source) {
    std::string line;
    if (!std::getline(in, line) || line.substr(0, 3) != "ply")
        throw MeshError(MeshError::Kind::ParseFailure, source + ": missing 'ply' magic");
    bool binary = false;
    struct Element {
        std::string name;
        std::size_t count = 0;
        std::vector<PlyProperty> props;
    };
    std::vector<Element> elements;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt == "binary_little_endian") binary = true;
            else if (fmt == "ascii") binary = false;
            else
                throw MeshError(MeshError::Kind::UnsupportedFormat,
                                source + ": unsupported PLY format '" + fmt + "'");
        } else if (tag == "element") {
            Element e;
            ls >> e.name >> e.count;
            elements.push_back(e);
        } else if (tag == "property") {
            if (elements.empty())
                throw MeshError(MeshError::Kind::ParseFailure, source + ": property before element");
            PlyProperty p;
            std::string t;
            ls >> t;
            if (t == "list") {
                p.is_list = true;
                ls >> p.count_type >> p.type >> p.name;
            } else {
                p.type = t;
                ls >> p.name;
            }
            elements.back().props.push_back(p);
        } else if (tag == "end_header") {
            break;
        } else if (tag == "comment" || tag == "obj_info" || tag == "ply") {
            continue;
        }
    }

    for (const auto& e : elements) {
        if (e.name == "vertex") {
            int ix = -1, iy = -1, iz = -1;
            for (std::size_t p = 0; p < e.props.size(); ++p) {
                if (e.props[p].name == "x") ix = static_cast<int>(p);
                if (e.props[p].name == "y") iy = static_cast<int>(p);
                if (e.props[p].name == "z") iz = static_cast<int>(p);
            }
            if (ix < 0 || iy < 0 || iz < 0)
                throw MeshError(MeshError::Kind::ParseFailure, source + ": vertex element lacks x/y/z");
            mesh.vertices.reserve(e.count);
            for (std::size_t i = 0; i < e.count; ++i) {
                std::vector<double> vals(e.props.size());
                if (binary) {
                    for (std::size_t p = 0; p < e.props.size(); ++p) {
                        if (e.props[p].is_list)
                            throw MeshError(MeshError::Kind::ParseFailure, source + ": list property on vertex");
                        vals[p] = ply_read_binary_scalar(in, e.props[p].type);
                    }
                } else {
                    for (std::size_t p = 0; p < e.props.size(); ++p)
                        if (!(in >> vals[p]))
                            throw MeshError(MeshError::Kind::ParseFailure,
                                            source + ": truncated vertex " + std::to_string(i));
                }
                mesh.vertices.push_back({vals[ix], vals[iy], vals[iz]});
            }
        } else if (e.name == "face") {
            for (std::size_t i = 0; i < e.count; ++i) {
                for (const auto& p : e.props) {
                    if (!p.is_list) { // skip scalar face attributes
                        if (binary) ply_read_binary_scalar(in, p.type);
                        else { double dummy; in >> dummy; }
                        continue;
                    }
                    std::size_t n;
                    if (binary) n = static_cast<std::size_t>(ply_read_binary_scalar(in, p.count_type));
                    else {
                        if (!(in >> n))
                            throw MeshError(MeshError::Kind::ParseFailure,
                                            source + ": truncated face " + std::to_string(i));
                    }
                    std::vector<std::uint32_t> poly(n);
                    for (std::size_t k = 0; k < n; ++k) {
                        double v;
                        if (binary) v = ply_read_binary_scalar(in, p.type);
                        else if (!(in >> v))
                            throw MeshError(MeshError::Kind::ParseFailure,
                                            source + ": truncated face " + std::to_string(i));
                        poly[k] = static_cast<std::uint32_t>(v);
                    }
                    if (p.name == "vertex_indices" || p.name == "vertex_index") {
                        if (n < 3)
                            throw MeshError(MeshError::Kind::ParseFailure,
                                            source + ": face " + std::to_string(i) + " has " +
                                                std::to_string(n) + " vertices");
                        for (std::size_t k = 1; k + 1 < n; ++k)
                            mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
                    }
                }
            }
        } else {
            // skip unknown elements (only possible to do safely in ascii / fixed binary)
            for (std::size_t i = 0; i < e.count; ++i) {
                for (const auto& p : e.props) {
                    if (p.is_list) {
                        std::size_t n;
                        if (binary) n = static_cast<std::size_t>(ply_read_binary_scalar(in, p.count_type));
                        else in >> n;
                        for (std::size_t k = 0; k < n; ++k) {
                            if (binary) ply_read_binary_scalar(in, p.type);
                            else { double d; in >> d; }
                        }
                    } else {
                        if (binary) ply_read_binary_scalar(in, p.type);
                        else { double d; in >> d; }
                    }
                }
            }
        }
    }
}

} // namespace detail

enum class MeshFormat { Obj, Ply, Auto };

inline TriangleMesh load_mesh(const std::string& path, MeshFormat format = MeshFormat::Auto) {
    if (format == MeshFormat::Auto) {
        auto dotpos = path.rfind('.');
        std::string ext = dotpos == std::string::npos ? "" : path.substr(dotpos + 1);
        if (ext == "obj" || ext == "OBJ") format = MeshFormat::Obj;
        else if (ext == "ply" || ext == "PLY") format = MeshFormat::Ply;
        else
            throw MeshError(MeshError::Kind::UnsupportedFormat,
                            path + ": unsupported mesh format '." + ext + "' (expected .obj or .ply)");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MeshError(MeshError::Kind::Io, path + ": cannot open file");
    TriangleMesh mesh;
    if (format == MeshFormat::Obj) detail::parse_obj(in, mesh, path);
    else detail::parse_ply(in, mesh, path);
    mesh.finalize(path);
    return mesh;
}

// Translates the bbox center to the origin and scales uniformly so the
// farthest vertex sits at distance 0.9. Idempotent within roundoff.
inline TriangleMesh normalize_mesh(const TriangleMesh& mesh, double radius = 0.9) {
    if (mesh.vertices.empty() || mesh.triangles.empty())
        throw MeshError(MeshError::Kind::EmptyMesh, "normalize: empty mesh");
    if (mesh.degenerate_count() == mesh.triangles.size())
        throw MeshError(MeshError::Kind::AllDegenerate, "normalize: every face is degenerate");
    Aabb box;
    for (const auto& v : mesh.vertices) box.expand(v);
    Vec3 c = box.center();
    double maxd = 0.0;
    for (const auto& v : mesh.vertices) maxd = std::max(maxd, norm(v - c));
    if (maxd == 0.0)
        throw MeshError(MeshError::Kind::AllDegenerate, "normalize: mesh collapses to a point");
    double s = radius / maxd;
    TriangleMesh out = mesh;
    for (auto& v : out.vertices) v = (v - c) * s;
    out.flag_degenerates();
    out.recompute_bbox();
    out.normalized = true;
    return out;
}

} // namespace uodf
