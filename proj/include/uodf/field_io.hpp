#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uodf/field.hpp"

namespace uodf {

struct FieldIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Binary grid format, little-endian:
//   magic   4 bytes   "UODF" (directional field) or "SCLR" (scalar grid)
//   version u32       1
//   R       u32       corners per axis
//   code    u8        UODF: direction (0 lr, 1 fb, 2 ud); SCLR: kind (0 sdf, 1 udf)
//   values  f32 * R^3 x-fastest row-major; undefined samples hold quiet NaN 0x7FC00000
// and for "UODF" only:
//   mask    u8 * R^2  ray_index order (first plane axis fastest)
//   hits    per ray:  u32 count, then count f32 axis coordinates (ascending)
//
// Derivative signs are not stored: on load they are recomputed from the hit
// lists when present, else from finite differences of the stored distances.

namespace detail {

inline constexpr std::uint32_t kFieldFormatVersion = 1;
inline constexpr std::uint32_t kCanonicalNanBits = 0x7FC00000u;

inline void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_f32(std::ostream& os, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    if (std::isnan(f)) bits = kCanonicalNanBits;
    write_u32(os, bits);
}

inline float read_f32(std::istream& is) {
    std::uint32_t bits = read_u32(is);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

} // namespace detail

inline void export_field(const DirectionalField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FieldIoError(path + ": cannot open for writing");
    os.write("UODF", 4);
    detail::write_u32(os, detail::kFieldFormatVersion);
    detail::write_u32(os, f.grid.resolution);
    os.put(static_cast<char>(axis_of(f.direction)));
    for (double d : f.dist) detail::write_f32(os, static_cast<float>(d));
    os.write(reinterpret_cast<const char*>(f.mask.data()), static_cast<std::streamsize>(f.mask.size()));
    for (std::size_t ridx = 0; ridx + 1 < f.hit_offset.size(); ++ridx) {
        std::uint32_t n = f.hit_offset[ridx + 1] - f.hit_offset[ridx];
        detail::write_u32(os, n);
        for (std::uint32_t k = 0; k < n; ++k)
            detail::write_f32(os, static_cast<float>(f.hit_coord[f.hit_offset[ridx] + k]));
    }
    if (!os) throw FieldIoError(path + ": write failed");
}

inline void export_field(const ScalarFieldGrid& g, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FieldIoError(path + ": cannot open for writing");
    os.write("SCLR", 4);
    detail::write_u32(os, detail::kFieldFormatVersion);
    detail::write_u32(os, g.grid.resolution);
    os.put(static_cast<char>(g.kind));
    for (double d : g.values) detail::write_f32(os, static_cast<float>(d));
    if (!os) throw FieldIoError(path + ": write failed");
}

namespace detail {

inline void check_header(std::istream& is, const std::string& path, const char* want_magic,
                         std::uint32_t& r, std::uint8_t& code) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, want_magic, 4) != 0)
        throw FieldIoError(path + ": bad magic (expected " + want_magic + ")");
    std::uint32_t version = read_u32(is);
    if (version != kFieldFormatVersion)
        throw FieldIoError(path + ": unsupported format version " + std::to_string(version));
    r = read_u32(is);
    if (r < 2) throw FieldIoError(path + ": invalid resolution " + std::to_string(r));
    int c = is.get();
    if (c < 0) throw FieldIoError(path + ": truncated header");
    code = static_cast<std::uint8_t>(c);
}

} // namespace detail

inline DirectionalField import_directional_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FieldIoError(path + ": cannot open");
    std::uint32_t r;
    std::uint8_t code;
    detail::check_header(is, path, "UODF", r, code);
    if (code > 2) throw FieldIoError(path + ": invalid direction code " + std::to_string(code));
    DirectionalField f;
    f.direction = static_cast<Direction>(code);
    f.grid = GridSpec(r);
    f.dist.resize(f.grid.corner_count());
    for (auto& d : f.dist) d = detail::read_f32(is);
    f.mask.resize(f.grid.ray_count());
    is.read(reinterpret_cast<char*>(f.mask.data()), static_cast<std::streamsize>(f.mask.size()));
    f.hit_offset.resize(f.grid.ray_count() + 1);
    f.hit_offset[0] = 0;
    for (std::size_t ridx = 0; ridx < f.grid.ray_count(); ++ridx) {
        std::uint32_t n = detail::read_u32(is);
        f.hit_offset[ridx + 1] = f.hit_offset[ridx] + n;
        for (std::uint32_t k = 0; k < n; ++k) f.hit_coord.push_back(detail::read_f32(is));
    }
    if (!is) throw FieldIoError(path + ": truncated file");

    // rebuild derivative signs
    f.dsign.assign(f.grid.corner_count(), 0);
    const std::uint32_t res = f.grid.resolution;
    for (std::uint32_t j = 0; j < res; ++j) {
        for (std::uint32_t i = 0; i < res; ++i) {
            if (!f.ray_defined(i, j)) continue;
            auto hits = f.ray_hits(i, j);
            for (std::uint32_t k = 0; k < res; ++k) {
                std::size_t idx = f.sample_index(i, j, k);
                if (std::isnan(f.dist[idx])) continue;
                int sg;
                if (!hits.empty()) {
                    double d;
                    eval_on_hits(hits, f.grid.corner(k), d, sg);
                } else {
                    // predicted fields carry no hit lists; fall back to the
                    // slope of the stored samples
                    double dk = f.dist[idx];
                    double prev = k > 0 ? f.dist[f.sample_index(i, j, k - 1)] : kUndefined;
                    double next = k + 1 < res ? f.dist[f.sample_index(i, j, k + 1)] : kUndefined;
                    double slope = 0.0;
                    if (!std::isnan(prev) && !std::isnan(next)) slope = next - prev;
                    else if (!std::isnan(next)) slope = next - dk;
                    else if (!std::isnan(prev)) slope = dk - prev;
                    sg = slope >= 0.0 ? +1 : -1;
                    if (dk == 0.0) sg = +1;
                }
                f.dsign[idx] = static_cast<std::int8_t>(sg);
            }
        }
    }
    return f;
}

inline ScalarFieldGrid import_scalar_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FieldIoError(path + ": cannot open");
    std::uint32_t r;
    std::uint8_t code;
    detail::check_header(is, path, "SCLR", r, code);
    if (code > 1) throw FieldIoError(path + ": invalid kind code " + std::to_string(code));
    ScalarFieldGrid g;
    g.kind = static_cast<FieldKind>(code);
    g.grid = GridSpec(r);
    g.values.resize(g.grid.corner_count());
    for (auto& d : g.values) d = detail::read_f32(is);
    if (!is) throw FieldIoError(path + ": truncated file");
    return g;
}

} // namespace uodf
