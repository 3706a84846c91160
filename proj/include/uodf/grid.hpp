#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "uodf/vec.hpp"

namespace uodf {

// The three orthogonal ray directions. Each maps to one coordinate axis:
// LR sweeps along x, FB along y, UD along z.
enum class Direction : std::uint8_t { LR = 0, FB = 1, UD = 2 };

inline int axis_of(Direction d) { return static_cast<int>(d); }

// The two in-plane axes of a direction, in ascending axis order.
inline std::pair<int, int> plane_axes(Direction d) {
    switch (d) {
        case Direction::LR: return {1, 2};
        case Direction::FB: return {0, 2};
        default: return {0, 1};
    }
}

inline const char* to_string(Direction d) {
    switch (d) {
        case Direction::LR: return "lr";
        case Direction::FB: return "fb";
        default: return "ud";
    }
}

inline Direction direction_from_string(const std::string& s) {
    if (s == "lr" || s == "LR") return Direction::LR;
    if (s == "fb" || s == "FB") return Direction::FB;
    if (s == "ud" || s == "UD") return Direction::UD;
    throw std::invalid_argument("unknown direction '" + s + "' (expected lr, fb or ud)");
}

// Axis-aligned sampling lattice over the fixed cube [-1,1]^3, with
// `resolution` corners per axis.
struct GridSpec {
    std::uint32_t resolution = 0;

    GridSpec() = default;
    explicit GridSpec(std::uint32_t r) : resolution(r) {
        if (r < 2) throw std::invalid_argument("grid resolution must be >= 2, got " + std::to_string(r));
    }

    double spacing() const { return 2.0 / (resolution - 1); }

    // corner(0) == -1 and corner(R-1) == +1 exactly.
    double corner(std::uint32_t i) const {
        if (i == 0) return -1.0;
        if (i == resolution - 1) return 1.0;
        return -1.0 + i * spacing();
    }

    Vec3 corner_point(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
        return {corner(ix), corner(iy), corner(iz)};
    }

    // x-fastest row-major linear index.
    std::size_t index(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
        return static_cast<std::size_t>(ix) +
               static_cast<std::size_t>(resolution) * (iy + static_cast<std::size_t>(resolution) * iz);
    }

    std::size_t corner_count() const {
        std::size_t r = resolution;
        return r * r * r;
    }

    std::size_t ray_count() const {
        std::size_t r = resolution;
        return r * r;
    }

    // In-plane ray index, i along the first plane axis (i-fastest).
    std::size_t ray_index(std::uint32_t i, std::uint32_t j) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(resolution) * j;
    }

    // Lattice cell index of an axis coordinate, clamped to [0, R-2].
    std::uint32_t cell_of(double s) const {
        double f = (s + 1.0) / spacing();
        if (f < 0) f = 0;
        auto c = static_cast<std::uint32_t>(f);
        return c > resolution - 2 ? resolution - 2 : c;
    }

    bool operator==(const GridSpec& o) const { return resolution == o.resolution; }
};

} // namespace uodf
