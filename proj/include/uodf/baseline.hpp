#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "uodf/field.hpp"
#include "uodf/grid.hpp"
#include "uodf/vec.hpp"

namespace uodf {

// One marching-cubes-style edge crossing: the grid edge (lower corner plus
// axis), the interpolation parameter along it and the resulting point.
struct EdgeCrossing {
    std::uint32_t corner[3]; // lower corner lattice indices
    int axis;
    double t; // in [0, 1] along the edge
    Vec3 p;
};

namespace detail {

inline Vec3 edge_point(const GridSpec& grid, const std::uint32_t c[3], int axis, double t) {
    Vec3 p = grid.corner_point(c[0], c[1], c[2]);
    p[axis] += t * grid.spacing();
    return p;
}

template <typename EmitFn>
void for_each_edge(const GridSpec& grid, EmitFn emit) {
    const std::uint32_t r = grid.resolution;
    for (int axis = 0; axis < 3; ++axis) {
        std::uint32_t n[3] = {r, r, r};
        n[axis] = r - 1;
        for (std::uint32_t iz = 0; iz < n[2]; ++iz)
            for (std::uint32_t iy = 0; iy < n[1]; ++iy)
                for (std::uint32_t ix = 0; ix < n[0]; ++ix) emit(axis, ix, iy, iz);
    }
}

} // namespace detail

// Standard MC edge rule: one point per sign-change edge at the linear zero
// crossing, none on same-sign edges. Zero values count as positive.
inline std::vector<EdgeCrossing> mc_gep_from_sdf(const ScalarFieldGrid& sdf) {
    if (sdf.kind != FieldKind::Sdf) throw std::invalid_argument("mc_gep_from_sdf: field is not an SDF");
    const GridSpec& grid = sdf.grid;
    std::vector<EdgeCrossing> out;
    detail::for_each_edge(grid, [&](int axis, std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) {
        std::uint32_t c0[3] = {ix, iy, iz};
        std::uint32_t c1[3] = {ix, iy, iz};
        ++c1[axis];
        double d0 = sdf.at(c0[0], c0[1], c0[2]);
        double d1 = sdf.at(c1[0], c1[1], c1[2]);
        if ((d0 < 0.0) == (d1 < 0.0)) return;
        double t = d0 / (d0 - d1);
        out.push_back({{ix, iy, iz}, axis, t, detail::edge_point(grid, c0, axis, t)});
    });
    return out;
}

// Simplified MeshUDF-style extraction: pseudo-signs from central-difference
// gradients. An edge carries a crossing when the gradient component along the
// edge points toward the surface at both ends (negative at the low corner,
// positive at the high corner); the point interpolates the UDF magnitudes,
// with t = 0.5 on degenerate equal-magnitude edges.
inline std::vector<EdgeCrossing> udf_gradient_sign_gep(const ScalarFieldGrid& udf) {
    if (udf.kind != FieldKind::Udf) throw std::invalid_argument("udf_gradient_sign_gep: field is not a UDF");
    const GridSpec& grid = udf.grid;
    const std::uint32_t r = grid.resolution;
    if (r < 3) throw std::invalid_argument("udf_gradient_sign_gep: resolution must be >= 3");

    auto grad_along = [&](int axis, std::uint32_t c[3]) {
        std::uint32_t lo[3] = {c[0], c[1], c[2]};
        std::uint32_t hi[3] = {c[0], c[1], c[2]};
        double denom;
        if (c[axis] == 0) {
            ++hi[axis];
            denom = grid.spacing();
        } else if (c[axis] == r - 1) {
            --lo[axis];
            denom = grid.spacing();
        } else {
            --lo[axis];
            ++hi[axis];
            denom = 2.0 * grid.spacing();
        }
        return (udf.at(hi[0], hi[1], hi[2]) - udf.at(lo[0], lo[1], lo[2])) / denom;
    };

    std::vector<EdgeCrossing> out;
    detail::for_each_edge(grid, [&](int axis, std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) {
        std::uint32_t c0[3] = {ix, iy, iz};
        std::uint32_t c1[3] = {ix, iy, iz};
        ++c1[axis];
        double g0 = grad_along(axis, c0);
        double g1 = grad_along(axis, c1);
        if (!(g0 < 0.0 && g1 > 0.0)) return; // opposing projections with a minimum between
        double d0 = udf.at(c0[0], c0[1], c0[2]);
        double d1 = udf.at(c1[0], c1[1], c1[2]);
        double t = (d0 + d1) > 0.0 ? d0 / (d0 + d1) : 0.5;
        out.push_back({{ix, iy, iz}, axis, t, detail::edge_point(grid, c0, axis, t)});
    });
    return out;
}

inline std::vector<Vec3> crossing_points(const std::vector<EdgeCrossing>& crossings) {
    std::vector<Vec3> pts;
    pts.reserve(crossings.size());
    for (const auto& c : crossings) pts.push_back(c.p);
    return pts;
}

} // namespace uodf
