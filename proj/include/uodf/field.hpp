#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "uodf/bvh.hpp"
#include "uodf/fixtures.hpp"
#include "uodf/grid.hpp"
#include "uodf/mesh.hpp"
#include "uodf/parallel.hpp"

namespace uodf {

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

// One of the three UODF components: per-ray mask on the orthogonal plane,
// unsigned distances and derivative signs at grid corners, and the per-ray
// surface crossings that produced them. Rays that miss the shape carry the
// NaN sentinel at every sample; use distance_at() for checked access.
struct DirectionalField {
    Direction direction = Direction::LR;
    GridSpec grid;
    std::vector<std::uint8_t> mask;       // R^2, ray_index(i,j)
    std::vector<double> dist;             // R^3, x-fastest; NaN when undefined
    std::vector<std::int8_t> dsign;       // R^3; -1/+1, 0 when undefined
    std::vector<std::uint32_t> hit_offset; // R^2+1 prefix sums into hit_coord
    std::vector<double> hit_coord;        // axis coordinates, ascending per ray

    std::size_t sample_index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        int a = axis_of(direction);
        auto [pa, pb] = plane_axes(direction);
        std::uint32_t c[3];
        c[a] = k;
        c[pa] = i;
        c[pb] = j;
        return grid.index(c[0], c[1], c[2]);
    }

    bool ray_defined(std::uint32_t i, std::uint32_t j) const { return mask[grid.ray_index(i, j)] != 0; }

    std::optional<double> distance_at(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        double d = dist[sample_index(i, j, k)];
        if (std::isnan(d)) return std::nullopt;
        return d;
    }

    std::span<const double> ray_hits(std::uint32_t i, std::uint32_t j) const {
        std::size_t r = grid.ray_index(i, j);
        return {hit_coord.data() + hit_offset[r], hit_coord.data() + hit_offset[r + 1]};
    }

    // 3D position of sample (i, j, k).
    Vec3 sample_point(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
        int a = axis_of(direction);
        auto [pa, pb] = plane_axes(direction);
        Vec3 p;
        p[a] = grid.corner(k);
        p[pa] = grid.corner(i);
        p[pb] = grid.corner(j);
        return p;
    }

    std::size_t defined_ray_count() const {
        std::size_t n = 0;
        for (auto m : mask) n += m;
        return n;
    }
};

// Closest-hit distance and derivative sign at axis coordinate s given the
// sorted hit list. Ties break toward +axis (the chosen hit is the one in the
// positive direction, so the 1D derivative there is -1); a sample exactly on
// a hit reports distance 0 with sign +1.
inline void eval_on_hits(std::span<const double> hits, double s, double& dist_out, int& sign_out) {
    // first hit >= s
    std::size_t lo = 0, hi = hits.size();
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (hits[mid] < s) lo = mid + 1;
        else hi = mid;
    }
    double dl = lo > 0 ? s - hits[lo - 1] : std::numeric_limits<double>::infinity();
    double dr = lo < hits.size() ? hits[lo] - s : std::numeric_limits<double>::infinity();
    if (dl == 0.0 || dr == 0.0) {
        dist_out = 0.0;
        sign_out = +1;
    } else if (dr <= dl) {
        dist_out = dr;
        sign_out = -1;
    } else {
        dist_out = dl;
        sign_out = +1;
    }
}

namespace detail {

template <typename HitsFn>
DirectionalField fill_field(Direction dir, const GridSpec& grid, HitsFn ray_hits_fn) {
    DirectionalField f;
    f.direction = dir;
    f.grid = grid;
    const std::uint32_t r = grid.resolution;
    f.mask.assign(grid.ray_count(), 0);
    f.dist.assign(grid.corner_count(), kUndefined);
    f.dsign.assign(grid.corner_count(), 0);

    std::vector<std::vector<double>> hits(grid.ray_count());
    parallel_for(0, grid.ray_count(), [&](std::size_t ridx) {
        std::uint32_t i = static_cast<std::uint32_t>(ridx % r);
        std::uint32_t j = static_cast<std::uint32_t>(ridx / r);
        hits[ridx] = ray_hits_fn(grid.corner(i), grid.corner(j));
    });

    f.hit_offset.resize(grid.ray_count() + 1);
    f.hit_offset[0] = 0;
    for (std::size_t ridx = 0; ridx < hits.size(); ++ridx)
        f.hit_offset[ridx + 1] = f.hit_offset[ridx] + static_cast<std::uint32_t>(hits[ridx].size());
    f.hit_coord.resize(f.hit_offset.back());
    parallel_for(0, hits.size(), [&](std::size_t ridx) {
        std::copy(hits[ridx].begin(), hits[ridx].end(), f.hit_coord.begin() + f.hit_offset[ridx]);
    });

    parallel_for(0, grid.ray_count(), [&](std::size_t ridx) {
        if (hits[ridx].empty()) return;
        std::uint32_t i = static_cast<std::uint32_t>(ridx % r);
        std::uint32_t j = static_cast<std::uint32_t>(ridx / r);
        f.mask[ridx] = 1;
        std::span<const double> h{hits[ridx]};
        for (std::uint32_t k = 0; k < r; ++k) {
            double d;
            int sg;
            eval_on_hits(h, grid.corner(k), d, sg);
            std::size_t idx = f.sample_index(i, j, k);
            f.dist[idx] = d;
            f.dsign[idx] = static_cast<std::int8_t>(sg);
        }
    });
    return f;
}

} // namespace detail

// Ground-truth UODF by ray stabbing every lattice line along `direction`.
inline DirectionalField compute_uodf_gt(const TriangleMesh& mesh, const Bvh& bvh, const GridSpec& grid,
                                        Direction direction) {
    int a = axis_of(direction);
    auto [pa, pb] = plane_axes(direction);
    Vec3 axis_dir{0, 0, 0};
    axis_dir[a] = 1.0;
    return detail::fill_field(direction, grid, [&](double u, double v) {
        Vec3 origin{0, 0, 0};
        origin[pa] = u;
        origin[pb] = v;
        RayHitList hl = bvh.stab_line(origin, axis_dir);
        std::vector<double> out;
        out.reserve(hl.size());
        for (const auto& h : hl) out.push_back(h.t); // origin axis coord is 0, so t is the axis coordinate
        return out;
    });
}

// Closed-form variant for analytic fixtures.
inline DirectionalField compute_uodf_analytic(const AnalyticShape& shape, const GridSpec& grid,
                                              Direction direction) {
    return detail::fill_field(direction, grid,
                              [&](double u, double v) { return shape.hits_along(direction, u, v); });
}

enum class FieldKind : std::uint8_t { Sdf = 0, Udf = 1 };

struct ParityDiagnostic {
    std::size_t odd_rays = 0;       // rays whose total crossing count is odd
    double corner_fraction = 0.0;   // corners on such rays / all corners
    bool warning = false;           // corner_fraction > 0.1%
};

struct ScalarFieldGrid {
    FieldKind kind = FieldKind::Udf;
    GridSpec grid;
    std::vector<double> values; // R^3, x-fastest
    ParityDiagnostic parity;

    double at(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz) const {
        return values[grid.index(ix, iy, iz)];
    }
};

// Exact Euclidean distance to the mesh at every grid corner.
inline ScalarFieldGrid compute_udf_gt(const TriangleMesh& mesh, const Bvh& bvh, const GridSpec& grid) {
    ScalarFieldGrid g;
    g.kind = FieldKind::Udf;
    g.grid = grid;
    g.values.resize(grid.corner_count());
    const std::uint32_t r = grid.resolution;
    parallel_for(0, grid.corner_count(), [&](std::size_t idx) {
        std::uint32_t ix = static_cast<std::uint32_t>(idx % r);
        std::uint32_t iy = static_cast<std::uint32_t>((idx / r) % r);
        std::uint32_t iz = static_cast<std::uint32_t>(idx / (static_cast<std::size_t>(r) * r));
        g.values[idx] = bvh.closest_point(grid.corner_point(ix, iy, iz)).distance;
    }, 256);
    (void)mesh;
    return g;
}

// SDF = parity sign x UDF, with the sign from crossing counts along +X.
// Only meaningful for watertight meshes; open meshes produce odd-parity rays
// which are counted and surfaced as a diagnostic instead of failing.
inline ScalarFieldGrid compute_sdf_gt(const TriangleMesh& mesh, const Bvh& bvh, const GridSpec& grid) {
    ScalarFieldGrid g = compute_udf_gt(mesh, bvh, grid);
    g.kind = FieldKind::Sdf;
    const std::uint32_t r = grid.resolution;
    std::vector<std::uint8_t> odd(grid.ray_count(), 0);
    parallel_for(0, grid.ray_count(), [&](std::size_t ridx) {
        std::uint32_t iy = static_cast<std::uint32_t>(ridx % r);
        std::uint32_t iz = static_cast<std::uint32_t>(ridx / r);
        RayHitList hits = bvh.stab_line({0, grid.corner(iy), grid.corner(iz)}, {1, 0, 0});
        if (hits.size() % 2 != 0) odd[ridx] = 1;
        std::size_t h = 0;
        for (std::uint32_t ix = 0; ix < r; ++ix) {
            double x = grid.corner(ix);
            while (h < hits.size() && hits[h].t < x) ++h;
            if ((h % 2) == 1) {
                std::size_t idx = grid.index(ix, iy, iz);
                g.values[idx] = -g.values[idx];
            }
        }
    });
    g.parity.odd_rays = 0;
    for (auto o : odd) g.parity.odd_rays += o;
    g.parity.corner_fraction = static_cast<double>(g.parity.odd_rays) * r / static_cast<double>(grid.corner_count());
    g.parity.warning = g.parity.corner_fraction > 1e-3;
    return g;
}

inline ScalarFieldGrid compute_scalar_analytic(const AnalyticShape& shape, const GridSpec& grid,
                                               FieldKind kind) {
    ScalarFieldGrid g;
    g.kind = kind;
    g.grid = grid;
    g.values.resize(grid.corner_count());
    const std::uint32_t r = grid.resolution;
    parallel_for(0, grid.corner_count(), [&](std::size_t idx) {
        std::uint32_t ix = static_cast<std::uint32_t>(idx % r);
        std::uint32_t iy = static_cast<std::uint32_t>((idx / r) % r);
        std::uint32_t iz = static_cast<std::uint32_t>(idx / (static_cast<std::size_t>(r) * r));
        Vec3 p = grid.corner_point(ix, iy, iz);
        g.values[idx] = kind == FieldKind::Sdf ? shape.sdf(p) : shape.udf(p);
    }, 1024);
    return g;
}

} // namespace uodf
