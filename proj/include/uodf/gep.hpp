#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "uodf/field.hpp"
#include "uodf/grid.hpp"
#include "uodf/parallel.hpp"
#include "uodf/vec.hpp"

namespace uodf {

inline constexpr double kDefaultTau = 1.0 / 512.0;

struct RaySample {
    double pos;       // axis coordinate
    double dist;      // unsigned distance, >= 0
    std::int8_t sign; // 1D derivative sign
};

// Defined samples of one lattice ray, positions strictly increasing.
struct RaySamples {
    Direction direction = Direction::LR;
    std::uint32_t i = 0, j = 0; // in-plane lattice indices
    double u = 0.0, v = 0.0;    // in-plane coordinates
    std::vector<RaySample> samples;
};

struct RayPointEstimate {
    double s;            // axis coordinate of the surface point
    std::uint32_t count; // contributing samples
    double vote;         // mean derivative sign, for normal orientation
};

// A reconstructed grid-edge point with its provenance.
struct GepPoint {
    Vec3 p;
    std::uint32_t count = 0;
    Direction direction = Direction::LR;
    std::uint32_t ray_i = 0, ray_j = 0;
    float vote = 0.0f;
};

struct GepSet {
    GridSpec grid;
    double tau = kDefaultTau;
    std::vector<GepPoint> per_direction[3];
    std::vector<GepPoint> fused;

    std::size_t pre_fusion_count() const {
        return per_direction[0].size() + per_direction[1].size() + per_direction[2].size();
    }
};

// Per-ray surface point estimation: each sample predicts its nearest crossing
// at pos - sign * dist; maximal runs of constant sign form segments (a
// zero-distance sample closes the current run and opens a new one); each
// segment contributes the mean of its predictions; adjacent segment estimates
// closer than tau are merged by weighted average, estimates tau or more apart
// are all kept, which is what allows two surface points between consecutive
// samples.
inline std::vector<RayPointEstimate> estimate_ray_points(const RaySamples& ray, double tau) {
    std::vector<RayPointEstimate> segments;
    const auto& s = ray.samples;
    std::size_t k = 0;
    while (k < s.size()) {
        std::size_t begin = k;
        double acc = s[k].pos - static_cast<double>(s[k].sign) * s[k].dist;
        double vote = s[k].sign;
        ++k;
        while (k < s.size() && s[k].sign == s[k - 1].sign && s[k].dist != 0.0) {
            acc += s[k].pos - static_cast<double>(s[k].sign) * s[k].dist;
            vote += s[k].sign;
            ++k;
        }
        double n = static_cast<double>(k - begin);
        segments.push_back({acc / n, static_cast<std::uint32_t>(k - begin), vote / n});
    }

    // single left-to-right merge pass over adjacent segment estimates
    std::vector<RayPointEstimate> out;
    for (const auto& seg : segments) {
        if (!out.empty() && std::abs(seg.s - out.back().s) < tau) {
            auto& prev = out.back();
            double wa = prev.count, wb = seg.count;
            prev.s = (prev.s * wa + seg.s * wb) / (wa + wb);
            prev.vote = (prev.vote * wa + seg.vote * wb) / (wa + wb);
            prev.count += seg.count;
        } else {
            out.push_back(seg);
        }
    }
    return out;
}

inline RaySamples extract_ray_samples(const DirectionalField& field, std::uint32_t i, std::uint32_t j) {
    RaySamples ray;
    ray.direction = field.direction;
    ray.i = i;
    ray.j = j;
    ray.u = field.grid.corner(i);
    ray.v = field.grid.corner(j);
    const std::uint32_t r = field.grid.resolution;
    ray.samples.reserve(r);
    for (std::uint32_t k = 0; k < r; ++k) {
        std::size_t idx = field.sample_index(i, j, k);
        double d = field.dist[idx];
        if (std::isnan(d)) continue;
        ray.samples.push_back({field.grid.corner(k), d, field.dsign[idx]});
    }
    return ray;
}

// Applies per-ray estimation to every masked-in ray of one field.
inline std::vector<GepPoint> reconstruct_direction(const DirectionalField& field, double tau) {
    const std::uint32_t r = field.grid.resolution;
    int a = axis_of(field.direction);
    auto [pa, pb] = plane_axes(field.direction);
    std::vector<std::vector<GepPoint>> per_ray(field.grid.ray_count());
    parallel_for(0, field.grid.ray_count(), [&](std::size_t ridx) {
        if (!field.mask[ridx]) return;
        std::uint32_t i = static_cast<std::uint32_t>(ridx % r);
        std::uint32_t j = static_cast<std::uint32_t>(ridx / r);
        RaySamples ray = extract_ray_samples(field, i, j);
        if (ray.samples.empty()) return;
        auto est = estimate_ray_points(ray, tau);
        auto& out = per_ray[ridx];
        out.reserve(est.size());
        for (const auto& e : est) {
            GepPoint g;
            g.p[a] = e.s;
            g.p[pa] = ray.u;
            g.p[pb] = ray.v;
            g.count = e.count;
            g.direction = field.direction;
            g.ray_i = i;
            g.ray_j = j;
            g.vote = static_cast<float>(e.vote);
            out.push_back(g);
        }
    });
    std::vector<GepPoint> out;
    for (auto& v : per_ray) out.insert(out.end(), v.begin(), v.end());
    return out;
}

namespace detail {

// Canonical id of the lattice edge hosting a point: axis plus the lower
// corner of the containing segment along that axis.
inline std::uint64_t host_edge_key(const GridSpec& grid, const GepPoint& p) {
    int a = axis_of(p.direction);
    auto [pa, pb] = plane_axes(p.direction);
    std::uint32_t c[3];
    c[pa] = p.ray_i;
    c[pb] = p.ray_j;
    c[a] = grid.cell_of(p.p[a]);
    return static_cast<std::uint64_t>(a) * grid.corner_count() + grid.index(c[0], c[1], c[2]);
}

inline std::uint64_t edge_key(const GridSpec& grid, int axis, std::uint32_t ix, std::uint32_t iy,
                              std::uint32_t iz) {
    return static_cast<std::uint64_t>(axis) * grid.corner_count() + grid.index(ix, iy, iz);
}

} // namespace detail

// Cross-direction fusion: a candidate point is kept iff at least
// `min_support` other estimated points (any direction) lie on edges of the
// grid cells sharing the candidate's host edge. This is the isolated-point
// filter; it never adds points.
inline std::vector<GepPoint> fuse_directions(const std::vector<GepPoint>& lr,
                                             const std::vector<GepPoint>& fb,
                                             const std::vector<GepPoint>& ud, const GridSpec& grid,
                                             std::uint32_t min_support = 3) {
    std::vector<const std::vector<GepPoint>*> sets = {&lr, &fb, &ud};
    std::unordered_map<std::uint64_t, std::uint32_t> edge_count;
    std::size_t total = lr.size() + fb.size() + ud.size();
    edge_count.reserve(total * 2);
    for (const auto* set : sets)
        for (const auto& p : *set) ++edge_count[detail::host_edge_key(grid, p)];

    const std::uint32_t cells = grid.resolution - 1;
    auto support_of = [&](const GepPoint& p) -> std::uint32_t {
        int a = axis_of(p.direction);
        auto [pa, pb] = plane_axes(p.direction);
        std::uint32_t c[3];
        c[pa] = p.ray_i;
        c[pb] = p.ray_j;
        c[a] = grid.cell_of(p.p[a]);
        // host cells: along the edge axis the cell index is fixed; the
        // in-plane indices span the up-to-4 cells sharing the edge
        std::uint64_t edges[48];
        int n_edges = 0;
        for (int da = -1; da <= 0; ++da) {
            for (int db = -1; db <= 0; ++db) {
                std::int64_t ca = static_cast<std::int64_t>(c[pa]) + da;
                std::int64_t cb = static_cast<std::int64_t>(c[pb]) + db;
                if (ca < 0 || cb < 0 || ca >= cells || cb >= cells) continue;
                std::uint32_t cell[3];
                cell[a] = c[a];
                cell[pa] = static_cast<std::uint32_t>(ca);
                cell[pb] = static_cast<std::uint32_t>(cb);
                // 12 edges of this cell: 4 per axis
                for (int axis = 0; axis < 3; ++axis) {
                    int o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;
                    for (int b1 = 0; b1 <= 1; ++b1)
                        for (int b2 = 0; b2 <= 1; ++b2) {
                            std::uint32_t e[3];
                            e[axis] = cell[axis];
                            e[o1] = cell[o1] + static_cast<std::uint32_t>(b1);
                            e[o2] = cell[o2] + static_cast<std::uint32_t>(b2);
                            edges[n_edges++] = detail::edge_key(grid, axis, e[0], e[1], e[2]);
                        }
                }
            }
        }
        std::sort(edges, edges + n_edges);
        std::uint32_t support = 0;
        for (int k = 0; k < n_edges; ++k) {
            if (k > 0 && edges[k] == edges[k - 1]) continue;
            auto it = edge_count.find(edges[k]);
            if (it != edge_count.end()) support += it->second;
        }
        return support > 0 ? support - 1 : 0; // exclude the point itself
    };

    std::vector<GepPoint> fused;
    fused.reserve(total);
    for (const auto* set : sets)
        for (const auto& p : *set)
            if (support_of(p) >= min_support) fused.push_back(p);
    return fused;
}

// Full reconstruction from three directional fields on one grid.
inline GepSet reconstruct_gep(const DirectionalField& lr, const DirectionalField& fb,
                              const DirectionalField& ud, double tau = kDefaultTau) {
    if (!(lr.grid == fb.grid) || !(lr.grid == ud.grid))
        throw std::invalid_argument("reconstruct_gep: the three fields use different grids");
    GepSet set;
    set.grid = lr.grid;
    set.tau = tau;
    const DirectionalField* fields[3] = {&lr, &fb, &ud};
    for (int d = 0; d < 3; ++d) set.per_direction[d] = reconstruct_direction(*fields[d], tau);
    set.fused = fuse_directions(set.per_direction[0], set.per_direction[1], set.per_direction[2], set.grid);
    return set;
}

// Normals for export: each point votes along its ray axis (the side its
// contributing samples came from); points within `radius` of one another
// average their votes.
inline std::vector<Vec3> estimate_normals(const std::vector<GepPoint>& points, double radius) {
    std::vector<Vec3> normals(points.size());
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells;
    cells.reserve(points.size() * 2);
    auto cell_key = [&](const Vec3& p) {
        auto q = [&](double x) {
            return static_cast<std::uint64_t>(static_cast<std::int64_t>(std::floor(x / radius)) + (1 << 20));
        };
        return (q(p.x) << 42) | (q(p.y) << 21) | q(p.z);
    };
    for (std::uint32_t i = 0; i < points.size(); ++i) cells[cell_key(points[i].p)].push_back(i);

    parallel_for(0, points.size(), [&](std::size_t i) {
        const GepPoint& p = points[i];
        Vec3 acc{0, 0, 0};
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    Vec3 probe = p.p + Vec3{dx * radius, dy * radius, dz * radius};
                    auto it = cells.find(cell_key(probe));
                    if (it == cells.end()) continue;
                    for (std::uint32_t k : it->second) {
                        const GepPoint& q = points[k];
                        if (norm2(q.p - p.p) > radius * radius) continue;
                        Vec3 vote{0, 0, 0};
                        vote[axis_of(q.direction)] = q.vote;
                        acc += vote;
                    }
                }
        double n = norm(acc);
        if (n < 1e-12) {
            acc = Vec3{0, 0, 0};
            acc[axis_of(p.direction)] = p.vote >= 0 ? 1.0 : -1.0;
            n = 1.0;
        }
        normals[i] = acc / n;
    });
    return normals;
}

} // namespace uodf
