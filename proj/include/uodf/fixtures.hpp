#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "uodf/grid.hpp"
#include "uodf/mesh.hpp"
#include "uodf/vec.hpp"

namespace uodf {

// ---------------------------------------------------------------------------
// Mesh fixtures
// ---------------------------------------------------------------------------

inline TriangleMesh make_box_mesh(const Vec3& lo, const Vec3& hi) {
    TriangleMesh m;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back({i & 1 ? hi.x : lo.x, i & 2 ? hi.y : lo.y, i & 4 ? hi.z : lo.z});
    // outward-facing CCW faces
    const std::uint32_t f[12][3] = {
        {0, 2, 3}, {0, 3, 1},  // z = lo
        {4, 5, 7}, {4, 7, 6},  // z = hi
        {0, 1, 5}, {0, 5, 4},  // y = lo
        {2, 6, 7}, {2, 7, 3},  // y = hi
        {0, 4, 6}, {0, 6, 2},  // x = lo
        {1, 3, 7}, {1, 7, 5},  // x = hi
    };
    for (const auto& tri : f) m.triangles.push_back({tri[0], tri[1], tri[2]});
    m.finalize("box");
    return m;
}

inline TriangleMesh make_unit_cube_mesh() { return make_box_mesh({0, 0, 0}, {1, 1, 1}); }

// Icosphere with vertices at exactly `radius` from `center`.
inline TriangleMesh make_icosphere_mesh(double radius, int subdivisions, const Vec3& center = {0, 0, 0}) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& v : verts) v = normalized(v);
    std::vector<std::array<std::uint32_t, 3>> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    std::map<std::uint64_t, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) {
        std::uint64_t key = a < b ? (std::uint64_t(a) << 32) | b : (std::uint64_t(b) << 32) | a;
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        Vec3 m = normalized((verts[a] + verts[b]) * 0.5);
        verts.push_back(m);
        std::uint32_t idx = static_cast<std::uint32_t>(verts.size() - 1);
        midpoint.emplace(key, idx);
        return idx;
    };
    for (int s = 0; s < subdivisions; ++s) {
        std::vector<std::array<std::uint32_t, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            std::uint32_t ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
        }
        faces.swap(next);
    }
    TriangleMesh m;
    m.vertices.reserve(verts.size());
    for (const auto& v : verts) m.vertices.push_back(center + v * radius);
    m.triangles = std::move(faces);
    m.finalize("icosphere");
    m.normalized = (center == Vec3{0, 0, 0} && radius <= 0.9 + 1e-12);
    return m;
}

// Organic non-convex blob: icosphere with a smooth radial displacement,
// standing in for a scanned model.
inline TriangleMesh make_scanned_blob_mesh(int subdivisions = 4) {
    TriangleMesh m = make_icosphere_mesh(1.0, subdivisions);
    for (auto& v : m.vertices) {
        Vec3 d = normalized(v);
        double r = 0.72 + 0.08 * std::sin(3.0 * d.x + 1.0) * std::cos(2.0 * d.y) +
                   0.05 * std::sin(5.0 * d.z) + 0.03 * std::sin(7.0 * d.x * d.y + 0.5);
        v = d * r;
    }
    m.flag_degenerates();
    m.recompute_bbox();
    m.normalized = true;
    return m;
}

// Open single-sided square patch in the z = 0 plane.
inline TriangleMesh make_plane_patch_mesh(double half_width = 0.7) {
    TriangleMesh m;
    double h = half_width;
    m.vertices = {{-h, -h, 0}, {h, -h, 0}, {h, h, 0}, {-h, h, 0}};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    m.finalize("plane_patch");
    m.normalized = true;
    return m;
}

// Zero-thickness plate: two coincident quads at z = 0 with opposite winding.
inline TriangleMesh make_thin_plate_mesh(double half_width = 0.7) {
    TriangleMesh m;
    double h = half_width;
    m.vertices = {{-h, -h, 0}, {h, -h, 0}, {h, h, 0}, {-h, h, 0}};
    m.triangles = {{0, 1, 2}, {0, 2, 3}, {0, 2, 1}, {0, 3, 2}};
    m.finalize("thin_plate");
    m.normalized = true;
    return m;
}

inline TriangleMesh merge_meshes(const TriangleMesh& a, const TriangleMesh& b) {
    TriangleMesh m = a;
    std::uint32_t base = static_cast<std::uint32_t>(m.vertices.size());
    m.vertices.insert(m.vertices.end(), b.vertices.begin(), b.vertices.end());
    for (const auto& t : b.triangles) m.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    m.finalize("merged");
    m.normalized = a.normalized && b.normalized;
    return m;
}

inline TriangleMesh make_nested_shells_mesh(int subdivisions = 3) {
    return merge_meshes(make_icosphere_mesh(0.85, subdivisions), make_icosphere_mesh(0.45, subdivisions));
}

// ---------------------------------------------------------------------------
// Analytic fixtures: closed-form hits, SDF/UDF and surface sampling.
// ---------------------------------------------------------------------------

class AnalyticShape {
public:
    virtual ~AnalyticShape() = default;
    virtual std::string name() const = 0;
    // Sorted axis coordinates where the line through in-plane point (u, v)
    // along `dir` crosses the surface. Empty when the line misses.
    virtual std::vector<double> hits_along(Direction dir, double u, double v) const = 0;
    virtual double udf(const Vec3& p) const = 0;
    // Signed distance; only meaningful for watertight shapes.
    virtual double sdf(const Vec3& p) const = 0;
    virtual bool watertight() const { return true; }
    virtual Vec3 sample_surface(std::mt19937_64& rng) const = 0;
};

class AnalyticSphere final : public AnalyticShape {
public:
    explicit AnalyticSphere(double radius = 0.9) : r_(radius) {}
    std::string name() const override { return "sphere"; }

    std::vector<double> hits_along(Direction, double u, double v) const override {
        double rho2 = u * u + v * v;
        if (rho2 >= r_ * r_) return {};
        double s = std::sqrt(r_ * r_ - rho2);
        return {-s, s};
    }
    double sdf(const Vec3& p) const override { return norm(p) - r_; }
    double udf(const Vec3& p) const override { return std::abs(sdf(p)); }
    Vec3 sample_surface(std::mt19937_64& rng) const override {
        std::normal_distribution<double> g;
        Vec3 v{g(rng), g(rng), g(rng)};
        return normalized(v) * r_;
    }
    double radius() const { return r_; }

private:
    double r_;
};

// Two thick slabs separated by a sub-voxel gap: the canonical fixture where a
// single grid edge carries two surface crossings. Watertight (each slab is a
// closed box). Face offsets avoid every lattice plane for R in {33..257}.
class AnalyticPlates final : public AnalyticShape {
public:
    AnalyticPlates(double half_width = 0.55, double thickness = 0.30, double gap = 0.004,
                   double gap_bottom = 0.0015)
        : hw_(half_width), th_(thickness), g_(gap), z1_(gap_bottom) {
        // slab A: z in [z1 - th, z1]; slab B: z in [z1 + g, z1 + g + th]
        boxes_[0] = {Vec3{-hw_, -hw_, z1_ - th_}, Vec3{hw_, hw_, z1_}};
        boxes_[1] = {Vec3{-hw_, -hw_, z1_ + g_}, Vec3{hw_, hw_, z1_ + g_ + th_}};
    }
    std::string name() const override { return "plates"; }

    std::vector<double> hits_along(Direction dir, double u, double v) const override {
        int a = axis_of(dir);
        auto [pa, pb] = plane_axes(dir);
        std::vector<double> out;
        for (const auto& b : boxes_) {
            Vec3 lo = b.lo, hi = b.hi;
            double ulo = lo[pa], uhi = hi[pa], vlo = lo[pb], vhi = hi[pb];
            if (u <= ulo || u >= uhi || v <= vlo || v >= vhi) continue;
            out.push_back(lo[a]);
            out.push_back(hi[a]);
        }
        std::sort(out.begin(), out.end());
        return out;
    }
    double sdf(const Vec3& p) const override {
        return std::min(box_sdf(p, boxes_[0]), box_sdf(p, boxes_[1]));
    }
    double udf(const Vec3& p) const override { return std::abs(sdf(p)); }
    Vec3 sample_surface(std::mt19937_64& rng) const override {
        // area-weighted over the 12 faces of the two boxes
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        const Aabb& b = boxes_[uni(rng) < 0.5 ? 0 : 1];
        Vec3 e = b.extent();
        double axy = e.x * e.y, axz = e.x * e.z, ayz = e.y * e.z;
        double total = 2 * (axy + axz + ayz);
        double pick = uni(rng) * total;
        Vec3 p;
        auto lerp = [&](double lo, double hi) { return lo + uni(rng) * (hi - lo); };
        if (pick < 2 * axy) {
            p = {lerp(b.lo.x, b.hi.x), lerp(b.lo.y, b.hi.y), pick < axy ? b.lo.z : b.hi.z};
        } else if (pick < 2 * axy + 2 * axz) {
            p = {lerp(b.lo.x, b.hi.x), pick < 2 * axy + axz ? b.lo.y : b.hi.y, lerp(b.lo.z, b.hi.z)};
        } else {
            p = {pick < 2 * (axy + axz) + ayz ? b.lo.x : b.hi.x, lerp(b.lo.y, b.hi.y), lerp(b.lo.z, b.hi.z)};
        }
        return p;
    }
    double gap() const { return g_; }
    double gap_bottom() const { return z1_; }
    const Aabb* boxes() const { return boxes_; }

private:
    static double box_sdf(const Vec3& p, const Aabb& b) {
        Vec3 c = b.center(), h = b.extent() * 0.5;
        Vec3 q{std::abs(p.x - c.x) - h.x, std::abs(p.y - c.y) - h.y, std::abs(p.z - c.z) - h.z};
        Vec3 qpos{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
        double outside = norm(qpos);
        double inside = std::min(std::max(q.x, std::max(q.y, q.z)), 0.0);
        return outside + inside;
    }

    double hw_, th_, g_, z1_;
    Aabb boxes_[2];
};

// Half-space bounded by a tilted plane; its SDF is affine, so interpolation
// baselines are exact on it.
class AnalyticPlane final : public AnalyticShape {
public:
    explicit AnalyticPlane(const Vec3& n = normalized(Vec3{1, 1, 1}), double offset = 0.05)
        : n_(normalized(n)), c_(offset) {}
    std::string name() const override { return "plane"; }

    std::vector<double> hits_along(Direction dir, double u, double v) const override {
        int a = axis_of(dir);
        auto [pa, pb] = plane_axes(dir);
        if (n_[a] == 0.0) return {};
        double s = (c_ - n_[pa] * u - n_[pb] * v) / n_[a];
        return {s};
    }
    double sdf(const Vec3& p) const override { return dot(n_, p) - c_; }
    double udf(const Vec3& p) const override { return std::abs(sdf(p)); }
    Vec3 sample_surface(std::mt19937_64& rng) const override {
        std::uniform_real_distribution<double> uni(-0.8, 0.8);
        // sample in-plane by projecting a random point onto the plane
        Vec3 p{uni(rng), uni(rng), uni(rng)};
        return p - n_ * (dot(n_, p) - c_);
    }

private:
    Vec3 n_;
    double c_;
};

inline std::shared_ptr<AnalyticShape> make_analytic_fixture(const std::string& name) {
    if (name == "sphere") return std::make_shared<AnalyticSphere>();
    if (name == "plates") return std::make_shared<AnalyticPlates>();
    if (name == "plane") return std::make_shared<AnalyticPlane>();
    throw std::invalid_argument("unknown analytic fixture '" + name + "'");
}

// Mesh realizations for fixtures addressable by name (CLI, benchmarks).
inline TriangleMesh make_fixture_mesh(const std::string& name) {
    if (name == "sphere") return make_icosphere_mesh(0.9, 4);
    if (name == "cube") return normalize_mesh(make_unit_cube_mesh());
    if (name == "scanned") return make_scanned_blob_mesh();
    if (name == "plane_patch") return make_plane_patch_mesh();
    if (name == "thin_plate") return make_thin_plate_mesh();
    if (name == "shells") return make_nested_shells_mesh();
    if (name == "plates") {
        AnalyticPlates p;
        return merge_meshes(make_box_mesh(p.boxes()[0].lo, p.boxes()[0].hi),
                            make_box_mesh(p.boxes()[1].lo, p.boxes()[1].hi));
    }
    throw std::invalid_argument("unknown mesh fixture '" + name + "'");
}

} // namespace uodf
