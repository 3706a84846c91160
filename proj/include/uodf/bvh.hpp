#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "uodf/mesh.hpp"
#include "uodf/vec.hpp"

namespace uodf {

struct RayHit {
    double t = 0.0;        // signed parametric distance along the line
    std::uint32_t tri = 0;
    bool entering = false; // normal . direction < 0
};

using RayHitList = std::vector<RayHit>;

// Hits closer than this along t collapse to one (shared edges and vertices
// report once per incident triangle otherwise, corrupting parity).
inline constexpr double kHitMergeTol = 1e-9;

inline void dedup_hits(RayHitList& hits) {
    std::sort(hits.begin(), hits.end(), [](const RayHit& a, const RayHit& b) {
        return a.t != b.t ? a.t < b.t : a.tri < b.tri;
    });
    RayHitList out;
    out.reserve(hits.size());
    for (const auto& h : hits) {
        if (!out.empty() && h.t - out.back().t < kHitMergeTol) continue;
        out.push_back(h);
    }
    hits.swap(out);
}

namespace detail {

// Watertight line/triangle test (Woop et al. style): shear the triangle into
// ray space and evaluate signed edge functions. Shared edges evaluate the
// same expression in both incident triangles, so a line crossing an edge is
// reported by at least one of them (possibly both, at equal t).
struct LineFrame {
    Vec3 origin;
    Vec3 dir;
    int kx, ky, kz;
    double sx, sy, sz;

    LineFrame(const Vec3& o, const Vec3& d) : origin(o), dir(d) {
        kz = 0;
        if (std::abs(d.y) > std::abs(d[kz])) kz = 1;
        if (std::abs(d.z) > std::abs(d[kz])) kz = 2;
        kx = (kz + 1) % 3;
        ky = (kx + 1) % 3;
        if (d[kz] < 0.0) std::swap(kx, ky);
        sx = d[kx] / d[kz];
        sy = d[ky] / d[kz];
        sz = 1.0 / d[kz];
    }

    // Signed t of the intersection, or nullopt. Lines parallel to the
    // triangle plane (det == 0) report no hit.
    std::optional<double> intersect(const Vec3& va, const Vec3& vb, const Vec3& vc) const {
        const Vec3 a = va - origin, b = vb - origin, c = vc - origin;
        const double ax = a[kx] - sx * a[kz], ay = a[ky] - sy * a[kz];
        const double bx = b[kx] - sx * b[kz], by = b[ky] - sy * b[kz];
        const double cx = c[kx] - sx * c[kz], cy = c[ky] - sy * c[kz];
        const double u = cx * by - cy * bx;
        const double v = ax * cy - ay * cx;
        const double w = bx * ay - by * ax;
        if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return std::nullopt;
        const double det = u + v + w;
        if (det == 0.0) return std::nullopt;
        const double az = sz * a[kz], bz = sz * b[kz], cz = sz * c[kz];
        return (u * az + v * bz + w * cz) / det;
    }
};

// Distance from point to triangle (Ericson, Real-Time Collision Detection).
inline Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;
    const Vec3 bp = p - b;
    const double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return b;
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));
    const Vec3 cp = p - c;
    const double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return c;
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

} // namespace detail

struct ClosestHit {
    double distance = std::numeric_limits<double>::infinity();
    Vec3 point;
    std::uint32_t tri = 0;
};

// Binary BVH over the non-degenerate triangles of an immutable mesh.
class Bvh {
public:
    struct Node {
        Aabb box;
        std::uint32_t right = 0; // internal: right child (left child is self+1)
        std::uint32_t start = 0; // leaf: first index into order_
        std::uint16_t count = 0; // leaf: triangle count; 0 for internal nodes
    };

    Bvh() = default;

    explicit Bvh(const TriangleMesh& mesh) : mesh_(&mesh) {
        std::vector<Aabb> boxes;
        std::vector<Vec3> centers;
        for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
            if (mesh.degenerate[t]) continue;
            order_.push_back(t);
            Aabb b;
            for (int k = 0; k < 3; ++k) b.expand(mesh.vertices[mesh.triangles[t][k]]);
            boxes.push_back(b);
            centers.push_back(b.center());
        }
        if (order_.empty()) return;
        // boxes/centers are indexed by position in order_, which build() permutes
        scratch_boxes_ = &boxes;
        scratch_centers_ = &centers;
        nodes_.reserve(order_.size() * 2);
        build(0, static_cast<std::uint32_t>(order_.size()));
        scratch_boxes_ = nullptr;
        scratch_centers_ = nullptr;
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<std::uint32_t>& triangle_order() const { return order_; }

    // All intersections of the full line {origin + t*dir} with the mesh,
    // deduplicated and sorted by signed t.
    RayHitList stab_line(const Vec3& origin, const Vec3& dir) const {
        RayHitList hits;
        if (nodes_.empty()) return hits;
        detail::LineFrame frame(origin, dir);
        std::uint32_t stack[64];
        int sp = 0;
        stack[sp++] = 0;
        while (sp > 0) {
            const Node& node = nodes_[stack[--sp]];
            if (!line_overlaps(node.box, origin, dir)) continue;
            if (node.count > 0) {
                for (std::uint32_t i = 0; i < node.count; ++i) {
                    std::uint32_t t = order_[node.start + i];
                    const auto& tri = mesh_->triangles[t];
                    auto hit = frame.intersect(mesh_->vertices[tri[0]], mesh_->vertices[tri[1]],
                                               mesh_->vertices[tri[2]]);
                    if (hit) {
                        bool entering = dot(mesh_->triangle_normal(t), dir) < 0.0;
                        hits.push_back({*hit, t, entering});
                    }
                }
            } else {
                stack[sp++] = node.right;
                stack[sp++] = node.start; // left child index stored in start for internal nodes
            }
        }
        dedup_hits(hits);
        return hits;
    }

    // Closest surface point to p over all non-degenerate triangles.
    ClosestHit closest_point(const Vec3& p) const {
        ClosestHit best;
        if (nodes_.empty()) return best;
        struct Entry { std::uint32_t node; double d2; };
        Entry stack[64];
        int sp = 0;
        stack[sp++] = {0, nodes_[0].box.dist2(p)};
        double best2 = std::numeric_limits<double>::infinity();
        while (sp > 0) {
            Entry e = stack[--sp];
            if (e.d2 >= best2) continue;
            const Node& node = nodes_[e.node];
            if (node.count > 0) {
                for (std::uint32_t i = 0; i < node.count; ++i) {
                    std::uint32_t t = order_[node.start + i];
                    const auto& tri = mesh_->triangles[t];
                    Vec3 q = detail::closest_point_on_triangle(p, mesh_->vertices[tri[0]],
                                                               mesh_->vertices[tri[1]],
                                                               mesh_->vertices[tri[2]]);
                    double d2 = norm2(q - p);
                    if (d2 < best2) {
                        best2 = d2;
                        best.point = q;
                        best.tri = t;
                    }
                }
            } else {
                std::uint32_t kids[2] = {node.start, node.right};
                double d2s[2] = {nodes_[kids[0]].box.dist2(p), nodes_[kids[1]].box.dist2(p)};
                // push farther first so the nearer child is explored first
                int near = d2s[0] <= d2s[1] ? 0 : 1;
                if (d2s[1 - near] < best2) stack[sp++] = {kids[1 - near], d2s[1 - near]};
                if (d2s[near] < best2) stack[sp++] = {kids[near], d2s[near]};
            }
        }
        best.distance = std::sqrt(best2);
        return best;
    }

private:
    static bool line_overlaps(const Aabb& box, const Vec3& o, const Vec3& d) {
        // slab test over the unbounded line
        double t0 = -std::numeric_limits<double>::infinity();
        double t1 = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i) {
            if (d[i] == 0.0) {
                if (o[i] < box.lo[i] || o[i] > box.hi[i]) return false;
            } else {
                double inv = 1.0 / d[i];
                double a = (box.lo[i] - o[i]) * inv;
                double b = (box.hi[i] - o[i]) * inv;
                if (a > b) std::swap(a, b);
                t0 = std::max(t0, a);
                t1 = std::min(t1, b);
                if (t0 > t1) return false;
            }
        }
        return true;
    }

    std::uint32_t build(std::uint32_t lo, std::uint32_t hi) {
        auto& boxes = *scratch_boxes_;
        auto& centers = *scratch_centers_;
        std::uint32_t self = static_cast<std::uint32_t>(nodes_.size());
        nodes_.emplace_back();
        Aabb box;
        for (std::uint32_t i = lo; i < hi; ++i) box.expand(boxes[i]);
        nodes_[self].box = box;
        std::uint32_t n = hi - lo;
        if (n <= kLeafSize) {
            nodes_[self].start = lo;
            nodes_[self].count = static_cast<std::uint16_t>(n);
            return self;
        }
        Aabb cbox;
        for (std::uint32_t i = lo; i < hi; ++i) cbox.expand(centers[i]);
        Vec3 ext = cbox.extent();
        int axis = 0;
        if (ext.y > ext[axis]) axis = 1;
        if (ext.z > ext[axis]) axis = 2;
        std::uint32_t mid = lo + n / 2;
        if (ext[axis] <= 0.0) {
            // all centers coincide; split by count
        } else {
            auto first = order_.begin();
            std::vector<std::uint32_t> idx(n);
            for (std::uint32_t i = 0; i < n; ++i) idx[i] = lo + i;
            std::nth_element(idx.begin(), idx.begin() + n / 2, idx.end(),
                             [&](std::uint32_t a, std::uint32_t b) {
                                 return centers[a][axis] < centers[b][axis];
                             });
            // apply the permutation to order_, boxes and centers in [lo, hi)
            std::vector<std::uint32_t> ord(n);
            std::vector<Aabb> bx(n);
            std::vector<Vec3> ct(n);
            for (std::uint32_t i = 0; i < n; ++i) {
                ord[i] = order_[idx[i]];
                bx[i] = boxes[idx[i]];
                ct[i] = centers[idx[i]];
            }
            std::copy(ord.begin(), ord.end(), first + lo);
            std::copy(bx.begin(), bx.end(), boxes.begin() + lo);
            std::copy(ct.begin(), ct.end(), centers.begin() + lo);
        }
        std::uint32_t left = build(lo, mid);
        std::uint32_t right = build(mid, hi);
        nodes_[self].start = left; // left child index for internal nodes
        nodes_[self].right = right;
        nodes_[self].count = 0;
        return self;
    }

    static constexpr std::uint32_t kLeafSize = 4;

    const TriangleMesh* mesh_ = nullptr;
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> order_;
    std::vector<Aabb>* scratch_boxes_ = nullptr;
    std::vector<Vec3>* scratch_centers_ = nullptr;
};

// All intersections of the full line through `origin` along `direction`.
inline RayHitList stab_ray(const Bvh& bvh, const TriangleMesh&, const Vec3& origin,
                           const Vec3& direction) {
    return bvh.stab_line(origin, direction);
}

// Reference path: same per-triangle test over every non-degenerate triangle.
inline RayHitList stab_ray_brute(const TriangleMesh& mesh, const Vec3& origin, const Vec3& direction) {
    detail::LineFrame frame(origin, direction);
    RayHitList hits;
    for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
        if (mesh.degenerate[t]) continue;
        const auto& tri = mesh.triangles[t];
        auto hit = frame.intersect(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
        if (hit) hits.push_back({*hit, t, dot(mesh.triangle_normal(t), direction) < 0.0});
    }
    dedup_hits(hits);
    return hits;
}

} // namespace uodf
