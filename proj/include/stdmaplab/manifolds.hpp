#ifndef STDMAPLAB_MANIFOLDS_HPP
#define STDMAPLAB_MANIFOLDS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "stdmaplab/cocycle.hpp"
#include "stdmaplab/cones.hpp"
#include "stdmaplab/errors.hpp"
#include "stdmaplab/map.hpp"

namespace stdmaplab {

/// Point in the universal cover; curves keep unreduced coordinates so a
/// polyline stays continuous across torus wraps.
struct LiftPoint {
    double x = 0.0;
    double y = 0.0;

    TorusPoint reduced() const { return {wrap01(x), wrap01(y)}; }
};

/// Polyline with per-vertex unit tangents. Tangents are chord based:
/// interior vertices use the bisector of their two chords.
struct Curve {
    std::vector<LiftPoint> vertices;
    std::vector<TangentVec> tangents;
    double total_length = 0.0;
};

namespace detail {

inline TangentVec chord(const LiftPoint& a, const LiftPoint& b) {
    return {b.x - a.x, b.y - a.y};
}

inline void fill_chord_tangents(const std::vector<LiftPoint>& vs, std::vector<TangentVec>& out) {
    const std::size_t n = vs.size();
    out.resize(n);
    if (n < 2) {
        if (n == 1) out[0] = {1.0, 0.0};
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = i == 0 ? 0 : i - 1;
        std::size_t hi = i + 1 < n ? i + 1 : n - 1;
        TangentVec c = chord(vs[lo], vs[hi]);
        double norm = c.norm();
        out[i] = norm == 0.0 ? TangentVec{1.0, 0.0} : TangentVec{c.u / norm, c.v / norm};
    }
}

inline double polyline_length(const std::vector<LiftPoint>& vs) {
    double len = 0.0;
    for (std::size_t i = 1; i < vs.size(); ++i) len += chord(vs[i - 1], vs[i]).norm();
    return len;
}

/// Unwrap a reduced polyline into lift coordinates by always taking the
/// nearest representative of each step.
inline std::vector<LiftPoint> unwrap(const std::vector<TorusPoint>& pts) {
    std::vector<LiftPoint> out;
    out.reserve(pts.size());
    if (pts.empty()) return out;
    out.push_back({pts[0].x, pts[0].y});
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const LiftPoint& prev = out.back();
        double dx = wrap_signed(pts[i].x - pts[i - 1].x);
        double dy = wrap_signed(pts[i].y - pts[i - 1].y);
        out.push_back({prev.x + dx, prev.y + dy});
    }
    return out;
}

} // namespace detail

inline Curve make_curve(std::vector<LiftPoint> vertices) {
    Curve c;
    c.vertices = std::move(vertices);
    detail::fill_chord_tangents(c.vertices, c.tangents);
    c.total_length = detail::polyline_length(c.vertices);
    return c;
}

enum class ManifoldSide { stable, unstable };

inline constexpr double kSeedFloor = 1e-9;

/// Straight seed segment through p along the finite-horizon stable or
/// unstable direction. The length is max(2 r0, seed floor): the bound r0 =
/// k^(-7) drops below double resolution already for moderate k, so the
/// floor keeps the segment representable.
inline Curve seed_local_manifold(const Params& params, TorusPoint p, ManifoldSide side,
                                 int frame_horizon = 30) {
    OseledetsFrame frame = oseledets_frame(params, p, frame_horizon);
    TangentVec dir = side == ManifoldSide::unstable ? frame.e_plus : frame.e_minus;
    double half = 0.5 * std::max(2.0 * params.r0, kSeedFloor);
    std::vector<LiftPoint> vs = {
        {p.x - half * dir.u, p.y - half * dir.v},
        {p.x, p.y},
        {p.x + half * dir.u, p.y + half * dir.v},
    };
    Curve c = make_curve(std::move(vs));
    c.tangents = {dir, dir, dir};
    return c;
}

enum class GrowDirection { forward, backward };

struct GrowLimits {
    double h_max = 1e-3;            // max spacing between adjacent image vertices
    std::size_t vertex_cap = 10'000'000;
};

struct GrowthReport {
    std::vector<double> lengths_per_iterate;
    std::optional<int> first_iterate_length_gt4;
    std::int64_t cone_violations = 0;
    bool truncated = false;
};

namespace detail {

/// Arclength-parameterized view of the input polyline; evaluation pushes
/// the base point through m map applications so refinement vertices stay
/// exactly on the iterated curve.
struct SeedChart {
    std::vector<LiftPoint> base;
    std::vector<double> cum;

    explicit SeedChart(const std::vector<LiftPoint>& vs) : base(vs) {
        cum.resize(base.size(), 0.0);
        for (std::size_t i = 1; i < base.size(); ++i)
            cum[i] = cum[i - 1] + chord(base[i - 1], base[i]).norm();
    }

    double total() const { return cum.back(); }

    double param_of_vertex(std::size_t i) const { return cum[i] / total(); }

    TorusPoint eval(double t) const {
        double s = t * total();
        auto it = std::upper_bound(cum.begin(), cum.end(), s);
        std::size_t hi = std::min(static_cast<std::size_t>(it - cum.begin()), base.size() - 1);
        if (hi == 0) hi = 1;
        std::size_t lo = hi - 1;
        double seg = cum[hi] - cum[lo];
        double w = seg > 0.0 ? (s - cum[lo]) / seg : 0.0;
        w = std::clamp(w, 0.0, 1.0);
        LiftPoint p{base[lo].x + w * (base[hi].x - base[lo].x),
                    base[lo].y + w * (base[hi].y - base[lo].y)};
        return p.reduced();
    }
};

struct PushedVertex {
    double t = 0.0;
    TorusPoint prev; // image after m-1 steps
    TorusPoint cur;  // image after m steps
};

} // namespace detail

/// Iterate a curve under the map (forward) or its inverse (backward),
/// inserting preimage midpoints until adjacent image vertices are at most
/// h_max apart. Stops at target_length, max_iter or the vertex cap. The
/// report tracks per-iterate lengths, the first iterate whose length
/// exceeds 4, and cone violations: vertices whose derivative-pushed tangent
/// left the aperture-theta2 cone (horizontal for forward growth, vertical
/// for backward) although the vertex sat in G2 with tangent inside the wide
/// 4/theta1 cone, i.e. genuine counterexamples to the cone-preservation
/// estimate along the grown curve.
inline std::pair<Curve, GrowthReport> grow_curve(const Params& params, const Curve& c,
                                                 GrowDirection direction, int max_iter,
                                                 double target_length,
                                                 const GrowLimits& limits = {}) {
    if (max_iter < 1) throw invalid_input_error("grow_curve requires max_iter >= 1");
    if (c.vertices.size() < 2) throw invalid_input_error("grow_curve requires a curve with >= 2 vertices");

    const bool fwd = direction == GrowDirection::forward;
    auto step = [&](TorusPoint p) { return fwd ? apply(params, p) : apply_inverse(params, p); };
    const Cone narrow = fwd ? Cone::horizontal(params.theta2) : Cone::vertical(params.theta2);
    const Cone wide = fwd ? Cone::horizontal(4.0 / params.theta1) : Cone::vertical(4.0 / params.theta1);

    detail::SeedChart chart(c.vertices);
    int iterate = 0;
    auto push_from_seed = [&](double t) {
        detail::PushedVertex v;
        v.t = t;
        TorusPoint p = chart.eval(t);
        TorusPoint prev = p;
        for (int m = 0; m < iterate; ++m) {
            prev = p;
            p = step(p);
        }
        v.prev = prev;
        v.cur = p;
        return v;
    };

    std::vector<detail::PushedVertex> verts;
    verts.reserve(c.vertices.size());
    for (std::size_t i = 0; i < c.vertices.size(); ++i) {
        detail::PushedVertex v;
        v.t = chart.param_of_vertex(i);
        v.cur = c.vertices[i].reduced();
        v.prev = v.cur;
        verts.push_back(v);
    }

    GrowthReport report;

    for (iterate = 1; iterate <= max_iter; ++iterate) {
        for (auto& v : verts) {
            v.prev = v.cur;
            v.cur = step(v.cur);
        }
        // refine until adjacent image vertices are within h_max
        std::vector<detail::PushedVertex> refined;
        refined.reserve(verts.size() * 2);
        refined.push_back(verts.front());
        bool capped = false;
        auto subdivide = [&](auto&& self, const detail::PushedVertex& left,
                             const detail::PushedVertex& right) -> void {
            if (torus_dist(left.cur, right.cur) <= limits.h_max ||
                right.t - left.t <= 1e-15 ||
                refined.size() >= limits.vertex_cap) {
                if (refined.size() >= limits.vertex_cap) capped = true;
                refined.push_back(right);
                return;
            }
            detail::PushedVertex mid = push_from_seed(0.5 * (left.t + right.t));
            self(self, left, mid);
            self(self, mid, right);
        };
        for (std::size_t i = 1; i < verts.size(); ++i)
            subdivide(subdivide, verts[i - 1], verts[i]);
        verts = std::move(refined);

        // geometry of this iterate
        std::vector<TorusPoint> cur_pts(verts.size()), prev_pts(verts.size());
        for (std::size_t i = 0; i < verts.size(); ++i) {
            cur_pts[i] = verts[i].cur;
            prev_pts[i] = verts[i].prev;
        }
        std::vector<LiftPoint> cur_lift = detail::unwrap(cur_pts);
        std::vector<LiftPoint> prev_lift = detail::unwrap(prev_pts);
        std::vector<TangentVec> prev_tan;
        detail::fill_chord_tangents(prev_lift, prev_tan);
        double length = detail::polyline_length(cur_lift);

        // cone-lemma counterexamples: the derivative at a G2 preimage vertex
        // must carry a wide-cone tangent into the narrow cone
        for (std::size_t i = 0; i < verts.size(); ++i) {
            if (!in_g2(params, prev_pts[i])) continue;
            if (!cone_contains(wide, prev_tan[i])) continue;
            Jacobian2 step_jac =
                fwd ? jacobian(params, prev_pts[i]) : jacobian_inverse(params, prev_pts[i]);
            if (!cone_contains(narrow, step_jac * prev_tan[i])) ++report.cone_violations;
        }

        report.lengths_per_iterate.push_back(length);
        if (!report.first_iterate_length_gt4 && length > 4.0)
            report.first_iterate_length_gt4 = iterate;
        if (capped) {
            report.truncated = true;
            break;
        }
        if (length >= target_length) break;
    }

    std::vector<TorusPoint> final_pts(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i) final_pts[i] = verts[i].cur;
    Curve out = make_curve(detail::unwrap(final_pts));
    return {std::move(out), std::move(report)};
}

/// Transverse crossing of two curves, with the crossing angle and the
/// normalized arclength parameters on each curve.
struct IntersectionWitness {
    TorusPoint point;
    double angle = 0.0; // radians, in (0, pi/2]
    double param_a = 0.0;
    double param_b = 0.0;
};

namespace detail {

struct Segment {
    LiftPoint a;
    LiftPoint b;
    double cum = 0.0; // arclength at a
    double len = 0.0;
};

inline std::vector<Segment> curve_segments(const Curve& c) {
    std::vector<Segment> segs;
    segs.reserve(c.vertices.size());
    double cum = 0.0;
    for (std::size_t i = 1; i < c.vertices.size(); ++i) {
        Segment s{c.vertices[i - 1], c.vertices[i], cum, 0.0};
        s.len = chord(s.a, s.b).norm();
        cum += s.len;
        segs.push_back(s);
    }
    return segs;
}

inline double point_segment_dist(double px, double py, const Segment& s) {
    double rx = s.b.x - s.a.x, ry = s.b.y - s.a.y;
    double denom = rx * rx + ry * ry;
    double w = denom > 0.0 ? ((px - s.a.x) * rx + (py - s.a.y) * ry) / denom : 0.0;
    w = std::clamp(w, 0.0, 1.0);
    return std::hypot(px - (s.a.x + w * rx), py - (s.a.y + w * ry));
}

struct SegmentHit {
    double s = 0.0;
    double t = 0.0;
    double px = 0.0;
    double py = 0.0;
    double angle = 0.0;
};

/// Intersect segment A with segment B translated by (dx, dy). The linear
/// solve is polished by bisection on the signed side of B's line.
inline std::optional<SegmentHit> intersect_shifted(const Segment& A, const Segment& B, double dx,
                                                   double dy) {
    double rx = A.b.x - A.a.x, ry = A.b.y - A.a.y;
    double qax = B.a.x + dx, qay = B.a.y + dy;
    double ex = B.b.x - B.a.x, ey = B.b.y - B.a.y;
    double denom = rx * ey - ry * ex;
    double scale = std::max({std::abs(rx), std::abs(ry), std::abs(ex), std::abs(ey)});
    if (std::abs(denom) <= 1e-14 * scale * scale) return std::nullopt; // parallel
    double wx = qax - A.a.x, wy = qay - A.a.y;
    double s = (wx * ey - wy * ex) / denom;
    double t = (wx * ry - wy * rx) / denom;
    if (s < 0.0 || s > 1.0 || t < 0.0 || t > 1.0) return std::nullopt;
    // bisection polish along A against the supporting line of B
    auto side = [&](double u) { return (A.a.x + u * rx - qax) * ey - (A.a.y + u * ry - qay) * ex; };
    double lo = 0.0, hi = 1.0, flo = side(lo), fhi = side(hi);
    if ((flo < 0.0) != (fhi < 0.0)) {
        for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
            double mid = 0.5 * (lo + hi);
            double fm = side(mid);
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        s = 0.5 * (lo + hi);
        t = ex * ex + ey * ey > 0.0
                ? ((A.a.x + s * rx - qax) * ex + (A.a.y + s * ry - qay) * ey) / (ex * ex + ey * ey)
                : t;
        t = std::clamp(t, 0.0, 1.0);
    }
    SegmentHit hit;
    hit.s = s;
    hit.t = t;
    hit.px = A.a.x + s * rx;
    hit.py = A.a.y + s * ry;
    hit.angle = line_angle({rx, ry}, {ex, ey});
    return hit;
}

} // namespace detail

/// All torus crossings of the two polylines with crossing angle at least
/// angle_min. Wraparound is handled by matching each segment pair in the
/// nearest lift; every witness is re-checked to lie on both curves within
/// 1e-9.
inline std::vector<IntersectionWitness> find_transverse_intersections(const Curve& a, const Curve& b,
                                                                      double angle_min) {
    if (a.vertices.empty() || b.vertices.empty())
        throw invalid_input_error("intersection of an empty curve");
    std::vector<detail::Segment> sa = detail::curve_segments(a);
    std::vector<detail::Segment> sb = detail::curve_segments(b);
    std::vector<IntersectionWitness> out;
    if (sa.empty() || sb.empty()) return out;

    double max_len = 0.0;
    for (const auto& s : sa) max_len = std::max(max_len, s.len);
    for (const auto& s : sb) max_len = std::max(max_len, s.len);
    const bool long_segments = max_len > 0.25;
    const double cell = std::clamp(max_len * 1.001, 1.0 / 4096.0, 0.5);
    const std::int64_t ncells = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(1.0 / cell)));

    auto cell_of = [&](double x, double y) {
        auto ix = static_cast<std::int64_t>(std::floor(wrap01(x) * static_cast<double>(ncells)));
        auto iy = static_cast<std::int64_t>(std::floor(wrap01(y) * static_cast<double>(ncells)));
        ix = std::clamp<std::int64_t>(ix, 0, ncells - 1);
        iy = std::clamp<std::int64_t>(iy, 0, ncells - 1);
        return ix * ncells + iy;
    };
    std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets;
    for (std::size_t j = 0; j < sb.size(); ++j) {
        const auto& s = sb[j];
        buckets[cell_of(0.5 * (s.a.x + s.b.x), 0.5 * (s.a.y + s.b.y))].push_back(j);
    }

    const double total_a = a.total_length > 0.0 ? a.total_length : 1.0;
    const double total_b = b.total_length > 0.0 ? b.total_length : 1.0;

    auto try_pair = [&](const detail::Segment& A, std::size_t, const detail::Segment& B,
                        std::size_t) -> std::optional<IntersectionWitness> {
        double mid_ax = 0.5 * (A.a.x + A.b.x), mid_ay = 0.5 * (A.a.y + A.b.y);
        double mid_bx = 0.5 * (B.a.x + B.b.x), mid_by = 0.5 * (B.a.y + B.b.y);
        double base_dx = std::round(mid_ax - mid_bx);
        double base_dy = std::round(mid_ay - mid_by);
        int radius = long_segments ? 1 : 0;
        for (int ox = -radius; ox <= radius; ++ox) {
            for (int oy = -radius; oy <= radius; ++oy) {
                auto hit = detail::intersect_shifted(A, B, base_dx + ox, base_dy + oy);
                if (!hit) continue;
                if (hit->angle < angle_min) continue;
                IntersectionWitness w;
                w.point = LiftPoint{hit->px, hit->py}.reduced();
                w.angle = hit->angle;
                w.param_a = (A.cum + hit->s * A.len) / total_a;
                w.param_b = (B.cum + hit->t * B.len) / total_b;
                // independent on-both-curves recheck
                double res_a = detail::point_segment_dist(hit->px, hit->py, A);
                double res_b = detail::point_segment_dist(hit->px, hit->py,
                                                          {{B.a.x + base_dx + ox, B.a.y + base_dy + oy},
                                                           {B.b.x + base_dx + ox, B.b.y + base_dy + oy},
                                                           0.0,
                                                           0.0});
                if (res_a > 1e-9 || res_b > 1e-9) continue;
                return w;
            }
        }
        return std::nullopt;
    };

    for (std::size_t i = 0; i < sa.size(); ++i) {
        const auto& A = sa[i];
        double mx = wrap01(0.5 * (A.a.x + A.b.x));
        double my = wrap01(0.5 * (A.a.y + A.b.y));
        auto cx = static_cast<std::int64_t>(std::floor(mx * static_cast<double>(ncells)));
        auto cy = static_cast<std::int64_t>(std::floor(my * static_cast<double>(ncells)));
        for (std::int64_t ox = -1; ox <= 1; ++ox) {
            for (std::int64_t oy = -1; oy <= 1; ++oy) {
                std::int64_t key = ((cx + ox + ncells) % ncells) * ncells + ((cy + oy + ncells) % ncells);
                auto it = buckets.find(key);
                if (it == buckets.end()) continue;
                for (std::size_t j : it->second) {
                    auto w = try_pair(A, i, sb[j], j);
                    if (w) out.push_back(*w);
                }
            }
        }
    }

    std::sort(out.begin(), out.end(), [](const IntersectionWitness& l, const IntersectionWitness& r) {
        if (l.param_a != r.param_a) return l.param_a < r.param_a;
        return l.param_b < r.param_b;
    });
    std::vector<IntersectionWitness> dedup;
    for (const auto& w : out) {
        bool duplicate = false;
        for (auto it = dedup.rbegin(); it != dedup.rend(); ++it) {
            if (torus_dist(w.point, it->point) <= 1e-8) {
                duplicate = true;
                break;
            }
            if (w.param_a - it->param_a > 1e-6) break;
        }
        if (!duplicate) dedup.push_back(w);
    }
    return dedup;
}

enum class HomoclinicVerdict { related, unrelated, inconclusive };

struct HomoclinicOptions {
    double angle_min = -1.0; // negative: use pi/2 - 2 atan(theta2) - 0.05
    double target_length = 4.0;
    int max_iter = 64;
    GrowLimits limits;
    int frame_horizon = 30;
};

struct HomoclinicResult {
    HomoclinicVerdict verdict = HomoclinicVerdict::unrelated;
    std::vector<IntersectionWitness> witnesses_pq; // W+(p) against W-(q)
    std::vector<IntersectionWitness> witnesses_qp; // W+(q) against W-(p)
    bool truncated = false;
};

inline double default_witness_angle_min(const Params& params) {
    return 0.5 * std::numbers::pi - 2.0 * std::atan(params.theta2) - 0.05;
}

namespace detail {

inline bool hyperbolic_periodic_basepoint(const Params& params, TorusPoint p, int max_period = 64) {
    TorusPoint q = p;
    Jacobian2 m{1.0, 0.0, 0.0, 1.0};
    for (int n = 1; n <= max_period; ++n) {
        m = jacobian(params, q) * m;
        q = apply(params, q);
        if (torus_dist(q, p) <= 1e-9) return std::abs(m.trace()) > 2.0;
    }
    return false;
}

} // namespace detail

/// Grows the unstable curve of p forward and the stable curve of q
/// backward past length 4, collects transverse crossings, and repeats with
/// the roles swapped. Related means both directions produced a witness;
/// truncated growth without a witness is inconclusive rather than a no.
inline HomoclinicResult homoclinically_related(const Params& params, TorusPoint p, TorusPoint q,
                                               HomoclinicOptions opts = {}) {
    auto admissible = [&](TorusPoint r) {
        if (detail::hyperbolic_periodic_basepoint(params, r)) return true;
        try {
            return x_membership(params, r, opts.frame_horizon);
        } catch (const frame_unresolved_error&) {
            return false;
        }
    };
    if (!admissible(p) || !admissible(q))
        throw invalid_input_error(
            "homoclinic basepoints must pass x membership or be hyperbolic periodic points");
    double angle_min = opts.angle_min >= 0.0 ? opts.angle_min : default_witness_angle_min(params);

    auto grown = [&](TorusPoint r, ManifoldSide side) {
        GrowDirection dir = side == ManifoldSide::unstable ? GrowDirection::forward : GrowDirection::backward;
        Curve seed = seed_local_manifold(params, r, side, opts.frame_horizon);
        return grow_curve(params, seed, dir, opts.max_iter, opts.target_length, opts.limits);
    };

    auto [wu_p, rep_up] = grown(p, ManifoldSide::unstable);
    auto [ws_q, rep_sq] = grown(q, ManifoldSide::stable);
    auto [wu_q, rep_uq] = grown(q, ManifoldSide::unstable);
    auto [ws_p, rep_sp] = grown(p, ManifoldSide::stable);

    HomoclinicResult result;
    result.truncated = rep_up.truncated || rep_sq.truncated || rep_uq.truncated || rep_sp.truncated;
    result.witnesses_pq = find_transverse_intersections(wu_p, ws_q, angle_min);
    result.witnesses_qp = find_transverse_intersections(wu_q, ws_p, angle_min);
    if (!result.witnesses_pq.empty() && !result.witnesses_qp.empty())
        result.verdict = HomoclinicVerdict::related;
    else if (result.truncated)
        result.verdict = HomoclinicVerdict::inconclusive;
    else
        result.verdict = HomoclinicVerdict::unrelated;
    return result;
}

} // namespace stdmaplab

#endif
