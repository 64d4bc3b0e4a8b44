#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stdmaplab/manifolds.hpp"
#include "stdmaplab/rng.hpp"

using namespace stdmaplab;
using Catch::Matchers::WithinAbs;

namespace {

double point_to_curve_dist(TorusPoint p, const Curve& c) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < c.vertices.size(); ++i) {
        LiftPoint a = c.vertices[i - 1];
        LiftPoint b = c.vertices[i];
        // nearest lift of p relative to the segment midpoint
        double mx = 0.5 * (a.x + b.x), my = 0.5 * (a.y + b.y);
        double px = p.x + std::round(mx - p.x);
        double py = p.y + std::round(my - p.y);
        double rx = b.x - a.x, ry = b.y - a.y;
        double denom = rx * rx + ry * ry;
        double w = denom > 0.0 ? ((px - a.x) * rx + (py - a.y) * ry) / denom : 0.0;
        w = std::clamp(w, 0.0, 1.0);
        best = std::min(best, std::hypot(px - (a.x + w * rx), py - (a.y + w * ry)));
    }
    return best;
}

} // namespace

TEST_CASE("seed_local_manifold builds a straight segment along the frame") {
    Params params = derive_params(5.0);
    Curve seed = seed_local_manifold(params, {0.0, 0.0}, ManifoldSide::unstable);
    double expected_len = std::max(2.0 * params.r0, 1e-9); // 2 k^-7 dominates at k = 5
    CHECK_THAT(seed.total_length, WithinAbs(expected_len, 1e-12 * expected_len));
    REQUIRE(seed.vertices.size() == 3);

    double t = 2.0 * std::numbers::pi * 5.0 + 2.0;
    double lam = 0.5 * (t + std::sqrt(t * t - 4.0));
    TangentVec eigen = TangentVec{lam, 1.0}.normalized();
    for (const auto& tv : seed.tangents) CHECK(line_angle(tv, eigen) < 1e-6);
    TangentVec chord{seed.vertices[2].x - seed.vertices[0].x, seed.vertices[2].y - seed.vertices[0].y};
    CHECK(line_angle(chord, eigen) < 1e-6);

    Params big = derive_params(1000.0);
    Curve floor_seed = seed_local_manifold(big, {0.0, 0.0}, ManifoldSide::unstable);
    CHECK_THAT(floor_seed.total_length, WithinAbs(1e-9, 1e-21)); // r0 is sub-resolution here
}

TEST_CASE("stable seed is the involution image of the unstable seed at the swapped point") {
    Params params = derive_params(1000.0);
    CounterRng rng(3);
    int tested = 0;
    for (std::uint64_t i = 0; i < 30 && tested < 5; ++i) {
        TorusPoint p = rng.point(0, i);
        try {
            Curve stable = seed_local_manifold(params, p, ManifoldSide::stable);
            Curve unstable_swapped = seed_local_manifold(params, involution(p), ManifoldSide::unstable);
            REQUIRE(stable.vertices.size() == unstable_swapped.vertices.size());
            for (std::size_t v = 0; v < stable.vertices.size(); ++v) {
                TorusPoint s = stable.vertices[v].reduced();
                TorusPoint u = unstable_swapped.vertices[v].reduced();
                CHECK(torus_dist(s, involution(u)) < 1e-9);
            }
            ++tested;
        } catch (const frame_unresolved_error&) {
            continue;
        }
    }
    CHECK(tested >= 3);
}

TEST_CASE("grow_curve expands a G2 segment by at least sqrt(k) in one iterate") {
    Params params = derive_params(1000.0);
    double len = 1e-4;
    Curve segment = make_curve({{0.5 - 0.5 * len, 0.5}, {0.5 + 0.5 * len, 0.5}});
    auto [grown, report] = grow_curve(params, segment, GrowDirection::forward, 1, 1e9);
    REQUIRE(report.lengths_per_iterate.size() == 1);
    double oracle = std::min(min_expansion_in_cone(params, {0.5 - 0.5 * len, 0.5}, Cone::horizontal(params.theta2)),
                             min_expansion_in_cone(params, {0.5 + 0.5 * len, 0.5}, Cone::horizontal(params.theta2)));
    CHECK(report.lengths_per_iterate[0] >= std::sqrt(1000.0) * len);
    CHECK(report.lengths_per_iterate[0] >= 0.99 * oracle * len);
    CHECK(report.cone_violations == 0);
    CHECK_FALSE(report.truncated);
}

TEST_CASE("a cone-tangent curve crossing the annulus between the good regions explodes in one step") {
    Params params = derive_params(2000.0); // k^(1/5) > 4 needs k > 1024
    double w2 = params.crit_halfwidth_inner;
    double w1 = params.crit_halfwidth_outer;
    double y = 0.55;
    Curve crossing = make_curve({{0.25 + w2, y}, {0.25 + w1, y}});
    CHECK_THAT(crossing.total_length, WithinAbs(w2, 1e-15));
    auto [grown, report] = grow_curve(params, crossing, GrowDirection::forward, 1, 4.0);
    REQUIRE(report.lengths_per_iterate.size() == 1);
    CHECK(report.lengths_per_iterate[0] > 4.0);
    CHECK(report.first_iterate_length_gt4.has_value());
    CHECK(*report.first_iterate_length_gt4 == 1);
}

TEST_CASE("unstable curve of the fixed point reaches length four quickly and cleanly") {
    Params params = derive_params(1000.0);
    Curve seed = seed_local_manifold(params, {0.0, 0.0}, ManifoldSide::unstable);
    auto [curve, report] = grow_curve(params, seed, GrowDirection::forward, 20, 4.0);
    REQUIRE(report.first_iterate_length_gt4.has_value());
    CHECK(*report.first_iterate_length_gt4 <= 16);
    CHECK(report.cone_violations == 0);
    CHECK_FALSE(report.truncated);
    double prev = 0.0;
    for (double len : report.lengths_per_iterate) {
        CHECK(len >= prev);
        prev = len;
    }
    // curve invariants
    CHECK(curve.vertices.size() == curve.tangents.size());
    double sum = 0.0;
    for (std::size_t i = 1; i < curve.vertices.size(); ++i) {
        double hx = curve.vertices[i].x - curve.vertices[i - 1].x;
        double hy = curve.vertices[i].y - curve.vertices[i - 1].y;
        double h = std::hypot(hx, hy);
        CHECK(h <= 1e-3 + 1e-12);
        sum += h;
    }
    CHECK_THAT(curve.total_length, WithinAbs(sum, 1e-9 * sum));
}

TEST_CASE("growth truncates gracefully at the vertex cap") {
    Params params = derive_params(1000.0);
    Curve seed = seed_local_manifold(params, {0.0, 0.0}, ManifoldSide::unstable);
    GrowLimits tight;
    tight.vertex_cap = 64;
    auto [curve, report] = grow_curve(params, seed, GrowDirection::forward, 20, 4.0, tight);
    CHECK(report.truncated);
    CHECK(curve.vertices.size() <= 66);
}

TEST_CASE("stable/unstable duality persists through growth at the symmetric fixed point") {
    Params params = derive_params(1000.0);
    Curve useed = seed_local_manifold(params, {0.0, 0.0}, ManifoldSide::unstable);
    Curve sseed = seed_local_manifold(params, {0.0, 0.0}, ManifoldSide::stable);
    auto [wu, ru] = grow_curve(params, useed, GrowDirection::forward, 20, 2.0);
    auto [ws, rs] = grow_curve(params, sseed, GrowDirection::backward, 20, 2.0);
    REQUIRE(wu.vertices.size() == ws.vertices.size());
    for (std::size_t i = 0; i < wu.vertices.size(); ++i) {
        TorusPoint mirrored = involution(wu.vertices[i].reduced());
        CHECK(torus_dist(ws.vertices[i].reduced(), mirrored) < 1e-6);
    }
}

TEST_CASE("find_transverse_intersections on crossing segments") {
    Curve horizontal = make_curve({{0.0, 0.5}, {1.0, 0.5}});
    Curve vertical = make_curve({{0.5, 0.0}, {0.5, 1.0}});
    auto witnesses = find_transverse_intersections(horizontal, vertical, 1.0);
    REQUIRE(witnesses.size() == 1);
    CHECK_THAT(witnesses[0].angle, WithinAbs(0.5 * std::numbers::pi, 1e-12));
    CHECK(torus_dist(witnesses[0].point, {0.5, 0.5}) < 1e-9);
    CHECK_THAT(witnesses[0].param_a, WithinAbs(0.5, 1e-9));
    CHECK_THAT(witnesses[0].param_b, WithinAbs(0.5, 1e-9));
    CHECK(point_to_curve_dist(witnesses[0].point, horizontal) <= 1e-9);
    CHECK(point_to_curve_dist(witnesses[0].point, vertical) <= 1e-9);
}

TEST_CASE("parallel segments yield no witnesses") {
    Curve a = make_curve({{0.1, 0.2}, {0.9, 0.2}});
    Curve b = make_curve({{0.1, 0.4}, {0.9, 0.4}});
    CHECK(find_transverse_intersections(a, b, 0.1).empty());
}

TEST_CASE("intersections respect the torus wraparound") {
    Curve a = make_curve({{0.9, 0.5}, {1.1, 0.5}}); // crosses the seam at x = 1
    Curve b = make_curve({{0.02, 0.3}, {0.02, 0.7}});
    auto witnesses = find_transverse_intersections(a, b, 1.0);
    REQUIRE(witnesses.size() == 1);
    CHECK(torus_dist(witnesses[0].point, {0.02, 0.5}) < 1e-9);
}

TEST_CASE("crossing angle of cone-tangent curves respects the aperture bound") {
    Params params = derive_params(1000.0);
    double s = params.theta2; // worst admissible slopes
    Curve h = make_curve({{0.0, 0.4}, {1.0, 0.4 + s}});
    Curve v = make_curve({{0.6, 0.0}, {0.6 + s, 1.0}});
    auto witnesses = find_transverse_intersections(h, v, 0.0);
    REQUIRE_FALSE(witnesses.empty());
    double bound = 0.5 * std::numbers::pi - 2.0 * std::atan(params.theta2);
    for (const auto& w : witnesses) CHECK(w.angle >= bound - 1e-9);
}

TEST_CASE("homoclinic relation is inconclusive under truncation, not false") {
    Params params = derive_params(1000.0);
    HomoclinicOptions opts;
    opts.limits.vertex_cap = 64; // force truncation long before length 4
    HomoclinicResult res = homoclinically_related(params, {0.0, 0.0}, {0.5, 0.5}, opts);
    CHECK(res.truncated);
    CHECK(res.verdict == HomoclinicVerdict::inconclusive);
}

TEST_CASE("homoclinic relation rejects inadmissible basepoints") {
    Params params = derive_params(1000.0);
    CHECK_THROWS_AS(homoclinically_related(params, {0.25, 0.37}, {0.0, 0.0}),
                    invalid_input_error);
}
