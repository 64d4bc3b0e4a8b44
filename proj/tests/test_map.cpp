#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stdmaplab/map.hpp"
#include "stdmaplab/rng.hpp"

using namespace stdmaplab;
using Catch::Matchers::WithinAbs;

TEST_CASE("derive_params fills the derived scales") {
    Params p = derive_params(1024.0);
    CHECK_THAT(p.theta1, WithinAbs(0.0625, 1e-15));     // 2^-4
    CHECK_THAT(p.theta2, WithinAbs(0.015625, 1e-15));   // 2^-6
    CHECK_THAT(p.delta, WithinAbs(1.0 / 600.0, 0.0));
    CHECK(p.T == 21); // floor(607/28)
    CHECK_THAT(p.crit_halfwidth_outer, WithinAbs(2.0 * p.crit_halfwidth_inner, 1e-17));
    CHECK_THAT(p.crit_halfwidth_inner, WithinAbs(std::pow(1024.0, -0.3), 1e-15));
    CHECK_THAT(p.r0, WithinAbs(std::pow(1024.0, -7.0), 1e-30));
    CHECK_THAT(p.contraction_rate, WithinAbs(std::pow(1024.0, -0.8), 1e-15));

    Params q = derive_params(8.0);
    CHECK(q.theta2 < q.theta1);
    CHECK(q.theta1 < 1.0);
    CHECK(q.T == 21);
}

TEST_CASE("derive_params rejects bad couplings") {
    CHECK_THROWS_AS(derive_params(1.0), invalid_parameter_error);
    CHECK_THROWS_AS(derive_params(0.5), invalid_parameter_error);
    CHECK_THROWS_AS(derive_params(-3.0), invalid_parameter_error);
    CHECK_THROWS_AS(derive_params(std::nan("")), invalid_parameter_error);
    CHECK_THROWS_AS(derive_params(std::numeric_limits<double>::infinity()), invalid_parameter_error);
}

TEST_CASE("apply fixes the sin-free points") {
    Params p5 = derive_params(5.0);
    TorusPoint o = apply(p5, {0.0, 0.0});
    CHECK(o.x == 0.0);
    CHECK(o.y == 0.0);

    TorusPoint h = apply(p5, {0.5, 0.0});
    CHECK_THAT(h.x, WithinAbs(0.0, 1e-12));
    CHECK(h.y == 0.5);

    Params p1 = Params::unchecked(1.0);
    TorusPoint q = apply(p1, {0.25, 0.25});
    CHECK_THAT(q.x, WithinAbs(0.25, 1e-15));
    CHECK(q.y == 0.25);
}

TEST_CASE("apply_inverse is the closed-form inverse") {
    Params params = derive_params(5.0);
    TorusPoint o = apply_inverse(params, {0.0, 0.0});
    CHECK(o.x == 0.0);
    CHECK(o.y == 0.0);

    CounterRng rng(2024);
    double worst_roundtrip = 0.0;
    double worst_conjugacy = 0.0;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        TorusPoint p = rng.point(0, i);
        worst_roundtrip = std::max(worst_roundtrip, torus_dist(apply(params, apply_inverse(params, p)), p));
        worst_roundtrip = std::max(worst_roundtrip, torus_dist(apply_inverse(params, apply(params, p)), p));
        TorusPoint conj = involution(apply(params, involution(p)));
        worst_conjugacy = std::max(worst_conjugacy, torus_dist(conj, apply_inverse(params, p)));
    }
    CHECK(worst_roundtrip < 1e-9);
    CHECK(worst_conjugacy < 1e-12);
}

TEST_CASE("jacobian matches the closed form") {
    Params params = derive_params(5.0);
    Jacobian2 j = jacobian(params, {0.0, 0.0});
    CHECK_THAT(j.a11, WithinAbs(2.0 * std::numbers::pi * 5.0 + 2.0, 1e-12)); // about 33.4159
    CHECK(j.a12 == -1.0);
    CHECK(j.a21 == 1.0);
    CHECK(j.a22 == 0.0);

    Jacobian2 jq = jacobian(params, {0.25, 0.8});
    CHECK_THAT(jq.a11, WithinAbs(2.0, 1e-12)); // cos(pi/2) = 0

    CounterRng rng(7);
    for (std::uint64_t i = 0; i < 1000; ++i) {
        Jacobian2 m = jacobian(params, rng.point(0, i));
        CHECK_THAT(m.det(), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("involution swaps coordinates and conjugates to the inverse") {
    TorusPoint p{0.2, 0.7};
    TorusPoint q = involution(p);
    CHECK(q.x == 0.7);
    CHECK(q.y == 0.2);
    TorusPoint r = involution(q);
    CHECK(r.x == p.x);
    CHECK(r.y == p.y);
}

TEST_CASE("torus_dist uses nearest lifts") {
    CHECK(torus_dist({0.0, 0.0}, {0.0, 0.0}) == 0.0);
    CHECK_THAT(torus_dist({0.95, 0.0}, {0.05, 0.0}), WithinAbs(0.1, 1e-15));
    CHECK_THAT(torus_dist({0.0, 0.0}, {0.5, 0.5}), WithinAbs(std::sqrt(2.0) / 2.0, 1e-15));
}

TEST_CASE("norm bounds: ||Df|| and ||Df^-1|| below 4 pi k") {
    for (double k : {10.0, 100.0, 1000.0}) {
        Params params = derive_params(k);
        double bound = 4.0 * std::numbers::pi * k;
        CounterRng rng(42);
        for (std::uint64_t i = 0; i < 2000; ++i) {
            TorusPoint p = rng.point(1, i);
            Jacobian2 j = jacobian(params, p);
            CHECK(op_norm(j) < bound);
            CHECK(op_norm_inverse(j) < bound);
        }
    }
}

TEST_CASE("jacobian_inverse agrees with the inverse of the jacobian at the preimage") {
    Params params = derive_params(9.0);
    CounterRng rng(3);
    for (std::uint64_t i = 0; i < 500; ++i) {
        TorusPoint p = rng.point(0, i);
        Jacobian2 direct = jacobian_inverse(params, p);
        Jacobian2 via = jacobian(params, apply_inverse(params, p)).inverse();
        CHECK_THAT(direct.a11, WithinAbs(via.a11, 1e-9));
        CHECK_THAT(direct.a12, WithinAbs(via.a12, 1e-9));
        CHECK_THAT(direct.a21, WithinAbs(via.a21, 1e-9));
        CHECK_THAT(direct.a22, WithinAbs(via.a22, 1e-9));
    }
}

TEST_CASE("wrap01 stays in [0,1)") {
    CHECK(wrap01(1.0) == 0.0);
    CHECK(wrap01(-1e-300) < 1.0);
    CHECK(wrap01(-1e-300) >= 0.0);
    CHECK(wrap01(2.75) == 0.75);
    CHECK(wrap01(-0.25) == 0.75);
}

TEST_CASE("operator norm equals the largest singular value") {
    // hand-checked on a diagonal and a rotation-like matrix
    Jacobian2 d{3.0, 0.0, 0.0, 0.5};
    CHECK_THAT(op_norm(d), WithinAbs(3.0, 1e-12));
    CHECK_THAT(min_singular_value(d), WithinAbs(0.5, 1e-12));
    Jacobian2 r{0.0, -2.0, 2.0, 0.0};
    CHECK_THAT(op_norm(r), WithinAbs(2.0, 1e-12));
}
