#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "stdmaplab/rng.hpp"
#include "stdmaplab/statistics.hpp"

using namespace stdmaplab;
using Catch::Matchers::WithinAbs;

TEST_CASE("empirical measure of a single atom at the origin") {
    EmpiricalMeasure m = empirical_measure({{0.0, 0.0}}, 16, 3);
    CHECK(m.atom_count == 1);
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b) CHECK_THAT(std::abs(m.coeff(a, b) - 1.0), WithinAbs(0.0, 1e-15));
    long double mass = 0.0L;
    for (double g : m.grid) mass += g;
    CHECK_THAT(static_cast<double>(mass), WithinAbs(1.0, 1e-12));
}

TEST_CASE("Fourier symmetry holds exactly by construction") {
    CounterRng rng(8);
    std::vector<TorusPoint> pts;
    for (std::uint64_t i = 0; i < 500; ++i) pts.push_back(rng.point(0, i));
    EmpiricalMeasure m = empirical_measure(pts, 32, 3);
    CHECK(m.coeff(0, 0) == std::complex<double>(1.0, 0.0));
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b) CHECK(m.coeff(-a, -b) == std::conj(m.coeff(a, b)));
    long double mass = 0.0L;
    for (double g : m.grid) mass += g;
    CHECK_THAT(static_cast<double>(mass), WithinAbs(1.0, 1e-12));
}

TEST_CASE("a uniform lattice of atoms kills the low frequencies") {
    std::vector<TorusPoint> pts;
    const int M = 8;
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) pts.push_back({static_cast<double>(i) / M, static_cast<double>(j) / M});
    EmpiricalMeasure m = empirical_measure(pts, M, 3);
    for (int a = -3; a <= 3; ++a)
        for (int b = -3; b <= 3; ++b) {
            if (a == 0 && b == 0) continue;
            CHECK_THAT(std::abs(m.coeff(a, b)), WithinAbs(0.0, 1e-12));
        }
    for (double g : m.grid) CHECK_THAT(g, WithinAbs(1.0 / (M * M), 1e-15));
}

TEST_CASE("empirical measure is reproducible run to run") {
    CounterRng rng(77);
    std::vector<TorusPoint> pts;
    for (std::uint64_t i = 0; i < 2000; ++i) pts.push_back(rng.point(0, i));
    EmpiricalMeasure m1 = empirical_measure(pts, 64, 3);
    EmpiricalMeasure m2 = empirical_measure(pts, 64, 3);
    for (std::size_t i = 0; i < m1.fourier.size(); ++i) CHECK(m1.fourier[i] == m2.fourier[i]);
}

TEST_CASE("empirical measure rejects empty input") {
    CHECK_THROWS_AS(empirical_measure({}, 16, 3), invalid_input_error);
}

TEST_CASE("measure distance separates the origin from the antipode") {
    EmpiricalMeasure origin = empirical_measure({{0.0, 0.0}}, 16, 3);
    EmpiricalMeasure antipode = empirical_measure({{0.5, 0.5}}, 16, 3);
    CHECK(measure_distance(origin, origin) == 0.0);
    CHECK_THAT(measure_distance(origin, antipode), WithinAbs(2.0, 1e-12));
    EmpiricalMeasure other_box = empirical_measure({{0.0, 0.0}}, 16, 2);
    CHECK_THROWS_AS(measure_distance(origin, other_box), invalid_input_error);
}

TEST_CASE("involution defect vanishes on diagonal support and peaks off it") {
    std::vector<TorusPoint> diag{{0.1, 0.1}, {0.35, 0.35}, {0.8, 0.8}};
    CHECK(involution_defect(empirical_measure(diag, 16, 3)) == 0.0);
    CHECK_THAT(involution_defect(empirical_measure({{0.2, 0.7}}, 16, 3)), WithinAbs(2.0, 1e-12));
}

TEST_CASE("density check covering radii on tiny sets") {
    auto [one_ok, one_radius] = density_check({{0.0, 0.0}}, 1.0);
    CHECK_THAT(one_radius, WithinAbs(std::sqrt(2.0) / 2.0, 1e-12));
    CHECK(one_ok);
    auto [four_ok, four_radius] =
        density_check({{0.0, 0.0}, {0.0, 0.5}, {0.5, 0.0}, {0.5, 0.5}}, 0.3);
    CHECK_THAT(four_radius, WithinAbs(std::sqrt(2.0) / 4.0, 1e-12));
    CHECK_FALSE(four_ok);
    CHECK_THROWS_AS(density_check({}, 0.5), invalid_input_error);
    CHECK_THROWS_AS(density_check({{0.1, 0.1}}, 0.0), invalid_input_error);
}

TEST_CASE("density check agrees between the sparse and hashed paths") {
    CounterRng rng(4);
    std::vector<TorusPoint> pts;
    for (std::uint64_t i = 0; i < 400; ++i) pts.push_back(rng.point(0, i));
    double sparse = density_check(pts, 1.0).covering_radius;
    std::vector<TorusPoint> padded = pts;
    for (std::uint64_t i = 0; i < 200; ++i) padded.push_back(pts[i]); // duplicates force the hashed path
    double hashed = density_check(padded, 1.0).covering_radius;
    CHECK_THAT(hashed, WithinAbs(sparse, 1e-12));
}

TEST_CASE("young dimension formula and the entropy gate") {
    DimensionEstimate flat = young_dimension(1.0, 1.0, -1.0);
    CHECK_THAT(flat.dim, WithinAbs(2.0, 1e-15));
    double h = std::log(20.0);
    CHECK_THAT(young_dimension(h, h, -h).dim, WithinAbs(2.0, 1e-15));
    DimensionEstimate skew = young_dimension(2.9957, 3.2, -3.2);
    CHECK_THAT(skew.dim, WithinAbs(2.0 * 2.9957 / 3.2, 1e-12));
    CHECK(skew.dim > 1.8);
    CHECK(skew.dim < 2.0);
    CHECK_THROWS_AS(young_dimension(3.0, 1.0, -1.0), inconsistent_inputs_error);
    CHECK_THROWS_AS(young_dimension(1.0, -1.0, -2.0), invalid_input_error);
    CHECK_THROWS_AS(young_dimension(0.0, 1.0, -1.0), invalid_input_error);
}

TEST_CASE("box counting recovers the dimension of plane and line") {
    std::vector<TorusPoint> full;
    const int G = 64;
    for (int i = 0; i < G; ++i)
        for (int j = 0; j < G; ++j) full.push_back({(i + 0.5) / G, (j + 0.5) / G});
    double plane = box_counting(full, {1.0 / 8, 1.0 / 16, 1.0 / 32});
    CHECK_THAT(plane, WithinAbs(2.0, 1e-9));

    std::vector<TorusPoint> diag;
    for (int i = 0; i < 4096; ++i) diag.push_back({(i + 0.5) / 4096, (i + 0.5) / 4096});
    double line = box_counting(diag, {1.0 / 8, 1.0 / 16, 1.0 / 32});
    CHECK_THAT(line, WithinAbs(1.0, 1e-9));

    CHECK_THROWS_AS(box_counting(full, {0.25}), insufficient_data_error);
    CHECK_THROWS_AS(box_counting({}, {0.25, 0.5}), invalid_input_error);
}

TEST_CASE("entropy fit on an exact geometric count") {
    std::vector<std::pair<int, std::int64_t>> counts;
    for (int n = 1; n <= 4; ++n)
        counts.push_back({n, static_cast<std::int64_t>(std::llround(std::pow(20.0, n)))});
    EntropyFit fit = entropy_fit(counts);
    CHECK_THAT(fit.slope, WithinAbs(std::log(20.0), 1e-12));
    CHECK_THAT(fit.residual, WithinAbs(0.0, 1e-12));
    CHECK_THAT(fit.endpoint_rate, WithinAbs(std::log(20.0), 1e-12));
    CHECK_THROWS_AS(entropy_fit({{1, 20}}), insufficient_data_error);
    CHECK_THROWS_AS(entropy_fit({{1, 0}, {2, 0}}), insufficient_data_error);
}
