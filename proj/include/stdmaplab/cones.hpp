#ifndef STDMAPLAB_CONES_HPP
#define STDMAPLAB_CONES_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "stdmaplab/cocycle.hpp"
#include "stdmaplab/errors.hpp"
#include "stdmaplab/map.hpp"
#include "stdmaplab/parallel.hpp"
#include "stdmaplab/rng.hpp"

namespace stdmaplab {

/// Symmetric cone around a unit axis: v belongs iff
/// aperture * |component along axis| >= |component along perp|.
struct Cone {
    TangentVec axis;
    double aperture = 0.0;

    static Cone horizontal(double aperture) { return {{1.0, 0.0}, aperture}; }
    static Cone vertical(double aperture) { return {{0.0, 1.0}, aperture}; }
};

/// Boundary counts as inside.
inline bool cone_contains(const Cone& c, TangentVec v) {
    if (v.u == 0.0 && v.v == 0.0) throw invalid_input_error("cone membership of the zero vector");
    double along = std::abs(dot(c.axis, v));
    double across = std::abs(cross(c.axis, v));
    return c.aperture * along >= across;
}

/// Signed margin of membership, positive inside. Normalized by |v| so the
/// value is comparable across samples.
inline double cone_margin(const Cone& c, TangentVec v) {
    double along = std::abs(dot(c.axis, v));
    double across = std::abs(cross(c.axis, v));
    return (c.aperture * along - across) / v.norm();
}

/// Position relative to the critical strips around x or y in {1/4, 3/4}:
/// Crit1 uses half-width 2 k^(-3/10), Crit2 half-width k^(-3/10), both open.
/// Components of the complements are numbered 1..4 so that the j-th piece
/// of the inner good region sits inside the j-th piece of the outer one.
struct RegionLabel {
    bool in_crit1 = false;
    bool in_crit2 = false;
    std::optional<int> g1_component;
    std::optional<int> g2_component;
};

namespace detail {

inline bool coordinate_in_strip(double x, double halfwidth) {
    return circle_dist(x, 0.25) < halfwidth || circle_dist(x, 0.75) < halfwidth;
}

/// 0 for the component containing 1/2, 1 for the one containing 0.
inline int coordinate_side(double x, double halfwidth) {
    return circle_dist(x, 0.5) <= 0.25 - halfwidth ? 0 : 1;
}

inline std::optional<int> good_component(TorusPoint p, double halfwidth) {
    if (coordinate_in_strip(p.x, halfwidth) || coordinate_in_strip(p.y, halfwidth))
        return std::nullopt;
    return 1 + coordinate_side(p.x, halfwidth) + 2 * coordinate_side(p.y, halfwidth);
}

} // namespace detail

inline RegionLabel classify_region(const Params& params, TorusPoint p) {
    RegionLabel label;
    label.in_crit1 = detail::coordinate_in_strip(p.x, params.crit_halfwidth_outer) ||
                     detail::coordinate_in_strip(p.y, params.crit_halfwidth_outer);
    label.in_crit2 = detail::coordinate_in_strip(p.x, params.crit_halfwidth_inner) ||
                     detail::coordinate_in_strip(p.y, params.crit_halfwidth_inner);
    if (!label.in_crit1) label.g1_component = detail::good_component(p, params.crit_halfwidth_outer);
    if (!label.in_crit2) label.g2_component = detail::good_component(p, params.crit_halfwidth_inner);
    return label;
}

inline bool in_g1(const Params& params, TorusPoint p) {
    return !(detail::coordinate_in_strip(p.x, params.crit_halfwidth_outer) ||
             detail::coordinate_in_strip(p.y, params.crit_halfwidth_outer));
}

inline bool in_g2(const Params& params, TorusPoint p) {
    return !(detail::coordinate_in_strip(p.x, params.crit_halfwidth_inner) ||
             detail::coordinate_in_strip(p.y, params.crit_halfwidth_inner));
}

/// Smallest cone containing the image of c under Df(p), from the images of
/// the two boundary rays. Fails once the image rays spread beyond pi/2,
/// where an axis-plus-aperture cone stops being a faithful description.
inline Cone cone_image(const Params& params, TorusPoint p, const Cone& c) {
    Jacobian2 j = jacobian(params, p);
    TangentVec n = perp(c.axis);
    TangentVec w_plus = (j * (c.axis + c.aperture * n)).normalized();
    TangentVec w_minus = (j * (c.axis - c.aperture * n)).normalized();
    double spread = std::atan2(std::abs(cross(w_plus, w_minus)), dot(w_plus, w_minus));
    if (spread > 0.5 * std::numbers::pi)
        throw cone_degenerate_error("image rays spread beyond pi/2");
    TangentVec axis = (w_plus + w_minus).normalized();
    return {axis, std::tan(0.5 * spread)};
}

/// Minimum of ||Df(p) v|| over unit v in the cone. The quadratic form
/// v -> ||Df v||^2 restricted to the unit circle is A + B cos(2 phi) +
/// C sin(2 phi); the minimum over the cone's arc is attained at a boundary
/// ray or at an interior critical phase of the form.
inline double min_expansion_in_cone(const Params& params, TorusPoint p, const Cone& c) {
    Jacobian2 j = jacobian(params, p);
    TangentVec a = c.axis.normalized();
    TangentVec n = perp(a);
    TangentVec ja = j * a;
    TangentVec jn = j * n;
    double e = dot(ja, ja);
    double f = dot(jn, jn);
    double g = dot(ja, jn);
    double mean = 0.5 * (e + f);
    double cos_amp = 0.5 * (e - f);
    double sin_amp = g;
    double alpha = std::atan(c.aperture);
    auto value = [&](double phi) { return mean + cos_amp * std::cos(2.0 * phi) + sin_amp * std::sin(2.0 * phi); };
    double best = std::min(value(alpha), value(-alpha));
    // interior critical phases of the trig form, spaced pi/2 apart
    double phi0 = 0.5 * std::atan2(sin_amp, cos_amp);
    for (int m = -2; m <= 2; ++m) {
        double phi = phi0 + m * 0.5 * std::numbers::pi;
        if (phi >= -alpha && phi <= alpha) best = std::min(best, value(phi));
    }
    if (best < 0.0) best = 0.0;
    return std::sqrt(best);
}

/// Monte Carlo audit report, serialized by the CLI as
/// {k, samples, lemma, pass_rate, worst_margin}.
struct ConeAuditReport {
    double k = 0.0;
    std::int64_t samples = 0;
    std::string lemma;
    double pass_rate = 0.0;
    double worst_margin = 0.0;
};

namespace detail {

inline TorusPoint sample_in_g2(const Params& params, const CounterRng& rng, std::uint64_t stream,
                               std::uint64_t& counter) {
    for (;;) {
        TorusPoint p = rng.point(stream, counter++);
        if (in_g2(params, p)) return p;
    }
}

} // namespace detail

/// Image of the wide horizontal cone (aperture 4/theta1) under Df at points
/// of G2 must fit inside the narrow horizontal cone (aperture theta2). The
/// margin is the angular gap between the image boundary rays and the target
/// cone boundary.
inline ConeAuditReport audit_cone_preservation(const Params& params, std::int64_t samples,
                                               std::uint64_t seed, unsigned threads = 0) {
    if (threads == 0) threads = default_thread_count();
    CounterRng rng(seed);
    const Cone wide = Cone::horizontal(4.0 / params.theta1);
    const double target_half_angle = std::atan(params.theta2);
    std::vector<char> pass(static_cast<std::size_t>(samples));
    std::vector<double> margin(static_cast<std::size_t>(samples));
    parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
        std::uint64_t counter = 0;
        TorusPoint p = detail::sample_in_g2(params, rng, static_cast<std::uint64_t>(i), counter);
        bool ok;
        double m;
        try {
            Cone image = cone_image(params, p, wide);
            double tilt = std::atan2(std::abs(image.axis.v), std::abs(image.axis.u));
            double half = std::atan(image.aperture);
            m = target_half_angle - (tilt + half);
            ok = m >= 0.0;
        } catch (const cone_degenerate_error&) {
            ok = false;
            m = -0.5 * std::numbers::pi;
        }
        pass[i] = ok;
        margin[i] = m;
    });
    ConeAuditReport report;
    report.k = params.k;
    report.samples = samples;
    report.lemma = "cone-preservation";
    std::int64_t good = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pass.size(); ++i) {
        good += pass[i];
        if (margin[i] < worst) worst = margin[i];
    }
    report.pass_rate = samples == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(samples);
    report.worst_margin = worst;
    return report;
}

/// Unit vectors of the narrow horizontal cone must be stretched by more
/// than sqrt(k) at every point of G2. The margin is min expansion minus
/// sqrt(k).
inline ConeAuditReport audit_cone_expansion(const Params& params, std::int64_t samples,
                                            std::uint64_t seed, unsigned threads = 0) {
    if (threads == 0) threads = default_thread_count();
    CounterRng rng(seed);
    const Cone narrow = Cone::horizontal(params.theta2);
    const double bound = std::sqrt(params.k);
    std::vector<double> margin(static_cast<std::size_t>(samples));
    parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
        std::uint64_t counter = 0;
        TorusPoint p = detail::sample_in_g2(params, rng, static_cast<std::uint64_t>(i), counter);
        margin[i] = min_expansion_in_cone(params, p, narrow) - bound;
    });
    ConeAuditReport report;
    report.k = params.k;
    report.samples = samples;
    report.lemma = "cone-expansion";
    std::int64_t good = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (double m : margin) {
        good += m > 0.0;
        if (m < worst) worst = m;
    }
    report.pass_rate = samples == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(samples);
    report.worst_margin = worst;
    return report;
}

/// Fraction of z-passing sample points that land in the good region G1.
/// Reported as a diagnostic; the inclusion is asymptotic in k and fails at
/// desk-scale couplings.
inline ConeAuditReport audit_z_in_g1(const Params& params, std::int64_t samples, std::uint64_t seed,
                                     unsigned threads = 0) {
    if (threads == 0) threads = default_thread_count();
    CounterRng rng(seed);
    std::vector<signed char> state(static_cast<std::size_t>(samples)); // 1 pass, 0 fail, -1 not in Z
    parallel_for(static_cast<std::size_t>(samples), threads, [&](std::size_t i) {
        TorusPoint p = rng.point(static_cast<std::uint64_t>(i), 0);
        bool in_z = false;
        try {
            in_z = z_membership(params, p, params.T);
        } catch (const error&) {
            in_z = false;
        }
        state[i] = in_z ? (in_g1(params, p) ? 1 : 0) : -1;
    });
    ConeAuditReport report;
    report.k = params.k;
    report.lemma = "z-subset-g1";
    std::int64_t z_count = 0, good = 0;
    for (signed char s : state) {
        if (s >= 0) {
            ++z_count;
            good += s;
        }
    }
    report.samples = z_count;
    report.pass_rate = z_count == 0 ? 0.0 : static_cast<double>(good) / static_cast<double>(z_count);
    report.worst_margin = 0.0;
    return report;
}

} // namespace stdmaplab

#endif
