#ifndef STDMAPLAB_COCYCLE_HPP
#define STDMAPLAB_COCYCLE_HPP

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stdmaplab/errors.hpp"
#include "stdmaplab/map.hpp"

namespace stdmaplab {

/// Orbit segment f^(-n_back)(p), ..., p, ..., f^(n_fwd)(p) with the
/// Jacobian evaluated at every point.
struct OrbitWindow {
    TorusPoint base;
    int n_back = 0;
    int n_fwd = 0;
    std::vector<TorusPoint> points;    // index i stores f^(i - n_back)(p)
    std::vector<Jacobian2> jacobians;

    const TorusPoint& at(int offset) const { return points[static_cast<std::size_t>(offset + n_back)]; }
    const Jacobian2& jacobian_at(int offset) const { return jacobians[static_cast<std::size_t>(offset + n_back)]; }
};

inline OrbitWindow iterate_orbit(const Params& params, TorusPoint p, int n_back, int n_fwd) {
    if (n_back < 0 || n_fwd < 0)
        throw invalid_input_error("orbit window lengths must be nonnegative");
    OrbitWindow w;
    w.base = p;
    w.n_back = n_back;
    w.n_fwd = n_fwd;
    w.points.resize(static_cast<std::size_t>(n_back + n_fwd + 1));
    w.points[static_cast<std::size_t>(n_back)] = p;
    TorusPoint back = p;
    for (int i = 1; i <= n_back; ++i) {
        back = apply_inverse(params, back);
        w.points[static_cast<std::size_t>(n_back - i)] = back;
    }
    TorusPoint fwd = p;
    for (int i = 1; i <= n_fwd; ++i) {
        fwd = apply(params, fwd);
        w.points[static_cast<std::size_t>(n_back + i)] = fwd;
    }
    w.jacobians.reserve(w.points.size());
    for (const auto& q : w.points) w.jacobians.push_back(jacobian(params, q));
    return w;
}

struct LyapunovEstimate {
    double lambda_plus = 0.0;  // nats per iterate
    double lambda_minus = 0.0;
    int horizon = 0;
};

enum class TimeDirection { forward, backward };

/// Largest Lyapunov exponent from the renormalized cocycle product of a
/// generic vector; area preservation pins lambda_minus = -lambda_plus.
inline LyapunovEstimate lyapunov(const Params& params, TorusPoint p, int horizon,
                                 TimeDirection dir = TimeDirection::forward) {
    if (horizon < 100) throw invalid_input_error("lyapunov horizon must be >= 100");
    TangentVec v{0.6401233801046836, 0.7682712762517914}; // fixed generic direction
    double log_sum = 0.0;
    for (int i = 0; i < horizon; ++i) {
        Jacobian2 j = dir == TimeDirection::forward ? jacobian(params, p)
                                                    : jacobian_inverse(params, p);
        v = j * v;
        double n = v.norm();
        if (!std::isfinite(n) || n == 0.0)
            throw numeric_overflow_error("cocycle product lost finiteness at step " + std::to_string(i));
        log_sum += std::log(n);
        v = {v.u / n, v.v / n};
        p = dir == TimeDirection::forward ? apply(params, p) : apply_inverse(params, p);
    }
    LyapunovEstimate est;
    est.horizon = horizon;
    est.lambda_plus = log_sum / horizon;
    est.lambda_minus = -est.lambda_plus;
    return est;
}

struct OseledetsFrame {
    TangentVec e_minus; // unit, finite-horizon stable direction
    TangentVec e_plus;  // unit, finite-horizon unstable direction
    int horizon = 0;
};

namespace detail {

inline constexpr double kOseledetsCauchyTol = 1e-10;
inline constexpr TangentVec kGenericDirection{0.6401233801046836, 0.7682712762517914};

/// Push a generic vector from f^(-h)(p) forward to p along the computed
/// backward orbit; converges to the unstable direction at p.
inline TangentVec unstable_direction(const Params& params, TorusPoint p, int h) {
    std::vector<TorusPoint> back(static_cast<std::size_t>(h));
    TorusPoint q = p;
    for (int i = 0; i < h; ++i) {
        q = apply_inverse(params, q);
        back[static_cast<std::size_t>(i)] = q; // back[i] = f^(-(i+1))(p)
    }
    TangentVec v = kGenericDirection;
    for (int i = h - 1; i >= 0; --i) {
        v = jacobian(params, back[static_cast<std::size_t>(i)]) * v;
        double n = v.norm();
        if (!std::isfinite(n) || n == 0.0)
            throw numeric_overflow_error("unstable direction product not finite");
        v = {v.u / n, v.v / n};
    }
    return v;
}

/// Pull a generic vector from f^(h)(p) back to p; converges to the stable
/// direction at p.
inline TangentVec stable_direction(const Params& params, TorusPoint p, int h) {
    std::vector<TorusPoint> fwd(static_cast<std::size_t>(h));
    TorusPoint q = p;
    for (int i = 0; i < h; ++i) {
        fwd[static_cast<std::size_t>(i)] = q; // fwd[i] = f^i(p)
        q = apply(params, q);
    }
    TangentVec v = kGenericDirection;
    for (int i = h - 1; i >= 0; --i) {
        v = jacobian(params, fwd[static_cast<std::size_t>(i)]).inverse() * v;
        double n = v.norm();
        if (!std::isfinite(n) || n == 0.0)
            throw numeric_overflow_error("stable direction product not finite");
        v = {v.u / n, v.v / n};
    }
    return v;
}

} // namespace detail

/// Finite-horizon Oseledets directions by push-forward/pull-back power
/// iteration. Convergence is checked by comparing horizons h-1 and h;
/// failure of the Cauchy criterion (e.g. near elliptic islands) raises
/// frame_unresolved_error.
inline OseledetsFrame oseledets_frame(const Params& params, TorusPoint p, int horizon = 30) {
    if (horizon < 20) throw invalid_input_error("oseledets horizon must be >= 20");
    TangentVec plus_prev = detail::unstable_direction(params, p, horizon - 1);
    TangentVec plus = detail::unstable_direction(params, p, horizon);
    if (line_angle(plus_prev, plus) > detail::kOseledetsCauchyTol)
        throw frame_unresolved_error("unstable direction not Cauchy at requested horizon");
    TangentVec minus_prev = detail::stable_direction(params, p, horizon - 1);
    TangentVec minus = detail::stable_direction(params, p, horizon);
    if (line_angle(minus_prev, minus) > detail::kOseledetsCauchyTol)
        throw frame_unresolved_error("stable direction not Cauchy at requested horizon");
    return {minus, plus, horizon};
}

struct PlissOutput {
    std::vector<int> times;
    double density_lower_bound = 0.0;
};

/// Indices i such that every forward partial average of the sequence from
/// i stays <= alpha2 + eps. The density lower bound is the Pliss bound
/// eps / (alpha2 + eps - alpha1), valid whenever the Birkhoff average of
/// the sequence is <= alpha2.
inline PlissOutput pliss_times(std::span<const double> seq, double alpha1, double alpha2, double eps) {
    if (!(eps > 0.0)) throw invalid_input_error("pliss eps must be positive");
    if (!(alpha1 < alpha2)) throw invalid_input_error("pliss requires alpha1 < alpha2");
    for (double a : seq)
        if (!(a > alpha1)) throw invalid_input_error("pliss sequence entries must exceed alpha1");
    const double c = alpha2 + eps;
    const std::size_t n = seq.size();
    PlissOutput out;
    out.density_lower_bound = eps / (alpha2 + eps - alpha1);
    if (n == 0) return out;
    // i is a Pliss time iff max over m > i of sum_{j=i}^{m-1} (a_j - c) <= 0;
    // the running max from the right makes this a single backward pass.
    std::vector<char> is_time(n, 0);
    double max_suffix = -1.0; // max over partial sums starting at i, seeded below
    for (std::size_t ri = 0; ri < n; ++ri) {
        std::size_t i = n - 1 - ri;
        double b = seq[i] - c;
        double m = ri == 0 ? b : b + (max_suffix > 0.0 ? max_suffix : 0.0);
        is_time[i] = m <= 0.0;
        max_suffix = m;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (is_time[i]) out.times.push_back(static_cast<int>(i));
    return out;
}

namespace detail {

/// logs[j] = log ||Df(f^j(q)) restricted to E^- at f^j(q)||, j < count.
/// Forward-pushing an approximate stable vector is numerically hopeless
/// (its rounding component along E^+ gains a factor ~||Df||^2 per step), so
/// the stable direction is resolved at the far end of the window and pulled
/// back, which is the contracting and therefore stable recursion; the
/// one-dimensional stretch is the reciprocal of the pull-back growth.
inline std::vector<double> stable_stretch_logs(const Params& params, TorusPoint q, int count,
                                               int frame_horizon) {
    std::vector<TorusPoint> orbit(static_cast<std::size_t>(count) + 1);
    orbit[0] = q;
    for (int i = 1; i <= count; ++i) orbit[static_cast<std::size_t>(i)] = apply(params, orbit[static_cast<std::size_t>(i - 1)]);
    TangentVec w = oseledets_frame(params, orbit[static_cast<std::size_t>(count)], frame_horizon).e_minus;
    std::vector<double> logs(static_cast<std::size_t>(count));
    for (int j = count - 1; j >= 0; --j) {
        w = jacobian(params, orbit[static_cast<std::size_t>(j)]).inverse() * w;
        double nu = w.norm();
        logs[static_cast<std::size_t>(j)] = -std::log(nu);
        w = {w.u / nu, w.v / nu};
    }
    return logs;
}

/// logs[j] = log ||Df^(-1)(f^(-j)(r)) restricted to E^+ at f^(-j)(r)||.
/// Mirror image of stable_stretch_logs: the unstable direction is resolved
/// at the far backward end and pushed forward.
inline std::vector<double> unstable_backward_stretch_logs(const Params& params, TorusPoint r,
                                                          int count, int frame_horizon) {
    std::vector<TorusPoint> orbit(static_cast<std::size_t>(count) + 1);
    orbit[0] = r;
    for (int i = 1; i <= count; ++i)
        orbit[static_cast<std::size_t>(i)] = apply_inverse(params, orbit[static_cast<std::size_t>(i - 1)]);
    TangentVec w = oseledets_frame(params, orbit[static_cast<std::size_t>(count)], frame_horizon).e_plus;
    std::vector<double> logs(static_cast<std::size_t>(count));
    for (int j = count - 1; j >= 0; --j) {
        w = jacobian(params, orbit[static_cast<std::size_t>(j + 1)]) * w;
        double s = w.norm();
        logs[static_cast<std::size_t>(j)] = -std::log(s);
        w = {w.u / s, w.v / s};
    }
    return logs;
}

inline bool partial_sums_below(const std::vector<double>& logs, double rate_log) {
    double sum = 0.0;
    int n = 0;
    for (double l : logs) {
        sum += l;
        ++n;
        if (!(sum < n * rate_log)) return false;
    }
    return true;
}

} // namespace detail

/// Membership in the set Z: the stable direction at f^(-1)(p) contracts at
/// rate k^(-4/5) under every forward partial product up to the horizon, and
/// the unstable direction at f(p) contracts at the same rate backwards. The
/// n = 1 backward condition is equivalent to the one-step stretch
/// ||Df(p) restricted to E+|| >= k^(4/5).
inline bool z_membership(const Params& params, TorusPoint p, int horizon, int frame_horizon = 30) {
    if (horizon < params.T)
        throw invalid_input_error("z membership horizon must be >= T");
    const double rate_log = std::log(params.contraction_rate);
    TorusPoint pm = apply_inverse(params, p);
    if (!detail::partial_sums_below(detail::stable_stretch_logs(params, pm, horizon, frame_horizon),
                                    rate_log))
        return false;
    TorusPoint pp = apply(params, p);
    return detail::partial_sums_below(
        detail::unstable_backward_stretch_logs(params, pp, horizon, frame_horizon), rate_log);
}

/// Membership in X: z_membership holds along the whole window |j| <= T-1.
inline bool x_membership(const Params& params, TorusPoint p, int frame_horizon = 30) {
    const int T = params.T;
    TorusPoint q = apply_inverse_n(params, p, T - 1);
    for (int j = -(T - 1); j <= T - 1; ++j) {
        if (!z_membership(params, q, T, frame_horizon)) return false;
        q = apply(params, q);
    }
    return true;
}

} // namespace stdmaplab

#endif
