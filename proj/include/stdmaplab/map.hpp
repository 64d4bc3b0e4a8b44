#ifndef STDMAPLAB_MAP_HPP
#define STDMAPLAB_MAP_HPP

#include <cmath>
#include <numbers>

#include "stdmaplab/errors.hpp"

namespace stdmaplab {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce a real to [0, 1). Guard against the 1.0 that floor-based
/// reduction can produce for tiny negatives.
inline double wrap01(double v) {
    double r = v - std::floor(v);
    if (r >= 1.0) r -= 1.0;
    return r;
}

/// Signed representative of v mod 1 in [-1/2, 1/2).
inline double wrap_signed(double v) {
    double r = v - std::round(v);
    if (r < -0.5) r += 1.0;
    if (r >= 0.5) r -= 1.0;
    return r;
}

/// Distance on the circle R/Z.
inline double circle_dist(double a, double b) {
    return std::abs(wrap_signed(a - b));
}

/// Coupling k together with every derived scale used downstream:
/// cone scales theta1/theta2, the local-manifold floor r0, the orbit
/// window T, the widths of the critical strips and the cocycle
/// contraction rate.
struct Params {
    double k = 0.0;
    double delta = 1.0 / 600.0;
    double theta1 = 0.0;              // k^(-2/5)
    double theta2 = 0.0;              // k^(-3/5)
    double r0 = 0.0;                  // k^(-7)
    int T = 0;                        // floor((1 + 7 delta) / (28 delta))
    double crit_halfwidth_outer = 0.0; // 2 k^(-3/10)
    double crit_halfwidth_inner = 0.0; // k^(-3/10)
    double contraction_rate = 0.0;    // k^(-4/5)

    /// Fill the derived fields from k without the k > 1 gate. Used for
    /// edge-case studies at small coupling; derive_params() is the
    /// validated entry point.
    static Params unchecked(double k) {
        Params p;
        p.k = k;
        p.theta1 = std::pow(k, -2.0 / 5.0);
        p.theta2 = std::pow(k, -3.0 / 5.0);
        p.r0 = std::pow(k, -7.0);
        p.T = static_cast<int>(std::floor((1.0 + 7.0 * p.delta) / (28.0 * p.delta)));
        p.crit_halfwidth_inner = std::pow(k, -3.0 / 10.0);
        p.crit_halfwidth_outer = 2.0 * p.crit_halfwidth_inner;
        p.contraction_rate = std::pow(k, -4.0 / 5.0);
        return p;
    }
};

inline Params derive_params(double k) {
    if (!std::isfinite(k) || k <= 1.0)
        throw invalid_parameter_error("coupling k must be finite and > 1, got " + std::to_string(k));
    return Params::unchecked(k);
}

/// Point on the torus R^2/Z^2, both coordinates kept in [0, 1).
struct TorusPoint {
    double x = 0.0;
    double y = 0.0;
};

struct TangentVec {
    double u = 0.0;
    double v = 0.0;

    double norm() const { return std::hypot(u, v); }
    TangentVec normalized() const {
        double n = norm();
        return {u / n, v / n};
    }
};

inline TangentVec operator+(TangentVec a, TangentVec b) { return {a.u + b.u, a.v + b.v}; }
inline TangentVec operator-(TangentVec a, TangentVec b) { return {a.u - b.u, a.v - b.v}; }
inline TangentVec operator*(double s, TangentVec a) { return {s * a.u, s * a.v}; }
inline double dot(TangentVec a, TangentVec b) { return a.u * b.u + a.v * b.v; }
inline double cross(TangentVec a, TangentVec b) { return a.u * b.v - a.v * b.u; }
/// Rotate by +pi/2.
inline TangentVec perp(TangentVec a) { return {-a.v, a.u}; }

/// Angle between the lines spanned by a and b, in [0, pi/2].
inline double line_angle(TangentVec a, TangentVec b) {
    return std::atan2(std::abs(cross(a, b)), std::abs(dot(a, b)));
}

struct Jacobian2 {
    double a11 = 0.0, a12 = 0.0;
    double a21 = 0.0, a22 = 0.0;

    double det() const { return a11 * a22 - a12 * a21; }
    double trace() const { return a11 + a22; }

    Jacobian2 inverse() const {
        double d = det();
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }
};

inline TangentVec operator*(const Jacobian2& m, TangentVec v) {
    return {m.a11 * v.u + m.a12 * v.v, m.a21 * v.u + m.a22 * v.v};
}

inline Jacobian2 operator*(const Jacobian2& a, const Jacobian2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

/// Largest singular value via the closed 2x2 form.
inline double op_norm(const Jacobian2& m) {
    double s = m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22;
    double d = m.det();
    double disc = s * s - 4.0 * d * d;
    if (disc < 0.0) disc = 0.0;
    return std::sqrt(0.5 * (s + std::sqrt(disc)));
}

/// Smallest singular value.
inline double min_singular_value(const Jacobian2& m) {
    double s = m.a11 * m.a11 + m.a12 * m.a12 + m.a21 * m.a21 + m.a22 * m.a22;
    double d = m.det();
    double disc = s * s - 4.0 * d * d;
    if (disc < 0.0) disc = 0.0;
    double lo = 0.5 * (s - std::sqrt(disc));
    if (lo < 0.0) lo = 0.0;
    return std::sqrt(lo);
}

inline double op_norm_inverse(const Jacobian2& m) { return op_norm(m.inverse()); }

/// One application of the map: (x, y) -> (2x - y + k sin(2 pi x) mod 1, x).
inline TorusPoint apply(const Params& params, TorusPoint p) {
    return {wrap01(2.0 * p.x - p.y + params.k * std::sin(kTwoPi * p.x)), p.x};
}

/// Closed-form inverse: (x, y) -> (y, 2y - x + k sin(2 pi y) mod 1).
inline TorusPoint apply_inverse(const Params& params, TorusPoint p) {
    return {p.y, wrap01(2.0 * p.y - p.x + params.k * std::sin(kTwoPi * p.y))};
}

/// Derivative at p: [[2 pi k cos(2 pi x) + 2, -1], [1, 0]], det = 1.
inline Jacobian2 jacobian(const Params& params, TorusPoint p) {
    return {kTwoPi * params.k * std::cos(kTwoPi * p.x) + 2.0, -1.0, 1.0, 0.0};
}

/// Derivative of the inverse map at p, i.e. Df^(-1)(p) = [Df(f^(-1) p)]^(-1).
inline Jacobian2 jacobian_inverse(const Params& params, TorusPoint p) {
    double t = kTwoPi * params.k * std::cos(kTwoPi * p.y) + 2.0;
    return {0.0, 1.0, -1.0, t};
}

/// The reversing involution (x, y) -> (y, x).
inline TorusPoint involution(TorusPoint p) { return {p.y, p.x}; }

inline TangentVec involution_push(TangentVec v) { return {v.v, v.u}; }

/// Euclidean distance between nearest lift representatives; in [0, sqrt(2)/2].
inline double torus_dist(TorusPoint p, TorusPoint q) {
    return std::hypot(wrap_signed(p.x - q.x), wrap_signed(p.y - q.y));
}

inline TorusPoint apply_n(const Params& params, TorusPoint p, int n) {
    for (int i = 0; i < n; ++i) p = apply(params, p);
    return p;
}

inline TorusPoint apply_inverse_n(const Params& params, TorusPoint p, int n) {
    for (int i = 0; i < n; ++i) p = apply_inverse(params, p);
    return p;
}

} // namespace stdmaplab

#endif
