#ifndef STDMAPLAB_PERIODIC_HPP
#define STDMAPLAB_PERIODIC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stdmaplab/errors.hpp"
#include "stdmaplab/map.hpp"
#include "stdmaplab/parallel.hpp"

namespace stdmaplab {

enum class StabilityKind { hyperbolic, elliptic, parabolic };

inline const char* to_string(StabilityKind kind) {
    switch (kind) {
        case StabilityKind::hyperbolic: return "hyperbolic";
        case StabilityKind::elliptic: return "elliptic";
        default: return "parabolic";
    }
}

/// Fixed point of f^n with multiplier data. With det Df^n = 1 the trace is
/// a complete stability invariant: |trace| > 2 hyperbolic, < 2 elliptic,
/// and the Lyapunov rate is log of the larger eigenvalue modulus over n.
struct PeriodicPoint {
    TorusPoint point;
    int n = 1;
    double trace = 0.0;
    double lambda = 0.0;
    StabilityKind kind = StabilityKind::elliptic;
};

struct PeriodicDatabase {
    double k = 0.0;
    int n = 1;
    double rho = 0.0; // applied Lyapunov filter; 0 means unfiltered
    std::vector<PeriodicPoint> points;
    std::int64_t seeds_used = 0;
    std::int64_t discarded_seeds = 0; // singular or non-converging Newton runs
    double newton_tol = 1e-11;
    double dedup_tol = 1e-6;
    int grid_res = 0;
};

inline constexpr double kParabolicTraceTol = 1e-6;

namespace detail {

inline Jacobian2 chain_jacobian(const Params& params, TorusPoint p, int n) {
    Jacobian2 m{1.0, 0.0, 0.0, 1.0};
    for (int i = 0; i < n; ++i) {
        m = jacobian(params, p) * m;
        p = apply(params, p);
    }
    return m;
}

inline PeriodicPoint classify_unchecked(const Params& params, TorusPoint p, int n) {
    PeriodicPoint out;
    out.point = p;
    out.n = n;
    double t = chain_jacobian(params, p, n).trace();
    out.trace = t;
    double a = std::abs(t);
    if (std::abs(a - 2.0) <= kParabolicTraceTol) {
        out.kind = StabilityKind::parabolic;
        out.lambda = 0.0;
    } else if (a > 2.0) {
        out.kind = StabilityKind::hyperbolic;
        out.lambda = std::log(0.5 * (a + std::sqrt(a * a - 4.0))) / n;
    } else {
        out.kind = StabilityKind::elliptic;
        out.lambda = 0.0;
    }
    return out;
}

} // namespace detail

inline PeriodicPoint classify(const Params& params, TorusPoint p, int n) {
    if (torus_dist(apply_n(params, p, n), p) > 1e-9)
        throw not_periodic_error("point does not return to itself under f^n within 1e-9");
    return detail::classify_unchecked(params, p, n);
}

struct FindOptions {
    double newton_tol = 1e-11;
    double dedup_tol = 1e-6;
    int max_steps = 30;
    bool least_period_only = false;
    unsigned threads = 0; // 0: hardware concurrency
};

namespace detail {

/// Damped Newton on the displacement d(p) = nearest lift of f^n(p) - p.
/// Returns the converged point, or nullopt for singular systems and
/// non-converging seeds. Acceptance uses a noise-aware tolerance: the
/// computed residual carries per-step rounding of size ~(k+3) eps amplified
/// by the remaining derivative factors, which at large multipliers sits
/// above the nominal tolerance; such points are accepted once the residual
/// reaches that floor (capped so the database-wide 1e-9 return invariant
/// still re-verifies).
inline std::optional<TorusPoint> newton_periodic(const Params& params, TorusPoint p, int n,
                                                 double tol, int max_steps) {
    constexpr double kResidualCap = 0.9e-9;
    const double eps = std::numeric_limits<double>::epsilon();
    auto displacement = [&](TorusPoint q) {
        TorusPoint image = apply_n(params, q, n);
        return TangentVec{wrap_signed(image.x - q.x), wrap_signed(image.y - q.y)};
    };
    // chain product plus the rounding amplification A = sum_j prod_{i>j} L_i
    auto chain_with_tol = [&](TorusPoint q) {
        Jacobian2 m{1.0, 0.0, 0.0, 1.0};
        double amp = 0.0;
        TorusPoint xq = q;
        for (int j = 0; j < n; ++j) {
            Jacobian2 jx = jacobian(params, xq);
            amp = amp * op_norm(jx) + 1.0;
            m = jx * m;
            xq = apply(params, xq);
        }
        double floor_tol = 8.0 * eps * (params.k + 3.0) * amp;
        return std::pair{m, std::min(std::max(tol, floor_tol), kResidualCap)};
    };

    TangentVec d = displacement(p);
    double res = d.norm();
    std::optional<TorusPoint> accepted;
    for (int step = 0; step < max_steps; ++step) {
        auto [j, tol_eff] = chain_with_tol(p);
        if (res <= tol_eff) accepted = p;
        if (res <= 1e-15) break; // nothing left to polish
        Jacobian2 sys{j.a11 - 1.0, j.a12, j.a21, j.a22 - 1.0};
        double det = sys.det();
        double scale = std::max({std::abs(sys.a11), std::abs(sys.a12), std::abs(sys.a21),
                                 std::abs(sys.a22), 1.0});
        if (std::abs(det) <= 1e-14 * scale * scale) break;
        TangentVec delta{(-d.u * sys.a22 + d.v * sys.a12) / det,
                         (-sys.a11 * d.v + sys.a21 * d.u) / det};
        double damping = 1.0;
        bool improved = false;
        for (int halving = 0; halving < 8 && !improved; ++halving) {
            TorusPoint trial{wrap01(p.x + damping * delta.u), wrap01(p.y + damping * delta.v)};
            TangentVec td = displacement(trial);
            if (td.norm() < res) {
                p = trial;
                d = td;
                res = td.norm();
                improved = true;
            }
            damping *= 0.5;
        }
        if (!improved) break; // stuck at the floor
    }
    if (res <= chain_with_tol(p).second) accepted = p;
    return accepted;
}

struct DedupGrid {
    double tol;
    std::int64_t ncells;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> cells;

    explicit DedupGrid(double tolerance)
        : tol(tolerance),
          ncells(std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(1.0 / tolerance)), 1,
                                          1 << 20)) {}

    std::int64_t key(double x, double y) const {
        auto ix = static_cast<std::int64_t>(std::floor(x * static_cast<double>(ncells)));
        auto iy = static_cast<std::int64_t>(std::floor(y * static_cast<double>(ncells)));
        ix = std::clamp<std::int64_t>(ix, 0, ncells - 1);
        iy = std::clamp<std::int64_t>(iy, 0, ncells - 1);
        return ix * ncells + iy;
    }

    bool contains(const std::vector<PeriodicPoint>& pts, TorusPoint p) const {
        auto ix = static_cast<std::int64_t>(std::floor(p.x * static_cast<double>(ncells)));
        auto iy = static_cast<std::int64_t>(std::floor(p.y * static_cast<double>(ncells)));
        for (std::int64_t ox = -1; ox <= 1; ++ox) {
            for (std::int64_t oy = -1; oy <= 1; ++oy) {
                std::int64_t kx = (ix + ox + ncells) % ncells;
                std::int64_t ky = (iy + oy + ncells) % ncells;
                auto it = cells.find(kx * ncells + ky);
                if (it == cells.end()) continue;
                for (std::size_t idx : it->second)
                    if (torus_dist(pts[idx].point, p) <= tol) return true;
            }
        }
        return false;
    }

    void insert(const std::vector<PeriodicPoint>& pts, std::size_t idx) {
        cells[key(pts[idx].point.x, pts[idx].point.y)].push_back(idx);
    }
};

inline int least_period(const Params& params, TorusPoint p, int n, double tol) {
    TorusPoint q = p;
    for (int m = 1; m < n; ++m) {
        q = apply(params, q);
        if (torus_dist(q, p) <= tol) return m;
    }
    return n;
}

} // namespace detail

/// Grid-seeded damped-Newton census of the fixed points of f^n. The
/// database is closed under f and under the involution: missing images are
/// re-polished with Newton and inserted, so the invariances hold at
/// dedup_tol no matter which basins the grid seeds found.
inline PeriodicDatabase find_periodic(const Params& params, int n, int grid_res,
                                      const FindOptions& opts = {}) {
    if (n < 1) throw invalid_input_error("period n must be >= 1");
    if (grid_res < 2) throw invalid_input_error("grid_res must be >= 2");
    unsigned threads = opts.threads == 0 ? default_thread_count() : opts.threads;

    PeriodicDatabase db;
    db.k = params.k;
    db.n = n;
    db.newton_tol = opts.newton_tol;
    db.dedup_tol = opts.dedup_tol;
    db.grid_res = grid_res;
    db.seeds_used = static_cast<std::int64_t>(grid_res) * grid_res;

    std::vector<std::optional<TorusPoint>> results(static_cast<std::size_t>(db.seeds_used));
    parallel_for(static_cast<std::size_t>(db.seeds_used), threads, [&](std::size_t idx) {
        int i = static_cast<int>(idx) / grid_res;
        int j = static_cast<int>(idx) % grid_res;
        TorusPoint seed{(i + 0.5) / grid_res, (j + 0.5) / grid_res};
        results[idx] = detail::newton_periodic(params, seed, n, opts.newton_tol, opts.max_steps);
    });

    std::vector<TorusPoint> found;
    found.reserve(results.size());
    for (const auto& r : results) {
        if (r)
            found.push_back(*r);
        else
            ++db.discarded_seeds;
    }
    std::sort(found.begin(), found.end(), [](TorusPoint a, TorusPoint b) {
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    });

    detail::DedupGrid grid(opts.dedup_tol);
    for (const TorusPoint& p : found) {
        if (grid.contains(db.points, p)) continue;
        db.points.push_back(detail::classify_unchecked(params, p, n));
        grid.insert(db.points, db.points.size() - 1);
    }

    // closure under f and the involution, re-polishing repaired points
    auto try_insert = [&](TorusPoint candidate) {
        if (grid.contains(db.points, candidate)) return;
        auto polished = detail::newton_periodic(params, candidate, n, opts.newton_tol, opts.max_steps);
        if (!polished) return;
        if (grid.contains(db.points, *polished)) return;
        db.points.push_back(detail::classify_unchecked(params, *polished, n));
        grid.insert(db.points, db.points.size() - 1);
    };
    for (int round = 0; round < 20; ++round) {
        std::size_t before = db.points.size();
        for (std::size_t i = 0; i < db.points.size(); ++i) {
            TorusPoint q = db.points[i].point;
            for (int m = 1; m < n; ++m) {
                q = apply(params, q);
                try_insert(q);
            }
            try_insert(involution(db.points[i].point));
        }
        if (db.points.size() == before) break;
    }

    if (opts.least_period_only) {
        std::vector<PeriodicPoint> filtered;
        for (const auto& pp : db.points)
            if (detail::least_period(params, pp.point, n, opts.newton_tol * 10) == n)
                filtered.push_back(pp);
        db.points = std::move(filtered);
    }

    std::sort(db.points.begin(), db.points.end(), [](const PeriodicPoint& a, const PeriodicPoint& b) {
        if (a.point.x != b.point.x) return a.point.x < b.point.x;
        return a.point.y < b.point.y;
    });
    return db;
}

inline PeriodicDatabase filter_rho_hyperbolic(const PeriodicDatabase& db, double rho) {
    if (!(rho > 0.0)) throw invalid_input_error("rho must be positive");
    PeriodicDatabase out = db;
    out.rho = rho;
    out.points.clear();
    for (const auto& pp : db.points)
        if (pp.lambda >= rho) out.points.push_back(pp);
    return out;
}

struct DatabaseAudit {
    std::int64_t closure_violations = 0;
    std::int64_t involution_violations = 0;
    std::int64_t residual_failures = 0;
    double count_ratio = 0.0; // #points / (4k)^n
    std::int64_t seeds_used = 0;
    std::int64_t discarded_seeds = 0;
};

/// Completeness heuristics: the point set must be closed under f and the
/// involution, every member must re-verify its return residual, and the
/// census size is compared against the (4k)^n root-count heuristic.
inline DatabaseAudit audit_database(const Params& params, const PeriodicDatabase& db) {
    DatabaseAudit audit;
    audit.seeds_used = db.seeds_used;
    audit.discarded_seeds = db.discarded_seeds;
    detail::DedupGrid grid(db.dedup_tol);
    for (std::size_t i = 0; i < db.points.size(); ++i) grid.insert(db.points, i);
    for (const auto& pp : db.points) {
        if (torus_dist(apply_n(params, pp.point, db.n), pp.point) > 1e-9) ++audit.residual_failures;
        if (!grid.contains(db.points, apply(params, pp.point))) ++audit.closure_violations;
        if (!grid.contains(db.points, involution(pp.point))) ++audit.involution_violations;
    }
    audit.count_ratio = static_cast<double>(db.points.size()) / std::pow(4.0 * params.k, db.n);
    return audit;
}

} // namespace stdmaplab

#endif
