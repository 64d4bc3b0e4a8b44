#ifndef STDMAPLAB_STATISTICS_HPP
#define STDMAPLAB_STATISTICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stdmaplab/errors.hpp"
#include "stdmaplab/map.hpp"

namespace stdmaplab {

/// Atomic measure summarized by a grid histogram and the low-order Fourier
/// coefficients m_hat(a, b) = (1/N) sum exp(-2 pi i (a x + b y)), computed
/// from the atoms directly. Coefficients are stored for |a|, |b| <= max_freq
/// and filled so that m_hat(-a, -b) is exactly the conjugate of m_hat(a, b).
struct EmpiricalMeasure {
    int grid_size = 0;
    std::vector<double> grid; // row-major, grid[ix * grid_size + iy]
    int max_freq = 0;
    std::vector<std::complex<double>> fourier;
    std::int64_t atom_count = 0;

    std::complex<double> coeff(int a, int b) const {
        int side = 2 * max_freq + 1;
        return fourier[static_cast<std::size_t>((a + max_freq) * side + (b + max_freq))];
    }
};

inline EmpiricalMeasure empirical_measure(const std::vector<TorusPoint>& points, int grid_size,
                                          int max_freq) {
    if (points.empty()) throw invalid_input_error("empirical measure of an empty point set");
    if (grid_size < 1 || max_freq < 0) throw invalid_input_error("bad measure resolution");
    EmpiricalMeasure m;
    m.grid_size = grid_size;
    m.max_freq = max_freq;
    m.atom_count = static_cast<std::int64_t>(points.size());
    std::vector<std::int64_t> counts(static_cast<std::size_t>(grid_size) * grid_size, 0);
    for (const auto& p : points) {
        auto ix = std::min<std::int64_t>(static_cast<std::int64_t>(p.x * grid_size), grid_size - 1);
        auto iy = std::min<std::int64_t>(static_cast<std::int64_t>(p.y * grid_size), grid_size - 1);
        ++counts[static_cast<std::size_t>(ix * grid_size + iy)];
    }
    m.grid.resize(counts.size());
    const double w = 1.0 / static_cast<double>(points.size());
    for (std::size_t i = 0; i < counts.size(); ++i) m.grid[i] = static_cast<double>(counts[i]) * w;

    const int side = 2 * max_freq + 1;
    m.fourier.assign(static_cast<std::size_t>(side) * side, {0.0, 0.0});
    for (int a = 0; a <= max_freq; ++a) {
        for (int b = -max_freq; b <= max_freq; ++b) {
            if (a == 0 && b < 0) continue; // filled by conjugate symmetry
            std::complex<double> sum{0.0, 0.0};
            for (const auto& p : points) {
                double phase = -kTwoPi * (a * p.x + b * p.y);
                sum += std::complex<double>(std::cos(phase), std::sin(phase));
            }
            sum *= w;
            m.fourier[static_cast<std::size_t>((a + max_freq) * side + (b + max_freq))] = sum;
            m.fourier[static_cast<std::size_t>((-a + max_freq) * side + (-b + max_freq))] =
                std::conj(sum);
        }
    }
    return m;
}

/// Weak* proxy: max |m1_hat - m2_hat| over the shared frequency box.
inline double measure_distance(const EmpiricalMeasure& m1, const EmpiricalMeasure& m2) {
    if (m1.max_freq != m2.max_freq)
        throw invalid_input_error("measure distance requires matching frequency boxes");
    double worst = 0.0;
    for (std::size_t i = 0; i < m1.fourier.size(); ++i)
        worst = std::max(worst, std::abs(m1.fourier[i] - m2.fourier[i]));
    return worst;
}

/// Distance between m and its involution push-forward; the push-forward
/// swaps the Fourier indices, so this is max |m_hat(a, b) - m_hat(b, a)|.
inline double involution_defect(const EmpiricalMeasure& m) {
    double worst = 0.0;
    for (int a = -m.max_freq; a <= m.max_freq; ++a)
        for (int b = -m.max_freq; b <= m.max_freq; ++b)
            worst = std::max(worst, std::abs(m.coeff(a, b) - m.coeff(b, a)));
    return worst;
}

struct DensityResult {
    bool dense = false;
    double covering_radius = 0.0;
};

/// Covering radius over a 512x512 probe lattice: the largest torus distance
/// from a probe to the nearest input point. Dense sets use ring search over
/// a spatial hash; small sets fall back to direct scans.
inline DensityResult density_check(const std::vector<TorusPoint>& points, double epsilon) {
    if (points.empty()) throw invalid_input_error("density check of an empty point set");
    if (!(epsilon > 0.0)) throw invalid_input_error("epsilon must be positive");
    constexpr int kProbe = 512;
    const double cell = 1.0 / kProbe;
    double covering = 0.0;

    if (points.size() <= 512) {
        for (int px = 0; px < kProbe; ++px) {
            for (int py = 0; py < kProbe; ++py) {
                TorusPoint probe{px * cell, py * cell};
                double best = std::numeric_limits<double>::infinity();
                for (const auto& p : points) best = std::min(best, torus_dist(probe, p));
                covering = std::max(covering, best);
            }
        }
        return {covering <= epsilon, covering};
    }

    std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets;
    auto key = [&](std::int64_t ix, std::int64_t iy) { return ix * kProbe + iy; };
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto ix = std::min<std::int64_t>(static_cast<std::int64_t>(points[i].x * kProbe), kProbe - 1);
        auto iy = std::min<std::int64_t>(static_cast<std::int64_t>(points[i].y * kProbe), kProbe - 1);
        buckets[key(ix, iy)].push_back(i);
    }
    for (int px = 0; px < kProbe; ++px) {
        for (int py = 0; py < kProbe; ++py) {
            TorusPoint probe{px * cell, py * cell};
            double best = std::numeric_limits<double>::infinity();
            for (int radius = 0; radius < kProbe; ++radius) {
                if (best < (radius - 1) * cell) break; // farther rings cannot improve
                for (int ox = -radius; ox <= radius; ++ox) {
                    for (int oy = -radius; oy <= radius; ++oy) {
                        if (std::max(std::abs(ox), std::abs(oy)) != radius) continue;
                        std::int64_t ix = ((px + ox) % kProbe + kProbe) % kProbe;
                        std::int64_t iy = ((py + oy) % kProbe + kProbe) % kProbe;
                        auto it = buckets.find(key(ix, iy));
                        if (it == buckets.end()) continue;
                        for (std::size_t idx : it->second)
                            best = std::min(best, torus_dist(probe, points[idx]));
                    }
                }
            }
            covering = std::max(covering, best);
        }
    }
    return {covering <= epsilon, covering};
}

struct EntropyFit {
    std::vector<std::pair<int, std::int64_t>> counts;
    double slope = 0.0;     // nats per iterate
    double intercept = 0.0;
    double residual = 0.0;  // rms of the least-squares residuals
    double endpoint_rate = 0.0; // log(count at n_max) / n_max
};

/// Least-squares slope of log(count) against n.
inline EntropyFit entropy_fit(const std::vector<std::pair<int, std::int64_t>>& counts) {
    std::vector<std::pair<int, std::int64_t>> usable;
    for (const auto& [n, c] : counts)
        if (c >= 1) usable.push_back({n, c});
    std::sort(usable.begin(), usable.end());
    usable.erase(std::unique(usable.begin(), usable.end(),
                             [](const auto& a, const auto& b) { return a.first == b.first; }),
                 usable.end());
    if (usable.size() < 2)
        throw insufficient_data_error("entropy fit needs counts at >= 2 distinct n");
    EntropyFit fit;
    fit.counts = usable;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(usable.size());
    for (const auto& [n, c] : usable) {
        double x = n;
        double y = std::log(static_cast<double>(c));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = m * sxx - sx * sx;
    fit.slope = (m * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / m;
    double ss = 0.0;
    for (const auto& [n, c] : usable) {
        double r = std::log(static_cast<double>(c)) - (fit.slope * n + fit.intercept);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / m);
    const auto& last = usable.back();
    fit.endpoint_rate = std::log(static_cast<double>(last.second)) / last.first;
    return fit;
}

struct DimensionEstimate {
    double h = 0.0;
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double dim = 0.0;
};

/// Dimension formula dim = h (1/lambda_plus - 1/lambda_minus), guarded by
/// the entropy-vs-exponent inequality h <= min(lambda_plus, -lambda_minus);
/// a violation signals census or fit bias in the inputs.
inline DimensionEstimate young_dimension(double h, double lambda_plus, double lambda_minus) {
    if (!(lambda_plus > 0.0) || !(lambda_minus < 0.0) || !(h > 0.0))
        throw invalid_input_error("young_dimension needs h > 0 and lambda_plus > 0 > lambda_minus");
    if (h > std::min(lambda_plus, -lambda_minus))
        throw inconsistent_inputs_error("entropy exceeds an exponent: h > min(l+, -l-)");
    DimensionEstimate est{h, lambda_plus, lambda_minus, h * (1.0 / lambda_plus - 1.0 / lambda_minus)};
    return est;
}

/// Least-squares slope of log N(eps) against log(1/eps) over occupied boxes.
inline double box_counting(const std::vector<TorusPoint>& points, const std::vector<double>& scales) {
    if (points.empty()) throw invalid_input_error("box counting of an empty point set");
    if (scales.size() < 2) throw insufficient_data_error("box counting needs >= 2 scales");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (double eps : scales) {
        if (!(eps > 0.0) || !(eps < 1.0)) throw invalid_input_error("box scales must lie in (0,1)");
        auto boxes_per_side = static_cast<std::int64_t>(std::ceil(1.0 / eps));
        std::unordered_set<std::int64_t> occupied;
        for (const auto& p : points) {
            auto ix = std::min<std::int64_t>(static_cast<std::int64_t>(p.x / eps), boxes_per_side - 1);
            auto iy = std::min<std::int64_t>(static_cast<std::int64_t>(p.y / eps), boxes_per_side - 1);
            occupied.insert(ix * boxes_per_side + iy);
        }
        double x = std::log(1.0 / eps);
        double y = std::log(static_cast<double>(occupied.size()));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(scales.size());
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

} // namespace stdmaplab

#endif
