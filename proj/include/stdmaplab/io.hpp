#ifndef STDMAPLAB_IO_HPP
#define STDMAPLAB_IO_HPP

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "stdmaplab/cones.hpp"
#include "stdmaplab/errors.hpp"
#include "stdmaplab/manifolds.hpp"
#include "stdmaplab/periodic.hpp"
#include "stdmaplab/statistics.hpp"

namespace stdmaplab {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const PeriodicDatabase& db) {
    ordered_json points = ordered_json::array();
    for (const auto& pp : db.points) {
        points.push_back({{"x", pp.point.x},
                          {"y", pp.point.y},
                          {"trace", pp.trace},
                          {"lambda", pp.lambda},
                          {"kind", to_string(pp.kind)}});
    }
    return ordered_json{{"k", db.k},
                        {"n", db.n},
                        {"rho", db.rho},
                        {"newton_tol", db.newton_tol},
                        {"dedup_tol", db.dedup_tol},
                        {"grid_res", db.grid_res},
                        {"seeds_used", db.seeds_used},
                        {"discarded_seeds", db.discarded_seeds},
                        {"points", std::move(points)}};
}

inline PeriodicDatabase database_from_json(const ordered_json& j) {
    PeriodicDatabase db;
    db.k = j.at("k").get<double>();
    db.n = j.at("n").get<int>();
    db.rho = j.at("rho").get<double>();
    db.newton_tol = j.at("newton_tol").get<double>();
    db.dedup_tol = j.at("dedup_tol").get<double>();
    db.grid_res = j.value("grid_res", 0);
    db.seeds_used = j.value("seeds_used", std::int64_t{0});
    db.discarded_seeds = j.value("discarded_seeds", std::int64_t{0});
    for (const auto& item : j.at("points")) {
        PeriodicPoint pp;
        pp.point = {item.at("x").get<double>(), item.at("y").get<double>()};
        pp.n = db.n;
        pp.trace = item.at("trace").get<double>();
        pp.lambda = item.at("lambda").get<double>();
        std::string kind = item.at("kind").get<std::string>();
        pp.kind = kind == "hyperbolic" ? StabilityKind::hyperbolic
                                       : (kind == "elliptic" ? StabilityKind::elliptic
                                                             : StabilityKind::parabolic);
        db.points.push_back(pp);
    }
    return db;
}

inline ordered_json to_json(const ConeAuditReport& r) {
    return ordered_json{{"k", r.k},
                        {"samples", r.samples},
                        {"lemma", r.lemma},
                        {"pass_rate", r.pass_rate},
                        {"worst_margin", r.worst_margin}};
}

inline ordered_json to_json(const GrowthReport& r) {
    ordered_json j{{"lengths_per_iterate", r.lengths_per_iterate},
                   {"cone_violations", r.cone_violations},
                   {"truncated", r.truncated}};
    if (r.first_iterate_length_gt4)
        j["first_iterate_length_gt4"] = *r.first_iterate_length_gt4;
    else
        j["first_iterate_length_gt4"] = nullptr;
    return j;
}

inline ordered_json to_json(const IntersectionWitness& w) {
    return ordered_json{{"x", w.point.x},
                        {"y", w.point.y},
                        {"angle", w.angle},
                        {"param_a", w.param_a},
                        {"param_b", w.param_b}};
}

inline ordered_json to_json(const EntropyFit& fit) {
    ordered_json counts = ordered_json::array();
    for (const auto& [n, c] : fit.counts) counts.push_back({{"n", n}, {"count", c}});
    return ordered_json{{"counts", std::move(counts)},
                        {"slope", fit.slope},
                        {"intercept", fit.intercept},
                        {"residual", fit.residual},
                        {"endpoint_rate", fit.endpoint_rate}};
}

inline ordered_json fourier_table(const EmpiricalMeasure& m) {
    ordered_json coeffs = ordered_json::array();
    for (int a = -m.max_freq; a <= m.max_freq; ++a)
        for (int b = -m.max_freq; b <= m.max_freq; ++b)
            coeffs.push_back({{"a", a},
                              {"b", b},
                              {"re", m.coeff(a, b).real()},
                              {"im", m.coeff(a, b).imag()}});
    return ordered_json{{"grid_size", m.grid_size},
                        {"max_freq", m.max_freq},
                        {"atom_count", m.atom_count},
                        {"coefficients", std::move(coeffs)}};
}

/// Curve CSV: one vertex per row, lift coordinates so the polyline plots
/// without wrap jumps.
inline std::string curve_to_csv(const Curve& c) {
    std::ostringstream out;
    out.precision(17);
    out << "index,x,y,tx,ty\n";
    for (std::size_t i = 0; i < c.vertices.size(); ++i) {
        out << i << ',' << c.vertices[i].x << ',' << c.vertices[i].y << ',' << c.tangents[i].u << ','
            << c.tangents[i].v << '\n';
    }
    return out.str();
}

inline std::string measure_grid_to_csv(const EmpiricalMeasure& m) {
    std::ostringstream out;
    out.precision(17);
    for (int ix = 0; ix < m.grid_size; ++ix) {
        for (int iy = 0; iy < m.grid_size; ++iy) {
            if (iy) out << ',';
            out << m.grid[static_cast<std::size_t>(ix) * m.grid_size + iy];
        }
        out << '\n';
    }
    return out.str();
}

inline std::string orbit_to_csv(const OrbitWindow& w) {
    std::ostringstream out;
    out.precision(17);
    out << "i,x,y\n";
    for (int i = -w.n_back; i <= w.n_fwd; ++i)
        out << i << ',' << w.at(i).x << ',' << w.at(i).y << '\n';
    return out.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cache_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw cache_error("failed writing: " + path);
}

} // namespace stdmaplab

#endif
