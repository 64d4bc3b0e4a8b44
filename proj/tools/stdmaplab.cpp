// Command-line laboratory for the standard family f_k(x, y) =
// (2x - y + k sin(2 pi x), x) on the torus: orbits, Lyapunov exponents,
// cone-field audits, invariant-manifold growth, periodic-point censuses and
// the statistics built on top of them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "stdmaplab/cocycle.hpp"
#include "stdmaplab/cones.hpp"
#include "stdmaplab/io.hpp"
#include "stdmaplab/manifolds.hpp"
#include "stdmaplab/map.hpp"
#include "stdmaplab/parallel.hpp"
#include "stdmaplab/periodic.hpp"
#include "stdmaplab/rng.hpp"
#include "stdmaplab/statistics.hpp"

namespace fs = std::filesystem;
using namespace stdmaplab;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInconclusive = 4;

void emit_error(const std::string& type, const std::string& message) {
    ordered_json j{{"error", ordered_json{{"type", type}, {"message", message}}}};
    std::cerr << j.dump() << '\n';
}

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty())
        std::cout << content;
    else
        write_text_file(out_path, content);
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

/// Flat key=value config file; '#' starts a comment. Values parsed here act
/// as defaults, so explicit flags always win.
std::map<std::string, std::string> load_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cache_error("cannot read config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t\r");
            auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

struct ConfigDefaults {
    std::map<std::string, std::string> kv;

    double get(const std::string& key, double def) const {
        auto it = kv.find(key);
        return it == kv.end() ? def : std::stod(it->second);
    }
    int get(const std::string& key, int def) const {
        auto it = kv.find(key);
        return it == kv.end() ? def : std::stoi(it->second);
    }
    std::uint64_t get(const std::string& key, std::uint64_t def) const {
        auto it = kv.find(key);
        return it == kv.end() ? def : static_cast<std::uint64_t>(std::stoull(it->second));
    }
    std::string get(const std::string& key, const std::string& def) const {
        auto it = kv.find(key);
        return it == kv.end() ? def : it->second;
    }
};

// seed density must outpace the root count (4k)^n; the floor keeps the
// small-n censuses complete, where the rule alone undershoots
int auto_grid(double k, int n) {
    double suggested = std::ceil(3.0 * std::pow(4.0 * k, 0.5 * n));
    return static_cast<int>(std::clamp(suggested, 64.0, 4096.0));
}

std::string cache_file_name(double k, int n) {
    return "periodic_k" + ordered_json(k).dump() + "_n" + std::to_string(n) + ".json";
}

/// Cache policy: an entry is reused only when k, n, newton_tol, dedup_tol
/// and grid_res all match exactly.
PeriodicDatabase census_with_cache(const Params& params, int n, int grid_res,
                                   const FindOptions& opts, const std::string& cache_dir) {
    fs::path path;
    if (!cache_dir.empty()) {
        path = fs::path(cache_dir) / cache_file_name(params.k, n);
        if (fs::exists(path)) {
            std::ifstream in(path);
            if (!in) throw cache_error("cannot read cache file: " + path.string());
            ordered_json j;
            try {
                in >> j;
            } catch (const std::exception& e) {
                throw cache_error("unreadable cache file " + path.string() + ": " + e.what());
            }
            PeriodicDatabase db = database_from_json(j);
            if (db.k == params.k && db.n == n && db.newton_tol == opts.newton_tol &&
                db.dedup_tol == opts.dedup_tol && db.grid_res == grid_res && db.rho == 0.0)
                return db;
        }
    }
    PeriodicDatabase db = find_periodic(params, n, grid_res, opts);
    if (!cache_dir.empty()) {
        fs::create_directories(cache_dir);
        write_text_file(path.string(), dump(to_json(db)));
    }
    return db;
}

double mean_lambda(const PeriodicDatabase& db) {
    if (db.points.empty()) throw insufficient_data_error("no atoms to average the exponent over");
    double sum = 0.0;
    for (const auto& pp : db.points) sum += pp.lambda;
    return sum / static_cast<double>(db.points.size());
}

std::vector<TorusPoint> atom_positions(const PeriodicDatabase& db) {
    std::vector<TorusPoint> pts;
    pts.reserve(db.points.size());
    for (const auto& pp : db.points) pts.push_back(pp.point);
    return pts;
}

ordered_json run_report_for(double k, int n_max, double rho, int grid_override,
                            const FindOptions& fopts, const std::string& cache_dir, int grid_hist,
                            int max_freq, std::uint64_t seed, unsigned threads) {
    Params params = derive_params(k);
    ordered_json census = ordered_json::array();
    std::vector<std::pair<int, std::int64_t>> rho_counts;
    PeriodicDatabase last_filtered;
    for (int n = 1; n <= n_max; ++n) {
        int grid = grid_override > 0 ? grid_override : auto_grid(k, n);
        PeriodicDatabase db = census_with_cache(params, n, grid, fopts, cache_dir);
        PeriodicDatabase filtered = filter_rho_hyperbolic(db, rho);
        census.push_back({{"n", n},
                          {"grid_res", grid},
                          {"count", db.points.size()},
                          {"rho_count", filtered.points.size()},
                          {"discarded_seeds", db.discarded_seeds}});
        rho_counts.push_back({n, static_cast<std::int64_t>(filtered.points.size())});
        if (n == n_max) last_filtered = std::move(filtered);
    }
    EntropyFit fit = entropy_fit(rho_counts);
    EmpiricalMeasure measure = empirical_measure(atom_positions(last_filtered), grid_hist, max_freq);
    double defect = involution_defect(measure);
    double epsilon = 8.0 * std::pow(k, -1.0 / 3.0);
    DensityResult density = density_check(atom_positions(last_filtered), epsilon);
    double lambda_mean = mean_lambda(last_filtered);
    DimensionEstimate dim = young_dimension(fit.slope, lambda_mean, -lambda_mean);

    return ordered_json{
        {"config",
         ordered_json{{"k", k},
                      {"n_max", n_max},
                      {"rho", rho},
                      {"grid", grid_override},
                      {"grid_hist", grid_hist},
                      {"max_freq", max_freq},
                      {"seed", seed},
                      {"threads", threads},
                      {"newton_tol", fopts.newton_tol},
                      {"dedup_tol", fopts.dedup_tol}}},
        {"census", std::move(census)},
        {"entropy", to_json(fit)},
        {"mme", fourier_table(measure)},
        {"involution_defect", defect},
        {"density",
         ordered_json{{"epsilon", epsilon},
                      {"covering_radius", density.covering_radius},
                      {"dense", density.dense}}},
        {"dimension",
         ordered_json{{"h", dim.h},
                      {"lambda_plus", dim.lambda_plus},
                      {"lambda_minus", dim.lambda_minus},
                      {"dim", dim.dim}}}};
}

std::vector<double> parse_k_list(const std::string& spec) {
    std::vector<double> ks;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) ks.push_back(std::stod(item));
    }
    return ks;
}

} // namespace

int main(int argc, char** argv) {
    // pre-scan for --config so file values become option defaults
    ConfigDefaults cfg;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        std::string path;
        if (arg == "--config" && i + 1 < argc)
            path = argv[i + 1];
        else if (arg.rfind("--config=", 0) == 0)
            path = arg.substr(9);
        if (!path.empty()) {
            try {
                cfg.kv = load_flat_config(path);
            } catch (const error& e) {
                emit_error(e.kind(), e.what());
                return kExitNumeric;
            }
            break;
        }
    }

    CLI::App app{"numerical laboratory for the standard map family on the torus"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help"); // keep -h free for --h style flags
    std::string config_path;
    app.add_option("--config", config_path, "flat key=value configuration file");

    // shared knobs; config file values act as defaults
    double k = cfg.get("k", 1000.0);
    int n = cfg.get("n", 1);
    int n_max = cfg.get("n-max", 4);
    double rho = cfg.get("rho", 1.0);
    int grid = cfg.get("grid", 0);
    unsigned threads = static_cast<unsigned>(cfg.get("threads", static_cast<int>(default_thread_count())));
    std::uint64_t seed = cfg.get("seed", static_cast<std::uint64_t>(12345));
    double tol_newton = cfg.get("tol-newton", 1e-11);
    double tol_dedup = cfg.get("tol-dedup", 1e-6);
    std::string cache_dir = cfg.get("cache-dir", std::string{});
    std::string out_path = cfg.get("out", std::string{});
    std::string format = cfg.get("format", std::string{"json"});
    double x = cfg.get("x", 0.0);
    double y = cfg.get("y", 0.0);

    auto add_common = [&](CLI::App* sub, bool with_k = true) {
        sub->set_help_flag("--help", "print help");
        sub->fallthrough(); // route --config back to the main app
        if (with_k) sub->add_option("--k", k, "coupling of the map");
        sub->add_option("--threads", threads, "worker threads");
        sub->add_option("--seed", seed, "seed of the counter-based generator");
        sub->add_option("--out", out_path, "output file (default stdout)");
        sub->add_option("--format", format, "json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    // orbit
    auto* orbit_cmd = app.add_subcommand("orbit", "iterate an orbit window");
    int n_back = cfg.get("n-back", 0);
    int n_fwd = cfg.get("n-fwd", 100);
    add_common(orbit_cmd);
    orbit_cmd->add_option("--x", x, "x of the base point");
    orbit_cmd->add_option("--y", y, "y of the base point");
    orbit_cmd->add_option("--n-back", n_back, "backward steps");
    orbit_cmd->add_option("--n-fwd", n_fwd, "forward steps");

    // lyapunov
    auto* lyap_cmd = app.add_subcommand("lyapunov", "largest Lyapunov exponent");
    int horizon = cfg.get("horizon", 100000);
    int samples = cfg.get("samples", 0);
    add_common(lyap_cmd);
    lyap_cmd->add_option("--x", x, "x of the base point");
    lyap_cmd->add_option("--y", y, "y of the base point");
    lyap_cmd->add_option("--horizon", horizon, "iterates of the cocycle");
    lyap_cmd->add_option("--samples", samples, "random base points (0: use --x/--y)");

    // pliss
    auto* pliss_cmd = app.add_subcommand("pliss", "Pliss times of a sequence");
    std::string seq_file = cfg.get("seq-file", std::string{});
    double alpha1 = cfg.get("alpha1", -1.0);
    double alpha2 = cfg.get("alpha2", 0.0);
    double eps = cfg.get("eps", 0.1);
    add_common(pliss_cmd, false);
    pliss_cmd->add_option("--seq-file", seq_file, "file with one value per line")->required();
    pliss_cmd->add_option("--alpha1", alpha1, "lower bound of the entries");
    pliss_cmd->add_option("--alpha2", alpha2, "target average");
    pliss_cmd->add_option("--eps", eps, "slack above the target average");

    // regions
    auto* regions_cmd = app.add_subcommand("regions", "critical-strip classification");
    add_common(regions_cmd);
    regions_cmd->add_option("--x", x, "x of the point");
    regions_cmd->add_option("--y", y, "y of the point");
    regions_cmd->add_option("--samples", samples, "sample occupancy instead of one point");

    // cone-audit
    auto* cone_cmd = app.add_subcommand("cone-audit", "cone preservation and expansion audits");
    std::int64_t audit_samples = cfg.get("samples", 1000000);
    bool include_z = false;
    add_common(cone_cmd);
    cone_cmd->add_option("--samples", audit_samples, "Monte Carlo samples per audit");
    cone_cmd->add_flag("--include-z", include_z, "also report the z-in-G1 diagnostic");

    // periodic
    auto* periodic_cmd = app.add_subcommand("periodic", "periodic-point census");
    bool least_period = false;
    double filter_rho = cfg.get("filter-rho", 0.0);
    add_common(periodic_cmd);
    periodic_cmd->add_option("--n", n, "period (fixed points of f^n)");
    periodic_cmd->add_option("--grid", grid, "seed grid resolution (0: auto)");
    periodic_cmd->add_option("--rho", filter_rho, "filter to points with lambda >= rho (0: keep all)");
    periodic_cmd->add_option("--tol-newton", tol_newton, "Newton residual tolerance");
    periodic_cmd->add_option("--tol-dedup", tol_dedup, "dedup distance");
    periodic_cmd->add_option("--cache-dir", cache_dir, "census cache directory");
    periodic_cmd->add_flag("--least-period", least_period, "keep only least-period-n points");

    // entropy
    auto* entropy_cmd = app.add_subcommand("entropy", "growth-rate fit of the rho-census");
    add_common(entropy_cmd);
    entropy_cmd->add_option("--n-max", n_max, "max period of the fit");
    entropy_cmd->add_option("--rho", rho, "Lyapunov filter");
    entropy_cmd->add_option("--grid", grid, "seed grid override (0: auto per n)");
    entropy_cmd->add_option("--tol-newton", tol_newton, "Newton residual tolerance");
    entropy_cmd->add_option("--tol-dedup", tol_dedup, "dedup distance");
    entropy_cmd->add_option("--cache-dir", cache_dir, "census cache directory");

    // mme
    auto* mme_cmd = app.add_subcommand("mme", "empirical measure of the rho-census");
    int grid_hist = cfg.get("grid-hist", 256);
    int max_freq = cfg.get("max-freq", 3);
    add_common(mme_cmd);
    mme_cmd->add_option("--n", n, "period of the census");
    mme_cmd->add_option("--rho", rho, "Lyapunov filter");
    mme_cmd->add_option("--grid", grid, "seed grid (0: auto)");
    mme_cmd->add_option("--grid-hist", grid_hist, "histogram resolution");
    mme_cmd->add_option("--max-freq", max_freq, "Fourier box half-width");
    mme_cmd->add_option("--tol-newton", tol_newton, "Newton residual tolerance");
    mme_cmd->add_option("--tol-dedup", tol_dedup, "dedup distance");
    mme_cmd->add_option("--cache-dir", cache_dir, "census cache directory");

    // density
    auto* density_cmd = app.add_subcommand("density", "covering radius of the rho-census");
    double epsilon = cfg.get("epsilon", 0.0);
    add_common(density_cmd);
    density_cmd->add_option("--n", n, "period of the census");
    density_cmd->add_option("--rho", rho, "Lyapunov filter");
    density_cmd->add_option("--grid", grid, "seed grid (0: auto)");
    density_cmd->add_option("--epsilon", epsilon, "density target (0: 8 k^(-1/3))");
    density_cmd->add_option("--tol-newton", tol_newton, "Newton residual tolerance");
    density_cmd->add_option("--tol-dedup", tol_dedup, "dedup distance");
    density_cmd->add_option("--cache-dir", cache_dir, "census cache directory");

    // dimension
    auto* dim_cmd = app.add_subcommand("dimension", "dimension from entropy and exponents");
    double h_in = cfg.get("h", 0.0);
    double lp_in = cfg.get("lp", 0.0);
    double lm_in = cfg.get("lm", 0.0);
    add_common(dim_cmd);
    dim_cmd->add_option("--h", h_in, "entropy (0: derive from the census chain)");
    dim_cmd->add_option("--lp", lp_in, "positive exponent");
    dim_cmd->add_option("--lm", lm_in, "negative exponent");
    dim_cmd->add_option("--n-max", n_max, "max period when deriving from the census");
    dim_cmd->add_option("--rho", rho, "Lyapunov filter when deriving");
    dim_cmd->add_option("--grid", grid, "seed grid override");
    dim_cmd->add_option("--cache-dir", cache_dir, "census cache directory");

    // manifold
    auto* manifold_cmd = app.add_subcommand("manifold", "grow a stable or unstable curve");
    std::string side = cfg.get("side", std::string{"unstable"});
    double target_length = cfg.get("target-length", 4.0);
    int max_iter = cfg.get("max-iter", 32);
    add_common(manifold_cmd);
    manifold_cmd->add_option("--x", x, "x of the base point");
    manifold_cmd->add_option("--y", y, "y of the base point");
    manifold_cmd->add_option("--side", side, "stable or unstable")
        ->check(CLI::IsMember({"stable", "unstable"}));
    manifold_cmd->add_option("--target-length", target_length, "stop once this length is reached");
    manifold_cmd->add_option("--max-iter", max_iter, "iteration budget");

    // homoclinic
    auto* homo_cmd = app.add_subcommand("homoclinic", "test the homoclinic relation of two points");
    double px = cfg.get("px", 0.0), py = cfg.get("py", 0.0);
    double qx = cfg.get("qx", 0.5), qy = cfg.get("qy", 0.5);
    double angle_min = cfg.get("angle-min", -1.0);
    add_common(homo_cmd);
    homo_cmd->add_option("--px", px, "x of the first point");
    homo_cmd->add_option("--py", py, "y of the first point");
    homo_cmd->add_option("--qx", qx, "x of the second point");
    homo_cmd->add_option("--qy", qy, "y of the second point");
    homo_cmd->add_option("--angle-min", angle_min, "witness angle floor (default: cone bound)");
    homo_cmd->add_option("--target-length", target_length, "curve length to grow to");
    homo_cmd->add_option("--max-iter", max_iter, "iteration budget per curve");

    // report
    auto* report_cmd = app.add_subcommand("report", "census, entropy, measure, density, dimension");
    std::string k_list = cfg.get("k-list", std::string{});
    add_common(report_cmd);
    report_cmd->add_option("--n-max", n_max, "max period");
    report_cmd->add_option("--rho", rho, "Lyapunov filter");
    report_cmd->add_option("--grid", grid, "seed grid override (0: auto per n)");
    report_cmd->add_option("--grid-hist", grid_hist, "histogram resolution");
    report_cmd->add_option("--max-freq", max_freq, "Fourier box half-width");
    report_cmd->add_option("--tol-newton", tol_newton, "Newton residual tolerance");
    report_cmd->add_option("--tol-dedup", tol_dedup, "dedup distance");
    report_cmd->add_option("--cache-dir", cache_dir, "census cache directory");
    report_cmd->add_option("--k-list", k_list, "comma-separated couplings (overrides --k)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage", e.what());
        return kExitUsage;
    }

    FindOptions fopts;
    fopts.newton_tol = tol_newton;
    fopts.dedup_tol = tol_dedup;
    fopts.threads = threads;

    try {
        if (orbit_cmd->parsed()) {
            Params params = derive_params(k);
            OrbitWindow w = iterate_orbit(params, {wrap01(x), wrap01(y)}, n_back, n_fwd);
            if (format == "csv") {
                write_output(out_path, orbit_to_csv(w));
            } else {
                ordered_json pts = ordered_json::array();
                for (int i = -w.n_back; i <= w.n_fwd; ++i)
                    pts.push_back({{"i", i}, {"x", w.at(i).x}, {"y", w.at(i).y}});
                write_output(out_path, dump(ordered_json{{"k", k}, {"points", std::move(pts)}}));
            }
        } else if (lyap_cmd->parsed()) {
            Params params = derive_params(k);
            if (samples > 0) {
                CounterRng rng(seed);
                std::vector<double> rates(static_cast<std::size_t>(samples));
                parallel_for(rates.size(), threads, [&](std::size_t i) {
                    rates[i] = lyapunov(params, rng.point(i, 0), horizon).lambda_plus;
                });
                std::vector<double> sorted = rates;
                std::sort(sorted.begin(), sorted.end());
                double median = sorted[sorted.size() / 2];
                write_output(out_path, dump(ordered_json{{"k", k},
                                                         {"horizon", horizon},
                                                         {"samples", samples},
                                                         {"median_lambda_plus", median},
                                                         {"lambda_plus", rates}}));
            } else {
                LyapunovEstimate est = lyapunov(params, {wrap01(x), wrap01(y)}, horizon);
                write_output(out_path, dump(ordered_json{{"k", k},
                                                         {"horizon", est.horizon},
                                                         {"lambda_plus", est.lambda_plus},
                                                         {"lambda_minus", est.lambda_minus}}));
            }
        } else if (pliss_cmd->parsed()) {
            std::ifstream in(seq_file);
            if (!in) throw invalid_input_error("cannot read sequence file: " + seq_file);
            std::vector<double> seq;
            double value;
            while (in >> value) seq.push_back(value);
            PlissOutput out = pliss_times(seq, alpha1, alpha2, eps);
            write_output(out_path, dump(ordered_json{{"length", seq.size()},
                                                     {"times", out.times},
                                                     {"count", out.times.size()},
                                                     {"density_lower_bound", out.density_lower_bound}}));
        } else if (regions_cmd->parsed()) {
            Params params = derive_params(k);
            if (samples > 0) {
                CounterRng rng(seed);
                std::int64_t c1 = 0, c2 = 0;
                for (std::int64_t i = 0; i < samples; ++i) {
                    RegionLabel label = classify_region(params, rng.point(0, static_cast<std::uint64_t>(i)));
                    c1 += label.in_crit1;
                    c2 += label.in_crit2;
                }
                write_output(out_path,
                             dump(ordered_json{{"k", k},
                                               {"samples", samples},
                                               {"crit1_fraction", static_cast<double>(c1) / samples},
                                               {"crit2_fraction", static_cast<double>(c2) / samples}}));
            } else {
                RegionLabel label = classify_region(params, {wrap01(x), wrap01(y)});
                ordered_json j{{"k", k},
                               {"x", wrap01(x)},
                               {"y", wrap01(y)},
                               {"in_crit1", label.in_crit1},
                               {"in_crit2", label.in_crit2}};
                j["g1_component"] = label.g1_component ? ordered_json(*label.g1_component) : nullptr;
                j["g2_component"] = label.g2_component ? ordered_json(*label.g2_component) : nullptr;
                write_output(out_path, dump(j));
            }
        } else if (cone_cmd->parsed()) {
            Params params = derive_params(k);
            ordered_json reports = ordered_json::array();
            reports.push_back(to_json(audit_cone_preservation(params, audit_samples, seed, threads)));
            reports.push_back(to_json(audit_cone_expansion(params, audit_samples, seed + 1, threads)));
            if (include_z)
                reports.push_back(to_json(audit_z_in_g1(params, std::min<std::int64_t>(audit_samples, 2000),
                                                        seed + 2, threads)));
            write_output(out_path, dump(reports));
        } else if (periodic_cmd->parsed()) {
            Params params = derive_params(k);
            fopts.least_period_only = least_period;
            int grid_res = grid > 0 ? grid : auto_grid(k, n);
            PeriodicDatabase db = census_with_cache(params, n, grid_res, fopts, cache_dir);
            if (filter_rho > 0.0) db = filter_rho_hyperbolic(db, filter_rho);
            write_output(out_path, dump(to_json(db)));
        } else if (entropy_cmd->parsed()) {
            Params params = derive_params(k);
            std::vector<std::pair<int, std::int64_t>> counts;
            for (int period = 1; period <= n_max; ++period) {
                int grid_res = grid > 0 ? grid : auto_grid(k, period);
                PeriodicDatabase db = census_with_cache(params, period, grid_res, fopts, cache_dir);
                counts.push_back(
                    {period, static_cast<std::int64_t>(filter_rho_hyperbolic(db, rho).points.size())});
            }
            write_output(out_path, dump(to_json(entropy_fit(counts))));
        } else if (mme_cmd->parsed()) {
            Params params = derive_params(k);
            int grid_res = grid > 0 ? grid : auto_grid(k, n);
            PeriodicDatabase db =
                filter_rho_hyperbolic(census_with_cache(params, n, grid_res, fopts, cache_dir), rho);
            EmpiricalMeasure m = empirical_measure(atom_positions(db), grid_hist, max_freq);
            if (format == "csv")
                write_output(out_path, measure_grid_to_csv(m));
            else
                write_output(out_path, dump(fourier_table(m)));
        } else if (density_cmd->parsed()) {
            Params params = derive_params(k);
            int grid_res = grid > 0 ? grid : auto_grid(k, n);
            PeriodicDatabase db =
                filter_rho_hyperbolic(census_with_cache(params, n, grid_res, fopts, cache_dir), rho);
            double target = epsilon > 0.0 ? epsilon : 8.0 * std::pow(k, -1.0 / 3.0);
            DensityResult res = density_check(atom_positions(db), target);
            write_output(out_path, dump(ordered_json{{"k", k},
                                                     {"n", n},
                                                     {"rho", rho},
                                                     {"atom_count", db.points.size()},
                                                     {"epsilon", target},
                                                     {"covering_radius", res.covering_radius},
                                                     {"dense", res.dense}}));
        } else if (dim_cmd->parsed()) {
            if (h_in > 0.0) {
                DimensionEstimate est = young_dimension(h_in, lp_in, lm_in);
                write_output(out_path, dump(ordered_json{{"h", est.h},
                                                         {"lambda_plus", est.lambda_plus},
                                                         {"lambda_minus", est.lambda_minus},
                                                         {"dim", est.dim}}));
            } else {
                Params params = derive_params(k);
                std::vector<std::pair<int, std::int64_t>> counts;
                PeriodicDatabase last;
                for (int period = 1; period <= n_max; ++period) {
                    int grid_res = grid > 0 ? grid : auto_grid(k, period);
                    PeriodicDatabase db =
                        filter_rho_hyperbolic(census_with_cache(params, period, grid_res, fopts, cache_dir), rho);
                    counts.push_back({period, static_cast<std::int64_t>(db.points.size())});
                    if (period == n_max) last = std::move(db);
                }
                EntropyFit fit = entropy_fit(counts);
                double lambda = mean_lambda(last);
                DimensionEstimate est = young_dimension(fit.slope, lambda, -lambda);
                write_output(out_path, dump(ordered_json{{"h", est.h},
                                                         {"lambda_plus", est.lambda_plus},
                                                         {"lambda_minus", est.lambda_minus},
                                                         {"dim", est.dim}}));
            }
        } else if (manifold_cmd->parsed()) {
            Params params = derive_params(k);
            ManifoldSide mside = side == "stable" ? ManifoldSide::stable : ManifoldSide::unstable;
            GrowDirection dir =
                mside == ManifoldSide::unstable ? GrowDirection::forward : GrowDirection::backward;
            Curve seed_curve = seed_local_manifold(params, {wrap01(x), wrap01(y)}, mside);
            auto [curve, rep] = grow_curve(params, seed_curve, dir, max_iter, target_length);
            if (format == "csv") {
                write_output(out_path, curve_to_csv(curve));
            } else {
                ordered_json j{{"k", k},
                               {"side", side},
                               {"vertex_count", curve.vertices.size()},
                               {"total_length", curve.total_length},
                               {"report", to_json(rep)}};
                write_output(out_path, dump(j));
            }
            if (rep.truncated && curve.total_length < target_length) return kExitInconclusive;
        } else if (homo_cmd->parsed()) {
            Params params = derive_params(k);
            HomoclinicOptions opts;
            opts.angle_min = angle_min;
            opts.target_length = target_length;
            opts.max_iter = max_iter;
            HomoclinicResult res =
                homoclinically_related(params, {wrap01(px), wrap01(py)}, {wrap01(qx), wrap01(qy)}, opts);
            const char* verdict = res.verdict == HomoclinicVerdict::related
                                      ? "related"
                                      : (res.verdict == HomoclinicVerdict::unrelated ? "unrelated"
                                                                                     : "inconclusive");
            ordered_json wits_pq = ordered_json::array();
            for (const auto& w : res.witnesses_pq) wits_pq.push_back(to_json(w));
            ordered_json wits_qp = ordered_json::array();
            for (const auto& w : res.witnesses_qp) wits_qp.push_back(to_json(w));
            write_output(out_path, dump(ordered_json{{"k", k},
                                                     {"verdict", verdict},
                                                     {"angle_min",
                                                      angle_min >= 0.0 ? angle_min
                                                                       : default_witness_angle_min(params)},
                                                     {"witnesses_pq", std::move(wits_pq)},
                                                     {"witnesses_qp", std::move(wits_qp)}}));
            if (res.verdict == HomoclinicVerdict::inconclusive) return kExitInconclusive;
        } else if (report_cmd->parsed()) {
            std::vector<double> ks = k_list.empty() ? std::vector<double>{k} : parse_k_list(k_list);
            if (ks.size() == 1) {
                write_output(out_path, dump(run_report_for(ks[0], n_max, rho, grid, fopts, cache_dir,
                                                           grid_hist, max_freq, seed, threads)));
            } else {
                ordered_json all = ordered_json::array();
                for (double kk : ks)
                    all.push_back(run_report_for(kk, n_max, rho, grid, fopts, cache_dir, grid_hist,
                                                 max_freq, seed, threads));
                write_output(out_path, dump(all));
            }
        }
    } catch (const error& e) {
        emit_error(e.kind(), e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return kExitNumeric;
    }
    return 0;
}
