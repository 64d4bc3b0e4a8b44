#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int status = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("stdmaplab_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args) {
    fs::path out = scratch_dir() / "stdout.txt";
    fs::path err = scratch_dir() / "stderr.txt";
    std::string cmd = std::string(STDMAPLAB_CLI_PATH) + " " + args + " > " + out.string() + " 2> " +
                      err.string();
    int raw = std::system(cmd.c_str());
    RunResult r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

} // namespace

TEST_CASE("dimension subcommand evaluates the formula directly") {
    RunResult r = run_cli("dimension --h 1 --lp 1 --lm -1");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(j["dim"].get<double>() == 2.0);
}

TEST_CASE("unknown flags exit with usage code and error JSON") {
    RunResult r = run_cli("lyapunov --no-such-flag 3");
    CHECK(r.status == 2);
    json j = json::parse(r.err);
    CHECK(j["error"]["type"] == "usage");
}

TEST_CASE("module errors exit with the numeric code and typed JSON") {
    RunResult r = run_cli("periodic --k 0.5 --n 1 --grid 32");
    CHECK(r.status == 3);
    json j = json::parse(r.err);
    CHECK(j["error"]["type"] == "invalid-parameter");
}

TEST_CASE("periodic census via the CLI finds the twenty fixed points") {
    RunResult r = run_cli("periodic --k 5 --n 1 --grid 96");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(j["points"].size() == 20);
    CHECK(j["k"].get<double>() == 5.0);
}

TEST_CASE("report runs are byte-identical for a fixed config") {
    fs::path f1 = scratch_dir() / "report1.json";
    fs::path f2 = scratch_dir() / "report2.json";
    std::string args = "report --k 5 --n-max 2 --rho 1.0 --grid 96 --seed 9 --threads 2 --out ";
    REQUIRE(run_cli(args + f1.string()).status == 0);
    REQUIRE(run_cli(args + f2.string()).status == 0);
    std::string a = slurp(f1);
    std::string b = slurp(f2);
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);
}

TEST_CASE("census cache is written, reused and validated") {
    fs::path cache = scratch_dir() / "cache";
    std::string args = "periodic --k 5 --n 1 --grid 96 --cache-dir " + cache.string();
    RunResult first = run_cli(args);
    REQUIRE(first.status == 0);
    fs::path entry = cache / "periodic_k5.0_n1.json";
    REQUIRE(fs::exists(entry));

    RunResult second = run_cli(args);
    REQUIRE(second.status == 0);
    CHECK(first.out == second.out);

    // a different grid_res must not reuse the entry
    RunResult other = run_cli("periodic --k 5 --n 1 --grid 128 --cache-dir " + cache.string());
    REQUIRE(other.status == 0);
    json j = json::parse(other.out);
    CHECK(j["grid_res"].get<int>() == 128);

    // corrupt cache -> cache error
    std::ofstream(entry) << "not json";
    RunResult corrupt = run_cli(args);
    CHECK(corrupt.status == 3);
    json err = json::parse(corrupt.err);
    CHECK(err["error"]["type"] == "cache-error");
}

TEST_CASE("flat config file supplies defaults and flags override it") {
    fs::path cfg = scratch_dir() / "lab.conf";
    std::ofstream(cfg) << "k = 5\nn = 1\ngrid = 96\n";
    RunResult from_config = run_cli("periodic --config " + cfg.string());
    REQUIRE(from_config.status == 0);
    CHECK(json::parse(from_config.out)["points"].size() == 20);

    RunResult overridden = run_cli("periodic --config " + cfg.string() + " --k 10");
    REQUIRE(overridden.status == 0);
    CHECK(json::parse(overridden.out)["points"].size() == 40);
}

TEST_CASE("manifold CSV export carries the vertex schema") {
    RunResult r = run_cli("manifold --k 1000 --x 0 --y 0 --side unstable --target-length 0.5 "
                          "--max-iter 8 --format csv");
    REQUIRE(r.status == 0);
    CHECK(r.out.rfind("index,x,y,tx,ty\n", 0) == 0);
}

TEST_CASE("pliss subcommand reads a sequence file") {
    fs::path seq = scratch_dir() / "seq.txt";
    std::ofstream(seq) << "0\n10\n0\n10\n0\n10\n";
    RunResult r = run_cli("pliss --seq-file " + seq.string() + " --alpha1 -1 --alpha2 5 --eps 1");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(j["times"] == json::array({0, 2, 4}));
}

TEST_CASE("cone-audit emits the report schema") {
    RunResult r = run_cli("cone-audit --k 1000 --samples 2000 --seed 4");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 2);
    for (const auto& rep : j) {
        CHECK(rep.contains("k"));
        CHECK(rep.contains("samples"));
        CHECK(rep.contains("lemma"));
        CHECK(rep.contains("pass_rate"));
        CHECK(rep.contains("worst_margin"));
    }
}

TEST_CASE("lyapunov subcommand on random samples reports the median") {
    RunResult r = run_cli("lyapunov --k 100 --samples 5 --horizon 5000 --seed 77 --threads 2");
    REQUIRE(r.status == 0);
    json j = json::parse(r.out);
    CHECK(j["lambda_plus"].size() == 5);
    double median = j["median_lambda_plus"].get<double>();
    CHECK(median > 4.0);
    CHECK(median < 7.0);
}
