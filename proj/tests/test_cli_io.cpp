#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "semiper/atomic_file.hpp"
#include "semiper/cli_io.hpp"

using namespace semiper;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path data(const std::string& name) { return fs::path(SEMIPER_TEST_DATA) / name; }

fs::path fresh_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / ("semiper_cli_io_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

// Small grid so the run() cases stay quick.
const char* kSmall = R"(seed: 3
grid: {dimension: 1, half_width: 10, points_per_axis: 63}
nonlinearity: {kind: demo, a: 1, b_coeff: 6, s: 2}
tails: {periods: 2, samples_per_period: 16}
)";

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "t.yaml");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::vector<std::string> tmp_leftovers(const fs::path& root) {
    std::vector<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.path().filename().string().find(".tmp.") != std::string::npos) out.push_back(e.path().string());
    return out;
}

int run_cli(const std::string& args) {
    auto cmd = std::string(SEMIPER_CLI) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("minimal demo config fills defaults") {
    auto cfg = load_config(data("minimal_demo.yaml"));
    RunConfig expected;
    expected.seed = 1;
    expected.grid = {1, 10.0, 127, LaplacianKind::Spectral};
    CHECK(cfg == expected);
    CHECK(cfg.nonlinearity.kind == NonlinearityKind::Demo);
    CHECK(cfg.solver.method == PeriodicMethod::Anderson);
    CHECK(cfg.lambda_sweep.lambdas == std::vector<double>{1.0, 0.5, 0.25, 0.125, 0.0625});
    // Golden canonical form.
    CHECK(emit_config(cfg) == slurp(data("minimal_demo.resolved.yaml")));
}

TEST_CASE("tree config parses every block") {
    auto cfg = load_config(data("tree.yaml"));
    CHECK(cfg.seed == 42);
    CHECK(cfg.output == "runs/tree");
    CHECK(cfg.grid.dimension == 2);
    CHECK(cfg.grid.laplacian == LaplacianKind::SecondDifference);
    const auto& t = cfg.nonlinearity.tree;
    REQUIRE(t.source.size() == 1);
    CHECK(t.source[0] == Term{0.25, SpaceProfile::Gaussian, 1.5, TimeProfile::Cos, 2.0});
    REQUIRE(t.linear.size() == 2);
    CHECK(t.linear[0] == Term{-1.5});
    CHECK(t.linear[1].time == TimeProfile::AbsCos);
    REQUIRE(t.outer.size() == 1);
    CHECK(t.outer[0].function == OuterFunction::Tanh);
    CHECK(t.outer[0].inner.size() == 2);
    CHECK(cfg.evolution.scheme == Scheme::IMEXEuler);
    CHECK(cfg.solver.method == PeriodicMethod::NewtonKrylov);
    CHECK(cfg.solver.tol == 1e-9);
    CHECK(cfg.solver.initial == InitialConfig{"compact", 2.0, 1.5});
    CHECK(cfg.apriori.direction == SweepDirection::SmallNorm);
    CHECK(cfg.averaging.mode == InitialDataMode::L2OnlyConverging);
    CHECK(cfg.hypotheses.theorem == Theorem::Thm11);

    auto grid = build_grid(cfg);
    auto nl = build_nonlinearity(cfg, grid);
    CHECK(nl.period() == 3.0);
    CHECK_FALSE(nl.zero_preserving());
}

TEST_CASE("emit and parse round trip") {
    for (const char* f : {"minimal_demo.yaml", "tree.yaml"}) {
        auto cfg = load_config(data(f));
        auto again = parse_config(emit_config(cfg));
        CHECK(again == cfg);
        CHECK(emit_config(again) == emit_config(cfg));
    }
    // Random doubles survive the text form bit for bit.
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto cfg = load_config(data("tree.yaml"));
    for (int k = 0; k < 50; ++k) {
        cfg.seed = rng();
        cfg.grid.half_width = 5.0 + 100.0 * u(rng);
        cfg.nonlinearity.period = 1e-3 + u(rng);
        cfg.nonlinearity.tree.linear[1].coeff = std::ldexp(u(rng) - 0.5, -40);
        cfg.solver.tol = std::pow(10.0, -12.0 * u(rng));
        cfg.lambda_sweep.lambdas = {1.0, u(rng) * 0.5 + 1e-3};
        cfg.averaging.noise_h1 = u(rng) * 1e6;
        cfg.contraction.first.amplitude = -u(rng);
        CHECK(parse_config(emit_config(cfg)) == cfg);
    }
}

TEST_CASE("validation errors name the key") {
    std::string base = "seed: 1\ngrid: {dimension: 1, half_width: 10, points_per_axis: 63}\nnonlinearity: {kind: demo}\n";
    SUBCASE("lambda outside (0, 1]") {
        auto text = base + "lambda_sweep:\n  lambdas: [1, 1.5]\n";
        try {
            parse_config(text, "t.yaml");
            FAIL("accepted lambda = 1.5");
        } catch (const ValidationError& e) {
            CHECK(e.key() == "lambda_sweep.lambdas");
            std::string msg = e.what();
            CHECK(msg.find("lambda_sweep.lambdas") != std::string::npos);
            CHECK(msg.find("t.yaml:5") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_config(base + "averaging: {lambdas: [0]}\n"), ValidationError);
        CHECK_THROWS_AS(parse_config(base + "lambda_sweep: {lambdas: [0.5, 0.5]}\n"), ValidationError);
    }
    SUBCASE("tolerance and grid size") {
        CHECK(error_of(base + "solver: {tol: 0}\n").find("solver.tol") != std::string::npos);
        CHECK(error_of(base + "solver: {tol: -1e-8}\n").find("t.yaml:4") != std::string::npos);
        auto small = "seed: 1\ngrid: {dimension: 1, half_width: 10, points_per_axis: 7}\nnonlinearity: {kind: demo}\n";
        CHECK(error_of(small).find("grid.points_per_axis") != std::string::npos);
        CHECK(error_of(base + "tails: {radii: [50]}\n").find("tails.radii") != std::string::npos);
        CHECK(error_of(base + "solver: {initial: {kind: box}}\n").find("solver.initial.kind") != std::string::npos);
    }
}

TEST_CASE("parse errors carry line and key") {
    std::string base = "seed: 1\ngrid: {dimension: 1, half_width: 10, points_per_axis: 63}\nnonlinearity: {kind: demo}\n";
    CHECK(error_of(base + "solvr: {tol: 1e-8}\n").find("t.yaml:4: unknown key 'solvr'") != std::string::npos);
    CHECK(error_of(base + "solver: {tolerance: 1e-8}\n").find("unknown key 'solver.tolerance'") != std::string::npos);
    CHECK(error_of("seed: 1\nnonlinearity: {kind: demo}\n").find("missing required block 'grid'") != std::string::npos);
    CHECK(error_of("grid: {dimension: 1, half_width: 10, points_per_axis: 63}\nnonlinearity: {kind: demo}\n")
              .find("missing required key 'seed'") != std::string::npos);
    CHECK(error_of(base + "solver: {max_iter: 2.5}\n").find("solver.max_iter: expected an integer") != std::string::npos);
    CHECK(error_of(base + "solver: {method: bisection}\n").find("solver.method") != std::string::npos);
    CHECK(error_of("seed: -4\n").find("non-negative") != std::string::npos);
    CHECK(error_of("seed: [1\n").find("malformed YAML") != std::string::npos);
    CHECK(error_of("").find("empty") != std::string::npos);
    // Demo parameters are not accepted on a tree and vice versa.
    CHECK(error_of("seed: 1\ngrid: {dimension: 1, half_width: 10, points_per_axis: 63}\nnonlinearity: {kind: tree, a: 1}\n")
              .find("unknown key 'nonlinearity.a'") != std::string::npos);
    // Malformed is not a validation error.
    try {
        parse_config(base + "solvr: 1\n");
    } catch (const ValidationError&) {
        FAIL("unknown key reported as a validation error");
    } catch (const ConfigError&) {
    }
}

TEST_CASE("sha256 test vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("subcommand names") {
    CHECK(subcommand_names().size() == 9);
    for (const auto& n : subcommand_names()) CHECK(to_string(subcommand_from_string(n)) == n);
    CHECK_THROWS(subcommand_from_string("solve"));
}

TEST_CASE("demo run: manifest, determinism, atomicity") {
    auto cfg = parse_config(kSmall);
    auto d1 = fresh_dir("run1"), d2 = fresh_dir("run2");
    auto m1 = run(cfg, Subcommand::Demo, {d1, 1});
    auto m2 = run(cfg, Subcommand::Demo, {d2, 1});
    CHECK(m1.ok());
    CHECK(m1.config_hash == sha256_hex(emit_config(cfg)));
    CHECK(m1.version == toolkit_version());

    // Manifest lists every output with a matching checksum.
    auto manifest = nlohmann::json::parse(slurp(d1 / "manifest.json"));
    CHECK(manifest["status"] == "ok");
    std::set<std::string> listed;
    for (const auto& f : manifest["files"]) {
        auto path = d1 / f["path"].get<std::string>();
        REQUIRE(fs::exists(path));
        auto bytes = slurp(path);
        CHECK(sha256_hex(bytes) == f["sha256"].get<std::string>());
        CHECK(bytes.size() == f["bytes"].get<std::size_t>());
        listed.insert(f["path"].get<std::string>());
    }
    for (const auto& e : fs::recursive_directory_iterator(d1)) {
        if (!e.is_regular_file()) continue;
        auto rel = fs::relative(e.path(), d1).generic_string();
        if (rel != "manifest.json") CHECK_MESSAGE(listed.count(rel), rel);
    }
    for (const char* stage : {"hypotheses/verdict.txt", "spectrum/eigenvalues.csv", "periodic/residuals.csv",
                              "tails/alpha.csv"})
        CHECK(listed.count(stage));

    // Identical config, seed and threads: byte-identical outputs.
    REQUIRE(m1.files.size() == m2.files.size());
    for (std::size_t i = 0; i < m1.files.size(); ++i) {
        CHECK(m1.files[i].path == m2.files[i].path);
        CHECK(m1.files[i].sha256 == m2.files[i].sha256);
    }
    CHECK(tmp_leftovers(d1).empty());

    // A different seed changes the hash but not the deterministic demo numerics.
    auto other = cfg;
    other.seed = 4;
    auto m3 = run(other, Subcommand::Demo, {fresh_dir("run3"), 1});
    CHECK(m3.config_hash != m1.config_hash);
}

TEST_CASE("failed writes leave no partial files") {
    auto cfg = parse_config(kSmall);
    auto d = fresh_dir("blocked");
    // An old manifest and a directory squatting on an output path.
    write_file_atomically(d / "manifest.json", "{}");
    fs::create_directories(d / "residuals.csv" / "x");
    auto m = run(cfg, Subcommand::SolvePeriodic, {d, 1});
    CHECK_FALSE(m.ok());
    REQUIRE(m.failures.size() == 1);
    CHECK(m.failures[0].find("residuals.csv") != std::string::npos);
    CHECK(tmp_leftovers(d).empty());
    auto manifest = nlohmann::json::parse(slurp(d / "manifest.json"));
    CHECK(manifest["status"] == "failed");
    for (const auto& f : manifest["files"]) CHECK(f["path"] != "residuals.csv");
}

TEST_CASE("pipeline failures are recorded, not thrown") {
    auto cfg = parse_config(kSmall);
    auto m = run(cfg, Subcommand::Contraction, {fresh_dir("contraction"), 1});
    CHECK_FALSE(m.ok());
    CHECK(m.failures[0].find("b = 0") != std::string::npos);

    cfg.nonlinearity.b_coeff = 0.0;
    cfg.contraction.steps_per_period = 128;
    auto ok = run(cfg, Subcommand::Contraction, {fresh_dir("contraction0"), 1});
    CHECK(ok.ok());

    auto bad = cfg;
    bad.solver.tol = 0.0;
    CHECK_THROWS_AS(run(bad, Subcommand::Demo, {fresh_dir("invalid"), 1}), ValidationError);
    CHECK_THROWS_AS(run(cfg, Subcommand::Demo, {fresh_dir("threads"), 0}), ValidationError);
}

TEST_CASE("command line exit codes") {
    auto d = fresh_dir("cli");
    std::ofstream(d / "ok.yaml") << kSmall;
    std::ofstream(d / "bad.yaml") << kSmall << "lambda_sweep: {lambdas: [1.5]}\n";
    auto cfg = (d / "ok.yaml").string(), bad = (d / "bad.yaml").string();

    CHECK(run_cli("demo --config " + cfg + " --out " + (d / "out").string() + " --seed 9 --threads 2") == 0);
    auto manifest = nlohmann::json::parse(slurp(d / "out" / "manifest.json"));
    CHECK(manifest["seed"] == 9);
    CHECK(manifest["threads"] == 2);

    CHECK(run_cli("lambda-sweep --config " + bad + " --out " + (d / "bad").string()) == 1);
    CHECK_FALSE(fs::exists(d / "bad"));
    CHECK(run_cli("demo --config " + (d / "missing.yaml").string()) == 1);
    CHECK(run_cli("demo") == 1);
    CHECK(run_cli("frobnicate --config " + cfg) == 1);
    CHECK(run_cli("demo --config " + cfg + " --threads 0") == 1);
    CHECK(run_cli("contraction --config " + cfg + " --out " + (d / "c").string()) == 2);
    CHECK(fs::exists(d / "c" / "manifest.json"));
}
