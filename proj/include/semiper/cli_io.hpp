#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <stdexcept>
#include <string>
#include <vector>

#include "semiper/experiments.hpp"
#include "semiper/nonlinearity.hpp"
#include "semiper/periodic.hpp"

namespace semiper {

/// Malformed text, unknown or missing keys.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Well-formed but out of range; key() is the dotted path of the offending entry.
class ValidationError : public ConfigError {
public:
    ValidationError(std::string key, const std::string& what) : ConfigError(what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

struct GridConfig {
    int dimension = 1;
    double half_width = 10.0;
    int points_per_axis = 127;
    LaplacianKind laplacian = LaplacianKind::Spectral;
    bool operator==(const GridConfig&) const = default;
};

enum class NonlinearityKind { Demo, Tree };

struct NonlinearityConfig {
    NonlinearityKind kind = NonlinearityKind::Demo;
    double period = 2.0 * 3.14159265358979323846;
    double p = 2.0;
    // demo parameters
    double a = 1.0;
    double b_coeff = 6.0;
    double s = 2.0;
    // tree form
    CompositionTree tree;
    bool operator==(const NonlinearityConfig&) const = default;
};

/// Initial state: zero, a Gaussian amp exp(-|x|^2/width^2), or a smooth bump supported in |x| < width.
struct InitialConfig {
    std::string kind = "gaussian";
    double amplitude = 1.0;
    double width = 1.0;
    bool operator==(const InitialConfig&) const = default;
};

struct EvolutionSection {
    /// 0 selects lambda T / steps_per_period.
    double dt = 0.0;
    int steps_per_period = 256;
    Scheme scheme = Scheme::StrangSplitting;
    bool operator==(const EvolutionSection&) const = default;
};

struct SolverConfig {
    PeriodicMethod method = PeriodicMethod::Anderson;
    double tol = 1e-8;
    int max_iter = 200;
    int anderson_window = 3;
    double krylov_rtol = 1e-3;
    int krylov_restart = 30;
    int krylov_max_iter = 120;
    int orbit_samples = 32;
    InitialConfig initial;
    bool operator==(const SolverConfig&) const = default;
};

struct StationaryConfig {
    double tol = 1e-9;
    double relax_time = 20.0;
    double relax_dt = 0.05;
    int newton_max_iter = 40;
    bool operator==(const StationaryConfig&) const = default;
};

struct LambdaSweepConfig {
    std::vector<double> lambdas{1.0, 0.5, 0.25, 0.125, 0.0625};
    int quadrature_intervals = 256;
    bool operator==(const LambdaSweepConfig&) const = default;
};

struct AprioriConfig {
    std::vector<double> radii{1e-3, 1.0, 1e3};
    SweepDirection direction = SweepDirection::LargeNorm;
    int directions = 16;
    PeriodicMethod method = PeriodicMethod::Picard;
    bool operator==(const AprioriConfig&) const = default;
};

struct SpectrumConfig {
    bool at_zero = true;
    bool at_infinity = true;
    double gap_tol = 0.0;
    int quadrature_intervals = 256;
    bool eigenvectors = false;
    bool operator==(const SpectrumConfig&) const = default;
};

struct AveragingConfig {
    std::vector<double> lambdas{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
    double t_obs = 0.0;
    double delta = 0.0;
    InitialDataMode mode = InitialDataMode::H1Converging;
    double noise_h1 = 0.5;
    int steps_per_period = 256;
    int reference_steps_per_period = 2048;
    int samples_per_period = 256;
    int quadrature_intervals = 256;
    InitialConfig initial;
    bool operator==(const AveragingConfig&) const = default;
};

struct TailsConfig {
    /// Empty selects L/2, 5L/8, 3L/4, 7L/8.
    std::vector<double> radii;
    int periods = 4;
    int samples_per_period = 64;
    double floor = 1e-8;
    InitialConfig initial{"compact", 1.0, 1.0};
    bool operator==(const TailsConfig&) const = default;
};

struct ContractionConfig {
    /// In units of the period T.
    std::vector<double> times{0.25, 0.5, 1.0};
    int steps_per_period = 512;
    double tolerance = 0.01;
    InitialConfig first{"gaussian", 3.0, 1.0};
    InitialConfig second{"gaussian", -2.0, 2.0};
    bool operator==(const ContractionConfig&) const = default;
};

struct HypothesesConfig {
    Theorem theorem = Theorem::Thm12;
    int dissipativity_samples = 4000;
    int periodicity_samples = 1000;
    double u_range = 10.0;
    int quadrature_intervals = 256;
    double gap_tol = 0.0;
    bool operator==(const HypothesesConfig&) const = default;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::string output = "out";
    GridConfig grid;
    NonlinearityConfig nonlinearity;
    EvolutionSection evolution;
    SolverConfig solver;
    StationaryConfig stationary;
    LambdaSweepConfig lambda_sweep;
    AprioriConfig apriori;
    SpectrumConfig spectrum;
    AveragingConfig averaging;
    TailsConfig tails;
    ContractionConfig contraction;
    HypothesesConfig hypotheses;
    bool operator==(const RunConfig&) const = default;

    /// Throws ValidationError naming the offending key.
    void validate() const;
};

/// Strict YAML parse; `source` names the input in diagnostics.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);
/// Canonical YAML text; parse_config(emit_config(c)) == c.
std::string emit_config(const RunConfig& cfg);

GridPtr build_grid(const RunConfig& cfg);
Nonlinearity build_nonlinearity(const RunConfig& cfg, const GridPtr& grid);
Field build_initial(const InitialConfig& init, const GridPtr& grid);

enum class Subcommand {
    SolvePeriodic,
    LambdaSweep,
    AprioriSweep,
    Spectrum,
    Averaging,
    Tails,
    Contraction,
    CheckHypotheses,
    Demo
};
std::string to_string(Subcommand s);
Subcommand subcommand_from_string(const std::string& s);
const std::vector<std::string>& subcommand_names();

struct ManifestFile {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct ManifestTiming {
    std::string stage;
    double seconds = 0.0;
};

struct RunManifest {
    std::string subcommand;
    std::string config_hash;
    std::string version;
    std::uint64_t seed = 0;
    int threads = 1;
    std::vector<ManifestFile> files;
    std::vector<ManifestTiming> timings;
    std::vector<std::string> failures;

    bool ok() const { return failures.empty(); }
    std::string to_json() const;
};

struct RunOptions {
    std::filesystem::path out_dir;
    int threads = 1;
};

/// Runs a pipeline, writes its outputs atomically and manifest.json last.
/// Pipeline failures are recorded in the manifest, not thrown.
RunManifest run(const RunConfig& cfg, Subcommand sub, const RunOptions& opts);

std::string sha256_hex(std::string_view data);
std::string toolkit_version();

}  // namespace semiper
