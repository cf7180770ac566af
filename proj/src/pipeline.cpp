#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"
#include "semiper/atomic_file.hpp"
#include "semiper/cli_io.hpp"
#include "semiper/snapshot.hpp"
#include "semiper/spectral.hpp"

#ifndef SEMIPER_VERSION
#define SEMIPER_VERSION "0.0.0"
#endif

namespace semiper {

namespace fs = std::filesystem;

namespace {

const std::vector<std::pair<Subcommand, std::string>> kSubcommands{
    {Subcommand::SolvePeriodic, "solve-periodic"}, {Subcommand::LambdaSweep, "lambda-sweep"},
    {Subcommand::AprioriSweep, "apriori-sweep"},   {Subcommand::Spectrum, "spectrum"},
    {Subcommand::Averaging, "averaging"},          {Subcommand::Tails, "tails"},
    {Subcommand::Contraction, "contraction"},      {Subcommand::CheckHypotheses, "check-hypotheses"},
    {Subcommand::Demo, "demo"}};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

/// Output sink rooted at the run directory; every file goes through temp + rename.
class Sink {
public:
    Sink(fs::path root, std::vector<ManifestFile>& files) : root_(std::move(root)), files_(files) {}

    Sink sub(const std::string& dir) const {
        Sink s(root_, files_);
        s.prefix_ = prefix_.empty() ? dir + "/" : prefix_ + dir + "/";
        return s;
    }

    void write(const std::string& name, const std::string& contents) const {
        auto rel = prefix_ + name;
        write_file_atomically(root_ / rel, contents);
        files_.push_back({rel, sha256_hex(contents), contents.size()});
    }

    void snapshot(const std::string& name, const Field& u, const std::map<std::string, std::string>& meta) const {
        std::ostringstream os;
        write_snapshot(os, u, meta);
        write(name, os.str());
    }

private:
    fs::path root_;
    std::string prefix_;
    std::vector<ManifestFile>& files_;
};

struct Context {
    const RunConfig& cfg;
    GridPtr grid;
    std::shared_ptr<const Nonlinearity> nl;
    RunManifest& manifest;

    double period() const { return nl->period(); }

    EvolutionConfig evolution() const {
        auto e = default_evolution_config(period());
        e.dt = cfg.evolution.dt > 0.0 ? cfg.evolution.dt : period() / cfg.evolution.steps_per_period;
        e.scheme = cfg.evolution.scheme;
        return e;
    }

    PeriodicOptions periodic() const {
        PeriodicOptions o;
        o.tol = cfg.solver.tol;
        o.max_iter = cfg.solver.max_iter;
        o.anderson_window = cfg.solver.anderson_window;
        o.krylov_rtol = cfg.solver.krylov_rtol;
        o.krylov_restart = cfg.solver.krylov_restart;
        o.krylov_max_iter = cfg.solver.krylov_max_iter;
        o.orbit_samples = cfg.solver.orbit_samples;
        return o;
    }

    StationaryOptions stationary() const {
        StationaryOptions o;
        o.tol = cfg.stationary.tol;
        o.relax_time = cfg.stationary.relax_time;
        o.relax_dt = cfg.stationary.relax_dt;
        o.newton_max_iter = cfg.stationary.newton_max_iter;
        return o;
    }

    void fail(const std::string& stage, const std::string& msg) { manifest.failures.push_back(stage + ": " + msg); }
};

class Summary {
public:
    template <class T>
    Summary& add(const std::string& key, const T& value) {
        if constexpr (std::is_same_v<T, bool>) {
            os_ << key << ": " << (value ? "true" : "false") << '\n';
        } else if constexpr (std::is_arithmetic_v<T> && !std::is_integral_v<T>) {
            os_ << key << ": " << num(value) << '\n';
        } else {
            os_ << key << ": " << value << '\n';
        }
        return *this;
    }
    std::string str() const { return os_.str(); }

private:
    std::ostringstream os_;
};

void solve_periodic_stage(Context& ctx, const Sink& out) {
    auto u0 = build_initial(ctx.cfg.solver.initial, ctx.grid);
    auto rep = solve_periodic(ctx.cfg.solver.method, u0, ctx.evolution(), *ctx.nl, ctx.periodic());

    std::string csv = "iteration,residual_h1\n";
    for (std::size_t k = 0; k < rep.residuals.size(); ++k) csv += std::to_string(k) + "," + num(rep.residuals[k]) + "\n";
    out.write("residuals.csv", csv);
    if (rep.orbit.size() > 0) {
        std::ostringstream os;
        rep.orbit.write_csv(os);
        out.write("orbit.csv", os.str());
    }
    if (rep.solution.grid()) {
        out.snapshot("solution.field", rep.solution,
                     {{"kind", "periodic_initial_state"}, {"method", to_string(rep.method)},
                      {"period", num(rep.period)}});
    }
    Summary s;
    s.add("method", to_string(rep.method))
        .add("converged", rep.converged)
        .add("diverged", rep.diverged)
        .add("iterations", rep.iterations)
        .add("final_residual_h1", rep.residuals.empty() ? NAN : rep.residuals.back())
        .add("decay_ratio", rep.decay_ratio)
        .add("map_evaluations", rep.map_evaluations)
        .add("solution_h1", rep.solution.grid() ? norm_h1(rep.solution) : NAN)
        .add("message", rep.message);
    out.write("summary.txt", s.str());
    if (!rep.converged) ctx.fail("solve-periodic", "no convergence: " + rep.message);
}

void lambda_sweep_stage(Context& ctx, const Sink& out) {
    LambdaSweepOptions o;
    o.method = ctx.cfg.solver.method;
    o.periodic = ctx.periodic();
    o.periodic.orbit_samples = 0;
    o.stationary = ctx.stationary();
    o.quadrature_intervals = ctx.cfg.lambda_sweep.quadrature_intervals;
    o.steps_per_period = ctx.cfg.evolution.steps_per_period;
    auto u0 = build_initial(ctx.cfg.solver.initial, ctx.grid);
    auto base = ctx.evolution();
    auto rep = lambda_sweep(ctx.cfg.lambda_sweep.lambdas, u0, *ctx.nl, base, o);

    std::string csv = "lambda,distance_h1,residual_h1,iterations,converged\n";
    for (std::size_t i = 0; i < rep.lambdas.size(); ++i) {
        const auto& s = rep.solves[i];
        csv += num(rep.lambdas[i]) + "," + num(rep.distances[i]) + "," +
               num(s.residuals.empty() ? NAN : s.residuals.back()) + "," + std::to_string(s.iterations) + "," +
               (s.converged ? "1" : "0") + "\n";
        if (!s.converged) ctx.fail("lambda-sweep", "no convergence at lambda = " + num(rep.lambdas[i]));
    }
    out.write("lambda_sweep.csv", csv);
    if (rep.stationary.solution.grid())
        out.snapshot("stationary.field", rep.stationary.solution, {{"kind", "averaged_stationary"}});
    Summary s;
    s.add("monotone", rep.monotone)
        .add("final_distance_h1", rep.distances.empty() ? NAN : rep.distances.back())
        .add("stationary_converged", rep.stationary.converged)
        .add("stationary_residual_l2", rep.stationary.residual)
        .add("stationary_h1", rep.stationary.solution.grid() ? norm_h1(rep.stationary.solution) : NAN);
    out.write("summary.txt", s.str());
    if (!rep.stationary.converged) ctx.fail("lambda-sweep", "averaged stationary solve: " + rep.stationary.message);
}

void apriori_stage(Context& ctx, const Sink& out) {
    const auto& a = ctx.cfg.apriori;
    auto opts = ctx.periodic();
    opts.orbit_samples = 0;
    auto rep = apriori_sweep(a.radii, a.direction, ctx.evolution(), *ctx.nl, ctx.cfg.seed, a.directions, a.method, opts);
    std::string csv = "radius,direction,converged,solution_h1,residual_h1,iterations\n";
    for (const auto& r : rep.runs) {
        csv += num(r.radius) + "," + std::to_string(r.direction) + "," + (r.converged ? "1" : "0") + "," +
               num(r.solution_norm) + "," + num(r.residual) + "," + std::to_string(r.iterations) + "\n";
    }
    out.write("apriori.csv", csv);
    Summary s;
    s.add("label", rep.label)
        .add("direction", to_string(rep.direction))
        .add("extreme_norm_h1", rep.extreme_norm)
        .add("found_nonzero", rep.found_nonzero)
        .add("zero_threshold", rep.zero_threshold)
        .add("seed", rep.seed);
    out.write("summary.txt", s.str());
}

void spectrum_stage(Context& ctx, const Sink& out) {
    const auto& sc = ctx.cfg.spectrum;
    AveragedProblem avg(ctx.nl, sc.quadrature_intervals);
    EigenOptions eo;
    eo.want_vectors = sc.eigenvectors;
    eo.seed = ctx.cfg.seed;

    std::string csv = "potential,index,eigenvalue\n";
    Summary s;
    s.add("quadrature_error", avg.quadrature_error());
    std::optional<SchrodingerReport> zero, inf;
    auto record = [&](PotentialTag tag, std::optional<SchrodingerReport>& slot) {
        slot = analyze(avg, tag, sc.gap_tol, eo);
        const auto& r = *slot;
        auto name = to_string(tag);
        for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
            csv += name + "," + std::to_string(i) + "," + num(r.eigenvalues[i]) + "\n";
        s.add(name + ".m_minus", r.m_minus)
            .add(name + ".kernel_gap", r.kernel_gap)
            .add(name + ".kernel_condition", r.kernel_condition)
            .add(name + ".essential_lower_bound", r.essential_lower_bound)
            .add(name + ".gap_tol", r.gap_tol)
            .add(name + ".localized", r.eigenvalues.size());
        for (std::size_t i = 0; i < r.eigenvectors.size(); ++i)
            out.snapshot("eigenvector_" + name + "_" + std::to_string(i) + ".field", r.eigenvectors[i],
                         {{"potential", name}, {"eigenvalue", num(r.eigenvalues[i])}});
    };
    if (sc.at_zero) record(PotentialTag::AtZero, zero);
    if (sc.at_infinity) record(PotentialTag::AtInfinity, inf);
    if (zero && inf) {
        auto p = parity_condition(*zero, *inf);
        s.add("parity_holds", p.holds);
    }
    out.write("eigenvalues.csv", csv);
    out.write("spectrum.txt", s.str());
}

void averaging_stage(Context& ctx, const Sink& out) {
    const auto& a = ctx.cfg.averaging;
    AveragingOptions o;
    o.lambdas = a.lambdas;
    o.t_obs = a.t_obs;
    o.delta = a.delta;
    o.mode = a.mode;
    o.noise_h1 = a.noise_h1;
    o.seed = ctx.cfg.seed;
    o.quadrature_intervals = a.quadrature_intervals;
    o.steps_per_period = a.steps_per_period;
    o.reference_steps_per_period = a.reference_steps_per_period;
    o.samples_per_period = a.samples_per_period;
    auto rep = averaging_convergence(*ctx.nl, build_initial(a.initial, ctx.grid), o);

    std::string csv = "lambda,error_h1,error_at_delta_h1,noise_l2,noise_h1\n";
    for (std::size_t i = 0; i < rep.lambdas.size(); ++i) {
        csv += num(rep.lambdas[i]) + "," + num(rep.errors[i]) + "," + num(rep.errors_at_delta[i]) + "," +
               num(rep.noise_l2[i]) + "," + num(rep.noise_h1[i]) + "\n";
    }
    out.write("averaging.csv", csv);
    Summary s;
    s.add("mode", to_string(rep.mode)).add("delta", rep.delta).add("t_obs", rep.t_obs);
    s.add("strictly_decreasing", rep.strictly_decreasing);
    if (!rep.errors.empty()) s.add("ratio_last_first", rep.errors.back() / rep.errors.front());
    out.write("summary.txt", s.str());
    for (std::size_t i = 0; i < rep.failures.size(); ++i)
        if (!rep.failures[i].empty()) ctx.fail("averaging", "lambda = " + num(rep.lambdas[i]) + ": " + rep.failures[i]);
}

void tails_stage(Context& ctx, const Sink& out) {
    const auto& tc = ctx.cfg.tails;
    double L = ctx.grid->half_width();
    auto radii = tc.radii.empty() ? std::vector<double>{0.5 * L, 0.625 * L, 0.75 * L, 0.875 * L} : tc.radii;
    double T = ctx.period();
    auto traj = evolve(build_initial(tc.initial, ctx.grid), 0.0, tc.periods * T, ctx.evolution(), *ctx.nl,
                       T / tc.samples_per_period, radii);
    auto rep = tail_estimate(traj, ctx.nl->dissipativity_rate(), trajectory_h1_bound(traj), tc.floor);

    std::ostringstream os;
    traj.write_csv(os);
    out.write("trajectory.csv", os.str());
    std::string csv = "radius,alpha\n";
    for (std::size_t r = 0; r < rep.radii.size(); ++r) csv += num(rep.radii[r]) + "," + num(rep.alpha[r]) + "\n";
    out.write("alpha.csv", csv);
    Summary s;
    s.add("bound_R", rep.bound_R)
        .add("rate_a", rep.rate_a)
        .add("decreasing", rep.decreasing)
        .add("floor", rep.floor)
        .add("passes", rep.passes);
    out.write("summary.txt", s.str());
}

void contraction_stage(Context& ctx, const Sink& out) {
    const auto& cc = ctx.cfg.contraction;
    double T = ctx.period();
    std::vector<double> times;
    for (double t : cc.times) times.push_back(t * T);
    auto e = ctx.evolution();
    e.dt = T / cc.steps_per_period;
    auto rep = contraction_test(*ctx.nl, build_initial(cc.first, ctx.grid), build_initial(cc.second, ctx.grid), times,
                                e, cc.tolerance);
    std::string csv = "t,ratio,refined_ratio\n";
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        csv += num(rep.times[i]) + "," + num(rep.ratios[i]) + "," + num(rep.refined_ratios[i]) + "\n";
    out.write("contraction.csv", csv);
    Summary s;
    s.add("rate_a", rep.rate_a).add("max_ratio", rep.max_ratio).add("tolerance", rep.tolerance).add("passes", rep.passes);
    out.write("summary.txt", s.str());
}

void hypotheses_stage(Context& ctx, const Sink& out) {
    const auto& h = ctx.cfg.hypotheses;
    HypothesisOptions o;
    o.dissipativity_samples = h.dissipativity_samples;
    o.periodicity_samples = h.periodicity_samples;
    o.u_range = h.u_range;
    o.seed = ctx.cfg.seed;
    o.quadrature_intervals = h.quadrature_intervals;
    o.gap_tol = h.gap_tol;
    auto v = check_theorem_hypotheses(*ctx.nl, h.theorem, o);

    auto role = [](CheckRole r) {
        switch (r) {
            case CheckRole::Theorem11: return "Thm11";
            case CheckRole::Theorem12: return "Thm12";
            case CheckRole::Informational: return "info";
        }
        return "?";
    };
    std::string csv = "name,role,status,margin,detail\n";
    for (const auto& c : v.checks)
        csv += c.name + "," + role(c.role) + "," + to_string(c.status) + "," + num(c.margin) + "," + quoted(c.detail) + "\n";
    out.write("hypotheses.csv", csv);
    Summary s;
    s.add("theorem", to_string(v.which)).add("verdict", to_string(v.verdict));
    if (v.at_zero) s.add("m_minus_zero", v.at_zero->m_minus);
    if (v.at_infinity) s.add("m_minus_infinity", v.at_infinity->m_minus);
    if (v.parity) s.add("parity_holds", v.parity->holds);
    out.write("verdict.txt", s.str());
}

using Stage = std::function<void(Context&, const Sink&)>;

Stage stage_for(Subcommand sub) {
    switch (sub) {
        case Subcommand::SolvePeriodic: return solve_periodic_stage;
        case Subcommand::LambdaSweep: return lambda_sweep_stage;
        case Subcommand::AprioriSweep: return apriori_stage;
        case Subcommand::Spectrum: return spectrum_stage;
        case Subcommand::Averaging: return averaging_stage;
        case Subcommand::Tails: return tails_stage;
        case Subcommand::Contraction: return contraction_stage;
        case Subcommand::CheckHypotheses: return hypotheses_stage;
        case Subcommand::Demo: break;
    }
    return {};
}

void timed(Context& ctx, const std::string& name, const std::function<void()>& fn) {
    auto start = std::chrono::steady_clock::now();
    try {
        fn();
    } catch (const std::exception& e) {
        ctx.fail(name, e.what());
    }
    std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
    ctx.manifest.timings.push_back({name, dt.count()});
}

}  // namespace

std::string to_string(Subcommand s) {
    for (const auto& [k, name] : kSubcommands)
        if (k == s) return name;
    return "unknown";
}

Subcommand subcommand_from_string(const std::string& s) {
    for (const auto& [k, name] : kSubcommands)
        if (name == s) return k;
    throw std::invalid_argument("unknown subcommand '" + s + "'");
}

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& kv : kSubcommands) v.push_back(kv.second);
        return v;
    }();
    return names;
}

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string toolkit_version() { return SEMIPER_VERSION; }

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["subcommand"] = subcommand;
    j["status"] = ok() ? "ok" : "failed";
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["seed"] = seed;
    j["threads"] = threads;
    auto& fs_ = j["files"] = nlohmann::ordered_json::array();
    for (const auto& f : files) fs_.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    auto& ts = j["timings"] = nlohmann::ordered_json::array();
    for (const auto& t : timings) ts.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    j["failures"] = failures;
    return j.dump(2) + "\n";
}

RunManifest run(const RunConfig& cfg, Subcommand sub, const RunOptions& opts) {
    cfg.validate();
    if (opts.threads < 1) throw ValidationError("threads", "threads: must be >= 1");

    RunManifest m;
    m.subcommand = to_string(sub);
    auto canonical = emit_config(cfg);
    m.config_hash = sha256_hex(canonical);
    m.version = toolkit_version();
    m.seed = cfg.seed;
    m.threads = opts.threads;

    fs::path root = opts.out_dir.empty() ? fs::path(cfg.output) : opts.out_dir;
    fs::create_directories(root);
    // A manifest left by an earlier run must not vouch for this one's files.
    fs::remove(root / "manifest.json");

    Sink sink(root, m.files);
    sink.write("config.yaml", canonical);

    auto grid = build_grid(cfg);
    Context ctx{cfg, grid, std::make_shared<const Nonlinearity>(build_nonlinearity(cfg, grid)), m};

    if (sub == Subcommand::Demo) {
        const std::pair<const char*, Subcommand> order[] = {{"hypotheses", Subcommand::CheckHypotheses},
                                                            {"spectrum", Subcommand::Spectrum},
                                                            {"periodic", Subcommand::SolvePeriodic},
                                                            {"tails", Subcommand::Tails}};
        for (const auto& [dir, s] : order) {
            auto stage = stage_for(s);
            timed(ctx, to_string(s), [&] { stage(ctx, sink.sub(dir)); });
        }
    } else {
        auto stage = stage_for(sub);
        timed(ctx, m.subcommand, [&] { stage(ctx, sink); });
    }

    write_file_atomically(root / "manifest.json", m.to_json());
    return m;
}

}  // namespace semiper
