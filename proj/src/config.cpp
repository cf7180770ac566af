#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "semiper/cli_io.hpp"

namespace semiper {

namespace {

using LineMap = std::map<std::string, int>;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

/// A YAML mapping with strict key accounting. Every lookup is remembered so
/// finish() can reject whatever was not consumed.
class Block {
public:
    Block(YAML::Node node, std::string path, const std::string& source, LineMap& lines)
        : node_(std::move(node)), path_(std::move(path)), source_(source), lines_(lines) {
        if (!node_.IsMap()) fail("expected a mapping");
    }

    [[noreturn]] void fail(const std::string& msg, const YAML::Node* at = nullptr) const {
        const YAML::Node& n = at ? *at : node_;
        std::ostringstream os;
        os << source_ << ":" << n.Mark().line + 1 << ": " << (path_.empty() ? std::string("<root>") : path_)
           << ": " << msg;
        throw ConfigError(os.str());
    }

    bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

    template <class T>
    void opt(const std::string& key, T& out) {
        if (auto n = lookup(key)) out = convert<T>(n, key);
    }

    template <class T>
    void req(const std::string& key, T& out) {
        auto n = lookup(key);
        if (!n) fail("missing required key '" + key + "'");
        out = convert<T>(n, key);
    }

    /// Enumerations and other string-coded values.
    template <class T, class Fn>
    void opt_enum(const std::string& key, T& out, Fn&& parse) {
        auto n = lookup(key);
        if (!n) return;
        auto text = convert<std::string>(n, key);
        try {
            out = parse(text);
        } catch (const std::exception& e) {
            fail_key(n, key, e.what());
        }
    }

    void opt_list(const std::string& key, std::vector<double>& out) {
        auto n = lookup(key);
        if (!n) return;
        if (!n.IsSequence()) fail_key(n, key, "expected a list of numbers");
        out.clear();
        for (const auto& item : n) out.push_back(convert<double>(item, key));
    }

    std::optional<Block> child(const std::string& key, bool required) {
        auto n = lookup(key);
        if (!n) {
            if (required) fail("missing required block '" + key + "'");
            return std::nullopt;
        }
        if (!n.IsMap()) fail_key(n, key, "expected a mapping");
        return Block(n, join(path_, key), source_, lines_);
    }

    YAML::Node raw(const std::string& key) { return lookup(key); }
    const std::string& path() const { return path_; }
    const std::string& source() const { return source_; }
    LineMap& lines() { return lines_; }

    void finish() const {
        for (const auto& kv : node_) {
            auto key = kv.first.as<std::string>();
            if (!seen_.count(key)) {
                std::ostringstream os;
                os << source_ << ":" << kv.first.Mark().line + 1 << ": unknown key '" << join(path_, key) << "'";
                throw ConfigError(os.str());
            }
        }
    }

    [[noreturn]] void fail_key(const YAML::Node& n, const std::string& key, const std::string& msg) const {
        std::ostringstream os;
        os << source_ << ":" << n.Mark().line + 1 << ": " << join(path_, key) << ": " << msg;
        throw ConfigError(os.str());
    }

private:
    YAML::Node lookup(const std::string& key) {
        seen_.insert(key);
        YAML::Node n = node_[key];
        if (n) lines_[join(path_, key)] = n.Mark().line + 1;
        return n;
    }

    template <class T>
    T convert(const YAML::Node& n, const std::string& key) const {
        if (!n.IsScalar()) fail_key(n, key, "expected a scalar");
        const auto& text = n.Scalar();
        if constexpr (std::is_same_v<T, std::string>) {
            return text;
        } else {
            if constexpr (std::is_unsigned_v<T>) {
                if (!text.empty() && text[0] == '-') fail_key(n, key, "expected a non-negative integer");
            }
            try {
                return n.as<T>();
            } catch (const YAML::Exception&) {
                const char* what = std::is_same_v<T, bool>             ? "expected true or false"
                                   : std::is_floating_point_v<T>      ? "expected a number"
                                                                       : "expected an integer";
                fail_key(n, key, std::string(what) + ", got '" + text + "'");
            }
        }
    }

    YAML::Node node_;
    std::string path_;
    const std::string& source_;
    LineMap& lines_;
    std::set<std::string> seen_;
};

Term parse_term(const YAML::Node& n, const std::string& path, const std::string& source, LineMap& lines) {
    Block b(n, path, source, lines);
    Term t;
    b.req("coeff", t.coeff);
    b.opt_enum("space", t.space, space_profile_from_string);
    b.opt("space_param", t.space_param);
    b.opt_enum("time", t.time, time_profile_from_string);
    b.opt("frequency", t.frequency);
    b.finish();
    return t;
}

Coefficient parse_coefficient(Block& parent, const std::string& key) {
    Coefficient c;
    auto n = parent.raw(key);
    if (!n) return c;
    if (!n.IsSequence()) parent.fail_key(n, key, "expected a list of terms");
    int i = 0;
    for (const auto& item : n) {
        c.push_back(parse_term(item, join(parent.path(), key) + "[" + std::to_string(i++) + "]", parent.source(),
                               parent.lines()));
    }
    return c;
}

void parse_initial(Block& parent, const std::string& key, InitialConfig& init) {
    auto b = parent.child(key, false);
    if (!b) return;
    b->opt("kind", init.kind);
    b->opt("amplitude", init.amplitude);
    b->opt("width", init.width);
    b->finish();
}

void parse_nonlinearity(Block& b, NonlinearityConfig& nl) {
    b.opt_enum("kind", nl.kind, [](const std::string& s) {
        if (s == "demo") return NonlinearityKind::Demo;
        if (s == "tree") return NonlinearityKind::Tree;
        throw std::invalid_argument("unknown kind '" + s + "' (expected demo or tree)");
    });
    b.opt("period", nl.period);
    b.opt("p", nl.p);
    if (nl.kind == NonlinearityKind::Demo) {
        b.opt("a", nl.a);
        b.opt("b_coeff", nl.b_coeff);
        b.opt("s", nl.s);
    } else {
        nl.tree.source = parse_coefficient(b, "source");
        nl.tree.linear = parse_coefficient(b, "linear");
        if (auto n = b.raw("outer")) {
            if (!n.IsSequence()) b.fail_key(n, "outer", "expected a list");
            int i = 0;
            for (const auto& item : n) {
                Block ob(item, b.path() + ".outer[" + std::to_string(i++) + "]", b.source(), b.lines());
                OuterTerm o;
                ob.opt_enum("function", o.function, outer_function_from_string);
                o.inner = parse_coefficient(ob, "inner");
                ob.finish();
                nl.tree.outer.push_back(std::move(o));
            }
        }
    }
    b.finish();
}

RunConfig parse_root(const YAML::Node& root, const std::string& source, LineMap& lines) {
    if (!root || root.IsNull()) throw ConfigError(source + ": empty configuration");
    Block top(root, "", source, lines);
    RunConfig c;
    top.req("seed", c.seed);
    top.opt("output", c.output);

    {
        auto b = top.child("grid", true);
        b->req("dimension", c.grid.dimension);
        b->req("half_width", c.grid.half_width);
        b->req("points_per_axis", c.grid.points_per_axis);
        b->opt_enum("laplacian", c.grid.laplacian, laplacian_kind_from_string);
        b->finish();
    }
    {
        auto b = top.child("nonlinearity", true);
        if (!b->has("kind")) b->fail("missing required key 'kind'");
        parse_nonlinearity(*b, c.nonlinearity);
    }
    if (auto b = top.child("evolution", false)) {
        b->opt("dt", c.evolution.dt);
        b->opt("steps_per_period", c.evolution.steps_per_period);
        b->opt_enum("scheme", c.evolution.scheme, scheme_from_string);
        b->finish();
    }
    if (auto b = top.child("solver", false)) {
        auto& s = c.solver;
        b->opt_enum("method", s.method, periodic_method_from_string);
        b->opt("tol", s.tol);
        b->opt("max_iter", s.max_iter);
        b->opt("anderson_window", s.anderson_window);
        b->opt("krylov_rtol", s.krylov_rtol);
        b->opt("krylov_restart", s.krylov_restart);
        b->opt("krylov_max_iter", s.krylov_max_iter);
        b->opt("orbit_samples", s.orbit_samples);
        parse_initial(*b, "initial", s.initial);
        b->finish();
    }
    if (auto b = top.child("stationary", false)) {
        b->opt("tol", c.stationary.tol);
        b->opt("relax_time", c.stationary.relax_time);
        b->opt("relax_dt", c.stationary.relax_dt);
        b->opt("newton_max_iter", c.stationary.newton_max_iter);
        b->finish();
    }
    if (auto b = top.child("lambda_sweep", false)) {
        b->opt_list("lambdas", c.lambda_sweep.lambdas);
        b->opt("quadrature_intervals", c.lambda_sweep.quadrature_intervals);
        b->finish();
    }
    if (auto b = top.child("apriori", false)) {
        b->opt_list("radii", c.apriori.radii);
        b->opt_enum("direction", c.apriori.direction, sweep_direction_from_string);
        b->opt("directions", c.apriori.directions);
        b->opt_enum("method", c.apriori.method, periodic_method_from_string);
        b->finish();
    }
    if (auto b = top.child("spectrum", false)) {
        b->opt("at_zero", c.spectrum.at_zero);
        b->opt("at_infinity", c.spectrum.at_infinity);
        b->opt("gap_tol", c.spectrum.gap_tol);
        b->opt("quadrature_intervals", c.spectrum.quadrature_intervals);
        b->opt("eigenvectors", c.spectrum.eigenvectors);
        b->finish();
    }
    if (auto b = top.child("averaging", false)) {
        auto& a = c.averaging;
        b->opt_list("lambdas", a.lambdas);
        b->opt("t_obs", a.t_obs);
        b->opt("delta", a.delta);
        b->opt_enum("mode", a.mode, initial_data_mode_from_string);
        b->opt("noise_h1", a.noise_h1);
        b->opt("steps_per_period", a.steps_per_period);
        b->opt("reference_steps_per_period", a.reference_steps_per_period);
        b->opt("samples_per_period", a.samples_per_period);
        b->opt("quadrature_intervals", a.quadrature_intervals);
        parse_initial(*b, "initial", a.initial);
        b->finish();
    }
    if (auto b = top.child("tails", false)) {
        b->opt_list("radii", c.tails.radii);
        b->opt("periods", c.tails.periods);
        b->opt("samples_per_period", c.tails.samples_per_period);
        b->opt("floor", c.tails.floor);
        parse_initial(*b, "initial", c.tails.initial);
        b->finish();
    }
    if (auto b = top.child("contraction", false)) {
        b->opt_list("times", c.contraction.times);
        b->opt("steps_per_period", c.contraction.steps_per_period);
        b->opt("tolerance", c.contraction.tolerance);
        parse_initial(*b, "first", c.contraction.first);
        parse_initial(*b, "second", c.contraction.second);
        b->finish();
    }
    if (auto b = top.child("hypotheses", false)) {
        auto& h = c.hypotheses;
        b->opt_enum("theorem", h.theorem, theorem_from_string);
        b->opt("dissipativity_samples", h.dissipativity_samples);
        b->opt("periodicity_samples", h.periodicity_samples);
        b->opt("u_range", h.u_range);
        b->opt("quadrature_intervals", h.quadrature_intervals);
        b->opt("gap_tol", h.gap_tol);
        b->finish();
    }
    top.finish();
    return c;
}

// Validation helpers. Each throws ValidationError keyed by the dotted path.

void need(bool ok, const std::string& key, const std::string& msg) {
    if (!ok) throw ValidationError(key, key + ": " + msg);
}

void finite(double v, const std::string& key) { need(std::isfinite(v), key, "must be finite"); }

void positive(double v, const std::string& key) {
    finite(v, key);
    need(v > 0.0, key, "must be > 0, got " + std::to_string(v));
}

void nonnegative(double v, const std::string& key) {
    finite(v, key);
    need(v >= 0.0, key, "must be >= 0, got " + std::to_string(v));
}

void at_least(long v, long lo, const std::string& key) {
    need(v >= lo, key, "must be >= " + std::to_string(lo) + ", got " + std::to_string(v));
}

void lambda_list(const std::vector<double>& ls, const std::string& key) {
    need(!ls.empty(), key, "must not be empty");
    std::set<double> seen;
    for (std::size_t i = 0; i < ls.size(); ++i) {
        double l = ls[i];
        need(std::isfinite(l) && l > 0.0 && l <= 1.0, key,
             "entry " + std::to_string(i) + " must lie in (0, 1], got " + std::to_string(l));
        need(seen.insert(l).second, key, "duplicate entry " + std::to_string(l));
    }
}

void initial(const InitialConfig& init, const std::string& key) {
    need(init.kind == "zero" || init.kind == "gaussian" || init.kind == "compact", key + ".kind",
         "expected zero, gaussian or compact, got '" + init.kind + "'");
    finite(init.amplitude, key + ".amplitude");
    positive(init.width, key + ".width");
}

void terms(const Coefficient& c, const std::string& key) {
    for (std::size_t i = 0; i < c.size(); ++i) {
        auto k = key + "[" + std::to_string(i) + "]";
        finite(c[i].coeff, k + ".coeff");
        if (c[i].space != SpaceProfile::Constant) positive(c[i].space_param, k + ".space_param");
        finite(c[i].frequency, k + ".frequency");
    }
}

/// Shortest text that reads back to the same double.
struct Num {
    double v;
};

YAML::Emitter& operator<<(YAML::Emitter& e, Num n) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, n.v);
    return e << std::string(buf, r.ptr);
}

void emit_initial(YAML::Emitter& e, const char* key, const InitialConfig& init) {
    e << YAML::Key << key << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << init.kind;
    e << YAML::Key << "amplitude" << YAML::Value << Num{init.amplitude};
    e << YAML::Key << "width" << YAML::Value << Num{init.width};
    e << YAML::EndMap;
}

void emit_list(YAML::Emitter& e, const char* key, const std::vector<double>& v) {
    e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double x : v) e << Num{x};
    e << YAML::EndSeq;
}

void emit_coefficient(YAML::Emitter& e, const char* key, const Coefficient& c) {
    e << YAML::Key << key << YAML::Value << YAML::BeginSeq;
    for (const auto& t : c) {
        e << YAML::Flow << YAML::BeginMap;
        e << YAML::Key << "coeff" << YAML::Value << Num{t.coeff};
        e << YAML::Key << "space" << YAML::Value << to_string(t.space);
        e << YAML::Key << "space_param" << YAML::Value << Num{t.space_param};
        e << YAML::Key << "time" << YAML::Value << to_string(t.time);
        e << YAML::Key << "frequency" << YAML::Value << Num{t.frequency};
        e << YAML::EndMap;
    }
    e << YAML::EndSeq;
}

}  // namespace

void RunConfig::validate() const {
    need(grid.dimension >= 1 && grid.dimension <= 3, "grid.dimension", "must be 1, 2 or 3");
    positive(grid.half_width, "grid.half_width");
    at_least(grid.points_per_axis, 8, "grid.points_per_axis");

    const auto& n = nonlinearity;
    positive(n.period, "nonlinearity.period");
    finite(n.p, "nonlinearity.p");
    need(n.p >= 1.0, "nonlinearity.p", "must be >= 1");
    if (n.kind == NonlinearityKind::Demo) {
        positive(n.a, "nonlinearity.a");
        finite(n.b_coeff, "nonlinearity.b_coeff");
        nonnegative(n.s, "nonlinearity.s");
    } else {
        terms(n.tree.source, "nonlinearity.source");
        terms(n.tree.linear, "nonlinearity.linear");
        for (std::size_t j = 0; j < n.tree.outer.size(); ++j)
            terms(n.tree.outer[j].inner, "nonlinearity.outer[" + std::to_string(j) + "].inner");
    }

    nonnegative(evolution.dt, "evolution.dt");
    at_least(evolution.steps_per_period, 1, "evolution.steps_per_period");

    positive(solver.tol, "solver.tol");
    at_least(solver.max_iter, 1, "solver.max_iter");
    at_least(solver.anderson_window, 1, "solver.anderson_window");
    positive(solver.krylov_rtol, "solver.krylov_rtol");
    need(solver.krylov_rtol < 1.0, "solver.krylov_rtol", "must be < 1");
    at_least(solver.krylov_restart, 1, "solver.krylov_restart");
    at_least(solver.krylov_max_iter, 1, "solver.krylov_max_iter");
    at_least(solver.orbit_samples, 0, "solver.orbit_samples");
    initial(solver.initial, "solver.initial");

    positive(stationary.tol, "stationary.tol");
    nonnegative(stationary.relax_time, "stationary.relax_time");
    positive(stationary.relax_dt, "stationary.relax_dt");
    at_least(stationary.newton_max_iter, 1, "stationary.newton_max_iter");

    lambda_list(lambda_sweep.lambdas, "lambda_sweep.lambdas");
    at_least(lambda_sweep.quadrature_intervals, 2, "lambda_sweep.quadrature_intervals");

    need(!apriori.radii.empty(), "apriori.radii", "must not be empty");
    for (double r : apriori.radii) positive(r, "apriori.radii");
    at_least(apriori.directions, 1, "apriori.directions");

    nonnegative(spectrum.gap_tol, "spectrum.gap_tol");
    at_least(spectrum.quadrature_intervals, 2, "spectrum.quadrature_intervals");

    const auto& a = averaging;
    lambda_list(a.lambdas, "averaging.lambdas");
    nonnegative(a.t_obs, "averaging.t_obs");
    nonnegative(a.delta, "averaging.delta");
    double t_obs = a.t_obs > 0.0 ? a.t_obs : n.period;
    need(a.delta < t_obs, "averaging.delta", "must be smaller than the observation horizon");
    nonnegative(a.noise_h1, "averaging.noise_h1");
    at_least(a.steps_per_period, 1, "averaging.steps_per_period");
    at_least(a.reference_steps_per_period, 1, "averaging.reference_steps_per_period");
    at_least(a.samples_per_period, 1, "averaging.samples_per_period");
    at_least(a.quadrature_intervals, 2, "averaging.quadrature_intervals");
    initial(a.initial, "averaging.initial");

    for (double r : tails.radii) {
        positive(r, "tails.radii");
        need(r < grid.half_width * std::sqrt(double(grid.dimension)), "tails.radii",
             "radius " + std::to_string(r) + " lies outside the box");
    }
    at_least(tails.periods, 1, "tails.periods");
    at_least(tails.samples_per_period, 1, "tails.samples_per_period");
    positive(tails.floor, "tails.floor");
    initial(tails.initial, "tails.initial");

    need(!contraction.times.empty(), "contraction.times", "must not be empty");
    for (double t : contraction.times) positive(t, "contraction.times");
    at_least(contraction.steps_per_period, 1, "contraction.steps_per_period");
    positive(contraction.tolerance, "contraction.tolerance");
    initial(contraction.first, "contraction.first");
    initial(contraction.second, "contraction.second");

    at_least(hypotheses.dissipativity_samples, 1, "hypotheses.dissipativity_samples");
    at_least(hypotheses.periodicity_samples, 1, "hypotheses.periodicity_samples");
    positive(hypotheses.u_range, "hypotheses.u_range");
    at_least(hypotheses.quadrature_intervals, 2, "hypotheses.quadrature_intervals");
    nonnegative(hypotheses.gap_tol, "hypotheses.gap_tol");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        std::ostringstream os;
        os << source << ":" << e.mark.line + 1 << ":" << e.mark.column + 1 << ": malformed YAML: " << e.msg;
        throw ConfigError(os.str());
    }
    LineMap lines;
    RunConfig cfg = parse_root(root, source, lines);
    try {
        cfg.validate();
    } catch (const ValidationError& e) {
        // Attach the line of the key (or of its closest present ancestor).
        std::string key = e.key();
        int line = 0;
        for (std::string k = key;; k = k.substr(0, k.rfind('.'))) {
            auto base = k.substr(0, k.find('['));
            if (auto it = lines.find(base); it != lines.end()) {
                line = it->second;
                break;
            }
            if (k.find('.') == std::string::npos) break;
        }
        std::ostringstream os;
        os << source << ":";
        if (line > 0) os << line << ":";
        os << " invalid value: " << e.what();
        throw ValidationError(key, os.str());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::string emit_config(const RunConfig& c) {
    YAML::Emitter e;
    e << YAML::BeginMap;
    e << YAML::Key << "seed" << YAML::Value << c.seed;
    e << YAML::Key << "output" << YAML::Value << YAML::DoubleQuoted << c.output;

    e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dimension" << YAML::Value << c.grid.dimension;
    e << YAML::Key << "half_width" << YAML::Value << Num{c.grid.half_width};
    e << YAML::Key << "points_per_axis" << YAML::Value << c.grid.points_per_axis;
    e << YAML::Key << "laplacian" << YAML::Value << to_string(c.grid.laplacian);
    e << YAML::EndMap;

    const auto& n = c.nonlinearity;
    e << YAML::Key << "nonlinearity" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << (n.kind == NonlinearityKind::Demo ? "demo" : "tree");
    e << YAML::Key << "period" << YAML::Value << Num{n.period};
    e << YAML::Key << "p" << YAML::Value << Num{n.p};
    if (n.kind == NonlinearityKind::Demo) {
        e << YAML::Key << "a" << YAML::Value << Num{n.a};
        e << YAML::Key << "b_coeff" << YAML::Value << Num{n.b_coeff};
        e << YAML::Key << "s" << YAML::Value << Num{n.s};
    } else {
        emit_coefficient(e, "source", n.tree.source);
        emit_coefficient(e, "linear", n.tree.linear);
        e << YAML::Key << "outer" << YAML::Value << YAML::BeginSeq;
        for (const auto& o : n.tree.outer) {
            e << YAML::BeginMap;
            e << YAML::Key << "function" << YAML::Value << to_string(o.function);
            emit_coefficient(e, "inner", o.inner);
            e << YAML::EndMap;
        }
        e << YAML::EndSeq;
    }
    e << YAML::EndMap;

    e << YAML::Key << "evolution" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "dt" << YAML::Value << Num{c.evolution.dt};
    e << YAML::Key << "steps_per_period" << YAML::Value << c.evolution.steps_per_period;
    e << YAML::Key << "scheme" << YAML::Value << to_string(c.evolution.scheme);
    e << YAML::EndMap;

    const auto& s = c.solver;
    e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "method" << YAML::Value << to_string(s.method);
    e << YAML::Key << "tol" << YAML::Value << Num{s.tol};
    e << YAML::Key << "max_iter" << YAML::Value << s.max_iter;
    e << YAML::Key << "anderson_window" << YAML::Value << s.anderson_window;
    e << YAML::Key << "krylov_rtol" << YAML::Value << Num{s.krylov_rtol};
    e << YAML::Key << "krylov_restart" << YAML::Value << s.krylov_restart;
    e << YAML::Key << "krylov_max_iter" << YAML::Value << s.krylov_max_iter;
    e << YAML::Key << "orbit_samples" << YAML::Value << s.orbit_samples;
    emit_initial(e, "initial", s.initial);
    e << YAML::EndMap;

    e << YAML::Key << "stationary" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "tol" << YAML::Value << Num{c.stationary.tol};
    e << YAML::Key << "relax_time" << YAML::Value << Num{c.stationary.relax_time};
    e << YAML::Key << "relax_dt" << YAML::Value << Num{c.stationary.relax_dt};
    e << YAML::Key << "newton_max_iter" << YAML::Value << c.stationary.newton_max_iter;
    e << YAML::EndMap;

    e << YAML::Key << "lambda_sweep" << YAML::Value << YAML::BeginMap;
    emit_list(e, "lambdas", c.lambda_sweep.lambdas);
    e << YAML::Key << "quadrature_intervals" << YAML::Value << c.lambda_sweep.quadrature_intervals;
    e << YAML::EndMap;

    e << YAML::Key << "apriori" << YAML::Value << YAML::BeginMap;
    emit_list(e, "radii", c.apriori.radii);
    e << YAML::Key << "direction" << YAML::Value << to_string(c.apriori.direction);
    e << YAML::Key << "directions" << YAML::Value << c.apriori.directions;
    e << YAML::Key << "method" << YAML::Value << to_string(c.apriori.method);
    e << YAML::EndMap;

    e << YAML::Key << "spectrum" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "at_zero" << YAML::Value << c.spectrum.at_zero;
    e << YAML::Key << "at_infinity" << YAML::Value << c.spectrum.at_infinity;
    e << YAML::Key << "gap_tol" << YAML::Value << Num{c.spectrum.gap_tol};
    e << YAML::Key << "quadrature_intervals" << YAML::Value << c.spectrum.quadrature_intervals;
    e << YAML::Key << "eigenvectors" << YAML::Value << c.spectrum.eigenvectors;
    e << YAML::EndMap;

    const auto& a = c.averaging;
    e << YAML::Key << "averaging" << YAML::Value << YAML::BeginMap;
    emit_list(e, "lambdas", a.lambdas);
    e << YAML::Key << "t_obs" << YAML::Value << Num{a.t_obs};
    e << YAML::Key << "delta" << YAML::Value << Num{a.delta};
    e << YAML::Key << "mode" << YAML::Value << to_string(a.mode);
    e << YAML::Key << "noise_h1" << YAML::Value << Num{a.noise_h1};
    e << YAML::Key << "steps_per_period" << YAML::Value << a.steps_per_period;
    e << YAML::Key << "reference_steps_per_period" << YAML::Value << a.reference_steps_per_period;
    e << YAML::Key << "samples_per_period" << YAML::Value << a.samples_per_period;
    e << YAML::Key << "quadrature_intervals" << YAML::Value << a.quadrature_intervals;
    emit_initial(e, "initial", a.initial);
    e << YAML::EndMap;

    e << YAML::Key << "tails" << YAML::Value << YAML::BeginMap;
    emit_list(e, "radii", c.tails.radii);
    e << YAML::Key << "periods" << YAML::Value << c.tails.periods;
    e << YAML::Key << "samples_per_period" << YAML::Value << c.tails.samples_per_period;
    e << YAML::Key << "floor" << YAML::Value << Num{c.tails.floor};
    emit_initial(e, "initial", c.tails.initial);
    e << YAML::EndMap;

    e << YAML::Key << "contraction" << YAML::Value << YAML::BeginMap;
    emit_list(e, "times", c.contraction.times);
    e << YAML::Key << "steps_per_period" << YAML::Value << c.contraction.steps_per_period;
    e << YAML::Key << "tolerance" << YAML::Value << Num{c.contraction.tolerance};
    emit_initial(e, "first", c.contraction.first);
    emit_initial(e, "second", c.contraction.second);
    e << YAML::EndMap;

    const auto& h = c.hypotheses;
    e << YAML::Key << "hypotheses" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "theorem" << YAML::Value << to_string(h.theorem);
    e << YAML::Key << "dissipativity_samples" << YAML::Value << h.dissipativity_samples;
    e << YAML::Key << "periodicity_samples" << YAML::Value << h.periodicity_samples;
    e << YAML::Key << "u_range" << YAML::Value << Num{h.u_range};
    e << YAML::Key << "quadrature_intervals" << YAML::Value << h.quadrature_intervals;
    e << YAML::Key << "gap_tol" << YAML::Value << Num{h.gap_tol};
    e << YAML::EndMap;

    e << YAML::EndMap;
    if (!e.good()) throw ConfigError("cannot emit configuration: " + e.GetLastError());
    return std::string(e.c_str()) + "\n";
}

GridPtr build_grid(const RunConfig& cfg) {
    return make_grid(cfg.grid.dimension, cfg.grid.half_width, cfg.grid.points_per_axis, cfg.grid.laplacian);
}

Nonlinearity build_nonlinearity(const RunConfig& cfg, const GridPtr& grid) {
    const auto& n = cfg.nonlinearity;
    if (n.kind == NonlinearityKind::Demo) return make_demo_nonlinearity(n.a, n.b_coeff, n.s, n.p, grid, n.period);
    return Nonlinearity(grid, n.period, n.tree, n.p);
}

Field build_initial(const InitialConfig& init, const GridPtr& grid) {
    if (init.kind == "zero") return Field(grid);
    double amp = init.amplitude, w = init.width;
    if (init.kind == "gaussian") {
        return Field::from_function(grid, [=](std::span<const double> x) {
            double r2 = 0.0;
            for (double xi : x) r2 += xi * xi;
            return amp * std::exp(-r2 / (w * w));
        });
    }
    if (init.kind == "compact") {
        return Field::from_function(grid, [=](std::span<const double> x) {
            double r2 = 0.0;
            for (double xi : x) r2 += xi * xi;
            r2 /= w * w;
            return r2 < 1.0 ? amp * std::exp(-1.0 / (1.0 - r2)) : 0.0;
        });
    }
    throw ValidationError("initial.kind", "unknown initial state kind '" + init.kind + "'");
}

}  // namespace semiper
