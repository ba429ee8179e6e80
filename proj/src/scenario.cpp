#include "dfflow/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

namespace dfflow {

SchemeConfig SchemeEntry::resolve(double beta) const
{
    SchemeConfig c = config;
    if (auto it = L_by_beta.find(beta); it != L_by_beta.end()) {
        c.L = it->second;
    } else if (L_heuristic) {
        c.L = default_L_heuristic(beta);
    }
    return c;
}

namespace {

bool close(double a, double b)
{
    return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

template <class T>
bool subset_of(const std::vector<T>& values, std::initializer_list<T> allowed)
{
    return std::all_of(values.begin(), values.end(), [&](T v) {
        return std::any_of(allowed.begin(), allowed.end(), [&](T a) { return close(v, a); });
    });
}

struct ReferenceSetup {
    ProblemKind problem;
    std::vector<int> N;
    std::vector<double> k;
    std::vector<double> beta;
    std::vector<double> tau;
    double omega;
    std::map<double, double> L0;  ///< gamma = 0 L per beta
    bool allow_l1;                ///< gamma = 1, L = 0.4 present
};

ReferenceSetup reference_setup(const std::string& name)
{
    if (name == "table1") return {ProblemKind::Manufactured, {80}, {1.0}, {1.0}, {1, 0.5, 0.1, 0.01, 0.001}, 0.7,
                                  {{1.0, 0.07}}, true};
    if (name == "table2") return {ProblemKind::Manufactured, {40, 80, 160, 320}, {1e-2, 1, 1e2}, {1.0}, {1.0}, 0.7,
                                  {{1.0, 0.07}}, false};
    if (name == "table3") return {ProblemKind::Manufactured, {40, 80, 160, 320}, {1e-2, 1, 1e2}, {10.0}, {1.0}, 0.7,
                                  {{10.0, 0.22}}, false};
    if (name == "table4") return {ProblemKind::Manufactured, {40, 80, 160, 320}, {1e-2, 1, 1e2}, {100.0}, {1.0}, 0.7,
                                  {{100.0, 0.7}}, false};
    if (name == "table6") return {ProblemKind::Pattern, {160}, {}, {1.0, 1e4}, {0.1}, 0.8,
                                  {{1.0, 0.7}, {1e4, 70.0}}, false};
    if (name == "fig8") return {ProblemKind::Manufactured, {40, 80}, {1e-2, 1, 1e2}, {1, 10, 100}, {1.0}, 0.7,
                                {{1.0, 0.07}, {10.0, 0.22}, {100.0, 0.7}}, false};
    throw ConfigError("unknown reference table '" + name + "'");
}

bool within(const std::vector<int>& v, const std::vector<int>& allowed)
{
    return std::all_of(v.begin(), v.end(),
                       [&](int x) { return std::find(allowed.begin(), allowed.end(), x) != allowed.end(); });
}

bool within(const std::vector<double>& v, const std::vector<double>& allowed)
{
    return std::all_of(v.begin(), v.end(), [&](double x) {
        return std::any_of(allowed.begin(), allowed.end(), [&](double a) { return close(x, a); });
    });
}

void check_reference(const ScenarioConfig& c)
{
    const ReferenceSetup ref = reference_setup(c.reference);
    auto fail = [&](const std::string& what) {
        throw ConfigError("reference '" + c.reference + "': " + what + " differs from the table setup");
    };
    if (c.problem != ref.problem) fail("problem");
    if (!within(c.N, ref.N)) fail("N");
    if (ref.problem == ProblemKind::Manufactured && !within(c.k, ref.k)) fail("k");
    if (ref.problem == ProblemKind::Pattern && (!close(c.k_inside, 1e-4) || !close(c.k_outside, 1.0))) fail("k");
    if (!within(c.beta, ref.beta)) fail("beta");
    if (!within(c.tau, ref.tau)) fail("tau");
    if (!close(c.T, 1.0)) fail("T");
    if (!close(c.mu, 1.0) || !close(c.density.rho_ref, 1.0) || c.density.p_ref != 0.0 ||
        !close(c.density.cf, 1e-5) || c.density.mode != DensityMode::Variable) {
        fail("model");
    }
    if (!close(c.tol_a, 1e-5) || !close(c.tol_r, 1e-5) || c.max_iter != 150) fail("solver tolerances");
    for (const SchemeEntry& s : c.schemes) {
        switch (s.config.kind) {
        case SchemeKind::Newton:
        case SchemeKind::Picard: break;
        case SchemeKind::RelaxedPicard:
            if (!close(s.config.omega, ref.omega)) fail("omega");
            break;
        case SchemeKind::LScheme:
            for (double b : c.beta) {
                const SchemeConfig r = s.resolve(b);
                const bool l0 = r.gamma == 0.0 && ref.L0.count(b) && close(r.L, ref.L0.at(b));
                const bool l1 = ref.allow_l1 && close(r.gamma, 1.0) && close(r.L, 0.4);
                if (!l0 && !l1) fail("L-scheme parameters");
            }
            break;
        }
    }
}

}  // namespace

void ScenarioConfig::validate() const
{
    auto positive = [](const auto& v) { return std::all_of(v.begin(), v.end(), [](auto x) { return x > 0; }); };
    if (N.empty() || !positive(N)) throw ConfigError("grid.N must be a non-empty list of positive integers");
    if (problem == ProblemKind::Manufactured && (k.empty() || !positive(k))) {
        throw ConfigError("k must be a non-empty list of positive values");
    }
    if (!(k_inside > 0.0 && k_outside > 0.0)) throw ConfigError("pattern permeabilities must be positive");
    if (beta.empty() || !std::all_of(beta.begin(), beta.end(), [](double b) { return b >= 0.0; })) {
        throw ConfigError("beta must be a non-empty list of values >= 0");
    }
    if (problem == ProblemKind::Pattern && patterns.empty()) throw ConfigError("pattern list is empty");
    if (tau.empty() || !positive(tau)) throw ConfigError("tau must be a non-empty list of positive values");
    if (!(T > 0.0)) throw ConfigError("T must be positive");
    if (!(mu > 0.0)) throw ConfigError("model.mu must be positive");
    if (!(domain.x1 > domain.x0 && domain.y1 > domain.y0)) throw ConfigError("grid.domain is degenerate");
    if (timing_repeats < 1) throw ConfigError("timing_repeats must be >= 1");
    for (const SchemeEntry& s : schemes) {
        SchemeConfig c = s.config;
        c.tol_a = tol_a;
        c.tol_r = tol_r;
        c.max_iter = max_iter;
        try {
            c.validate();
            for (const auto& [b, L] : s.L_by_beta) {
                if (!(L >= 0.0)) throw std::invalid_argument("L must be >= 0");
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError("schemes: " + std::string(e.what()));
        }
    }
    if (!reference.empty()) check_reference(*this);
}

namespace {

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed)
{
    if (!node.IsMap()) throw ConfigError("'" + path + "' must be a mapping");
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + (path.empty() ? key : path + "." + key) + "'");
        }
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& path)
{
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("invalid value for '" + path + "'");
    }
}

template <class T>
std::vector<T> list(const YAML::Node& node, const std::string& path)
{
    if (node.IsScalar()) return {scalar<T>(node, path)};
    if (!node.IsSequence()) throw ConfigError("'" + path + "' must be a scalar or a list");
    std::vector<T> out;
    for (const auto& item : node) out.push_back(scalar<T>(item, path));
    return out;
}

SchemeEntry parse_scheme(const YAML::Node& node, const std::string& path)
{
    check_keys(node, path, {"kind", "gamma", "L", "omega"});
    if (!node["kind"]) throw ConfigError("'" + path + ".kind' is required");
    SchemeEntry e;
    try {
        e.config.kind = parse_scheme_kind(scalar<std::string>(node["kind"], path + ".kind"));
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(path + ".kind: " + ex.what());
    }
    if (node["gamma"]) e.config.gamma = scalar<double>(node["gamma"], path + ".gamma");
    if (node["omega"]) e.config.omega = scalar<double>(node["omega"], path + ".omega");
    if (const YAML::Node L = node["L"]) {
        if (L.IsMap()) {
            for (const auto& kv : L) {
                e.L_by_beta[scalar<double>(kv.first, path + ".L")] = scalar<double>(kv.second, path + ".L");
            }
        } else if (L.IsScalar() && L.as<std::string>() == "heuristic") {
            e.L_heuristic = true;
        } else {
            e.config.L = scalar<double>(L, path + ".L");
        }
    }
    const bool lscheme = e.config.kind == SchemeKind::LScheme;
    if (!lscheme && (node["gamma"] || node["L"])) throw ConfigError("'" + path + "': gamma/L only apply to lscheme");
    if (e.config.kind != SchemeKind::RelaxedPicard && node["omega"]) {
        throw ConfigError("'" + path + "': omega only applies to relaxed_picard");
    }
    return e;
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& yaml_text)
{
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    ScenarioConfig c;
    if (root.IsNull()) return c;
    check_keys(root, "", {"name", "problem", "pattern", "k_inside", "k_outside", "grid", "k", "beta", "tau", "T",
                          "model", "solver", "schemes", "output", "reference", "timing_repeats"});

    if (root["name"]) c.name = scalar<std::string>(root["name"], "name");
    if (root["problem"]) {
        const std::string p = scalar<std::string>(root["problem"], "problem");
        if (p == "manufactured") c.problem = ProblemKind::Manufactured;
        else if (p == "pattern") c.problem = ProblemKind::Pattern;
        else throw ConfigError("problem must be 'manufactured' or 'pattern'");
    }
    if (root["pattern"]) {
        c.patterns.clear();
        try {
            for (const std::string& p : list<std::string>(root["pattern"], "pattern")) {
                c.patterns.push_back(parse_pattern_kind(p));
            }
        } catch (const InvalidProblem& e) {
            throw ConfigError(std::string("pattern: ") + e.what());
        }
    }
    if (root["k_inside"]) c.k_inside = scalar<double>(root["k_inside"], "k_inside");
    if (root["k_outside"]) c.k_outside = scalar<double>(root["k_outside"], "k_outside");
    if (const YAML::Node g = root["grid"]) {
        check_keys(g, "grid", {"N", "domain"});
        if (g["N"]) c.N = list<int>(g["N"], "grid.N");
        if (g["domain"]) {
            const auto d = list<double>(g["domain"], "grid.domain");
            if (d.size() != 4) throw ConfigError("grid.domain must be [x0, x1, y0, y1]");
            c.domain = {d[0], d[1], d[2], d[3]};
        }
    }
    if (root["k"]) c.k = list<double>(root["k"], "k");
    if (root["beta"]) c.beta = list<double>(root["beta"], "beta");
    if (root["tau"]) c.tau = list<double>(root["tau"], "tau");
    if (root["T"]) c.T = scalar<double>(root["T"], "T");
    if (const YAML::Node m = root["model"]) {
        check_keys(m, "model", {"mu", "rho_ref", "p_ref", "cf", "density"});
        if (m["mu"]) c.mu = scalar<double>(m["mu"], "model.mu");
        if (m["rho_ref"]) c.density.rho_ref = scalar<double>(m["rho_ref"], "model.rho_ref");
        if (m["p_ref"]) c.density.p_ref = scalar<double>(m["p_ref"], "model.p_ref");
        if (m["cf"]) c.density.cf = scalar<double>(m["cf"], "model.cf");
        if (m["density"]) {
            const std::string d = scalar<std::string>(m["density"], "model.density");
            if (d == "variable") c.density.mode = DensityMode::Variable;
            else if (d == "constant") c.density.mode = DensityMode::ConstantOne;
            else throw ConfigError("model.density must be 'variable' or 'constant'");
        }
    }
    if (const YAML::Node s = root["solver"]) {
        check_keys(s, "solver", {"tol_a", "tol_r", "max_iter", "norm", "condest"});
        if (s["tol_a"]) c.tol_a = scalar<double>(s["tol_a"], "solver.tol_a");
        if (s["tol_r"]) c.tol_r = scalar<double>(s["tol_r"], "solver.tol_r");
        if (s["max_iter"]) c.max_iter = scalar<int>(s["max_iter"], "solver.max_iter");
        if (s["condest"]) c.estimate_condition = scalar<bool>(s["condest"], "solver.condest");
        if (s["norm"]) {
            try {
                c.norm = parse_norm_weighting(scalar<std::string>(s["norm"], "solver.norm"));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("solver.norm: ") + e.what());
            }
        }
    }
    if (const YAML::Node s = root["schemes"]) {
        if (!s.IsSequence()) throw ConfigError("'schemes' must be a list");
        for (std::size_t i = 0; i < s.size(); ++i) {
            c.schemes.push_back(parse_scheme(s[i], "schemes[" + std::to_string(i) + "]"));
        }
    }
    if (const YAML::Node o = root["output"]) {
        check_keys(o, "output", {"csv", "fields", "errors"});
        if (o["csv"]) c.csv_path = scalar<std::string>(o["csv"], "output.csv");
        if (o["fields"]) c.field_dir = scalar<std::string>(o["fields"], "output.fields");
        if (o["errors"]) c.measure_errors = scalar<bool>(o["errors"], "output.errors");
    }
    if (root["reference"]) c.reference = scalar<std::string>(root["reference"], "reference");
    if (root["timing_repeats"]) c.timing_repeats = scalar<int>(root["timing_repeats"], "timing_repeats");
    c.validate();
    return c;
}

ScenarioConfig load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

ProblemSpec make_case_problem(const ScenarioConfig& cfg, const Grid& grid, const CaseKey& key)
{
    if (cfg.problem == ProblemKind::Manufactured) {
        return manufactured::make_problem(key.k, key.beta, key.tau, cfg.T, cfg.mu, cfg.density);
    }
    ProblemSpec spec = make_pattern_problem(permeability_pattern(key.pattern, grid, cfg.k_inside, cfg.k_outside),
                                            key.beta, key.tau, cfg.T);
    spec.mu = cfg.mu;
    spec.density = cfg.density;
    return spec;
}

ErrorNorms measure_errors(const Discretization& disc, const State& state, double t)
{
    const ProblemSpec& spec = disc.spec();
    const Grid& grid = disc.grid();
    const double k = spec.perm.max();
    const State exact = disc.sample(manufactured::pressure,
                                    [&](double x, double y, double tt) {
                                        return manufactured::velocity(spec, k, x, y, tt);
                                    },
                                    t);
    const double w = grid.cell_volume();
    ErrorNorms e;
    for (std::size_t c = 0; c < exact.p.size(); ++c) e.p += w * (state.p[c] - exact.p[c]) * (state.p[c] - exact.p[c]);
    for (std::size_t f = 0; f < exact.u.size(); ++f) e.u += w * (state.u[f] - exact.u[f]) * (state.u[f] - exact.u[f]);
    e.p = std::sqrt(e.p);
    e.u = std::sqrt(e.u);
    return e;
}

TableRow run_case(const ScenarioConfig& cfg, const SchemeEntry& scheme, const CaseKey& key, FieldSnapshot* field)
{
    const auto [N, k, beta, tau, pattern] = key;
    const Grid grid = Grid::build(N, N, cfg.domain);
    ProblemSpec spec = make_case_problem(cfg, grid, key);
    const Discretization disc(grid, std::move(spec));

    SchemeConfig sc = scheme.resolve(beta);
    sc.tol_a = cfg.tol_a;
    sc.tol_r = cfg.tol_r;
    sc.max_iter = cfg.max_iter;
    sc.norm = cfg.norm;
    sc.estimate_condition = cfg.estimate_condition;

    TransientResult result = run_transient(disc, sc);
    std::vector<double> walls{result.report.wall_s};
    for (int r = 1; r < cfg.timing_repeats; ++r) {
        SchemeConfig timed = sc;
        timed.estimate_condition = false;
        walls.push_back(run_transient(disc, timed).report.wall_s);
    }
    std::nth_element(walls.begin(), walls.begin() + walls.size() / 2, walls.end());

    TableRow row;
    row.scheme = to_string(sc.kind);
    row.gamma = sc.kind == SchemeKind::LScheme ? sc.gamma : 0.0;
    row.L = sc.kind == SchemeKind::LScheme ? sc.L : 0.0;
    row.omega = sc.kind == SchemeKind::RelaxedPicard ? sc.omega : 1.0;
    row.N = N;
    row.k = cfg.problem == ProblemKind::Manufactured ? k : cfg.k_inside;
    row.beta = beta;
    row.tau = tau;
    row.avg_iters = result.report.average_iterations();
    row.converged = result.report.converged;
    row.wall_s = walls[walls.size() / 2];
    row.condest_mean = result.report.mean_condest();
    row.problem = cfg.problem == ProblemKind::Manufactured ? "manufactured" : to_string(pattern);
    row.max_mass_defect = result.report.max_mass_defect();
    for (const StepReport& s : result.report.steps) {
        row.max_residual = std::max(row.max_residual, s.final_residual);
        row.iterations_per_step.push_back(s.iterations);
    }
    if (cfg.measure_errors && cfg.problem == ProblemKind::Manufactured && result.report.converged) {
        const ErrorNorms e = measure_errors(disc, result.state, cfg.T);
        row.error_p = e.p;
        row.error_u = e.u;
    }
    if (field) {
        std::ostringstream name;
        name << cfg.name << "_" << row.problem << "_" << row.scheme << "_N" << N << "_k" << row.k << "_beta" << beta
             << "_tau" << tau;
        field->name = name.str();
        field->grid = grid;
        field->state = std::move(result.state);
    }
    return row;
}

std::size_t case_count(const ScenarioConfig& config)
{
    const bool mfd = config.problem == ProblemKind::Manufactured;
    return (mfd ? config.k.size() : config.patterns.size()) * config.beta.size() * config.N.size() *
           config.tau.size() * config.schemes.size();
}

ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options)
{
    config.validate();
    struct Case {
        const SchemeEntry* scheme;
        CaseKey key;
    };
    std::vector<Case> cases;
    const bool mfd = config.problem == ProblemKind::Manufactured;
    const std::vector<double> ks = mfd ? config.k : std::vector<double>{config.k_inside};
    const std::vector<PatternKind> patterns = mfd ? std::vector<PatternKind>{PatternKind::Strip} : config.patterns;
    for (PatternKind pattern : patterns)
        for (double beta : config.beta)
            for (int N : config.N)
                for (double k : ks)
                    for (double tau : config.tau)
                        for (const SchemeEntry& s : config.schemes)
                            cases.push_back({&s, CaseKey{N, k, beta, tau, pattern}});

    ScenarioResult out;
    out.rows.resize(cases.size());
    const bool fields = options.keep_fields || !config.field_dir.empty();
    if (fields) out.fields.resize(cases.size());

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cases.size(); i = next++) {
            try {
                const Case& c = cases[i];
                out.rows[i] = run_case(config, *c.scheme, c.key, fields ? &out.fields[i] : nullptr);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(cases.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

namespace {

SchemeEntry entry(SchemeConfig c, std::map<double, double> L_by_beta = {})
{
    return SchemeEntry{c, std::move(L_by_beta), false};
}

}  // namespace

std::vector<std::string> builtin_names()
{
    return {"table1", "table2", "table3", "table4", "table6", "fig8"};
}

ScenarioConfig builtin_config(const std::string& name, bool full)
{
    ScenarioConfig c;
    c.name = name;
    c.reference = name;
    c.T = 1.0;
    if (name == "table1") {
        c.N = {80};
        c.k = {1.0};
        c.beta = {1.0};
        c.tau = {1.0, 0.5, 0.1, 0.01};
        if (full) c.tau.push_back(0.001);
        c.schemes = {entry(SchemeConfig::newton()), entry(SchemeConfig::picard()),
                     entry(SchemeConfig::relaxed_picard(0.7)), entry(SchemeConfig::lscheme(0.0, 0.07)),
                     entry(SchemeConfig::lscheme(1.0, 0.4))};
    } else if (name == "table2" || name == "table3" || name == "table4") {
        const double beta = name == "table2" ? 1.0 : name == "table3" ? 10.0 : 100.0;
        const double L = name == "table2" ? 0.07 : name == "table3" ? 0.22 : 0.7;
        c.N = {40, 80, 160, 320};
        c.k = {1e-2, 1.0, 1e2};
        c.beta = {beta};
        c.tau = {1.0};
        c.schemes = {entry(SchemeConfig::newton()), entry(SchemeConfig::picard()),
                     entry(SchemeConfig::relaxed_picard(0.7)), entry(SchemeConfig::lscheme(0.0, L))};
    } else if (name == "table6") {
        c.problem = ProblemKind::Pattern;
        c.patterns = {PatternKind::Strip, PatternKind::Squares, PatternKind::LShapes};
        c.N = {160};
        c.beta = {1.0, 1e4};
        c.tau = {0.1};
        c.schemes = {entry(SchemeConfig::newton()), entry(SchemeConfig::picard()),
                     entry(SchemeConfig::relaxed_picard(0.8)),
                     entry(SchemeConfig::lscheme(0.0, 0.7), {{1.0, 0.7}, {1e4, 70.0}})};
    } else if (name == "fig8") {
        c.N = {40, 80};
        c.k = {1e-2, 1.0, 1e2};
        c.beta = {1.0, 10.0, 100.0};
        c.tau = {1.0};
        c.estimate_condition = true;
        c.schemes = {entry(SchemeConfig::newton()), entry(SchemeConfig::picard()),
                     entry(SchemeConfig::relaxed_picard(0.7)),
                     entry(SchemeConfig::lscheme(0.0, 0.07), {{1.0, 0.07}, {10.0, 0.22}, {100.0, 0.7}})};
    } else {
        throw ConfigError("unknown built-in config '" + name + "'");
    }
    return c;
}

}  // namespace dfflow
