#pragma once

// Experiment configuration and drivers: a scenario is the cartesian product
// N x k x beta x tau x scheme on either the manufactured problem or one of the
// discontinuous permeability patterns.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dfflow/linearization.hpp"

namespace dfflow {

enum class ProblemKind { Manufactured, Pattern };

/// Scheme entry of a scenario. L may be given per beta; a missing beta falls
/// back to `config.L` unless `L_heuristic` is set.
struct SchemeEntry {
    SchemeConfig config;
    std::map<double, double> L_by_beta;
    bool L_heuristic = false;

    SchemeConfig resolve(double beta) const;
};

struct ScenarioConfig {
    std::string name = "scenario";
    ProblemKind problem = ProblemKind::Manufactured;
    std::vector<PatternKind> patterns{PatternKind::Strip};
    double k_inside = 1e-4;
    double k_outside = 1.0;

    std::vector<int> N{40};  ///< nx = ny = N
    Rect domain{0.0, 1.0, 0.0, 1.0};
    std::vector<double> k{1.0};  ///< manufactured permeability; ignored for patterns
    std::vector<double> beta{1.0};
    std::vector<double> tau{1.0};
    double T = 1.0;

    double mu = 1.0;
    DensityLaw density{};

    double tol_a = 1e-5;
    double tol_r = 1e-5;
    int max_iter = 150;
    NormWeighting norm = NormWeighting::Euclidean;
    bool estimate_condition = false;

    std::vector<SchemeEntry> schemes;

    std::string csv_path;    ///< empty: no CSV
    std::string field_dir;   ///< empty: no field snapshots
    bool measure_errors = false;
    int timing_repeats = 1;
    std::string reference;   ///< table1..table6 / fig8, empty for none

    /// Throws ConfigError on out-of-range values or, with `reference` set,
    /// on parameters that differ from that table's setup.
    void validate() const;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a YAML document; unknown keys raise ConfigError naming the key path.
ScenarioConfig parse_scenario(const std::string& yaml_text);
ScenarioConfig load_scenario(const std::string& path);

struct TableRow {
    std::string scheme;  ///< lscheme | picard | relaxed_picard | newton
    double gamma = 0.0;
    double L = 0.0;
    double omega = 1.0;
    int N = 0;
    double k = 0.0;
    double beta = 0.0;
    double tau = 0.0;
    double avg_iters = 0.0;
    bool converged = false;
    double wall_s = 0.0;
    double condest_mean = 0.0;  ///< NaN when not estimated

    // Diagnostics not written to the table CSV.
    std::string problem;
    double max_mass_defect = 0.0;
    double max_residual = 0.0;
    double error_p = -1.0;  ///< -1 when not measured
    double error_u = -1.0;
    std::vector<int> iterations_per_step;
};

struct FieldSnapshot {
    std::string name;
    std::optional<Grid> grid;  ///< empty until the case ran
    State state;
};

struct ScenarioResult {
    std::vector<TableRow> rows;
    std::vector<FieldSnapshot> fields;
};

struct RunOptions {
    int threads = 1;
    bool keep_fields = false;
};

/// One (scheme, N, k, beta, tau) case; `pattern` is ignored for the
/// manufactured problem.
struct CaseKey {
    int N = 40;
    double k = 1.0;
    double beta = 1.0;
    double tau = 1.0;
    PatternKind pattern = PatternKind::Strip;
};

TableRow run_case(const ScenarioConfig& cfg, const SchemeEntry& scheme, const CaseKey& key,
                  FieldSnapshot* field = nullptr);
ScenarioResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});
/// Number of rows run_scenario produces.
std::size_t case_count(const ScenarioConfig& config);

/// Problem for one case of a scenario.
ProblemSpec make_case_problem(const ScenarioConfig& cfg, const Grid& grid, const CaseKey& key);

struct ErrorNorms {
    double p = 0.0;
    double u = 0.0;
};

/// Discrete L2 errors against the manufactured solution at time t: cell
/// values for p, normal components at face midpoints for u.
ErrorNorms measure_errors(const Discretization& disc, const State& state, double t);

/// Built-in configurations for `reproduce`; `full` adds the long-running
/// cases (tau = 0.001 in table1).
ScenarioConfig builtin_config(const std::string& name, bool full = false);
std::vector<std::string> builtin_names();

}  // namespace dfflow
