#pragma once

// Iteration drivers for one backward-Euler step and for a full transient.
//
// L-scheme (gamma, L), per face, with rho and |u| lagged at iterate i-1:
//   (mu/k + (1-gamma) beta rho |u^{i-1}| + L) u^i
//       = -grad p^i - (gamma beta rho |u^{i-1}| - L) u^{i-1}
// Picard is gamma = L = 0. Newton solves the coupled Jacobian system.

#include <functional>
#include <string>
#include <vector>

#include "dfflow/tpfa.hpp"

namespace dfflow {

enum class SchemeKind { LScheme, Picard, RelaxedPicard, Newton };

/// Weight applied to the stacked iterate before taking the l2 norm in the
/// stopping test. Euclidean uses the raw vector; CellMeasure multiplies by
/// sqrt(hx*hy), i.e. a quadrature of the L2 norm.
enum class NormWeighting { Euclidean, CellMeasure };

struct SchemeConfig {
    SchemeKind kind = SchemeKind::Picard;
    double gamma = 0.0;
    double L = 0.0;
    double omega = 1.0;
    double tol_a = 1e-5;
    double tol_r = 1e-5;
    int max_iter = 150;
    bool estimate_condition = false;
    NormWeighting norm = NormWeighting::Euclidean;

    static SchemeConfig lscheme(double gamma, double L);
    static SchemeConfig picard();
    static SchemeConfig relaxed_picard(double omega);
    static SchemeConfig newton();

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    std::string name() const;
};

std::string to_string(SchemeKind kind);
SchemeKind parse_scheme_kind(const std::string& name);
NormWeighting parse_norm_weighting(const std::string& name);
std::string to_string(NormWeighting w);

struct StepReport {
    int iterations = 0;
    bool converged = false;
    std::vector<double> diff_norms;  ///< ||V^j - V^{j-1}||, j = 1..iterations
    std::vector<double> condests;    ///< one per linear solve when requested
    double wall_s = 0.0;
    double mass_defect = 0.0;        ///< relative global balance defect of the accepted state
    double warm_start_speed = 0.0;   ///< max reconstructed face speed of the warm start
    double final_residual = 0.0;     ///< max-norm of the nonlinear residual at the accepted state
};

struct SolveReport {
    std::vector<StepReport> steps;
    bool converged = false;
    /// Time level (1-based) of the first non-converged step, 0 if none.
    int failed_step = 0;
    double wall_s = 0.0;

    double average_iterations() const;
    /// Arithmetic mean of all condition estimates over all steps; NaN if none.
    double mean_condest() const;
    double max_mass_defect() const;
};

class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool stop_check(std::span<const double> v_new, std::span<const double> v_old, double tol_a, double tol_r,
                double weight = 1.0);
bool stop_check(std::span<const double> v_new, std::span<const double> v_old, const SchemeConfig& cfg,
                double weight = 1.0);

/// Called after every iteration with the time level (1-based), the iteration
/// index (1-based) and the new iterate.
using IterationObserver = std::function<void(int step, int iter, const State& iterate)>;

struct StepResult {
    State state;
    StepReport report;
};

/// One backward-Euler step from p_old, iterating from warm_start.
StepResult solve_time_step(const Discretization& disc, std::span<const double> p_old, const State& warm_start,
                           const SchemeConfig& cfg, double t_n, double tau, const IterationObserver& observer = {},
                           int step_index = 1);

struct TransientResult {
    State state;
    SolveReport report;
};

/// Marches from the problem's initial state to T. Stops at the first
/// non-converged step.
TransientResult run_transient(const Discretization& disc, const SchemeConfig& cfg,
                              const IterationObserver& observer = {});

struct TheoryInputs {
    double M_u = 1.0;
    double M_rho = 1.0;
    double m_rho = 1.0;
    double L_rho = 1.0;

    void validate() const;
};

/// 2 k beta^2 M_rho^2 M_u^2 (1 + gamma^2) / mu with k the largest permeability.
double theoretical_L_bound(const TheoryInputs& theory, const ProblemSpec& spec, double gamma);
/// k beta^2 M_u^2 (1 + gamma)^2 / (2 mu), constant-density model.
double theoretical_L_bound_simplified(const TheoryInputs& theory, const ProblemSpec& spec, double gamma);
/// 0.07 sqrt(beta).
double default_L_heuristic(double beta);

/// Bounds taken from a state: M_u is the largest reconstructed face speed,
/// density bounds over the range of cell and boundary pressures.
TheoryInputs theory_from_state(const Discretization& disc, const State& state, double t);

}  // namespace dfflow
