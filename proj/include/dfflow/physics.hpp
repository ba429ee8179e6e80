#pragma once

// Continuous model data for slightly compressible Darcy-Forchheimer flow:
//
//   (mu/k) u + beta rho(p) |u| u + grad p = 0
//   dp/dt + div u = f
//
// with rho(p) = rho_ref exp(cf (p - p_ref)) and Dirichlet pressure data.

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dfflow/grid.hpp"

namespace dfflow {

using Vec2 = std::array<double, 2>;

enum class DensityMode { Variable, ConstantOne };

struct DensityLaw {
    double rho_ref = 1.0;
    double p_ref = 0.0;
    double cf = 1e-5;
    DensityMode mode = DensityMode::Variable;

    double density(double p) const;
    double density_dp(double p) const;
    /// Lipschitz constant of rho on [a, b]; rho is increasing so the slope is
    /// largest at b.
    double lipschitz_on(double a, double b) const;
};

double density(const DensityLaw& law, double p);
double density_dp(const DensityLaw& law, double p);

class PermeabilityField {
public:
    static PermeabilityField constant(double k);
    static PermeabilityField per_cell(std::vector<double> values);

    bool is_constant() const { return std::holds_alternative<double>(data_); }
    double at(std::size_t cell) const;
    double max() const;
    double min() const;
    /// Number of per-cell values (0 for a constant field).
    std::size_t size() const;

private:
    std::variant<double, std::vector<double>> data_;
};

using ScalarField = std::function<double(double x, double y, double t)>;
using VectorField = std::function<Vec2(double x, double y, double t)>;

class InvalidProblem : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ProblemSpec {
    double mu = 1.0;
    double beta = 1.0;
    DensityLaw density{};
    PermeabilityField perm = PermeabilityField::constant(1.0);
    ScalarField source = [](double, double, double) { return 0.0; };
    ScalarField dirichlet_p = [](double, double, double) { return 0.0; };
    std::function<double(double x, double y)> initial_p = [](double, double) { return 0.0; };
    /// Optional initial velocity sampled at face midpoints. When absent the
    /// initial face velocities solve the local face balance for initial_p.
    std::optional<VectorField> initial_u{};
    double T = 1.0;
    double tau = 1.0;

    /// Throws InvalidProblem if any parameter is out of range.
    void validate() const;
    /// Number of time steps; the last one is shortened if T/tau is not integral.
    int step_count() const;
};

/// Closed-form pressure p = exp(-2t) x(1-x) y(1-y) on the unit square and
/// the velocity obtained by solving the Darcy-Forchheimer law pointwise.
namespace manufactured {

double pressure(double x, double y, double t);
Vec2 pressure_gradient(double x, double y, double t);
double pressure_dt(double x, double y, double t);

/// u = -2 grad p / (mu/k + sqrt(mu^2/k^2 + 4 beta rho |grad p|)); reduces to
/// Darcy's law for beta = 0. `k` is the (constant) permeability.
Vec2 velocity(const ProblemSpec& spec, double k, double x, double y, double t);

/// f = dp/dt + div u with div u by central differences of the closed-form
/// velocity.
double source(const ProblemSpec& spec, double k, double x, double y, double t, double delta = 1e-6);

/// Problem on (0,1)^2 with homogeneous Dirichlet data, the induced source and
/// exact initial pressure/velocity.
ProblemSpec make_problem(double k, double beta, double tau, double T,
                         DensityMode mode = DensityMode::Variable);
ProblemSpec make_problem(double k, double beta, double tau, double T, double mu, const DensityLaw& density);

}  // namespace manufactured

enum class PatternKind { Strip, Squares, LShapes };

PatternKind parse_pattern_kind(const std::string& name);
std::string to_string(PatternKind kind);

/// Per-cell permeability with k_in inside the low-permeability regions and
/// k_out elsewhere; membership is decided at cell centers. Geometry, on the
/// unit square scaled to the grid domain:
///   Strip   - vertical band x in [0.45, 0.55]
///   Squares - 3x3 squares of side 0.1 centered at (0.25+0.25i, 0.25+0.25j)
///   LShapes - the same squares with the upper-right 0.05x0.05 quadrant removed
PermeabilityField permeability_pattern(PatternKind kind, const Grid& grid, double k_in, double k_out);

/// Problem on (0,1)^2 with f = 0, boundary pressure 1-x and initial pressure
/// 1-x, for the discontinuous permeability experiments.
ProblemSpec make_pattern_problem(PermeabilityField perm, double beta, double tau, double T);

}  // namespace dfflow
