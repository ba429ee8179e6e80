#pragma once

// Backward-Euler / two-point flux discretization on the staggered grid.
//
// Unknowns per time level: one normal velocity per face (boundary faces
// included; their momentum equation uses the Dirichlet pressure at the face
// midpoint over a half-cell distance) and one pressure per cell.
//
//   face f : (mu/k_f) u_f + beta rho(p_f) |u|_f u_f + (p_up - p_low)/d_f = 0
//   cell c : p_c + tau (div u)_c = p_old_c + tau f_c

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "dfflow/grid.hpp"
#include "dfflow/linalg.hpp"
#include "dfflow/physics.hpp"

namespace dfflow {

struct State {
    std::vector<double> u;  ///< normal velocity per face, positive along +axis
    std::vector<double> p;  ///< pressure per cell

    static State zeros(const Grid& grid);
    /// [u; p] stacked, the vector the stopping test is evaluated on.
    std::vector<double> stacked() const;
    bool finite() const;
};

enum class Layout { Coupled, Reduced };

struct AssembledSystem {
    SparseMatrix matrix;
    std::vector<double> rhs;
    Layout layout = Layout::Reduced;
};

/// Per-face linear relation a_f u_f = -(p_up - p_low)/d_f - b_f of one
/// L-scheme iteration.
struct FrozenCoefficients {
    std::vector<double> a;
    std::vector<double> b;
};

class AssemblyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double face_transmissibility(const Grid& grid, const PermeabilityField& perm, FaceId f);
double reconstruct_face_speed(const Grid& grid, std::span<const double> u, FaceId f);
double reconstruct_face_speed(const Grid& grid, const State& state, FaceId f);
double face_pressure(const Grid& grid, const ProblemSpec& spec, const State& state, FaceId f, double t);
double discrete_divergence(const Grid& grid, std::span<const double> u, CellId c);

/// Geometry and coefficients cached per face for one (grid, problem) pair.
class Discretization {
public:
    Discretization(Grid grid, ProblemSpec spec);

    const Grid& grid() const { return grid_; }
    const ProblemSpec& spec() const { return spec_; }
    std::size_t face_count() const { return grid_.face_count(); }
    std::size_t cell_count() const { return grid_.cell_count(); }

    double face_permeability(std::size_t f) const { return k_face_[f]; }
    /// Dirichlet pressure at boundary-face midpoints at time t (0 on interior faces).
    std::vector<double> boundary_pressures(double t) const;
    std::vector<double> cell_sources(double t) const;

    State initial_state() const;
    /// Exact fields sampled at cell centers / face midpoints.
    State sample(const ScalarField& p, const VectorField& u, double t) const;

    /// |u| at every face from the 4-point transverse average.
    std::vector<double> face_speeds(std::span<const double> u) const;
    /// Face pressures: mean of adjacent cells, Dirichlet value on the boundary.
    std::vector<double> face_pressures(std::span<const double> p, std::span<const double> g) const;

    FrozenCoefficients frozen_coefficients(const State& iterate, double gamma, double L, double t) const;

    /// Reduced cell-pressure system of one L-scheme iteration; faces are
    /// eliminated through the frozen coefficients.
    struct LSchemeSystem {
        AssembledSystem system;
        FrozenCoefficients coeffs;
        std::vector<double> boundary_p;
    };
    LSchemeSystem assemble_lscheme(std::span<const double> p_old, const State& iterate, double gamma, double L,
                                   double t, double tau) const;
    /// Face velocities from the eliminated relation given new cell pressures.
    State back_substitute(const LSchemeSystem& sys, std::vector<double> p) const;

    /// Full nonlinear residual [R_u; R_p].
    std::vector<double> residual(std::span<const double> p_old, const State& state, double t, double tau) const;

    struct NewtonSystem {
        AssembledSystem system;  ///< Jacobian and -residual, coupled layout
        std::vector<double> residual;
    };
    NewtonSystem assemble_newton(std::span<const double> p_old, const State& state, double t, double tau) const;

    /// Relative defect of the global balance
    ///   sum_c |c| (p_c - p_old_c)/tau + sum_boundary outward flux = sum_c |c| f_c
    double mass_balance_defect(std::span<const double> p_old, const State& state, double t, double tau) const;

private:
    struct FaceInfo {
        FaceId id;
        int lower = -1;  ///< cell index on the -axis side, -1 on the boundary
        int upper = -1;
        double distance = 0.0;
        double width = 0.0;   ///< cell width along the normal
        double length = 0.0;  ///< face length
        TransverseStencil stencil;
    };

    Grid grid_;
    ProblemSpec spec_;
    std::vector<FaceInfo> faces_;
    std::vector<double> k_face_;
};

}  // namespace dfflow
