#pragma once

// Central-difference Jacobian of the coupled residual, column by column.

#include <algorithm>
#include <cmath>
#include <vector>

#include "dfflow/tpfa.hpp"

namespace oracle {

struct JacobianComparison {
    double max_rel_error = 0.0;
    double max_entry = 0.0;
};

/// Relative error per entry, with entries below 1e-3 of the largest entry
/// measured against that floor.
inline JacobianComparison compare_jacobian(const dfflow::Discretization& disc, std::span<const double> p_old,
                                           const dfflow::State& state, double t, double tau)
{
    const auto sys = disc.assemble_newton(p_old, state, t, tau);
    const dfflow::SparseMatrix& J = sys.system.matrix;
    const std::size_t nf = state.u.size();
    const std::size_t n = nf + state.p.size();

    std::vector<double> fd(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        dfflow::State plus = state, minus = state;
        double& vp = j < nf ? plus.u[j] : plus.p[j - nf];
        double& vm = j < nf ? minus.u[j] : minus.p[j - nf];
        const double h = 1e-6 * std::max(1.0, std::abs(vp));
        vp += h;
        vm -= h;
        const std::vector<double> rp = disc.residual(p_old, plus, t, tau);
        const std::vector<double> rm = disc.residual(p_old, minus, t, tau);
        for (std::size_t i = 0; i < n; ++i) fd[i * n + j] = (rp[i] - rm[i]) / (2 * h);
    }
    JacobianComparison out;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.max_entry = std::max(out.max_entry, std::abs(J.at(static_cast<int>(i), static_cast<int>(j))));
    const double floor = 1e-3 * out.max_entry;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = J.at(static_cast<int>(i), static_cast<int>(j));
            const double err = std::abs(a - fd[i * n + j]) / std::max(std::abs(a), floor);
            out.max_rel_error = std::max(out.max_rel_error, err);
        }
    }
    return out;
}

}  // namespace oracle
