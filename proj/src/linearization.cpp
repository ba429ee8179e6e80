#include "dfflow/linearization.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dfflow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double max_abs(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

SchemeConfig SchemeConfig::lscheme(double gamma, double L)
{
    SchemeConfig c;
    c.kind = SchemeKind::LScheme;
    c.gamma = gamma;
    c.L = L;
    return c;
}

SchemeConfig SchemeConfig::picard()
{
    return SchemeConfig{};
}

SchemeConfig SchemeConfig::relaxed_picard(double omega)
{
    SchemeConfig c;
    c.kind = SchemeKind::RelaxedPicard;
    c.omega = omega;
    return c;
}

SchemeConfig SchemeConfig::newton()
{
    SchemeConfig c;
    c.kind = SchemeKind::Newton;
    return c;
}

void SchemeConfig::validate() const
{
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
    if (!(L >= 0.0)) throw std::invalid_argument("L must be >= 0");
    if (!(omega > 0.0 && omega <= 1.0)) throw std::invalid_argument("omega must lie in (0, 1]");
    if (!(tol_a >= 0.0) || !(tol_r >= 0.0)) throw std::invalid_argument("tolerances must be >= 0");
    if (tol_a == 0.0 && tol_r == 0.0) throw std::invalid_argument("tol_a and tol_r cannot both be 0");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

std::string to_string(SchemeKind kind)
{
    switch (kind) {
    case SchemeKind::LScheme: return "lscheme";
    case SchemeKind::Picard: return "picard";
    case SchemeKind::RelaxedPicard: return "relaxed_picard";
    case SchemeKind::Newton: return "newton";
    }
    return "unknown";
}

SchemeKind parse_scheme_kind(const std::string& name)
{
    if (name == "lscheme" || name == "l-scheme") return SchemeKind::LScheme;
    if (name == "picard") return SchemeKind::Picard;
    if (name == "relaxed_picard" || name == "relaxed-picard") return SchemeKind::RelaxedPicard;
    if (name == "newton") return SchemeKind::Newton;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

NormWeighting parse_norm_weighting(const std::string& name)
{
    if (name == "euclidean") return NormWeighting::Euclidean;
    if (name == "cell_measure") return NormWeighting::CellMeasure;
    throw std::invalid_argument("unknown norm weighting '" + name + "'");
}

std::string to_string(NormWeighting w)
{
    return w == NormWeighting::Euclidean ? "euclidean" : "cell_measure";
}

std::string SchemeConfig::name() const
{
    std::ostringstream s;
    switch (kind) {
    case SchemeKind::LScheme: s << "L(gamma=" << gamma << ",L=" << L << ")"; break;
    case SchemeKind::Picard: s << "Picard"; break;
    case SchemeKind::RelaxedPicard: s << "RelaxedPicard(omega=" << omega << ")"; break;
    case SchemeKind::Newton: s << "Newton"; break;
    }
    return s.str();
}

double SolveReport::average_iterations() const
{
    if (steps.empty()) return 0.0;
    double total = 0.0;
    for (const StepReport& s : steps) total += s.iterations;
    return total / static_cast<double>(steps.size());
}

double SolveReport::mean_condest() const
{
    double total = 0.0;
    std::size_t count = 0;
    for (const StepReport& s : steps) {
        for (double c : s.condests) {
            total += c;
            ++count;
        }
    }
    return count ? total / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

double SolveReport::max_mass_defect() const
{
    double m = 0.0;
    for (const StepReport& s : steps) m = std::max(m, s.mass_defect);
    return m;
}

bool stop_check(std::span<const double> v_new, std::span<const double> v_old, double tol_a, double tol_r,
                double weight)
{
    if (v_new.size() != v_old.size()) throw std::invalid_argument("stop_check: vectors differ in length");
    return weight * diff_norm2(v_new, v_old) <= tol_a + tol_r * weight * norm2(v_new);
}

bool stop_check(std::span<const double> v_new, std::span<const double> v_old, const SchemeConfig& cfg,
                double weight)
{
    return stop_check(v_new, v_old, cfg.tol_a, cfg.tol_r, weight);
}

StepResult solve_time_step(const Discretization& disc, std::span<const double> p_old, const State& warm_start,
                           const SchemeConfig& cfg, double t_n, double tau, const IterationObserver& observer,
                           int step_index)
{
    cfg.validate();
    const auto start = Clock::now();
    const Grid& grid = disc.grid();
    const double weight = cfg.norm == NormWeighting::CellMeasure ? std::sqrt(grid.cell_volume()) : 1.0;

    // Picard and relaxed Picard share the L-scheme assembly with gamma = L = 0.
    double gamma = cfg.gamma;
    double L = cfg.L;
    if (cfg.kind == SchemeKind::Picard || cfg.kind == SchemeKind::RelaxedPicard) gamma = L = 0.0;
    const double omega = cfg.kind == SchemeKind::RelaxedPicard ? cfg.omega : 1.0;

    StepResult out;
    out.report.warm_start_speed = max_abs(disc.face_speeds(warm_start.u));
    State iterate = warm_start;
    std::vector<double> v_old = iterate.stacked();

    auto context = [&](const std::exception& e) {
        std::ostringstream msg;
        msg << cfg.name() << ": linear solve failed at time level " << step_index << " (t=" << t_n << ", "
            << disc.face_count() << " faces, " << disc.cell_count() << " cells): " << e.what();
        return SolveError(msg.str());
    };

    for (int it = 1; it <= cfg.max_iter; ++it) {
        State next;
        if (cfg.kind == SchemeKind::Newton) {
            auto sys = disc.assemble_newton(p_old, iterate, t_n, tau);
            try {
                const Factorization F = Factorization::factor(sys.system.matrix, MatrixKind::General);
                if (cfg.estimate_condition) out.report.condests.push_back(condest_1norm(sys.system.matrix, F));
                const std::vector<double> delta = F.solve(sys.system.rhs);
                const std::size_t nf = disc.face_count();
                next.u.resize(nf);
                next.p.resize(disc.cell_count());
                for (std::size_t k = 0; k < nf; ++k) next.u[k] = iterate.u[k] + delta[k];
                for (std::size_t c = 0; c < next.p.size(); ++c) next.p[c] = iterate.p[c] + delta[nf + c];
            } catch (const SingularMatrixError& e) {
                throw context(e);
            }
        } else {
            auto sys = disc.assemble_lscheme(p_old, iterate, gamma, L, t_n, tau);
            try {
                const Factorization F =
                    Factorization::factor(sys.system.matrix, MatrixKind::SymmetricPositiveDefinite);
                if (cfg.estimate_condition) out.report.condests.push_back(condest_1norm(sys.system.matrix, F));
                next = disc.back_substitute(sys, F.solve(sys.system.rhs));
            } catch (const SingularMatrixError& e) {
                throw context(e);
            }
            if (omega != 1.0) {
                for (std::size_t k = 0; k < next.u.size(); ++k)
                    next.u[k] = omega * next.u[k] + (1.0 - omega) * iterate.u[k];
                for (std::size_t c = 0; c < next.p.size(); ++c)
                    next.p[c] = omega * next.p[c] + (1.0 - omega) * iterate.p[c];
            }
        }

        std::vector<double> v_new = next.stacked();
        const double diff = diff_norm2(v_new, v_old);
        out.report.diff_norms.push_back(diff);
        out.report.iterations = it;
        iterate = std::move(next);
        if (observer) observer(step_index, it, iterate);

        if (!iterate.finite()) break;
        if (stop_check(v_new, v_old, cfg, weight)) {
            out.report.converged = true;
            break;
        }
        v_old = std::move(v_new);
    }

    out.report.mass_defect = disc.mass_balance_defect(p_old, iterate, t_n, tau);
    out.report.final_residual = max_abs(disc.residual(p_old, iterate, t_n, tau));
    out.report.wall_s = seconds_since(start);
    out.state = std::move(iterate);
    return out;
}

TransientResult run_transient(const Discretization& disc, const SchemeConfig& cfg, const IterationObserver& observer)
{
    const ProblemSpec& spec = disc.spec();
    const auto start = Clock::now();
    TransientResult out;
    out.state = disc.initial_state();
    out.report.converged = true;

    const int steps = spec.step_count();
    double t = 0.0;
    for (int n = 1; n <= steps; ++n) {
        const double t_n = n == steps ? spec.T : n * spec.tau;
        const double tau = t_n - t;
        const std::vector<double> p_old = out.state.p;
        StepResult step = [&] {
            try {
                return solve_time_step(disc, p_old, out.state, cfg, t_n, tau, observer, n);
            } catch (const SolveError& e) {
                std::ostringstream msg;
                msg << "time level " << n << ": " << e.what();
                throw SolveError(msg.str());
            }
        }();
        out.state = std::move(step.state);
        const bool ok = step.report.converged;
        out.report.steps.push_back(std::move(step.report));
        t = t_n;
        if (!ok) {
            out.report.converged = false;
            out.report.failed_step = n;
            break;
        }
    }
    out.report.wall_s = seconds_since(start);
    return out;
}

void TheoryInputs::validate() const
{
    if (!(M_u > 0.0 && M_rho > 0.0 && m_rho > 0.0 && L_rho > 0.0)) {
        throw std::invalid_argument("theory inputs must be strictly positive");
    }
    if (M_rho < m_rho) throw std::invalid_argument("M_rho must be >= m_rho");
}

double theoretical_L_bound(const TheoryInputs& theory, const ProblemSpec& spec, double gamma)
{
    theory.validate();
    const double k = spec.perm.max();
    const double b = spec.beta * theory.M_rho * theory.M_u;
    return 2.0 * k * b * b * (1.0 + gamma * gamma) / spec.mu;
}

double theoretical_L_bound_simplified(const TheoryInputs& theory, const ProblemSpec& spec, double gamma)
{
    theory.validate();
    const double k = spec.perm.max();
    const double b = spec.beta * theory.M_u;
    return k * b * b * (1.0 + gamma) * (1.0 + gamma) / (2.0 * spec.mu);
}

double default_L_heuristic(double beta)
{
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    return 0.07 * std::sqrt(beta);
}

TheoryInputs theory_from_state(const Discretization& disc, const State& state, double t)
{
    TheoryInputs th;
    th.M_u = max_abs(disc.face_speeds(state.u));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double p : state.p) {
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    const std::vector<double> g = disc.boundary_pressures(t);
    const Grid& grid = disc.grid();
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (!grid.is_boundary(grid.face_id(k))) continue;
        lo = std::min(lo, g[k]);
        hi = std::max(hi, g[k]);
    }
    const DensityLaw& law = disc.spec().density;
    th.m_rho = law.density(lo);
    th.M_rho = law.density(hi);
    th.L_rho = std::max(law.lipschitz_on(lo, hi), std::numeric_limits<double>::min());
    if (!(th.M_u > 0.0)) th.M_u = std::numeric_limits<double>::min();
    return th;
}

}  // namespace dfflow
