#include "dfflow/tpfa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dfflow {

State State::zeros(const Grid& grid)
{
    return {std::vector<double>(grid.face_count(), 0.0), std::vector<double>(grid.cell_count(), 0.0)};
}

std::vector<double> State::stacked() const
{
    std::vector<double> v;
    v.reserve(u.size() + p.size());
    v.insert(v.end(), u.begin(), u.end());
    v.insert(v.end(), p.begin(), p.end());
    return v;
}

bool State::finite() const
{
    auto ok = [](double x) { return std::isfinite(x); };
    return std::all_of(u.begin(), u.end(), ok) && std::all_of(p.begin(), p.end(), ok);
}

double face_transmissibility(const Grid& grid, const PermeabilityField& perm, FaceId f)
{
    const FaceCells cells = grid.cells_of_face(f);
    if (cells.has_lower && cells.has_upper) {
        const double kl = perm.at(grid.cell_index(cells.lower));
        const double ku = perm.at(grid.cell_index(cells.upper));
        // Distance-weighted harmonic mean; both half-distances are h/2 here.
        const double half = 0.5 * grid.normal_width(f);
        return (half + half) / (half / kl + half / ku);
    }
    return perm.at(grid.cell_index(cells.has_lower ? cells.lower : cells.upper));
}

double reconstruct_face_speed(const Grid& grid, std::span<const double> u, FaceId f)
{
    double transverse = 0.0;
    for (const StencilEntry& e : grid.transverse_face_stencil(f)) transverse += e.weight * u[grid.face_index(e.face)];
    const double normal = u[grid.face_index(f)];
    return std::sqrt(normal * normal + transverse * transverse);
}

double reconstruct_face_speed(const Grid& grid, const State& state, FaceId f)
{
    return reconstruct_face_speed(grid, std::span<const double>(state.u), f);
}

double face_pressure(const Grid& grid, const ProblemSpec& spec, const State& state, FaceId f, double t)
{
    const FaceCells cells = grid.cells_of_face(f);
    if (cells.has_lower && cells.has_upper) {
        return 0.5 * (state.p[grid.cell_index(cells.lower)] + state.p[grid.cell_index(cells.upper)]);
    }
    const auto [x, y] = grid.face_center(f);
    return spec.dirichlet_p(x, y, t);
}

double discrete_divergence(const Grid& grid, std::span<const double> u, CellId c)
{
    const CellFaces f = grid.faces_of_cell(c);
    return (u[grid.face_index(f.east)] - u[grid.face_index(f.west)]) / grid.hx() +
           (u[grid.face_index(f.north)] - u[grid.face_index(f.south)]) / grid.hy();
}

Discretization::Discretization(Grid grid, ProblemSpec spec) : grid_(std::move(grid)), spec_(std::move(spec))
{
    spec_.validate();
    if (!spec_.perm.is_constant() && spec_.perm.size() != grid_.cell_count()) {
        throw InvalidProblem("per-cell permeability size does not match the grid");
    }
    const std::size_t nf = grid_.face_count();
    faces_.resize(nf);
    k_face_.resize(nf);
    for (std::size_t k = 0; k < nf; ++k) {
        FaceInfo& info = faces_[k];
        info.id = grid_.face_id(k);
        const FaceCells cells = grid_.cells_of_face(info.id);
        if (cells.has_lower) info.lower = static_cast<int>(grid_.cell_index(cells.lower));
        if (cells.has_upper) info.upper = static_cast<int>(grid_.cell_index(cells.upper));
        info.distance = grid_.face_distance(info.id);
        info.width = grid_.normal_width(info.id);
        info.length = grid_.face_length(info.id);
        info.stencil = grid_.transverse_face_stencil(info.id);
        k_face_[k] = face_transmissibility(grid_, spec_.perm, info.id);
    }
}

std::vector<double> Discretization::boundary_pressures(double t) const
{
    std::vector<double> g(faces_.size(), 0.0);
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        if (faces_[k].lower >= 0 && faces_[k].upper >= 0) continue;
        const auto [x, y] = grid_.face_center(faces_[k].id);
        g[k] = spec_.dirichlet_p(x, y, t);
    }
    return g;
}

std::vector<double> Discretization::cell_sources(double t) const
{
    std::vector<double> f(grid_.cell_count());
    for (std::size_t c = 0; c < f.size(); ++c) {
        const auto [x, y] = grid_.cell_center(grid_.cell_id(c));
        f[c] = spec_.source(x, y, t);
    }
    return f;
}

State Discretization::sample(const ScalarField& p, const VectorField& u, double t) const
{
    State s = State::zeros(grid_);
    for (std::size_t c = 0; c < s.p.size(); ++c) {
        const auto [x, y] = grid_.cell_center(grid_.cell_id(c));
        s.p[c] = p(x, y, t);
    }
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        const auto [x, y] = grid_.face_center(faces_[k].id);
        const Vec2 v = u(x, y, t);
        s.u[k] = faces_[k].id.axis == Axis::X ? v[0] : v[1];
    }
    return s;
}

State Discretization::initial_state() const
{
    State s = State::zeros(grid_);
    for (std::size_t c = 0; c < s.p.size(); ++c) {
        const auto [x, y] = grid_.cell_center(grid_.cell_id(c));
        s.p[c] = spec_.initial_p(x, y);
    }
    if (spec_.initial_u) {
        for (std::size_t k = 0; k < faces_.size(); ++k) {
            const auto [x, y] = grid_.face_center(faces_[k].id);
            const Vec2 v = (*spec_.initial_u)(x, y, 0.0);
            s.u[k] = faces_[k].id.axis == Axis::X ? v[0] : v[1];
        }
        return s;
    }
    // Local face balance (mu/k + beta rho |u_f|) u_f = -G_f, solved in closed form.
    const std::vector<double> g = boundary_pressures(0.0);
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        const FaceInfo& f = faces_[k];
        const double pl = f.lower >= 0 ? s.p[f.lower] : g[k];
        const double pu = f.upper >= 0 ? s.p[f.upper] : g[k];
        const double grad = (pu - pl) / f.distance;
        const double a = spec_.mu / k_face_[k];
        const double br = spec_.beta * spec_.density.density(0.5 * (pl + pu));
        s.u[k] = -2.0 * grad / (a + std::sqrt(a * a + 4.0 * br * std::abs(grad)));
    }
    return s;
}

std::vector<double> Discretization::face_speeds(std::span<const double> u) const
{
    std::vector<double> speed(faces_.size());
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        double transverse = 0.0;
        for (const StencilEntry& e : faces_[k].stencil) transverse += e.weight * u[grid_.face_index(e.face)];
        speed[k] = std::sqrt(u[k] * u[k] + transverse * transverse);
    }
    return speed;
}

std::vector<double> Discretization::face_pressures(std::span<const double> p, std::span<const double> g) const
{
    std::vector<double> pf(faces_.size());
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        const FaceInfo& f = faces_[k];
        pf[k] = (f.lower >= 0 && f.upper >= 0) ? 0.5 * (p[f.lower] + p[f.upper]) : g[k];
    }
    return pf;
}

FrozenCoefficients Discretization::frozen_coefficients(const State& iterate, double gamma, double L, double t) const
{
    const std::vector<double> g = boundary_pressures(t);
    const std::vector<double> speed = face_speeds(iterate.u);
    const std::vector<double> pf = face_pressures(iterate.p, g);
    FrozenCoefficients fc;
    fc.a.resize(faces_.size());
    fc.b.resize(faces_.size());
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        const double lagged = spec_.beta * spec_.density.density(pf[k]) * speed[k];
        fc.a[k] = spec_.mu / k_face_[k] + (1.0 - gamma) * lagged + L;
        fc.b[k] = gamma * lagged * iterate.u[k] - L * iterate.u[k];
    }
    return fc;
}

Discretization::LSchemeSystem Discretization::assemble_lscheme(std::span<const double> p_old, const State& iterate,
                                                               double gamma, double L, double t,
                                                               double tau) const
{
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw AssemblyError("gamma must lie in [0, 1]");
    if (!(L >= 0.0)) throw AssemblyError("L must be >= 0");

    LSchemeSystem out;
    out.coeffs = frozen_coefficients(iterate, gamma, L, t);
    out.boundary_p = boundary_pressures(t);
    const std::size_t nc = grid_.cell_count();

    std::vector<double> rhs(nc);
    const std::vector<double> f = cell_sources(t);
    for (std::size_t c = 0; c < nc; ++c) rhs[c] = p_old[c] + tau * f[c];

    std::vector<double> diag(nc, 1.0);
    std::vector<Triplet> entries;
    entries.reserve(nc + 2 * faces_.size());
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        const FaceInfo& face = faces_[k];
        const double a = out.coeffs.a[k];
        if (!(a > 0.0) || !std::isfinite(a)) {
            std::ostringstream msg;
            msg << "non-positive face coefficient " << a << " at face " << k;
            throw AssemblyError(msg.str());
        }
        // u_f = T (p_low - p_up) - b/a
        const double T = 1.0 / (a * face.distance);
        const double scale = tau / face.width;
        const double shift = out.coeffs.b[k] / a;
        if (face.lower >= 0) {
            diag[face.lower] += scale * T;
            rhs[face.lower] += scale * shift;
            if (face.upper >= 0) {
                entries.push_back({face.lower, face.upper, -scale * T});
            } else {
                rhs[face.lower] += scale * T * out.boundary_p[k];
            }
        }
        if (face.upper >= 0) {
            diag[face.upper] += scale * T;
            rhs[face.upper] -= scale * shift;
            if (face.lower >= 0) {
                entries.push_back({face.upper, face.lower, -scale * T});
            } else {
                rhs[face.upper] += scale * T * out.boundary_p[k];
            }
        }
    }
    for (std::size_t c = 0; c < nc; ++c) entries.push_back({static_cast<int>(c), static_cast<int>(c), diag[c]});

    out.system.matrix = SparseMatrix::from_triplets(static_cast<int>(nc), std::move(entries));
    out.system.rhs = std::move(rhs);
    out.system.layout = Layout::Reduced;
    return out;
}

State Discretization::back_substitute(const LSchemeSystem& sys, std::vector<double> p) const
{
    State s;
    s.u.resize(faces_.size());
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        const FaceInfo& face = faces_[k];
        const double pl = face.lower >= 0 ? p[face.lower] : sys.boundary_p[k];
        const double pu = face.upper >= 0 ? p[face.upper] : sys.boundary_p[k];
        s.u[k] = (-(pu - pl) / face.distance - sys.coeffs.b[k]) / sys.coeffs.a[k];
    }
    s.p = std::move(p);
    return s;
}

std::vector<double> Discretization::residual(std::span<const double> p_old, const State& state, double t,
                                             double tau) const
{
    const std::size_t nf = faces_.size();
    const std::size_t nc = grid_.cell_count();
    const std::vector<double> g = boundary_pressures(t);
    const std::vector<double> speed = face_speeds(state.u);
    const std::vector<double> pf = face_pressures(state.p, g);
    const std::vector<double> f = cell_sources(t);

    std::vector<double> r(nf + nc);
    for (std::size_t k = 0; k < nf; ++k) {
        const FaceInfo& face = faces_[k];
        const double pl = face.lower >= 0 ? state.p[face.lower] : g[k];
        const double pu = face.upper >= 0 ? state.p[face.upper] : g[k];
        r[k] = (spec_.mu / k_face_[k] + spec_.beta * spec_.density.density(pf[k]) * speed[k]) * state.u[k] +
               (pu - pl) / face.distance;
    }
    for (std::size_t c = 0; c < nc; ++c) {
        r[nf + c] = state.p[c] + tau * discrete_divergence(grid_, state.u, grid_.cell_id(c)) - p_old[c] - tau * f[c];
    }
    return r;
}

Discretization::NewtonSystem Discretization::assemble_newton(std::span<const double> p_old, const State& state,
                                                             double t, double tau) const
{
    const std::size_t nf = faces_.size();
    const std::size_t nc = grid_.cell_count();
    const std::vector<double> g = boundary_pressures(t);
    const std::vector<double> pf = face_pressures(state.p, g);
    const double beta = spec_.beta;

    NewtonSystem out;
    out.residual = residual(p_old, state, t, tau);

    std::vector<Triplet> entries;
    entries.reserve(nf * 8 + nc * 5);
    for (std::size_t k = 0; k < nf; ++k) {
        const FaceInfo& face = faces_[k];
        const int row = static_cast<int>(k);
        double transverse = 0.0;
        for (const StencilEntry& e : face.stencil) transverse += e.weight * state.u[grid_.face_index(e.face)];
        const double uf = state.u[k];
        const double speed = std::sqrt(uf * uf + transverse * transverse);
        const double rho = spec_.density.density(pf[k]);

        // d(|w| u_f)/du_f = |w| + u_f^2/|w|, taken as 0 at |w| = 0.
        double d_self = spec_.mu / k_face_[k];
        if (speed > 0.0) d_self += beta * rho * (speed + uf * uf / speed);
        entries.push_back({row, row, d_self});
        if (speed > 0.0) {
            for (const StencilEntry& e : face.stencil) {
                const double d = beta * rho * uf * transverse * e.weight / speed;
                entries.push_back({row, static_cast<int>(grid_.face_index(e.face)), d});
            }
        }
        // Pressure coupling through the gradient and, on interior faces, rho(p_f).
        const bool interior = face.lower >= 0 && face.upper >= 0;
        const double drho_half = interior ? 0.5 * beta * spec_.density.density_dp(pf[k]) * speed * uf : 0.0;
        if (face.lower >= 0) {
            entries.push_back({row, static_cast<int>(nf) + face.lower, drho_half - 1.0 / face.distance});
        }
        if (face.upper >= 0) {
            entries.push_back({row, static_cast<int>(nf) + face.upper, drho_half + 1.0 / face.distance});
        }
    }
    for (std::size_t c = 0; c < nc; ++c) {
        const int row = static_cast<int>(nf + c);
        entries.push_back({row, row, 1.0});
        const CellFaces cf = grid_.faces_of_cell(grid_.cell_id(c));
        const double sx = tau / grid_.hx();
        const double sy = tau / grid_.hy();
        entries.push_back({row, static_cast<int>(grid_.face_index(cf.east)), sx});
        entries.push_back({row, static_cast<int>(grid_.face_index(cf.west)), -sx});
        entries.push_back({row, static_cast<int>(grid_.face_index(cf.north)), sy});
        entries.push_back({row, static_cast<int>(grid_.face_index(cf.south)), -sy});
    }
    out.system.matrix = SparseMatrix::from_triplets(static_cast<int>(nf + nc), std::move(entries));
    out.system.rhs.resize(nf + nc);
    for (std::size_t i = 0; i < nf + nc; ++i) out.system.rhs[i] = -out.residual[i];
    out.system.layout = Layout::Coupled;
    return out;
}

double Discretization::mass_balance_defect(std::span<const double> p_old, const State& state, double t,
                                           double tau) const
{
    const double vol = grid_.cell_volume();
    const std::vector<double> f = cell_sources(t);
    double storage = 0.0, source = 0.0, scale = 0.0;
    for (std::size_t c = 0; c < state.p.size(); ++c) {
        const double s = vol * (state.p[c] - p_old[c]) / tau;
        storage += s;
        source += vol * f[c];
        scale += std::abs(s) + std::abs(vol * f[c]);
    }
    double outflow = 0.0;
    for (std::size_t k = 0; k < faces_.size(); ++k) {
        const FaceInfo& face = faces_[k];
        if (face.lower >= 0 && face.upper >= 0) continue;
        // Outward normal is +axis when the only cell is on the lower side.
        const double flux = state.u[k] * face.length;
        const double out = face.upper < 0 ? flux : -flux;
        outflow += out;
        scale += std::abs(out);
    }
    return std::abs(storage + outflow - source) / std::max(scale, std::numeric_limits<double>::min());
}

}  // namespace dfflow
