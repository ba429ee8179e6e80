#include "dfflow/physics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dfflow {

double DensityLaw::density(double p) const
{
    if (mode == DensityMode::ConstantOne) return 1.0;
    return rho_ref * std::exp(cf * (p - p_ref));
}

double DensityLaw::density_dp(double p) const
{
    if (mode == DensityMode::ConstantOne) return 0.0;
    return cf * density(p);
}

double DensityLaw::lipschitz_on(double /*a*/, double b) const
{
    if (mode == DensityMode::ConstantOne) return 0.0;
    return cf * rho_ref * std::exp(cf * (b - p_ref));
}

double density(const DensityLaw& law, double p) { return law.density(p); }
double density_dp(const DensityLaw& law, double p) { return law.density_dp(p); }

PermeabilityField PermeabilityField::constant(double k)
{
    if (!(k > 0.0)) throw InvalidProblem("permeability must be strictly positive");
    PermeabilityField f;
    f.data_ = k;
    return f;
}

PermeabilityField PermeabilityField::per_cell(std::vector<double> values)
{
    if (values.empty()) throw InvalidProblem("per-cell permeability needs at least one value");
    for (double v : values) {
        if (!(v > 0.0)) throw InvalidProblem("permeability must be strictly positive");
    }
    PermeabilityField f;
    f.data_ = std::move(values);
    return f;
}

double PermeabilityField::at(std::size_t cell) const
{
    if (const double* k = std::get_if<double>(&data_)) return *k;
    return std::get<std::vector<double>>(data_)[cell];
}

double PermeabilityField::max() const
{
    if (const double* k = std::get_if<double>(&data_)) return *k;
    const auto& v = std::get<std::vector<double>>(data_);
    return *std::max_element(v.begin(), v.end());
}

double PermeabilityField::min() const
{
    if (const double* k = std::get_if<double>(&data_)) return *k;
    const auto& v = std::get<std::vector<double>>(data_);
    return *std::min_element(v.begin(), v.end());
}

std::size_t PermeabilityField::size() const
{
    if (is_constant()) return 0;
    return std::get<std::vector<double>>(data_).size();
}

void ProblemSpec::validate() const
{
    auto fail = [](const std::string& what) { throw InvalidProblem(what); };
    if (!(mu > 0.0)) fail("mu must be > 0");
    if (!(beta >= 0.0)) fail("beta must be >= 0");
    if (!(density.cf >= 0.0)) fail("cf must be >= 0");
    if (!(density.rho_ref > 0.0)) fail("rho_ref must be > 0");
    if (!(tau > 0.0)) fail("tau must be > 0");
    if (!(T >= tau)) fail("T must be >= tau");
    if (!(perm.min() > 0.0)) fail("permeability must be > 0");
}

int ProblemSpec::step_count() const
{
    const double n = T / tau;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) <= 1e-9 * std::max(1.0, n)) return static_cast<int>(rounded);
    return static_cast<int>(std::ceil(n));
}

namespace manufactured {

double pressure(double x, double y, double t)
{
    return std::exp(-2.0 * t) * x * (1.0 - x) * y * (1.0 - y);
}

Vec2 pressure_gradient(double x, double y, double t)
{
    const double e = std::exp(-2.0 * t);
    return {e * (1.0 - 2.0 * x) * y * (1.0 - y), e * x * (1.0 - x) * (1.0 - 2.0 * y)};
}

double pressure_dt(double x, double y, double t) { return -2.0 * pressure(x, y, t); }

Vec2 velocity(const ProblemSpec& spec, double k, double x, double y, double t)
{
    const Vec2 g = pressure_gradient(x, y, t);
    const double a = spec.mu / k;
    if (spec.beta == 0.0) return {-g[0] / a, -g[1] / a};
    const double gnorm = std::hypot(g[0], g[1]);
    const double rho = spec.density.density(pressure(x, y, t));
    const double denom = a + std::sqrt(a * a + 4.0 * spec.beta * rho * gnorm);
    return {-2.0 * g[0] / denom, -2.0 * g[1] / denom};
}

double source(const ProblemSpec& spec, double k, double x, double y, double t, double delta)
{
    const double dux = (velocity(spec, k, x + delta, y, t)[0] - velocity(spec, k, x - delta, y, t)[0]) / (2.0 * delta);
    const double duy = (velocity(spec, k, x, y + delta, t)[1] - velocity(spec, k, x, y - delta, t)[1]) / (2.0 * delta);
    return pressure_dt(x, y, t) + dux + duy;
}

ProblemSpec make_problem(double k, double beta, double tau, double T, DensityMode mode)
{
    return make_problem(k, beta, tau, T, 1.0, DensityLaw{1.0, 0.0, 1e-5, mode});
}

ProblemSpec make_problem(double k, double beta, double tau, double T, double mu, const DensityLaw& density)
{
    ProblemSpec spec;
    spec.mu = mu;
    spec.beta = beta;
    spec.density = density;
    spec.perm = PermeabilityField::constant(k);
    spec.tau = tau;
    spec.T = T;
    // The source captures a copy of the parameters it depends on; `spec` itself
    // is returned by value.
    ProblemSpec params = spec;
    spec.source = [params, k](double x, double y, double t) { return source(params, k, x, y, t); };
    spec.dirichlet_p = [](double x, double y, double t) { return pressure(x, y, t); };
    spec.initial_p = [](double x, double y) { return pressure(x, y, 0.0); };
    spec.initial_u = [params, k](double x, double y, double t) { return velocity(params, k, x, y, t); };
    return spec;
}

}  // namespace manufactured

PatternKind parse_pattern_kind(const std::string& name)
{
    if (name == "strip") return PatternKind::Strip;
    if (name == "squares") return PatternKind::Squares;
    if (name == "lshapes" || name == "l-shapes") return PatternKind::LShapes;
    throw InvalidProblem("unknown permeability pattern '" + name + "'");
}

std::string to_string(PatternKind kind)
{
    switch (kind) {
    case PatternKind::Strip: return "strip";
    case PatternKind::Squares: return "squares";
    case PatternKind::LShapes: return "lshapes";
    }
    return "?";
}

namespace {

bool in_pattern(PatternKind kind, double x, double y)
{
    constexpr double half = 0.05;
    switch (kind) {
    case PatternKind::Strip:
        return x >= 0.45 && x <= 0.55;
    case PatternKind::Squares:
    case PatternKind::LShapes:
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                const double cx = 0.25 + 0.25 * a;
                const double cy = 0.25 + 0.25 * b;
                if (std::abs(x - cx) > half || std::abs(y - cy) > half) continue;
                if (kind == PatternKind::LShapes && x > cx && y > cy) continue;
                return true;
            }
        }
        return false;
    }
    return false;
}

}  // namespace

PermeabilityField permeability_pattern(PatternKind kind, const Grid& grid, double k_in, double k_out)
{
    if (!(k_in > 0.0) || !(k_out > 0.0)) throw InvalidProblem("pattern permeabilities must be > 0");
    const Rect& d = grid.domain();
    std::vector<double> values(grid.cell_count(), k_out);
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
        const auto [x, y] = grid.cell_center(grid.cell_id(c));
        const double xs = (x - d.x0) / (d.x1 - d.x0);
        const double ys = (y - d.y0) / (d.y1 - d.y0);
        if (in_pattern(kind, xs, ys)) values[c] = k_in;
    }
    return PermeabilityField::per_cell(std::move(values));
}

ProblemSpec make_pattern_problem(PermeabilityField perm, double beta, double tau, double T)
{
    ProblemSpec spec;
    spec.mu = 1.0;
    spec.beta = beta;
    spec.density = {1.0, 0.0, 1e-5, DensityMode::Variable};
    spec.perm = std::move(perm);
    spec.tau = tau;
    spec.T = T;
    spec.source = [](double, double, double) { return 0.0; };
    spec.dirichlet_p = [](double x, double, double) { return 1.0 - x; };
    spec.initial_p = [](double x, double) { return 1.0 - x; };
    return spec;
}

}  // namespace dfflow
