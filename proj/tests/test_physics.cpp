#include <gtest/gtest.h>

#include <cmath>

#include "dfflow/physics.hpp"

using namespace dfflow;

TEST(Density, DerivativeMatchesCentralDifference)
{
    const DensityLaw law{1.3, 0.2, 1e-2, DensityMode::Variable};
    for (double p : {-5.0, 0.0, 0.7, 30.0}) {
        const double h = 1e-4;
        const double fd = (law.density(p + h) - law.density(p - h)) / (2 * h);
        EXPECT_NEAR(law.density_dp(p), fd, 1e-9 * std::abs(fd));
    }
    EXPECT_DOUBLE_EQ(law.density(0.2), 1.3);
}

TEST(Density, ConstantMode)
{
    const DensityLaw law{1.0, 0.0, 1e-5, DensityMode::ConstantOne};
    EXPECT_EQ(law.density(123.0), 1.0);
    EXPECT_EQ(law.density_dp(123.0), 0.0);
}

TEST(Permeability, Validation)
{
    EXPECT_THROW(PermeabilityField::constant(0.0), InvalidProblem);
    EXPECT_THROW(PermeabilityField::per_cell({1.0, -1.0}), InvalidProblem);
    const auto k = PermeabilityField::per_cell({1.0, 1e-4, 3.0});
    EXPECT_DOUBLE_EQ(k.max(), 3.0);
    EXPECT_DOUBLE_EQ(k.min(), 1e-4);
    EXPECT_DOUBLE_EQ(k.at(1), 1e-4);
}

TEST(ProblemSpec, StepCount)
{
    ProblemSpec s;
    s.T = 1.0;
    s.tau = 0.1;
    EXPECT_EQ(s.step_count(), 10);
    s.tau = 0.3;
    EXPECT_EQ(s.step_count(), 4);
    s.tau = 0.001;
    EXPECT_EQ(s.step_count(), 1000);
}

TEST(ProblemSpec, Validate)
{
    ProblemSpec s;
    EXPECT_NO_THROW(s.validate());
    s.tau = -1.0;
    EXPECT_THROW(s.validate(), InvalidProblem);
    s.tau = 1.0;
    s.mu = 0.0;
    EXPECT_THROW(s.validate(), InvalidProblem);
}

TEST(Manufactured, VelocitySatisfiesPointwiseLaw)
{
    for (double beta : {0.0, 1.0, 100.0}) {
        for (double k : {1e-2, 1.0, 1e2}) {
            const ProblemSpec spec = manufactured::make_problem(k, beta, 1.0, 1.0);
            for (double t : {0.0, 0.5}) {
                for (auto [x, y] : {std::pair{0.3, 0.6}, std::pair{0.9, 0.1}}) {
                    const Vec2 u = manufactured::velocity(spec, k, x, y, t);
                    const Vec2 g = manufactured::pressure_gradient(x, y, t);
                    const double speed = std::hypot(u[0], u[1]);
                    const double rho = spec.density.density(manufactured::pressure(x, y, t));
                    for (int d = 0; d < 2; ++d) {
                        const double r = spec.mu / k * u[d] + beta * rho * speed * u[d] + g[d];
                        EXPECT_NEAR(r, 0.0, 1e-12 * (std::abs(g[d]) + 1e-300)) << beta << ' ' << k;
                    }
                }
            }
        }
    }
}

TEST(Manufactured, GradientAndTimeDerivative)
{
    const double x = 0.37, y = 0.81, t = 0.4, h = 1e-5;
    const Vec2 g = manufactured::pressure_gradient(x, y, t);
    EXPECT_NEAR(g[0], (manufactured::pressure(x + h, y, t) - manufactured::pressure(x - h, y, t)) / (2 * h), 1e-9);
    EXPECT_NEAR(g[1], (manufactured::pressure(x, y + h, t) - manufactured::pressure(x, y - h, t)) / (2 * h), 1e-9);
    EXPECT_NEAR(manufactured::pressure_dt(x, y, t),
                (manufactured::pressure(x, y, t + h) - manufactured::pressure(x, y, t - h)) / (2 * h), 1e-9);
}

TEST(Manufactured, SourceIsStoragePlusDivergence)
{
    // Independent estimate: a coarser five-point divergence stencil.
    const double k = 1.0, beta = 1.0;
    const ProblemSpec spec = manufactured::make_problem(k, beta, 1.0, 1.0);
    const double x = 0.3, y = 0.7, t = 0.2, d = 1e-4;
    auto u = [&](double xx, double yy) { return manufactured::velocity(spec, k, xx, yy, t); };
    const double div = (u(x + d, y)[0] - u(x - d, y)[0]) / (2 * d) + (u(x, y + d)[1] - u(x, y - d)[1]) / (2 * d);
    const double expected = manufactured::pressure_dt(x, y, t) + div;
    EXPECT_NEAR(manufactured::source(spec, k, x, y, t), expected, 1e-6 * std::abs(expected));
    EXPECT_NEAR(spec.source(x, y, t), expected, 1e-6 * std::abs(expected));
}

TEST(Manufactured, HomogeneousBoundary)
{
    const ProblemSpec spec = manufactured::make_problem(1.0, 1.0, 1.0, 1.0);
    EXPECT_EQ(spec.dirichlet_p(0.0, 0.4, 0.3), 0.0);
    EXPECT_EQ(spec.dirichlet_p(0.4, 1.0, 0.3), 0.0);
}

TEST(Patterns, CellCountsAt160)
{
    const Grid g = Grid::build(160, 160, {0, 1, 0, 1});
    auto count_low = [&](PatternKind kind) {
        const PermeabilityField k = permeability_pattern(kind, g, 1e-4, 1.0);
        std::size_t n = 0;
        for (std::size_t c = 0; c < g.cell_count(); ++c) n += k.at(c) < 1.0;
        return n;
    };
    EXPECT_EQ(count_low(PatternKind::Strip), 16u * 160u);
    EXPECT_EQ(count_low(PatternKind::Squares), 9u * 256u);
    EXPECT_EQ(count_low(PatternKind::LShapes), 9u * 192u);
}

TEST(Patterns, LShapeRemovesUpperRightQuadrant)
{
    const Grid g = Grid::build(160, 160, {0, 1, 0, 1});
    const PermeabilityField k = permeability_pattern(PatternKind::LShapes, g, 1e-4, 1.0);
    auto at = [&](double x, double y) {
        const int i = static_cast<int>(x * 160), j = static_cast<int>(y * 160);
        return k.at(g.cell_index({i, j}));
    };
    EXPECT_EQ(at(0.23, 0.23), 1e-4);  // lower-left quadrant of the first square
    EXPECT_EQ(at(0.27, 0.27), 1.0);   // removed quadrant
    EXPECT_EQ(at(0.27, 0.23), 1e-4);
    EXPECT_EQ(at(0.10, 0.10), 1.0);
}

TEST(Patterns, Parse)
{
    EXPECT_EQ(parse_pattern_kind("strip"), PatternKind::Strip);
    EXPECT_EQ(parse_pattern_kind("l-shapes"), PatternKind::LShapes);
    EXPECT_THROW(parse_pattern_kind("circle"), InvalidProblem);
    EXPECT_EQ(parse_pattern_kind(to_string(PatternKind::Squares)), PatternKind::Squares);
}

TEST(Patterns, ProblemData)
{
    const Grid g = Grid::build(8, 8, {0, 1, 0, 1});
    const ProblemSpec s = make_pattern_problem(permeability_pattern(PatternKind::Strip, g, 1e-4, 1.0), 1.0, 0.1, 1.0);
    EXPECT_DOUBLE_EQ(s.dirichlet_p(0.25, 0.0, 0.5), 0.75);
    EXPECT_DOUBLE_EQ(s.initial_p(0.25, 0.9), 0.75);
    EXPECT_EQ(s.source(0.3, 0.3, 0.3), 0.0);
    EXPECT_FALSE(s.initial_u.has_value());
}
