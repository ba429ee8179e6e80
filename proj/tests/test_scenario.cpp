#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "dfflow/output.hpp"
#include "dfflow/scenario.hpp"

using namespace dfflow;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir()
{
    const fs::path p = fs::temp_directory_path() / ("dfflow_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    fs::create_directories(p);
    return p;
}

std::string drop_column(const std::string& csv, std::size_t column)
{
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t start = 0;
        for (std::size_t c = 0; c < column; ++c) start = line.find(',', start) + 1;
        const std::size_t end = line.find(',', start);
        out << line.substr(0, start) << line.substr(end + 1) << '\n';
    }
    return out.str();
}

const char* kSmall = R"(
name: small
grid: {N: [6]}
k: [1]
beta: [1, 10]
tau: [0.5]
schemes:
  - {kind: newton}
  - {kind: picard}
  - {kind: relaxed_picard, omega: 0.7}
  - {kind: lscheme, gamma: 0, L: {1: 0.07, 10: 0.22}}
output: {errors: true}
)";

}  // namespace

TEST(Config, ParsesSchemesAndLists)
{
    const ScenarioConfig c = parse_scenario(kSmall);
    EXPECT_EQ(c.name, "small");
    EXPECT_EQ(c.N, std::vector<int>{6});
    EXPECT_EQ(c.beta.size(), 2u);
    ASSERT_EQ(c.schemes.size(), 4u);
    EXPECT_EQ(c.schemes[2].config.omega, 0.7);
    EXPECT_DOUBLE_EQ(c.schemes[3].resolve(10.0).L, 0.22);
    EXPECT_DOUBLE_EQ(c.schemes[3].resolve(1.0).L, 0.07);
    EXPECT_TRUE(c.measure_errors);
    EXPECT_EQ(case_count(c), 8u);
}

TEST(Config, HeuristicL)
{
    const ScenarioConfig c = parse_scenario("schemes:\n  - {kind: lscheme, L: heuristic}\nbeta: [100]\n");
    EXPECT_NEAR(c.schemes[0].resolve(100.0).L, 0.7, 1e-15);
}

TEST(Config, UnknownKeysRejected)
{
    try {
        parse_scenario("grid: {N: [4], spacing: 2}\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("grid.spacing"), std::string::npos);
    }
    EXPECT_THROW(parse_scenario("colour: red\n"), ConfigError);
    EXPECT_THROW(parse_scenario("schemes:\n  - {kind: picard, L: 1}\n"), ConfigError);
    EXPECT_THROW(parse_scenario("schemes:\n  - {kind: multigrid}\n"), ConfigError);
}

TEST(Config, RangeErrors)
{
    EXPECT_THROW(parse_scenario("tau: [-1]\n"), ConfigError);
    EXPECT_THROW(parse_scenario("grid: {N: [0]}\n"), ConfigError);
    EXPECT_THROW(parse_scenario("schemes:\n  - {kind: relaxed_picard, omega: 1.5}\n"), ConfigError);
    EXPECT_THROW(parse_scenario("solver: {norm: max}\n"), ConfigError);
}

TEST(Config, ReferenceMismatchRejected)
{
    EXPECT_NO_THROW(builtin_config("table2").validate());
    ScenarioConfig c = builtin_config("table2");
    c.schemes[3].config.L = 0.5;
    EXPECT_THROW(c.validate(), ConfigError);
    c = builtin_config("table6");
    c.schemes[2].config.omega = 0.7;
    EXPECT_THROW(c.validate(), ConfigError);
    c = builtin_config("table1");
    c.N = {40};
    EXPECT_THROW(c.validate(), ConfigError);
    for (const std::string& name : builtin_names()) EXPECT_NO_THROW(builtin_config(name, true).validate()) << name;
}

TEST(Config, BuiltinCardinality)
{
    EXPECT_EQ(case_count(builtin_config("table1", true)), 25u);
    EXPECT_EQ(case_count(builtin_config("table2")), 48u);
    EXPECT_EQ(case_count(builtin_config("table6")), 24u);
    EXPECT_EQ(case_count(builtin_config("fig8")), 72u);
}

TEST(Scenario, EmptySchemeListGivesNoRows)
{
    ScenarioConfig c;
    EXPECT_TRUE(run_scenario(c).rows.empty());
}

TEST(Scenario, RowsAndErrors)
{
    const ScenarioResult r = run_scenario(parse_scenario(kSmall));
    ASSERT_EQ(r.rows.size(), 8u);
    for (const TableRow& row : r.rows) {
        EXPECT_TRUE(row.converged) << row.scheme;
        EXPECT_GE(row.error_p, 0.0);
        // The relaxed update blends in the previous iterate, which does not
        // satisfy the current mass equations.
        if (row.scheme != "relaxed_picard") EXPECT_LT(row.max_mass_defect, 1e-12) << row.scheme;
    }
    EXPECT_EQ(r.rows[0].scheme, "newton");
    EXPECT_DOUBLE_EQ(r.rows[7].L, 0.22);
}

TEST(Scenario, DeterministicApartFromWallTime)
{
    ScenarioConfig c = parse_scenario(kSmall);
    RunOptions two;
    two.threads = 2;
    const std::string a = format_table(run_scenario(c).rows);
    const std::string b = format_table(run_scenario(c, two).rows);
    EXPECT_EQ(drop_column(a, 10), drop_column(b, 10));
}

TEST(Errors, ExactSampleHasZeroError)
{
    const Discretization d(Grid::build(8, 8, {0, 1, 0, 1}), manufactured::make_problem(1.0, 1.0, 0.5, 1.0));
    const ProblemSpec& spec = d.spec();
    const State s = d.sample(manufactured::pressure,
                             [&](double x, double y, double t) { return manufactured::velocity(spec, 1.0, x, y, t); },
                             0.5);
    const ErrorNorms e = measure_errors(d, s, 0.5);
    EXPECT_EQ(e.p, 0.0);
    EXPECT_EQ(e.u, 0.0);
}

TEST(Table, HeaderOnlyForNoRows)
{
    EXPECT_EQ(format_table({}), std::string(kTableHeader) + "\n");
    const fs::path p = temp_dir() / "empty.csv";
    emit_table({}, p.string());
    EXPECT_TRUE(read_table(p.string()).empty());
}

TEST(Table, RoundTrip)
{
    TableRow r;
    r.scheme = "picard";
    r.N = 40;
    r.k = 100.0;
    r.beta = 1.0;
    r.tau = 1.0;
    r.avg_iters = 73.0 / 3.0;
    r.converged = true;
    r.wall_s = 0.123456789;
    r.condest_mean = 12345.678901234;
    const fs::path p = temp_dir() / "one.csv";
    emit_table({r}, p.string());
    const std::vector<TableRow> back = read_table(p.string());
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(back[0].scheme, r.scheme);
    EXPECT_EQ(back[0].N, r.N);
    EXPECT_EQ(back[0].k, r.k);
    EXPECT_EQ(back[0].avg_iters, r.avg_iters);
    EXPECT_EQ(back[0].wall_s, r.wall_s);
    EXPECT_EQ(back[0].condest_mean, r.condest_mean);
    EXPECT_TRUE(back[0].converged);
}

TEST(Table, NonConvergedRendersEmptyIterations)
{
    TableRow r;
    r.scheme = "picard";
    r.converged = false;
    r.avg_iters = 150;
    r.condest_mean = std::nan("");
    const std::string text = format_table({r});
    EXPECT_NE(text.find(",,false,"), std::string::npos);
    const std::vector<TableRow> back = parse_table(text);
    EXPECT_TRUE(std::isnan(back[0].avg_iters));
    EXPECT_TRUE(std::isnan(back[0].condest_mean));
}

TEST(Field, SingleCell)
{
    const Grid g = Grid::build(1, 1, {0, 1, 0, 1});
    State s = State::zeros(g);
    s.p = {0.5};
    const std::string vtk = format_field(g, s);
    EXPECT_NE(vtk.find("DIMENSIONS 1 1 1"), std::string::npos);
    EXPECT_NE(vtk.find("POINT_DATA 1\n"), std::string::npos);
    // zero velocity is clamped to the floor
    EXPECT_NE(vtk.find("\n-300\n"), std::string::npos);
}

TEST(Field, UniformVelocityHasZeroLogSpeed)
{
    const Grid g = Grid::build(3, 2, {0, 1, 0, 1});
    State s = State::zeros(g);
    for (std::size_t f = 0; f < g.x_face_count(); ++f) s.u[f] = 1.0;
    for (double v : cell_speeds(g, s)) EXPECT_DOUBLE_EQ(v, 1.0);
    const std::string vtk = format_field(g, s);
    const std::string tail = vtk.substr(vtk.find("log10_speed"));
    std::istringstream in(tail.substr(tail.find("default\n") + 8));
    double v;
    int n = 0;
    while (in >> v) {
        EXPECT_EQ(v, 0.0);
        ++n;
    }
    EXPECT_EQ(n, 6);
}

TEST(Field, StripVelocityIsSuppressedAtHighInertia)
{
    ScenarioConfig c;
    c.problem = ProblemKind::Pattern;
    c.patterns = {PatternKind::Strip};
    c.N = {40};
    c.beta = {1e4};
    c.tau = {0.1};
    c.schemes = {SchemeEntry{SchemeConfig::lscheme(0.0, 70.0), {}, false}};
    RunOptions o;
    o.keep_fields = true;
    const ScenarioResult r = run_scenario(c, o);
    ASSERT_TRUE(r.rows[0].converged);
    const Grid& g = *r.fields[0].grid;
    const std::vector<double> speed = cell_speeds(g, r.fields[0].state);
    double inside = 0.0, outside = 0.0;
    int ni = 0, no = 0;
    for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
        const double x = g.cell_center(g.cell_id(cell))[0];
        const double l = std::log10(speed[cell]);
        if (x > 0.45 && x < 0.55) {
            inside += l;
            ++ni;
        } else if (x < 0.3 || x > 0.7) {
            outside += l;
            ++no;
        }
    }
    // at least an order of magnitude slower inside the strip
    EXPECT_LT(inside / ni, outside / no - 1.0);
}
