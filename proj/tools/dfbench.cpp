// dfbench: runs linearization-scheme experiments on the Darcy-Forchheimer
// finite-volume solver and writes CSV tables and VTK fields.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dfflow/output.hpp"
#include "dfflow/scenario.hpp"

namespace fs = std::filesystem;
using namespace dfflow;

namespace {

struct Overrides {
    std::optional<int> max_iter;
    std::optional<double> tol_a;
    std::optional<double> tol_r;
    std::optional<int> timing_repeats;
    std::optional<std::string> norm;
};

void apply(const Overrides& o, ScenarioConfig& c)
{
    if (o.max_iter) c.max_iter = *o.max_iter;
    if (o.tol_a) c.tol_a = *o.tol_a;
    if (o.tol_r) c.tol_r = *o.tol_r;
    if (o.timing_repeats) c.timing_repeats = *o.timing_repeats;
    if (o.norm) c.norm = parse_norm_weighting(*o.norm);
}

void print_rows(const std::vector<TableRow>& rows, bool with_condest)
{
    std::cout << std::left << std::setw(16) << "scheme" << std::setw(14) << "problem" << std::right << std::setw(6)
              << "N" << std::setw(10) << "k" << std::setw(8) << "beta" << std::setw(8) << "tau" << std::setw(9)
              << "L" << std::setw(10) << "avg_it" << std::setw(11) << "wall_s";
    if (with_condest) std::cout << std::setw(12) << "condest";
    std::cout << '\n';
    for (const TableRow& r : rows) {
        std::ostringstream it;
        if (r.converged) it << std::setprecision(3) << r.avg_iters;
        else it << "-";
        std::cout << std::left << std::setw(16) << r.scheme << std::setw(14) << r.problem << std::right
                  << std::setw(6) << r.N << std::setw(10) << r.k << std::setw(8) << r.beta << std::setw(8) << r.tau
                  << std::setw(9) << r.L << std::setw(10) << it.str() << std::setw(11) << std::setprecision(3)
                  << r.wall_s << std::setprecision(6);
        if (with_condest) std::cout << std::setw(12) << std::setprecision(3) << r.condest_mean << std::setprecision(6);
        std::cout << '\n';
    }
}

int execute(const ScenarioConfig& config, const fs::path& out_dir, int threads, bool write_fields)
{
    RunOptions opts;
    opts.threads = threads;
    opts.keep_fields = write_fields;
    const ScenarioResult result = run_scenario(config, opts);
    print_rows(result.rows, config.estimate_condition);

    fs::create_directories(out_dir);
    const fs::path csv = config.csv_path.empty() ? out_dir / (config.name + ".csv") : fs::path(config.csv_path);
    emit_table(result.rows, csv.string());
    std::cout << "table: " << csv.string() << '\n';

    if (!result.fields.empty()) {
        const fs::path dir = config.field_dir.empty() ? out_dir / "fields" : fs::path(config.field_dir);
        fs::create_directories(dir);
        for (const FieldSnapshot& f : result.fields) {
            if (!f.grid) continue;
            emit_field(*f.grid, f.state, (dir / (f.name + ".vtk")).string());
        }
        std::cout << "fields: " << dir.string() << '\n';
    }
    return 0;
}

int verify(const fs::path& out_dir, int threads)
{
    // Self-convergence on the manufactured problem with tau = h, plus the
    // Darcy limit on two grids.
    ScenarioConfig c;
    c.name = "verify";
    c.measure_errors = true;
    c.k = {1.0};
    c.schemes = {SchemeEntry{SchemeConfig::newton(), {}, false}};
    c.tol_a = c.tol_r = 1e-10;

    std::vector<TableRow> rows;
    for (int N : {20, 40, 80}) {
        c.N = {N};
        c.beta = {1.0};
        c.tau = {1.0 / N};
        RunOptions o;
        o.threads = threads;
        for (TableRow& r : run_scenario(c, o).rows) rows.push_back(std::move(r));
    }
    for (int N : {20, 40}) {
        c.N = {N};
        c.beta = {0.0};
        c.tau = {1.0 / N};
        for (TableRow& r : run_scenario(c).rows) rows.push_back(std::move(r));
    }

    fs::create_directories(out_dir);
    const fs::path csv = out_dir / "verify.csv";
    std::ofstream out(csv);
    out << std::setprecision(17) << "N,beta,tau,error_p,error_u\n";
    std::cout << std::setw(6) << "N" << std::setw(8) << "beta" << std::setw(14) << "error_p" << std::setw(14)
              << "error_u" << std::setw(9) << "order_p" << '\n';
    bool ok = true;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const TableRow& r = rows[i];
        out << r.N << ',' << r.beta << ',' << r.tau << ',' << r.error_p << ',' << r.error_u << '\n';
        std::cout << std::setw(6) << r.N << std::setw(8) << r.beta << std::setw(14) << std::setprecision(4)
                  << r.error_p << std::setw(14) << r.error_u;
        if (i > 0 && rows[i - 1].beta == r.beta) {
            const double order = std::log2(rows[i - 1].error_p / r.error_p);
            std::cout << std::setw(9) << std::setprecision(3) << order;
            ok = ok && r.error_p < rows[i - 1].error_p && r.error_u < rows[i - 1].error_u;
        }
        std::cout << std::setprecision(6) << '\n';
        ok = ok && r.converged;
    }
    std::cout << "errors decrease under refinement: " << (ok ? "yes" : "no") << '\n';
    std::cout << "table: " << csv.string() << '\n';
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Darcy-Forchheimer linearization benchmark"};
    app.require_subcommand(1);

    std::string out_dir = "results";
    int threads = 1;
    Overrides ov;
    app.add_option("--out-dir", out_dir, "Directory for CSV and field output");
    app.add_option("--threads", threads, "Scenario-level worker threads")->check(CLI::PositiveNumber);
    app.add_option_function<int>("--max-iter", [&](int v) { ov.max_iter = v; }, "Maximum iterations per step")
        ->check(CLI::PositiveNumber);
    app.add_option_function<double>("--tol-a", [&](double v) { ov.tol_a = v; }, "Absolute stopping tolerance");
    app.add_option_function<double>("--tol-r", [&](double v) { ov.tol_r = v; }, "Relative stopping tolerance");
    app.add_option_function<int>("--timing-repeats", [&](int v) { ov.timing_repeats = v; },
                                 "Runs per case; wall time is the median")
        ->check(CLI::PositiveNumber);
    app.add_option_function<std::string>("--norm", [&](const std::string& v) { ov.norm = v; },
                                         "Stopping-test norm: euclidean or cell_measure");

    CLI::App* run = app.add_subcommand("run", "Run a scenario from a YAML config");
    std::string config_path;
    bool fields = false;
    run->add_option("config", config_path, "Scenario config file")->required()->check(CLI::ExistingFile);
    run->add_flag("--fields", fields, "Write a VTK field per case");

    CLI::App* reproduce = app.add_subcommand("reproduce", "Run a built-in reference experiment");
    std::string table;
    bool full = false;
    reproduce->add_option("table", table, "table1|table2|table3|table4|table6|fig8")
        ->required()
        ->check(CLI::IsMember(builtin_names()));
    reproduce->add_flag("--full", full, "Include the long-running cases");
    reproduce->add_flag("--fields", fields, "Write a VTK field per case");

    app.add_subcommand("verify", "Manufactured-solution error study");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            ScenarioConfig c = load_scenario(config_path);
            apply(ov, c);
            c.validate();
            return execute(c, out_dir, threads, fields);
        }
        if (reproduce->parsed()) {
            ScenarioConfig c = builtin_config(table, full);
            apply(ov, c);
            c.validate();
            return execute(c, out_dir, threads, fields);
        }
        return verify(out_dir, threads);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
