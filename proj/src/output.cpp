#include "dfflow/output.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dfflow {

namespace {

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s)
{
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters in '" + s + "'");
    return v;
}

}  // namespace

std::string format_table(const std::vector<TableRow>& rows)
{
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    out << kTableHeader << '\n';
    for (const TableRow& r : rows) {
        out << r.scheme << ',' << r.gamma << ',' << r.L << ',' << r.omega << ',' << r.N << ',' << r.k << ','
            << r.beta << ',' << r.tau << ',';
        if (r.converged) out << r.avg_iters;
        out << ',' << (r.converged ? "true" : "false") << ',' << r.wall_s << ',';
        if (!std::isnan(r.condest_mean)) out << r.condest_mean;
        out << '\n';
    }
    return out.str();
}

void emit_table(const std::vector<TableRow>& rows, const std::string& path)
{
    write_file(path, format_table(rows));
}

std::vector<TableRow> parse_table(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kTableHeader) throw std::invalid_argument("missing table header");
    std::vector<TableRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != 12) throw std::invalid_argument("expected 12 columns in '" + line + "'");
        TableRow r;
        r.scheme = f[0];
        r.gamma = parse_double(f[1]);
        r.L = parse_double(f[2]);
        r.omega = parse_double(f[3]);
        r.N = std::stoi(f[4]);
        r.k = parse_double(f[5]);
        r.beta = parse_double(f[6]);
        r.tau = parse_double(f[7]);
        if (f[9] != "true" && f[9] != "false") throw std::invalid_argument("bad converged flag '" + f[9] + "'");
        r.converged = f[9] == "true";
        r.avg_iters = f[8].empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(f[8]);
        r.wall_s = parse_double(f[10]);
        r.condest_mean = f[11].empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(f[11]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<TableRow> read_table(const std::string& path)
{
    return parse_table(read_file(path));
}

std::vector<double> cell_speeds(const Grid& grid, const State& state)
{
    std::vector<double> speed(grid.cell_count());
    for (std::size_t c = 0; c < speed.size(); ++c) {
        const CellFaces f = grid.faces_of_cell(grid.cell_id(c));
        const double ux = 0.5 * (state.u[grid.face_index(f.west)] + state.u[grid.face_index(f.east)]);
        const double uy = 0.5 * (state.u[grid.face_index(f.south)] + state.u[grid.face_index(f.north)]);
        speed[c] = std::hypot(ux, uy);
    }
    return speed;
}

std::string format_field(const Grid& grid, const State& state, double floor)
{
    if (state.p.size() != grid.cell_count() || state.u.size() != grid.face_count()) {
        throw std::invalid_argument("state does not match the grid");
    }
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    const Rect& d = grid.domain();
    out << "# vtk DataFile Version 3.0\n"
        << "dfflow cell fields\n"
        << "ASCII\n"
        << "DATASET STRUCTURED_POINTS\n"
        << "DIMENSIONS " << grid.nx() << ' ' << grid.ny() << " 1\n"
        << "ORIGIN " << d.x0 + 0.5 * grid.hx() << ' ' << d.y0 + 0.5 * grid.hy() << " 0\n"
        << "SPACING " << grid.hx() << ' ' << grid.hy() << " 1\n"
        << "POINT_DATA " << grid.cell_count() << '\n';
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (double p : state.p) out << p << '\n';
    out << "SCALARS log10_speed double 1\nLOOKUP_TABLE default\n";
    for (double s : cell_speeds(grid, state)) out << std::log10(std::max(s, floor)) << '\n';
    return out.str();
}

void emit_field(const Grid& grid, const State& state, const std::string& path, double floor)
{
    write_file(path, format_field(grid, state, floor));
}

}  // namespace dfflow
