#pragma once

#include <string>
#include <vector>

#include "dfflow/scenario.hpp"

namespace dfflow {

inline constexpr const char* kTableHeader =
    "scheme,gamma,L,omega,N,k,beta,tau,avg_iters,converged,wall_s,condest_mean";

/// Non-converged rows leave avg_iters empty; a NaN condest is written empty.
void emit_table(const std::vector<TableRow>& rows, const std::string& path);
std::string format_table(const std::vector<TableRow>& rows);
/// Reads a file produced by emit_table.
std::vector<TableRow> read_table(const std::string& path);
std::vector<TableRow> parse_table(const std::string& text);

/// VTK legacy ASCII structured points at cell centers: "pressure" and
/// "log10_speed" with |u| averaged from faces; |u| below `floor` is clamped.
void emit_field(const Grid& grid, const State& state, const std::string& path, double floor = 1e-300);
std::string format_field(const Grid& grid, const State& state, double floor = 1e-300);

/// Cell-centered |u| from the two faces along each axis.
std::vector<double> cell_speeds(const Grid& grid, const State& state);

}  // namespace dfflow
