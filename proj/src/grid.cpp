#include "dfflow/grid.hpp"

#include <sstream>

namespace dfflow {

Grid Grid::build(int nx, int ny, const Rect& domain)
{
    if (nx < 1 || ny < 1) {
        std::ostringstream msg;
        msg << "grid needs at least one cell per axis, got " << nx << "x" << ny;
        throw InvalidDimension(msg.str());
    }
    if (!(domain.x1 > domain.x0) || !(domain.y1 > domain.y0)) {
        throw InvalidDimension("grid domain must satisfy x1 > x0 and y1 > y0");
    }
    Grid g;
    g.nx_ = nx;
    g.ny_ = ny;
    g.domain_ = domain;
    g.hx_ = (domain.x1 - domain.x0) / nx;
    g.hy_ = (domain.y1 - domain.y0) / ny;
    return g;
}

CellId Grid::cell_id(std::size_t index) const
{
    return {static_cast<int>(index % nx_), static_cast<int>(index / nx_)};
}

std::size_t Grid::face_index(FaceId f) const
{
    if (f.axis == Axis::X) {
        return static_cast<std::size_t>(f.i) + static_cast<std::size_t>(nx_ + 1) * f.j;
    }
    return x_face_count() + static_cast<std::size_t>(f.i) + static_cast<std::size_t>(nx_) * f.j;
}

FaceId Grid::face_id(std::size_t index) const
{
    if (index < x_face_count()) {
        return {Axis::X, static_cast<int>(index % (nx_ + 1)), static_cast<int>(index / (nx_ + 1))};
    }
    index -= x_face_count();
    return {Axis::Y, static_cast<int>(index % nx_), static_cast<int>(index / nx_)};
}

bool Grid::contains(FaceId f) const
{
    if (f.axis == Axis::X) {
        return f.i >= 0 && f.i <= nx_ && f.j >= 0 && f.j < ny_;
    }
    return f.i >= 0 && f.i < nx_ && f.j >= 0 && f.j <= ny_;
}

bool Grid::is_boundary(FaceId f) const
{
    if (f.axis == Axis::X) {
        return f.i == 0 || f.i == nx_;
    }
    return f.j == 0 || f.j == ny_;
}

FaceCells Grid::cells_of_face(FaceId f) const
{
    FaceCells out;
    if (f.axis == Axis::X) {
        if (f.i > 0) {
            out.has_lower = true;
            out.lower = {f.i - 1, f.j};
        }
        if (f.i < nx_) {
            out.has_upper = true;
            out.upper = {f.i, f.j};
        }
    } else {
        if (f.j > 0) {
            out.has_lower = true;
            out.lower = {f.i, f.j - 1};
        }
        if (f.j < ny_) {
            out.has_upper = true;
            out.upper = {f.i, f.j};
        }
    }
    return out;
}

CellFaces Grid::faces_of_cell(CellId c) const
{
    return {{Axis::X, c.i, c.j}, {Axis::X, c.i + 1, c.j}, {Axis::Y, c.i, c.j}, {Axis::Y, c.i, c.j + 1}};
}

std::array<double, 2> Grid::cell_center(CellId c) const
{
    return {domain_.x0 + (c.i + 0.5) * hx_, domain_.y0 + (c.j + 0.5) * hy_};
}

std::array<double, 2> Grid::face_center(FaceId f) const
{
    if (f.axis == Axis::X) {
        return {domain_.x0 + f.i * hx_, domain_.y0 + (f.j + 0.5) * hy_};
    }
    return {domain_.x0 + (f.i + 0.5) * hx_, domain_.y0 + f.j * hy_};
}

double Grid::face_distance(FaceId f) const
{
    const double h = normal_width(f);
    return is_boundary(f) ? 0.5 * h : h;
}

TransverseStencil Grid::transverse_face_stencil(FaceId f) const
{
    TransverseStencil st;
    auto push = [&](FaceId g) {
        if (contains(g)) {
            st.entries[st.size++] = {g, 0.0};
        }
    };
    if (f.axis == Axis::X) {
        // y-faces bounding the cells left (i-1) and right (i) of the face
        for (int ci : {f.i - 1, f.i}) {
            if (ci < 0 || ci >= nx_) continue;
            push({Axis::Y, ci, f.j});
            push({Axis::Y, ci, f.j + 1});
        }
    } else {
        for (int cj : {f.j - 1, f.j}) {
            if (cj < 0 || cj >= ny_) continue;
            push({Axis::X, f.i, cj});
            push({Axis::X, f.i + 1, cj});
        }
    }
    const double w = st.size > 0 ? 1.0 / st.size : 0.0;
    for (int k = 0; k < st.size; ++k) {
        st.entries[k].weight = w;
    }
    return st;
}

}  // namespace dfflow
