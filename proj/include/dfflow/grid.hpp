#pragma once

// Staggered Cartesian mesh: pressures live at cell centers, normal velocity
// components at face midpoints. Every face (boundary faces included) carries a
// velocity value; boundary faces couple to one cell and to the Dirichlet data.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dfflow {

struct Rect {
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

enum class Axis { X, Y };

struct CellId {
    int i = 0, j = 0;
    friend bool operator==(const CellId&, const CellId&) = default;
};

/// A face is identified by the axis of its normal and the integer position of
/// its lower-left corner in face index space. X-faces: [0,nx] x [0,ny),
/// y-faces: [0,nx) x [0,ny].
struct FaceId {
    Axis axis = Axis::X;
    int i = 0, j = 0;
    friend bool operator==(const FaceId&, const FaceId&) = default;
};

struct StencilEntry {
    FaceId face;
    double weight;
};

/// Up to four transverse neighbors of a face.
struct TransverseStencil {
    std::array<StencilEntry, 4> entries{};
    int size = 0;

    const StencilEntry* begin() const { return entries.data(); }
    const StencilEntry* end() const { return entries.data() + size; }
};

/// The (at most two) cells adjacent to a face; `lower` lies on the -axis side.
struct FaceCells {
    bool has_lower = false, has_upper = false;
    CellId lower{}, upper{};
};

/// West, east, south, north faces of a cell.
struct CellFaces {
    FaceId west, east, south, north;
};

class InvalidDimension : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class Grid {
public:
    static Grid build(int nx, int ny, const Rect& domain);

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    const Rect& domain() const { return domain_; }
    double hx() const { return hx_; }
    double hy() const { return hy_; }
    double cell_volume() const { return hx_ * hy_; }

    std::size_t cell_count() const { return static_cast<std::size_t>(nx_) * ny_; }
    std::size_t x_face_count() const { return static_cast<std::size_t>(nx_ + 1) * ny_; }
    std::size_t y_face_count() const { return static_cast<std::size_t>(nx_) * (ny_ + 1); }
    std::size_t face_count() const { return x_face_count() + y_face_count(); }
    std::size_t interior_x_face_count() const { return static_cast<std::size_t>(nx_ - 1) * ny_; }
    std::size_t interior_y_face_count() const { return static_cast<std::size_t>(nx_) * (ny_ - 1); }

    // Cells are x-fastest; faces are stored x-faces first, then y-faces, each
    // block x-fastest.
    std::size_t cell_index(CellId c) const { return static_cast<std::size_t>(c.i) + static_cast<std::size_t>(nx_) * c.j; }
    CellId cell_id(std::size_t index) const;
    std::size_t face_index(FaceId f) const;
    FaceId face_id(std::size_t index) const;

    bool contains(CellId c) const { return c.i >= 0 && c.i < nx_ && c.j >= 0 && c.j < ny_; }
    bool contains(FaceId f) const;
    bool is_boundary(FaceId f) const;

    FaceCells cells_of_face(FaceId f) const;
    CellFaces faces_of_cell(CellId c) const;

    std::array<double, 2> cell_center(CellId c) const;
    std::array<double, 2> face_center(FaceId f) const;

    /// Center-to-center distance across an interior face, center-to-face
    /// distance (half a cell) on a boundary face.
    double face_distance(FaceId f) const;
    /// Length of the face (hy for x-faces, hx for y-faces).
    double face_length(FaceId f) const { return f.axis == Axis::X ? hy_ : hx_; }
    /// Cell width along the face normal.
    double normal_width(FaceId f) const { return f.axis == Axis::X ? hx_ : hy_; }

    /// Nearest faces of the orthogonal axis around `f` with averaging weights
    /// summing to one. Missing neighbors outside the mesh are dropped and the
    /// remaining weights renormalized.
    TransverseStencil transverse_face_stencil(FaceId f) const;

private:
    Grid() = default;

    int nx_ = 0, ny_ = 0;
    Rect domain_{};
    double hx_ = 0.0, hy_ = 0.0;
};

}  // namespace dfflow
