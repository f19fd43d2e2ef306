#pragma once

// Structured cell-centred grids in one to three dimensions with one ghost
// layer per face, a five/seven-point stencil and per-face boundary rules.
//
// Storage is a padded array: axis a has size(a) interior cells at padded
// indices 1..size(a) and ghosts at 0 and size(a)+1. Axis 0 is contiguous.
// The discrete equation at an interior cell c reads
//
//     center(c) u(c) + sum_a [ lower_a(c) u(c - e_a) + upper_a(c) u(c + e_a) ] = source(c).

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace srj {

enum class FaceKind { dirichlet, neumann, periodic };

struct FaceCondition {
    FaceKind kind = FaceKind::neumann;
    /// Dirichlet only. True: the prescribed value sits on the face between the
    /// ghost and the first interior cell (ghost = 2 g - u_adjacent). False: the
    /// value is assigned to the ghost itself.
    bool value_on_face = true;
};

class GridProblem {
public:
    /// sizes: interior cells per axis; spacing and origin (lower face
    /// coordinate) per axis. All faces start as homogeneous Neumann.
    GridProblem(std::vector<int> sizes, std::vector<double> spacing, std::vector<double> origin = {});

    int dims() const noexcept { return dims_; }
    int size(int axis) const { return sizes_[static_cast<std::size_t>(axis)]; }
    double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
    /// Cell-centre coordinate of padded index i on an axis (i = 0 is the ghost).
    double coordinate(int axis, int i) const {
        return origin_[static_cast<std::size_t>(axis)] + (i - 0.5) * spacing_[static_cast<std::size_t>(axis)];
    }

    std::size_t padded_count() const noexcept { return count_; }
    std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
    /// Padded (i, j, k); unused trailing axes must be 0.
    std::size_t index(int i, int j = 0, int k = 0) const {
        return static_cast<std::size_t>(i) + strides_[1] * static_cast<std::size_t>(j) +
               strides_[2] * static_cast<std::size_t>(k);
    }
    /// Padded extent of an axis (size + 2 when used, 1 otherwise).
    int padded_size(int axis) const { return padded_[static_cast<std::size_t>(axis)]; }

    std::vector<double>& field() noexcept { return u_; }
    const std::vector<double>& field() const noexcept { return u_; }
    std::vector<double>& source() noexcept { return s_; }
    const std::vector<double>& source() const noexcept { return s_; }
    /// Dirichlet data, read at ghost positions only.
    std::vector<double>& boundary_values() noexcept { return g_; }
    const std::vector<double>& boundary_values() const noexcept { return g_; }

    /// Same coefficients in every cell; enables the fast sweep kernels.
    void set_constant_stencil(double center, std::array<double, 3> lower, std::array<double, 3> upper);
    /// Coefficients of one cell. Switches to per-cell storage on first use,
    /// seeded with the current constant coefficients.
    void set_cell_stencil(std::size_t cell, double center, std::array<double, 3> lower,
                          std::array<double, 3> upper);
    bool constant_stencil() const noexcept { return constant_; }
    double center(std::size_t cell) const { return constant_ ? c0_ : center_[cell]; }
    double lower(int axis, std::size_t cell) const;
    double upper(int axis, std::size_t cell) const;
    /// Raw coefficient storage for the sweep kernels; per-cell arrays are
    /// empty while the stencil is constant.
    const std::array<double, 3>& constant_lower() const noexcept { return lo_; }
    const std::array<double, 3>& constant_upper() const noexcept { return hi_; }
    const std::vector<double>& center_array() const noexcept { return center_; }
    const std::vector<double>& lower_array(int axis) const { return lower_[static_cast<std::size_t>(axis)]; }
    const std::vector<double>& upper_array(int axis) const { return upper_[static_cast<std::size_t>(axis)]; }

    FaceCondition& face(int axis, int side) { return faces_[static_cast<std::size_t>(2 * axis + side)]; }
    const FaceCondition& face(int axis, int side) const {
        return faces_[static_cast<std::size_t>(2 * axis + side)];
    }

    /// Padded boolean array, true where the equation is solved. Cells outside
    /// keep whatever value they hold.
    void set_mask(std::vector<char> mask);
    bool has_mask() const noexcept { return !mask_.empty(); }
    const std::vector<char>& mask() const noexcept { return mask_; }
    bool active(std::size_t cell) const { return mask_.empty() || mask_[cell] != 0; }

    /// Extra rule applied after every ghost refresh, e.g. pinning cells near
    /// a coordinate singularity.
    void set_inner_rule(std::function<void(GridProblem&)> rule) { inner_rule_ = std::move(rule); }

    /// Write every ghost from the face conditions, then run the inner rule.
    void refresh_ghosts();

    /// Calls f(cell, i, j, k) for every interior cell in storage order.
    template <class F>
    void for_each_interior(F&& f) const {
        const int k0 = dims_ > 2 ? 1 : 0, k1 = dims_ > 2 ? sizes_[2] : 0;
        const int j0 = dims_ > 1 ? 1 : 0, j1 = dims_ > 1 ? sizes_[1] : 0;
        for (int k = k0; k <= k1; ++k)
            for (int j = j0; j <= j1; ++j)
                for (int i = 1; i <= sizes_[0]; ++i) f(index(i, j, k), i, j, k);
    }

    /// Scratch buffer for two-buffer sweeps, kept equal in shape to field().
    std::vector<double>& scratch() noexcept { return scratch_; }

private:
    int dims_;
    std::array<int, 3> sizes_{1, 1, 1};
    std::array<int, 3> padded_{1, 1, 1};
    std::array<double, 3> spacing_{1.0, 1.0, 1.0};
    std::array<double, 3> origin_{0.0, 0.0, 0.0};
    std::array<std::size_t, 3> strides_{1, 0, 0};
    std::size_t count_;
    std::vector<double> u_, s_, g_, scratch_;

    bool constant_ = true;
    double c0_ = 1.0;
    std::array<double, 3> lo_{0.0, 0.0, 0.0}, hi_{0.0, 0.0, 0.0};
    std::vector<double> center_;
    std::array<std::vector<double>, 3> lower_, upper_;

    std::array<FaceCondition, 6> faces_{};
    std::vector<char> mask_;
    std::function<void(GridProblem&)> inner_rule_;
};

}  // namespace srj
