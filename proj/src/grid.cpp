#include "srj/grid.hpp"

#include "srj/errors.hpp"

namespace srj {

GridProblem::GridProblem(std::vector<int> sizes, std::vector<double> spacing, std::vector<double> origin)
    : dims_(static_cast<int>(sizes.size())) {
    if (dims_ < 1 || dims_ > 3) throw InvariantError("GridProblem: 1 to 3 axes supported");
    if (spacing.size() != sizes.size()) throw InvariantError("GridProblem: one spacing per axis");
    if (!origin.empty() && origin.size() != sizes.size())
        throw InvariantError("GridProblem: one origin per axis");
    for (int a = 0; a < dims_; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        if (sizes[ua] < 1) throw InvariantError("GridProblem: empty axis");
        if (!(spacing[ua] > 0.0)) throw InvariantError("GridProblem: spacing must be positive");
        sizes_[ua] = sizes[ua];
        padded_[ua] = sizes[ua] + 2;
        spacing_[ua] = spacing[ua];
        if (!origin.empty()) origin_[ua] = origin[ua];
    }
    strides_[1] = static_cast<std::size_t>(padded_[0]);
    strides_[2] = strides_[1] * static_cast<std::size_t>(padded_[1]);
    count_ = strides_[2] * static_cast<std::size_t>(padded_[2]);
    u_.assign(count_, 0.0);
    s_.assign(count_, 0.0);
    g_.assign(count_, 0.0);
    scratch_.assign(count_, 0.0);
}

void GridProblem::set_constant_stencil(double center, std::array<double, 3> lower, std::array<double, 3> upper) {
    if (center == 0.0) throw InvariantError("GridProblem: zero centre coefficient");
    constant_ = true;
    c0_ = center;
    lo_ = lower;
    hi_ = upper;
    center_.clear();
    for (auto& v : lower_) v.clear();
    for (auto& v : upper_) v.clear();
}

void GridProblem::set_cell_stencil(std::size_t cell, double center, std::array<double, 3> lower,
                                   std::array<double, 3> upper) {
    if (constant_) {
        center_.assign(count_, c0_);
        for (std::size_t a = 0; a < 3; ++a) {
            lower_[a].assign(count_, lo_[a]);
            upper_[a].assign(count_, hi_[a]);
        }
        constant_ = false;
    }
    center_[cell] = center;
    for (std::size_t a = 0; a < 3; ++a) {
        lower_[a][cell] = lower[a];
        upper_[a][cell] = upper[a];
    }
}

double GridProblem::lower(int axis, std::size_t cell) const {
    const auto a = static_cast<std::size_t>(axis);
    return constant_ ? lo_[a] : lower_[a][cell];
}

double GridProblem::upper(int axis, std::size_t cell) const {
    const auto a = static_cast<std::size_t>(axis);
    return constant_ ? hi_[a] : upper_[a][cell];
}

void GridProblem::set_mask(std::vector<char> mask) {
    if (!mask.empty() && mask.size() != count_) throw InvariantError("GridProblem: mask shape mismatch");
    mask_ = std::move(mask);
}

void GridProblem::refresh_ghosts() {
    for (int a = 0; a < dims_; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const std::size_t st = strides_[ua];
        const int n = sizes_[ua];
        // Walk the padded slab orthogonal to axis a (interior range only).
        int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
        for (int b = 0; b < dims_; ++b) {
            lo[b] = 1;
            hi[b] = sizes_[static_cast<std::size_t>(b)];
        }
        lo[a] = hi[a] = 0;
        for (int k = lo[2]; k <= hi[2]; ++k) {
            for (int j = lo[1]; j <= hi[1]; ++j) {
                for (int i = lo[0]; i <= hi[0]; ++i) {
                    const std::size_t base = index(i, j, k);
                    const std::size_t ghost_lo = base;
                    const std::size_t first = base + st;
                    const std::size_t last = base + st * static_cast<std::size_t>(n);
                    const std::size_t ghost_hi = base + st * static_cast<std::size_t>(n + 1);
                    const FaceCondition& fl = faces_[2 * ua];
                    const FaceCondition& fh = faces_[2 * ua + 1];
                    switch (fl.kind) {
                        case FaceKind::dirichlet:
                            u_[ghost_lo] = fl.value_on_face ? 2.0 * g_[ghost_lo] - u_[first] : g_[ghost_lo];
                            break;
                        case FaceKind::neumann: u_[ghost_lo] = u_[first]; break;
                        case FaceKind::periodic: u_[ghost_lo] = u_[last]; break;
                    }
                    switch (fh.kind) {
                        case FaceKind::dirichlet:
                            u_[ghost_hi] = fh.value_on_face ? 2.0 * g_[ghost_hi] - u_[last] : g_[ghost_hi];
                            break;
                        case FaceKind::neumann: u_[ghost_hi] = u_[last]; break;
                        case FaceKind::periodic: u_[ghost_hi] = u_[first]; break;
                    }
                }
            }
        }
    }
    if (inner_rule_) inner_rule_(*this);
}

}  // namespace srj
