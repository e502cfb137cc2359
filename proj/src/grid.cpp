#include "balpot/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "balpot/errors.hpp"

namespace balpot {

Grid::Grid(int n_cells, double half_width) : n(n_cells), L(half_width) {
    if (n < 2 || !(L > 0.0) || !std::isfinite(L)) {
        throw Error("grid needs n >= 2 and a positive finite half-width");
    }
}

std::optional<std::pair<int, int>> Grid::cell_of(Complex z) const {
    const double fx = (z.real() + L) / h();
    const double fy = (z.imag() + L) / h();
    if (!(fx >= 0.0 && fy >= 0.0 && fx < n && fy < n)) {
        return std::nullopt;
    }
    return std::pair{static_cast<int>(std::floor(fx)),
                     static_cast<int>(std::floor(fy))};
}

int Grid::layer(int i, int j) const {
    return std::min({i, j, n - 1 - i, n - 1 - j});
}

ScalarField::ScalarField(const Grid& grid, double fill)
    : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw Error("field size does not match grid");
    }
}

double ScalarField::integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * grid_.cell_area();
}

double ScalarField::max() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double ScalarField::min() const {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
    if (!(grid_ == other.grid_)) throw Error("field grids differ");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
    if (!(grid_ == other.grid_)) throw Error("field grids differ");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid() == b.grid())) throw Error("field grids differ");
    double m = 0.0;
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t k = 0; k < va.size(); ++k) m = std::max(m, std::abs(va[k] - vb[k]));
    return m;
}

std::size_t CellMask::count() const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), 1));
}

CellMask dilate(const CellMask& mask, int k) {
    CellMask out(mask.grid);
    const int n = mask.grid.n;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            if (!mask(i, j)) continue;
            for (int dj = -k; dj <= k; ++dj) {
                for (int di = -k; di <= k; ++di) {
                    const int ii = i + di, jj = j + dj;
                    if (ii >= 0 && jj >= 0 && ii < n && jj < n) out.at(ii, jj) = 1;
                }
            }
        }
    }
    return out;
}

CellMask erode(const CellMask& mask, int k) {
    CellMask complement(mask.grid);
    for (std::size_t c = 0; c < mask.cells.size(); ++c) complement.cells[c] = mask.cells[c] ? 0 : 1;
    CellMask grown = dilate(complement, k);
    CellMask out(mask.grid);
    const int n = mask.grid.n;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            // cells within k of the grid edge have unknown neighbours; treat the
            // outside of the grid as complement
            const bool near_edge = mask.grid.layer(i, j) < k;
            out.at(i, j) = (mask(i, j) && !grown(i, j) && !near_edge) ? 1 : 0;
        }
    }
    return out;
}

}  // namespace balpot
