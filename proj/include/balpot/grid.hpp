#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace balpot {

using Complex = std::complex<double>;

/// Uniform n x n cell lattice on the square [-L, L]^2.
///
/// Cell (i, j) has center (-L + (i + 1/2) h, -L + (j + 1/2) h) with h = 2L/n;
/// i indexes x, j indexes y. Storage is row-major in j.
struct Grid {
    int n = 0;
    double L = 0.0;

    Grid() = default;
    Grid(int n_cells, double half_width);

    double h() const { return 2.0 * L / n; }
    double cell_area() const { return h() * h(); }
    std::size_t size() const { return static_cast<std::size_t>(n) * n; }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * n + i;
    }
    double x(int i) const { return -L + (i + 0.5) * h(); }
    double y(int j) const { return -L + (j + 0.5) * h(); }
    Complex center(int i, int j) const { return {x(i), y(j)}; }

    /// Cell whose half-open box [x0, x0+h) x [y0, y0+h) contains z.
    std::optional<std::pair<int, int>> cell_of(Complex z) const;

    /// Distance (in cells) from (i, j) to the nearest grid edge layer; 0 on the
    /// outermost layer.
    int layer(int i, int j) const;

    bool operator==(const Grid& other) const = default;
};

/// Real values attached to the cells of a Grid.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& grid, double fill = 0.0);
    ScalarField(const Grid& grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    int n() const { return grid_.n; }

    double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    /// Sum of value * h^2 over all cells.
    double integral() const;
    double max() const;
    double min() const;
    double max_abs() const;

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double s);

private:
    Grid grid_;
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Max-norm distance between two fields on the same grid.
double max_abs_diff(const ScalarField& a, const ScalarField& b);

/// Boolean cell mask on a grid.
struct CellMask {
    Grid grid;
    std::vector<char> cells;

    CellMask() = default;
    explicit CellMask(const Grid& g) : grid(g), cells(g.size(), 0) {}

    bool operator()(int i, int j) const { return cells[grid.index(i, j)] != 0; }
    char& at(int i, int j) { return cells[grid.index(i, j)]; }
    std::size_t count() const;
    double area() const { return static_cast<double>(count()) * grid.cell_area(); }
};

/// Cells within `k` steps (Chebyshev metric) of a set cell.
CellMask dilate(const CellMask& mask, int k);
/// Cells of `mask` whose Chebyshev distance to the complement is > k.
CellMask erode(const CellMask& mask, int k);

}  // namespace balpot
