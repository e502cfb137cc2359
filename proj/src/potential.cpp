#include "balpot/potential.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <variant>

#include "balpot/background.hpp"
#include "balpot/errors.hpp"

namespace balpot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// log(1/(h*sqrt(di^2+dj^2))) indexed by |di|, |dj|; entry (0,0) holds the
/// self coefficient.
class KernelTable {
public:
    KernelTable(const Grid& grid, int extent) : extent_(extent + 1), values_(extent_ * extent_) {
        const double h = grid.h();
        for (int dj = 0; dj < extent_; ++dj) {
            for (int di = 0; di < extent_; ++di) {
                values_[dj * extent_ + di] =
                    (di == 0 && dj == 0) ? cell_self_coefficient(grid)
                                         : -std::log(h * std::hypot(static_cast<double>(di),
                                                                    static_cast<double>(dj)));
            }
        }
    }

    double operator()(int di, int dj) const {
        return values_[std::abs(dj) * extent_ + std::abs(di)];
    }

private:
    int extent_;
    std::vector<double> values_;
};

struct MassCell {
    int i;
    int j;
    double mass;
};

std::vector<MassCell> mass_cells(const ScalarField& field) {
    std::vector<MassCell> out;
    const Grid& g = field.grid();
    const double area = g.cell_area();
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double v = field(i, j);
            if (v != 0.0) out.push_back({i, j, v * area});
        }
    }
    return out;
}

}  // namespace

double potential_point(Complex a, double mass, Complex z) {
    const double d = std::abs(z - a);
    if (d == 0.0) {
        if (mass > 0.0) return kInf;
        if (mass < 0.0) return -kInf;
        return 0.0;
    }
    return -mass * std::log(d);
}

double potential_uniform_disk(Complex center, double radius, double density, Complex z) {
    const double w = std::abs(z - center);
    const double r2 = radius * radius;
    if (w <= radius) {
        return density * (-0.5 * std::numbers::pi * w * w +
                          0.5 * std::numbers::pi * r2 * (std::log(1.0 / r2) + 1.0));
    }
    return density * std::numbers::pi * r2 * std::log(1.0 / w);
}

double potential_uniform_circle(Complex center, double radius, double total_mass, Complex z) {
    const double w = std::abs(z - center);
    return total_mass * std::log(1.0 / std::max(w, radius));
}

double potential_of_atom(const MeasureAtom& atom, Complex z) {
    if (const auto* p = std::get_if<PointMass>(&atom)) return potential_point(p->location, p->mass, z);
    if (const auto* d = std::get_if<UniformDisk>(&atom)) {
        return potential_uniform_disk(d->center, d->radius, d->density, z);
    }
    if (const auto* c = std::get_if<UniformCircle>(&atom)) {
        return potential_uniform_circle(c->center, c->radius, c->total_mass, z);
    }
    return potential_of_field(std::get<GridDensity>(atom).values, z);
}

double potential_of_spec(const SignedMeasureSpec& spec, Complex z) {
    double u = 0.0;
    for (const auto& a : spec.positive_atoms) u += potential_of_atom(a, z);
    for (const auto& a : spec.negative_atoms) u -= potential_of_atom(a, z);
    return u;
}

std::vector<PotentialSample> sample_potential(const SignedMeasureSpec& spec,
                                              std::span<const Complex> points) {
    std::vector<PotentialSample> out;
    out.reserve(points.size());
    for (Complex z : points) out.push_back({z, potential_of_spec(spec, z)});
    return out;
}

double cell_self_coefficient(const Grid& grid) {
    const double a = grid.h() / std::sqrt(std::numbers::pi);
    return std::log(1.0 / a) + 0.25;
}

double potential_of_field(const ScalarField& field, Complex z) {
    const Grid& g = field.grid();
    const auto home = g.cell_of(z);
    const double area = g.cell_area();
    double u = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double v = field(i, j);
            if (v == 0.0) continue;
            const double m = v * area;
            if (home && home->first == i && home->second == j) {
                u += m * cell_self_coefficient(g);
            } else {
                u -= m * std::log(std::abs(z - g.center(i, j)));
            }
        }
    }
    return u;
}

std::vector<double> potential_at_cells(const ScalarField& field,
                                       std::span<const std::pair<int, int>> cells) {
    const Grid& g = field.grid();
    const KernelTable kernel(g, g.n);
    const auto sources = mass_cells(field);
    std::vector<double> out(cells.size(), 0.0);
    for (std::size_t p = 0; p < cells.size(); ++p) {
        const auto [pi, pj] = cells[p];
        double u = 0.0;
        for (const auto& s : sources) u += s.mass * kernel(s.i - pi, s.j - pj);
        out[p] = u;
    }
    return out;
}

double logarithmic_energy(const ScalarField& field) {
    const Grid& g = field.grid();
    const KernelTable kernel(g, g.n);
    const auto cells = mass_cells(field);
    double diagonal = 0.0;
    double off = 0.0;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const auto& a = cells[k];
        diagonal += a.mass * a.mass;
        double row = 0.0;
        for (std::size_t l = k + 1; l < cells.size(); ++l) {
            const auto& b = cells[l];
            row += b.mass * kernel(b.i - a.i, b.j - a.j);
        }
        off += a.mass * row;
    }
    return diagonal * cell_self_coefficient(g) + 2.0 * off;
}

double integrate_background(const ScalarField& field, const BackgroundPotential& q) {
    const Grid& g = field.grid();
    const double area = g.cell_area();
    double s = 0.0;
    for (int j = 0; j < g.n; ++j) {
        for (int i = 0; i < g.n; ++i) {
            const double v = field(i, j);
            if (v == 0.0) continue;
            const double qv = q(g.center(i, j));
            if (!std::isfinite(qv)) {
                throw QInfinite("background potential is infinite at a mass-carrying cell center");
            }
            s += qv * v * area;
        }
    }
    return s;
}

double weighted_energy(const ScalarField& field, const BackgroundPotential& q) {
    return logarithmic_energy(field) + 2.0 * integrate_background(field, q);
}

}  // namespace balpot
