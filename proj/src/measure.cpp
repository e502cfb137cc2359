#include "balpot/measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "balpot/errors.hpp"

namespace balpot {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr int kDiskSubsamples = 4;
constexpr int kCircleOversample = 8;

void splat(ScalarField& field, Complex z, double mass) {
    const Grid& g = field.grid();
    auto cell = g.cell_of(z);
    if (!cell) throw SupportOutsideGrid("point mass lies outside the grid");
    field(cell->first, cell->second) += mass / g.cell_area();
}

void splat_bilinear(ScalarField& field, Complex z, double mass) {
    const Grid& g = field.grid();
    const double fx = (z.real() + g.L) / g.h() - 0.5;
    const double fy = (z.imag() + g.L) / g.h() - 0.5;
    const int i0 = static_cast<int>(std::floor(fx));
    const int j0 = static_cast<int>(std::floor(fy));
    const double wx = fx - i0;
    const double wy = fy - j0;
    if (i0 < 0 || j0 < 0 || i0 + 1 >= g.n || j0 + 1 >= g.n) {
        throw SupportOutsideGrid("point mass too close to the grid edge");
    }
    const double d = mass / g.cell_area();
    field(i0, j0) += d * (1.0 - wx) * (1.0 - wy);
    field(i0 + 1, j0) += d * wx * (1.0 - wy);
    field(i0, j0 + 1) += d * (1.0 - wx) * wy;
    field(i0 + 1, j0 + 1) += d * wx * wy;
}

// Triangular-shaped-cloud weights: 3x3 stencil around the nearest cell center,
// per-axis weights 3/4 - d^2 and (1/2 +- d)^2 / 2. Reproduces mass, first
// moment and an isotropic second moment h^2/4 for any sub-cell offset d.
void splat_tsc(ScalarField& field, Complex z, double mass) {
    const Grid& g = field.grid();
    const double fx = (z.real() + g.L) / g.h() - 0.5;
    const double fy = (z.imag() + g.L) / g.h() - 0.5;
    const int ic = static_cast<int>(std::lround(fx));
    const int jc = static_cast<int>(std::lround(fy));
    if (ic < 1 || jc < 1 || ic + 1 >= g.n || jc + 1 >= g.n) {
        throw SupportOutsideGrid("point mass too close to the grid edge");
    }
    auto weights = [](double d) {
        return std::array<double, 3>{0.5 * (0.5 - d) * (0.5 - d), 0.75 - d * d,
                                     0.5 * (0.5 + d) * (0.5 + d)};
    };
    const auto wx = weights(fx - ic);
    const auto wy = weights(fy - jc);
    const double d = mass / g.cell_area();
    for (int b = 0; b < 3; ++b) {
        for (int a = 0; a < 3; ++a) field(ic - 1 + a, jc - 1 + b) += d * wx[a] * wy[b];
    }
}

void rasterize_disk(ScalarField& field, const UniformDisk& disk) {
    const Grid& g = field.grid();
    const double h = g.h();
    const double r = disk.radius;
    const double half_diag = h / std::numbers::sqrt2;

    std::vector<std::pair<std::size_t, double>> boundary;
    double interior = 0.0;
    double boundary_fraction = 0.0;
    std::vector<double> fraction(g.size(), 0.0);

    const int i_lo = std::max(0, static_cast<int>(std::floor((disk.center.real() - r + g.L) / h)) - 1);
    const int i_hi = std::min(g.n - 1, static_cast<int>(std::floor((disk.center.real() + r + g.L) / h)) + 1);
    const int j_lo = std::max(0, static_cast<int>(std::floor((disk.center.imag() - r + g.L) / h)) - 1);
    const int j_hi = std::min(g.n - 1, static_cast<int>(std::floor((disk.center.imag() + r + g.L) / h)) + 1);

    for (int j = j_lo; j <= j_hi; ++j) {
        for (int i = i_lo; i <= i_hi; ++i) {
            const double d = std::abs(g.center(i, j) - disk.center);
            if (d + half_diag <= r) {
                fraction[g.index(i, j)] = 1.0;
                interior += 1.0;
            } else if (d - half_diag < r) {
                int hits = 0;
                for (int sj = 0; sj < kDiskSubsamples; ++sj) {
                    for (int si = 0; si < kDiskSubsamples; ++si) {
                        const Complex p{g.x(i) + ((si + 0.5) / kDiskSubsamples - 0.5) * h,
                                        g.y(j) + ((sj + 0.5) / kDiskSubsamples - 0.5) * h};
                        if (std::abs(p - disk.center) < r) ++hits;
                    }
                }
                const double f = static_cast<double>(hits) / (kDiskSubsamples * kDiskSubsamples);
                if (f > 0.0) {
                    boundary.emplace_back(g.index(i, j), f);
                    boundary_fraction += f;
                }
            }
        }
    }

    const double exact_cells = std::numbers::pi * r * r / g.cell_area();
    if (boundary_fraction <= 0.0) {
        if (interior == 0.0) {
            // disk smaller than the sampling resolution
            splat(field, disk.center, disk.mass());
            return;
        }
    } else {
        const double scale = (exact_cells - interior) / boundary_fraction;
        if (scale > 0.0) {
            for (auto& [k, f] : boundary) fraction[k] = f * scale;
        }
    }
    auto out = field.values();
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (fraction[k] != 0.0) out[k] += disk.density * fraction[k];
    }
}

void rasterize_circle(ScalarField& field, const UniformCircle& circle) {
    const int samples = kCircleOversample * field.grid().n;
    const double piece = circle.total_mass / samples;
    for (int k = 0; k < samples; ++k) {
        const double theta = 2.0 * std::numbers::pi * (k + 0.5) / samples;
        splat(field, circle.center + std::polar(circle.radius, theta), piece);
    }
}

void rasterize_grid_density(ScalarField& field, const GridDensity& density) {
    const Grid& src = density.values.grid();
    if (src == field.grid()) {
        field += density.values;
        return;
    }
    for (int j = 0; j < src.n; ++j) {
        for (int i = 0; i < src.n; ++i) {
            const double v = density.values(i, j);
            if (v != 0.0) splat(field, src.center(i, j), v * src.cell_area());
        }
    }
}

}  // namespace

double UniformDisk::mass() const {
    return density * std::numbers::pi * radius * radius;
}

double atom_mass(const MeasureAtom& atom) {
    return std::visit(overloaded{
                          [](const PointMass& p) { return p.mass; },
                          [](const UniformDisk& d) { return d.mass(); },
                          [](const UniformCircle& c) { return c.total_mass; },
                          [](const GridDensity& g) { return g.values.integral(); },
                      },
                      atom);
}

double atom_bounding_radius(const MeasureAtom& atom) {
    return std::visit(overloaded{
                          [](const PointMass& p) { return std::abs(p.location); },
                          [](const UniformDisk& d) { return std::abs(d.center) + d.radius; },
                          [](const UniformCircle& c) { return std::abs(c.center) + c.radius; },
                          [](const GridDensity& gd) {
                              const Grid& g = gd.values.grid();
                              const double half = 0.5 * g.h();
                              double r = 0.0;
                              for (int j = 0; j < g.n; ++j) {
                                  for (int i = 0; i < g.n; ++i) {
                                      if (gd.values(i, j) == 0.0) continue;
                                      const double fx = std::abs(g.x(i)) + half;
                                      const double fy = std::abs(g.y(j)) + half;
                                      r = std::max(r, std::hypot(fx, fy));
                                  }
                              }
                              return r;
                          },
                      },
                      atom);
}

void validate_atom(const MeasureAtom& atom) {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    std::visit(overloaded{
                   [&](const PointMass& p) {
                       if (!positive(p.mass)) throw Error("point mass must be positive");
                   },
                   [&](const UniformDisk& d) {
                       if (!positive(d.radius) || !positive(d.density)) {
                           throw Error("disk radius and density must be positive");
                       }
                   },
                   [&](const UniformCircle& c) {
                       if (!positive(c.radius) || !positive(c.total_mass)) {
                           throw Error("circle radius and mass must be positive");
                       }
                   },
                   [&](const GridDensity& g) {
                       for (double v : g.values.values()) {
                           if (!(v >= 0.0) || !std::isfinite(v)) {
                               throw Error("grid density must be finite and non-negative");
                           }
                       }
                   },
               },
               atom);
}

void SignedMeasureSpec::validate() const {
    for (const auto& a : positive_atoms) validate_atom(a);
    for (const auto& a : negative_atoms) validate_atom(a);
}

SignedMeasureSpec merge(const SignedMeasureSpec& a, const SignedMeasureSpec& b) {
    SignedMeasureSpec out = a;
    out.positive_atoms.insert(out.positive_atoms.end(), b.positive_atoms.begin(), b.positive_atoms.end());
    out.negative_atoms.insert(out.negative_atoms.end(), b.negative_atoms.begin(), b.negative_atoms.end());
    return out;
}

double total_mass(const SignedMeasureSpec& spec) {
    double m = 0.0;
    for (const auto& a : spec.positive_atoms) m += atom_mass(a);
    for (const auto& a : spec.negative_atoms) m -= atom_mass(a);
    return m;
}

double total_abs_mass(const SignedMeasureSpec& spec) {
    double m = 0.0;
    for (const auto& a : spec.positive_atoms) m += atom_mass(a);
    for (const auto& a : spec.negative_atoms) m += atom_mass(a);
    return m;
}

double support_bounding_radius(const SignedMeasureSpec& spec) {
    double r = 0.0;
    for (const auto& a : spec.positive_atoms) r = std::max(r, atom_bounding_radius(a));
    for (const auto& a : spec.negative_atoms) r = std::max(r, atom_bounding_radius(a));
    return r;
}

ScalarField rasterize_atom(const MeasureAtom& atom, const Grid& grid, const RasterOptions& options) {
    ScalarField field(grid);
    std::visit(overloaded{
                   [&](const PointMass& p) {
                       if (options.point_splat == PointSplat::bilinear) {
                           splat_bilinear(field, p.location, p.mass);
                       } else if (options.point_splat == PointSplat::tsc) {
                           splat_tsc(field, p.location, p.mass);
                       } else {
                           splat(field, p.location, p.mass);
                       }
                   },
                   [&](const UniformDisk& d) { rasterize_disk(field, d); },
                   [&](const UniformCircle& c) { rasterize_circle(field, c); },
                   [&](const GridDensity& g) { rasterize_grid_density(field, g); },
               },
               atom);
    return field;
}

ScalarField rasterize(const SignedMeasureSpec& spec, const Grid& grid, const RasterOptions& options) {
    spec.validate();
    const double reach = support_bounding_radius(spec);
    const double limit = grid.L - 2.0 * grid.h();
    if (!(reach < limit)) {
        std::ostringstream msg;
        msg << "measure support radius " << reach << " does not fit inside grid half-width "
            << grid.L << " minus two cells";
        throw SupportOutsideGrid(msg.str());
    }
    ScalarField field(grid);
    for (const auto& a : spec.positive_atoms) field += rasterize_atom(a, grid, options);
    for (const auto& a : spec.negative_atoms) field -= rasterize_atom(a, grid, options);
    return field;
}

ScalarField positive_part(const ScalarField& f) {
    ScalarField out(f.grid());
    auto src = f.values();
    auto dst = out.values();
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = std::max(src[k], 0.0);
    return out;
}

ScalarField negative_part(const ScalarField& f) {
    ScalarField out(f.grid());
    auto src = f.values();
    auto dst = out.values();
    for (std::size_t k = 0; k < src.size(); ++k) dst[k] = std::max(-src[k], 0.0);
    return out;
}

}  // namespace balpot
