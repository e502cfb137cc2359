#pragma once

#include <span>
#include <vector>

#include "balpot/grid.hpp"
#include "balpot/measure.hpp"

namespace balpot {

struct BackgroundPotential;

/// A logarithmic potential value U(point), natural log.
struct PotentialSample {
    Complex point;
    double value = 0.0;
};

/// mass * log(1/|z - a|); +inf at z == a for positive mass.
double potential_point(Complex a, double mass, Complex z);

/// Potential of `density` times Lebesgue measure on D(center, radius).
double potential_uniform_disk(Complex center, double radius, double density, Complex z);

/// Potential of arc-length measure on |w - center| = radius with the given total mass.
double potential_uniform_circle(Complex center, double radius, double total_mass, Complex z);

double potential_of_atom(const MeasureAtom& atom, Complex z);

/// Signed superposition of atom potentials.
double potential_of_spec(const SignedMeasureSpec& spec, Complex z);

std::vector<PotentialSample> sample_potential(const SignedMeasureSpec& spec,
                                              std::span<const Complex> points);

/// Self term per unit mass for a cell treated as the equal-area disk of
/// radius a = h / sqrt(pi): log(1/a) + 1/4.
double cell_self_coefficient(const Grid& grid);

/// Cell-center quadrature of the potential of a density field at z.
///
/// When z falls in a mass-carrying cell that cell contributes
/// mass * cell_self_coefficient instead of the point-kernel value.
double potential_of_field(const ScalarField& field, Complex z);

/// potential_of_field evaluated at the centers of the listed cells.
///
/// Uses a precomputed offset-indexed kernel table, so it agrees with
/// potential_of_field at cell centers up to rounding.
std::vector<double> potential_at_cells(const ScalarField& field,
                                       std::span<const std::pair<int, int>> cells);

/// Discrete logarithmic energy: sum over ordered cell pairs of
/// m_k m_l log(1/|c_k - c_l|), diagonal replaced by m_k^2 * cell_self_coefficient.
double logarithmic_energy(const ScalarField& field);

/// I(mu) + 2 * sum Q(c_k) m_k. Throws QInfinite when Q is infinite at a
/// mass-carrying cell center.
double weighted_energy(const ScalarField& field, const BackgroundPotential& q);

/// sum Q(c_k) m_k over mass-carrying cells.
double integrate_background(const ScalarField& field, const BackgroundPotential& q);

}  // namespace balpot
