#pragma once

#include "balpot/background.hpp"
#include "balpot/measure.hpp"

namespace balpot {

/// A t-extension (E', sigma, c) of Q(z) = alpha|z|^2 + U^nu(z) with
/// E' = closed disk of radius rho about the origin.
///
/// c + U^sigma equals Q on E' and lies below Q outside it; sigma has mass -t.
struct TExtension {
    SignedMeasureSpec sigma;
    double c = 0.0;
    double rho = 0.0;
    double E_prime_radius = 0.0;
};

/// Smallest admissible disk radius sqrt((t + nu(C)) / (2 alpha)).
double min_radius(const BackgroundPotential& q);

/// Mass of the arc measure on |z| = rho: 2 alpha rho^2 - (t + nu(C)).
double circle_atom_mass(const BackgroundPotential& q, double rho);

/// Builds sigma = nu + (arc measure on |z| = rho) - (2 alpha / pi) m|D(0, rho)
/// and c = alpha rho^2 - (t + nu(C)) log rho.
///
/// Throws RadiusTooSmall when rho < min_radius(q). The circle atom is omitted
/// when its mass is zero.
TExtension build_extension(const BackgroundPotential& q, double rho);

/// Q(z) - (c + U^sigma(z)): zero on E', non-negative elsewhere.
double extension_gap(const TExtension& ext, const BackgroundPotential& q, Complex z);

}  // namespace balpot
