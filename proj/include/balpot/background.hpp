#pragma once

#include <vector>

#include "balpot/grid.hpp"
#include "balpot/measure.hpp"

namespace balpot {

/// Q(z) = alpha |z|^2 + U^nu(z) with total mass parameter t.
///
/// nu holds positive point, disk and circle atoms only, so U^nu has a closed
/// form everywhere.
struct BackgroundPotential {
    double alpha = 0.0;
    std::vector<MeasureAtom> nu;
    double t = 0.0;

    /// Throws Error on alpha <= 0, t <= 0, invalid atoms or grid-density atoms.
    void validate() const;

    double nu_mass() const;
    double nu_potential(Complex z) const;
    double operator()(Complex z) const;

    /// True when z coincides with a point-mass location of nu.
    bool is_singular_at(Complex z) const;
};

}  // namespace balpot
