#include "balpot/background.hpp"

#include <cmath>
#include <variant>

#include "balpot/errors.hpp"
#include "balpot/potential.hpp"

namespace balpot {

void BackgroundPotential::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error("alpha must be positive");
    if (!(t > 0.0) || !std::isfinite(t)) throw Error("t must be positive");
    for (const auto& atom : nu) {
        if (std::holds_alternative<GridDensity>(atom)) {
            throw Error("nu supports point, disk and circle atoms only");
        }
        validate_atom(atom);
    }
}

double BackgroundPotential::nu_mass() const {
    double m = 0.0;
    for (const auto& atom : nu) m += atom_mass(atom);
    return m;
}

double BackgroundPotential::nu_potential(Complex z) const {
    double u = 0.0;
    for (const auto& atom : nu) u += potential_of_atom(atom, z);
    return u;
}

double BackgroundPotential::operator()(Complex z) const {
    return alpha * std::norm(z) + nu_potential(z);
}

bool BackgroundPotential::is_singular_at(Complex z) const {
    for (const auto& atom : nu) {
        if (const auto* p = std::get_if<PointMass>(&atom); p && p->location == z) return true;
    }
    return false;
}

}  // namespace balpot
