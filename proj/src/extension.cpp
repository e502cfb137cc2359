#include "balpot/extension.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "balpot/errors.hpp"
#include "balpot/potential.hpp"

namespace balpot {

namespace {
constexpr double kRelativeSlack = 1e-12;
}

double min_radius(const BackgroundPotential& q) {
    return std::sqrt((q.t + q.nu_mass()) / (2.0 * q.alpha));
}

double circle_atom_mass(const BackgroundPotential& q, double rho) {
    return 2.0 * q.alpha * rho * rho - (q.t + q.nu_mass());
}

TExtension build_extension(const BackgroundPotential& q, double rho) {
    q.validate();
    const double r_min = min_radius(q);
    // f'(rho) = 2 alpha rho - (t + nu(C)) / rho >= 0, up to rounding in R itself
    if (!(rho >= r_min * (1.0 - kRelativeSlack))) {
        std::ostringstream msg;
        msg << "rho = " << rho << " is below the minimal radius R = sqrt((t + nu(C)) / (2 alpha)) = "
            << r_min;
        throw RadiusTooSmall(msg.str());
    }

    TExtension ext;
    ext.rho = rho;
    ext.E_prime_radius = rho;
    ext.c = q.alpha * rho * rho - (q.t + q.nu_mass()) * std::log(rho);
    ext.sigma.positive_atoms = q.nu;
    const double arc_mass = circle_atom_mass(q, rho);
    if (arc_mass > kRelativeSlack * (q.t + q.nu_mass())) {
        ext.sigma.positive_atoms.emplace_back(UniformCircle{{0.0, 0.0}, rho, arc_mass});
    }
    ext.sigma.negative_atoms.emplace_back(
        UniformDisk{{0.0, 0.0}, rho, 2.0 * q.alpha / std::numbers::pi});
    return ext;
}

double extension_gap(const TExtension& ext, const BackgroundPotential& q, Complex z) {
    return q(z) - (ext.c + potential_of_spec(ext.sigma, z));
}

}  // namespace balpot
