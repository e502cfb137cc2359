#pragma once

#include <variant>
#include <vector>

#include "balpot/grid.hpp"

namespace balpot {

struct PointMass {
    Complex location;
    double mass = 0.0;
};

/// Lebesgue measure on a disk scaled by `density` (mass per unit area).
struct UniformDisk {
    Complex center;
    double radius = 0.0;
    double density = 0.0;

    double mass() const;
};

/// Arc-length measure on a circle, normalized to `total_mass`.
struct UniformCircle {
    Complex center;
    double radius = 0.0;
    double total_mass = 0.0;
};

/// Non-negative cell densities on some grid.
struct GridDensity {
    ScalarField values;
};

using MeasureAtom = std::variant<PointMass, UniformDisk, UniformCircle, GridDensity>;

double atom_mass(const MeasureAtom& atom);
/// Radius of the smallest origin-centred closed disk containing the atom.
double atom_bounding_radius(const MeasureAtom& atom);
/// Throws Error when a mass, density or radius is not strictly positive.
void validate_atom(const MeasureAtom& atom);

/// Finite signed measure sigma = sigma_plus - sigma_minus stored as atom lists.
struct SignedMeasureSpec {
    std::vector<MeasureAtom> positive_atoms;
    std::vector<MeasureAtom> negative_atoms;

    void validate() const;
};

/// Disjoint union: concatenates the atom lists.
SignedMeasureSpec merge(const SignedMeasureSpec& a, const SignedMeasureSpec& b);

double total_mass(const SignedMeasureSpec& spec);
/// Sum of |atom mass| over both lists.
double total_abs_mass(const SignedMeasureSpec& spec);
double support_bounding_radius(const SignedMeasureSpec& spec);

enum class PointSplat {
    cell,      ///< whole mass to the containing cell
    bilinear,  ///< cloud-in-cell weights on the four surrounding cell centers
    tsc,       ///< triangular-shaped cloud on the 3x3 block around the nearest center
};

struct RasterOptions {
    PointSplat point_splat = PointSplat::cell;
};

/// Cell densities of a single atom (mass per unit area). No support check.
ScalarField rasterize_atom(const MeasureAtom& atom, const Grid& grid,
                           const RasterOptions& options = {});

/// Signed cell densities of `spec` on `grid`.
///
/// Requires support_bounding_radius(spec) < L - 2h, otherwise throws
/// SupportOutsideGrid. Point and circle atoms are mass exact; disk atoms are
/// sampled 4x4 on cells cut by the boundary and then rescaled on those cells so
/// the rasterized mass equals density * pi * r^2.
ScalarField rasterize(const SignedMeasureSpec& spec, const Grid& grid,
                      const RasterOptions& options = {});

/// Cellwise max(F, 0).
ScalarField positive_part(const ScalarField& f);
/// Cellwise max(-F, 0).
ScalarField negative_part(const ScalarField& f);

}  // namespace balpot
