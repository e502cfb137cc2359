#pragma once

#include <optional>

#include "balpot/background.hpp"
#include "balpot/grid.hpp"
#include "balpot/solver.hpp"

namespace balpot {

/// Cells with mu >= threshold_fraction * max(mu). Throws EmptySupport when
/// mu vanishes identically.
CellMask extract_support(const ScalarField& mu, double threshold_fraction = 0.5);

struct EulerLagrangeOptions {
    /// Probes stay this many cells away from the support boundary.
    int margin = 2;
    /// Off-support grid probes are thinned to at most this many.
    std::size_t max_off_probes = 4096;
    /// Expected spread of phi on the support; the median replaces the mean
    /// when the spread exceeds ten times this.
    double spread_tolerance = 1e-2;
};

struct EulerLagrangeResult {
    double F_estimate = 0.0;
    double on_support_std = 0.0;
    double off_support_min_gap = 0.0;
    bool used_median = false;
    std::size_t on_probes = 0;
    std::size_t off_probes = 0;
};

/// Evaluates phi = U^mu + Q on interior support cells and on off-support
/// probes (grid cells at least `margin + 1` cells outside the support plus a
/// ring at 1.5 times the support radius when it fits in the grid).
EulerLagrangeResult euler_lagrange_check(const ScalarField& mu, const BackgroundPotential& q,
                                         const CellMask& mask,
                                         const EulerLagrangeOptions& options = {});

/// (V - int Q dmu) / t with V the discrete weighted energy of mu.
double robin_from_energy(const ScalarField& mu, const BackgroundPotential& q);

/// Closed-form equilibrium data for Q(z) = alpha|z|^2 + beta log(1/|z - a|).
struct AnnulusReference {
    double alpha = 0.0;
    double beta = 0.0;
    Complex a;
    double t = 0.0;
    /// Radius of the extension disk the odometer refers to (>= R).
    double rho = 0.0;
    double R = 0.0;
    double r = 0.0;
    double density = 0.0;
    /// D(a, r) inside D(0, R): support is the closed annulus D(0,R) \ D(a,r).
    bool case_i = false;

    bool in_support(Complex z) const;
    /// Odometer of the extension with radius rho, normalized so that it vanishes
    /// on the support. Constant 2 alpha R^2 log(R/rho) + alpha (rho^2 - R^2)
    /// outside D(0, rho). Valid in case (i) only.
    double odometer(Complex z) const;
    /// Limit of the odometer at infinity.
    double odometer_at_infinity() const;
};

/// R = sqrt((t + beta) / (2 alpha)), r = sqrt(beta / (2 alpha)), density
/// 2 alpha / pi. `rho` defaults to R.
AnnulusReference annulus_reference(double alpha, double beta, Complex a, double t,
                                   std::optional<double> rho = std::nullopt);

struct ReferenceErrors {
    /// Max |mu - density| over annulus cells at least `margin` cells from both circles.
    double density_max_err = 0.0;
    /// h^2 * #(support mask xor analytic annulus).
    double support_symmdiff_area = 0.0;
    /// 2h * 2pi (R + r).
    double support_symmdiff_bound = 0.0;
    /// Max |u - analytic u| over free cells with |z - a| >= r / 4.
    double odometer_max_err = 0.0;
};

/// Throws WrongCase unless reference.case_i.
ReferenceErrors compare_to_reference(const ScalarField& mu, const ScalarField& u,
                                     const CellMask& support, const AnnulusReference& reference,
                                     int margin = 2);

/// Largest violation of 0 <= mu <= sigma_minus, cellwise.
double bounds_violation(const ScalarField& mu, const ScalarField& sigma);

/// Cells with mu > tol outside the `dilation`-cell neighbourhood of {sigma < 0}.
std::size_t support_containment_violations(const ScalarField& mu, const ScalarField& sigma,
                                           double tol, int dilation = 1);

/// Cells with mu > tol outside the one-cell dilation of the cells meeting the
/// closed disk D(0, radius).
std::size_t disk_containment_violations(const ScalarField& mu, double radius, double tol);

struct VerificationReport {
    double mass_error = 0.0;
    double F_estimate = 0.0;
    double F_from_energy = 0.0;
    double on_support_std = 0.0;
    double off_support_min_gap = 0.0;
    bool F_used_median = false;
    double bounds_violation = 0.0;
    std::size_t support_violations = 0;
    double support_area = 0.0;
    double complementarity_residual = 0.0;
    double boundary_band_max = 0.0;
    double boundary_value = 0.0;
    long iterations = 0;
    std::optional<ReferenceErrors> reference_errors;
};

struct VerifyOptions {
    double support_fraction = 0.5;
    /// Density below which mu counts as zero for containment checks.
    double zero_tol = 1e-8;
    EulerLagrangeOptions euler_lagrange;
    std::optional<AnnulusReference> reference;
};

VerificationReport verify(const ScalarField& sigma, const SolveResult& solved,
                          const BackgroundPotential& q, const VerifyOptions& options = {});

}  // namespace balpot
