#pragma once

#include "balpot/grid.hpp"

namespace balpot {

/// How the two Dirichlet layers around the grid are set.
enum class BoundaryMode {
    /// u = 0: plain truncation, leaks mass whenever the odometer is not
    /// compactly supported inside the grid.
    zero,
    /// u = kappa, with kappa >= 0 fitted so that no mass crosses the boundary.
    constant,
    /// u = kappa + U^(-Lap_h u / 2pi): the exterior representation of the odometer,
    /// iterated to a fixed point with kappa fitted as above.
    far_field,
};

struct SolverOptions {
    /// SOR relaxation in [1, 2); a value <= 0 selects 2 / (1 + sin(pi / (n - 4))).
    double omega = 1.8;
    double tol = 1e-10;
    /// Sweep limit per SOR solve; 0 selects 200 * n.
    long max_iter = 0;
    /// Free layers checked next to the two Dirichlet layers.
    int band_cells = 2;
    BoundaryMode boundary = BoundaryMode::far_field;
    /// Allowed |sum mu h^2 - (-sum sigma h^2)| when fitting kappa.
    double mass_tol = 1e-8;
    /// Upper bound on kappa fitting steps per boundary profile.
    int max_boundary_steps = 60;
    /// Far-field mode: stop once the boundary profile moves less than this.
    double profile_tol = 1e-7;
    int max_profile_updates = 30;
};

struct SolveResult {
    ScalarField u;
    ScalarField mu;
    /// Total SOR sweeps.
    long iterations = 0;
    /// Max |min(u, -Lap_h u / 2pi - sigma)| over free cells, density units.
    double residual = 0.0;
    /// Max |u - boundary model| over the band next to the Dirichlet layers.
    double boundary_band_max = 0.0;
    /// Constant part kappa of the Dirichlet data.
    double boundary_value = 0.0;
    /// (sum mu h^2) - (-sum sigma h^2) before clamping: mass lost through the boundary.
    double mass_leak = 0.0;
    int profile_updates = 0;
    double omega = 0.0;
    bool converged = false;
};

double resolve_omega(const SolverOptions& options, int n);

/// Tolerance in density units implied by a cell-update tolerance: an SOR
/// update of size tol corresponds to a residual of 2 tol / (pi omega h^2) in
/// -Lap_h u / 2pi - sigma. Scaled by max(1, max u) and a factor of 10.
double density_tolerance(const Grid& grid, double omega, double tol, double u_max);

/// Red-black projected SOR for the discrete complementarity problem
///   u >= 0,  -Lap_h u / 2pi - sigma >= 0,  u * (-Lap_h u / 2pi - sigma) = 0
/// on cells of layer >= 2. The values of `u` on the two outer layers are the
/// Dirichlet data; the free cells are the starting guess. Stops when the
/// largest update is below tol * max(1, max u). Returns the sweep count;
/// throws NotConverged at the sweep limit.
long projected_sor(const ScalarField& sigma, ScalarField& u, double omega, double tol, long max_iter);

/// Net mass crossing from the free cells into the Dirichlet layers, i.e.
/// (sum mu h^2) - (-sum sigma h^2) for the unclamped recovered mu.
double boundary_leak(const ScalarField& u);

/// Potential of the free-cell part of sigma + mu at every cell with
/// layer < depth, zero elsewhere. The mass of a free cell is sigma where
/// u > 0 and -Lap_h u / 2pi where u = 0.
ScalarField far_field_profile(const ScalarField& sigma, const ScalarField& u, int depth);

/// Smallest non-negative u with -Lap_h u / 2pi >= sigma, truncated to the grid.
///
/// The odometer of a compactly supported sigma with negative mass is harmonic
/// outside supp sigma and tends to a constant at infinity that need not be
/// zero. Outside the grid it equals kappa + U^(sigma + mu). The Dirichlet
/// layers hold kappa + profile, where kappa >= 0 is the root of the
/// non-increasing boundary_leak (kappa = 0 when nothing leaks) and the profile
/// is refreshed from the current solution in far-field mode.
///
/// Throws MassNotNegative when sum sigma h^2 >= 0 and NotConverged when SOR or
/// the boundary fit fails. mu is recover_measure(sigma, u) at
/// density_tolerance.
SolveResult solve_obstacle(const ScalarField& sigma, const SolverOptions& options = {});

struct SandpileOptions {
    /// Stop once the total excess mass drops below tol * (total initial mass).
    double tol = 1e-13;
    long max_rounds = 0;  ///< 0 selects 50 * n^2
};

/// Divisible sandpile on the same grid: piles max(sigma, 0) h^2, holes
/// max(-sigma, 0) h^2, in-place toppling sweeps, cells in the two outer
/// layers absorb. Returns the odometer in potential units,
/// u = (pi / 2) * emitted mass.
ScalarField sandpile_oracle(const ScalarField& sigma, const SandpileOptions& options = {});

/// Same, with Dirichlet data read from the two outer layers of `dirichlet`
/// (non-negative). A boundary cell with value b topples 2b / pi up front, a
/// quarter of which lands on each free neighbour.
ScalarField sandpile_oracle(const ScalarField& sigma, const ScalarField& dirichlet,
                            const SandpileOptions& options = {});

/// 5-point Laplacian; ghost cells outside the grid hold the nearest edge value.
ScalarField laplacian(const ScalarField& u);

/// mu = -sigma - Lap_h u / 2pi on cells of layer >= 2 (zero on the two outer
/// layers). Values in [-tol, 0) are clamped to zero; anything below -tol
/// throws NegativeDensity.
ScalarField recover_measure(const ScalarField& sigma, const ScalarField& u, double tol);

/// Max |min(u, -Lap_h u / 2pi - sigma)| over cells of layer >= 2.
double complementarity_residual(const ScalarField& sigma, const ScalarField& u);

/// Bal(mu, lambda) = Bal(mu - lambda, 0) + lambda.
ScalarField bal_general(const ScalarField& mu, const ScalarField& lambda,
                        const SolverOptions& options = {});

/// Max |u| over the `band_cells` free layers next to the two Dirichlet layers.
double boundary_band_check(const ScalarField& u, int band_cells);

/// Max |u - model| over the same band.
double boundary_band_check(const ScalarField& u, const ScalarField& model, int band_cells);

}  // namespace balpot
