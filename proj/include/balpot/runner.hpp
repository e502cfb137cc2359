#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "balpot/background.hpp"
#include "balpot/extension.hpp"
#include "balpot/measure.hpp"
#include "balpot/solver.hpp"
#include "balpot/verifier.hpp"

namespace balpot {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_not_converged = 3,
    exit_verification = 4,
};

struct GridConfig {
    int n = 256;
    /// Half-width; default 1.5 * max(rho, bounding radius of nu).
    std::optional<double> L;
    PointSplat point_splat = PointSplat::tsc;
};

struct SolverConfig {
    SolverOptions options{.omega = 0.0, .tol = 1e-13};
    /// The band check passes when boundary_band_max <= band_tol * max(1, max u).
    double band_tol = 1e-4;
    /// Double L (keeping n) up to three times while the band check fails.
    bool auto_enlarge = false;
};

/// Closed-form case (i) reference for Q = alpha|z|^2 + beta log(1/|z - a|).
struct ReferenceConfig {
    Complex a;
    double beta = 0.0;
};

struct RunConfig {
    BackgroundPotential potential;
    /// Extension radius; default min_radius(potential).
    std::optional<double> rho;
    GridConfig grid;
    SolverConfig solver;
    std::optional<ReferenceConfig> reference;
    std::string output_dir = ".";
};

/// Throws ConfigError on malformed JSON, unknown keys, wrong types or values
/// outside their domain (n odd or outside [32, 2048], rho below the minimal
/// radius, ...).
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// JSON of the config with every default resolved.
std::string config_json(const RunConfig& config, int indent = 2);

double resolved_rho(const RunConfig& config);
double resolved_half_width(const RunConfig& config);

/// One build -> rasterize -> solve -> verify pass.
struct RunArtifacts {
    RunConfig config;
    TExtension extension;
    ScalarField sigma;
    SolveResult solved;
    VerificationReport report;
    std::optional<AnnulusReference> reference;
    /// Names of failed acceptance checks; empty when the run is certified.
    std::vector<std::string> failures;
    int enlargements = 0;
};

/// Runs the pipeline, enlarging the grid when configured. Throws the
/// library's errors (ConfigError and RadiusTooSmall for bad input,
/// NotConverged, ...); check failures are collected, not thrown.
RunArtifacts execute(const RunConfig& config, std::ostream& log);

/// Checks behind exit code 4: mass, bounds, support containment,
/// complementarity, band, Euler-Lagrange and Robin agreement, plus density
/// and support area against the reference when one is given.
std::vector<std::string> failed_checks(const RunArtifacts& run);

void write_field_csv(const ScalarField& field, const std::filesystem::path& path);
void write_support_pgm(const CellMask& mask, const std::filesystem::path& path);
std::string report_json(const RunArtifacts& run, int indent = 2);

/// The solve subcommand: writes u.csv, mu.csv, sigma.csv, support.pgm and
/// report.json into out_dir and returns an ExitCode.
int run_solve(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Solves at n, 2n, ..., 2^(levels-1) n on a fixed L and writes
/// convergence.csv. Requires a reference. Fails (exit 4) when an odometer
/// error above the noise floor shrinks at an observed order below 1.5.
int run_convergence(const RunConfig& config, int levels, const std::filesystem::path& out_dir,
                    std::ostream& log);

/// Solves at every rho on one common grid and writes rho_sweep.csv of pairwise
/// max-norm differences of mu, over all cells and over cells at least two
/// cells from both supports' boundaries. Fails (exit 4) when the latter
/// exceeds 2% of 2 alpha / pi.
int run_rho_sweep(const RunConfig& config, const std::vector<double>& rhos,
                  const std::filesystem::path& out_dir, std::ostream& log);

/// Parses "r1,r2,..." into radii. Throws ConfigError.
std::vector<double> parse_rho_list(std::string_view text);

}  // namespace balpot
