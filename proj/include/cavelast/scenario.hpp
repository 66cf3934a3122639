#pragma once

#include "cavelast/deformation.hpp"
#include "cavelast/material.hpp"
#include "cavelast/output.hpp"
#include "cavelast/variation.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cavelast {

/// Scenario description read from a line-oriented INI file:
///
///   [scenario]  name, mode (minimize | evaluate), seed
///   [domain]    shape (disk | square), center, radius, mesh (structured |
///               delaunay), n_theta, h, punctures ("x y r; x y r")
///   [material]  kind (default_compressible | user_table), mu, a, b, p,
///               table ("h gamma; ...")
///   [surface]   kind (isotropic | elliptic | smoothed_l1), A ("a11 a12 a21
///               a22"), eps
///   [boundary]  kind (affine_stretch | radial_stretch | user_table), lambda,
///               center, table ("x1 x2 y1 y2; ...")
///   [initial]   kind (identity | boundary_map | radial_seed | localized),
///               seed_radius
///   [solver]    max_iters, tol_energy, tol_residual, det_floor, inv_every,
///               lbfgs_memory
///   [output]    directory, emit ("svg,csv,raster,inverse"), raster_cell,
///               golden (sweep file name under the golden directory)
///
/// For a square, radius is the half side.
struct ScenarioConfig {
    std::string name = "scenario";
    std::string mode = "minimize";
    std::uint64_t seed = 0;

    std::string shape = "disk";
    Vec2 center = Vec2::Zero();
    double radius = 1.0;
    std::string mesh = "structured";
    int n_theta = 64;
    double h = 0.05;
    std::vector<Puncture> punctures;

    std::string material = "default_compressible";
    double mu = 1.0, a = 1.0, b = 1.0, p = 2.0;
    std::vector<std::pair<double, double>> gamma_table;

    std::string surface = "isotropic";
    Mat2 A = Mat2::Identity();
    double eps = 0.01;

    std::string boundary = "radial_stretch";
    double lambda = 1.0;
    Vec2 boundary_center = Vec2::Zero();
    std::vector<std::pair<Vec2, Vec2>> boundary_table;

    std::string initial = "boundary_map";
    double seed_radius = 0.0;

    int max_iters = 20000;
    double tol_energy = 1e-11;
    double tol_residual = 0.0; // 0 selects 1e-3 E
    double det_floor = 1e-8;
    int inv_every = 10;
    int lbfgs_memory = 10;

    std::string directory; // empty selects runs/<name>
    std::set<std::string> emit = {"svg", "csv"};
    double raster_cell = 0.0; // 0 selects 0.5% of the deformed diameter
    std::string golden;
};

// ConfigError naming the key and line on malformed input.
ScenarioConfig parse_config(std::istream& is);
ScenarioConfig load_config(const std::string& path);
// Inverse of parse_config; round-trips exactly.
std::string serialize_config(const ScenarioConfig& c);
// ConfigError for inconsistent values: nonpositive tolerances, punctures
// outside the domain, overlapping, or with radius >= inradius/4.
void validate_config(const ScenarioConfig& c);

std::shared_ptr<const Mesh> build_mesh(const ScenarioConfig& c);
BulkDensity build_bulk(const ScenarioConfig& c);
SurfaceDensity build_surface(const ScenarioConfig& c);
BoundaryData build_boundary(const ScenarioConfig& c);
DeformationField build_initial(const ScenarioConfig& c, std::shared_ptr<const Mesh> mesh);
MinimizeOptions build_solver(const ScenarioConfig& c);

// CAVELAST_GOLDEN_DIR when set, else the bundled golden/v1.
std::string golden_directory();

struct RunRequest {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::set<std::string>> emit;
    bool evaluate_only = false;
};

struct RunOutcome {
    int exit_code = 0; // 0 ok, 2 invalid or infeasible input, 3 solver stall
    std::string directory;
    std::string message;
    Summary summary;
};

/// Builds, solves or evaluates, and writes the run directory. Errors in the
/// input map to exit code 2 with the message; nothing is thrown for them.
RunOutcome run_scenario(const RunRequest& req);

struct CompareReport {
    Summary a, b;
    double energy_b = 0.0;
    double energy_a_under_b = 0.0;  // run A's deformation under B's densities
    double surface_b = 0.0;
    double surface_a_under_b = 0.0;
    bool same_boundary = false;
    bool alarm = false;             // A beats B on B's own functional
    std::string table;
};

/// Side-by-side table of two run directories. Raises the alarm when run A's
/// deformation, re-evaluated with run B's material and surface density, has
/// lower energy than run B's result under the same boundary data.
CompareReport compare_runs(const std::string& dir_a, const std::string& dir_b);

} // namespace cavelast
