#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace curvlab {

// One flat configuration drives every pipeline command.  A config emitted by
// a run reloads to an identical struct, and re-running any command from it
// reproduces every artifact byte for byte (fixed seeds, fixed iteration
// orders, no timestamps, no absolute paths).  The output directory is
// deliberately not part of the config.
struct RunConfig {
  // Mesh: generator string, or an input file (which wins when nonempty).
  std::string mesh_generator = "regular-octagon-genus2(6)";
  std::string mesh_file;

  // Tolerances.
  double uniformize_tol = 1e-8;
  double gauss_tol = 1e-10;
  double poisson_tol = 1e-10;
  double eigen_tol = 1e-11;
  double volume_tol = 1e-8;
  double drift_tol = 1e-8;
  double mean_tol = 1e-6;

  // Model parameters.
  double eta = 0.5;      // curvature-equation parameter, in (0,1)
  double h4_eta = 0.25;  // 4-space variant, in (0,1/2)
  std::optional<double> R;  // volume defect; derived from d when absent
  double t = 1.0;           // explicit ray parameter for single solves
  int d = 1;                // zero count / degree parameter

  // Data field construction.
  std::string f_source = "section-norm";  // or "constant"
  double f_constant_fraction = 0.5;       // constant data / admissibility cap
  double t_fraction = 0.5;   // data-driven ray parameter / admissible cap
  std::vector<std::array<int, 2>> zeros;  // explicit (vertex, multiplicity)
  std::string scale_mode = "sup";         // or "l2"

  // Ray sampling.
  int ray_points = 33;
  double ray_t_fraction = 0.9;

  // Geometry constants and overrides.
  int empirical_m = 20;
  std::optional<double> delta_override;
  std::optional<double> lambda_override;
  std::optional<double> c_sob_fixed;
  std::optional<double> A_override;

  // Fixed-point iteration.
  int fixed_point_max_iter = 200;
  double theta = 1.0;
  bool override_hypothesis = false;

  // Criterion scans.
  std::string criterion_target = "pu21";  // or "h4"
  double criterion_A = 1.0;
  double criterion_C = 1.0;
  std::string schedule = "default";
  std::optional<double> eta_cap;
  long long g_min = 2;
  long long g_max = 1000000;

  // Section-norm zone checks.
  double zone_r_fraction = 0.5;  // r = fraction * (delta / 2)

  // Covers.
  std::vector<int> cover_k = {2, 3};

  // Seed for randomized batches (data draws are generated, never timed).
  unsigned long long seed = 12345;

  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);

  // Semantic validation (enum-like strings, tolerance positivity, ranges).
  void validate() const;
};

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& config, const std::string& path);

}  // namespace curvlab
