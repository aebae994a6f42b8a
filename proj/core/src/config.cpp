#include "curvlab/config.hpp"

#include <set>

#include "curvlab/errors.hpp"
#include "curvlab/io.hpp"

namespace curvlab {

namespace {

void put_opt(nlohmann::json& j, const char* key, const std::optional<double>& v) {
  if (v.has_value()) j[key] = *v;
}

void get_opt(const nlohmann::json& j, const char* key, std::optional<double>& v) {
  if (j.contains(key)) v = j.at(key).get<double>();
}

template <typename T>
void get_if(const nlohmann::json& j, const char* key, T& v) {
  if (j.contains(key)) v = j.at(key).get<T>();
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["mesh_generator"] = mesh_generator;
  j["mesh_file"] = mesh_file;

  j["uniformize_tol"] = uniformize_tol;
  j["gauss_tol"] = gauss_tol;
  j["poisson_tol"] = poisson_tol;
  j["eigen_tol"] = eigen_tol;
  j["volume_tol"] = volume_tol;
  j["drift_tol"] = drift_tol;
  j["mean_tol"] = mean_tol;

  j["eta"] = eta;
  j["h4_eta"] = h4_eta;
  put_opt(j, "R", R);
  j["t"] = t;
  j["d"] = d;

  j["f_source"] = f_source;
  j["f_constant_fraction"] = f_constant_fraction;
  j["t_fraction"] = t_fraction;
  j["zeros"] = zeros;
  j["scale_mode"] = scale_mode;

  j["ray_points"] = ray_points;
  j["ray_t_fraction"] = ray_t_fraction;

  j["empirical_m"] = empirical_m;
  put_opt(j, "delta_override", delta_override);
  put_opt(j, "lambda_override", lambda_override);
  put_opt(j, "c_sob_fixed", c_sob_fixed);
  put_opt(j, "A_override", A_override);

  j["fixed_point_max_iter"] = fixed_point_max_iter;
  j["theta"] = theta;
  j["override_hypothesis"] = override_hypothesis;

  j["criterion_target"] = criterion_target;
  j["criterion_A"] = criterion_A;
  j["criterion_C"] = criterion_C;
  j["schedule"] = schedule;
  put_opt(j, "eta_cap", eta_cap);
  j["g_min"] = g_min;
  j["g_max"] = g_max;

  j["zone_r_fraction"] = zone_r_fraction;
  j["cover_k"] = cover_k;
  j["seed"] = seed;
  return j;
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw PreconditionError("config: top level must be a JSON object");
  static const std::set<std::string> known = {
      "mesh_generator", "mesh_file", "uniformize_tol", "gauss_tol", "poisson_tol",
      "eigen_tol", "volume_tol", "drift_tol", "mean_tol", "eta", "h4_eta", "R", "t", "d",
      "f_source", "f_constant_fraction", "t_fraction", "zeros", "scale_mode", "ray_points",
      "ray_t_fraction", "empirical_m", "delta_override", "lambda_override", "c_sob_fixed",
      "A_override", "fixed_point_max_iter", "theta", "override_hypothesis",
      "criterion_target", "criterion_A", "criterion_C", "schedule", "eta_cap", "g_min",
      "g_max", "zone_r_fraction", "cover_k", "seed"};
  for (const auto& item : j.items()) {
    if (known.find(item.key()) == known.end()) {
      throw PreconditionError("config: unknown key '" + item.key() + "'");
    }
  }

  RunConfig c;
  get_if(j, "mesh_generator", c.mesh_generator);
  get_if(j, "mesh_file", c.mesh_file);
  get_if(j, "uniformize_tol", c.uniformize_tol);
  get_if(j, "gauss_tol", c.gauss_tol);
  get_if(j, "poisson_tol", c.poisson_tol);
  get_if(j, "eigen_tol", c.eigen_tol);
  get_if(j, "volume_tol", c.volume_tol);
  get_if(j, "drift_tol", c.drift_tol);
  get_if(j, "mean_tol", c.mean_tol);
  get_if(j, "eta", c.eta);
  get_if(j, "h4_eta", c.h4_eta);
  get_opt(j, "R", c.R);
  get_if(j, "t", c.t);
  get_if(j, "d", c.d);
  get_if(j, "f_source", c.f_source);
  get_if(j, "f_constant_fraction", c.f_constant_fraction);
  get_if(j, "t_fraction", c.t_fraction);
  get_if(j, "zeros", c.zeros);
  get_if(j, "scale_mode", c.scale_mode);
  get_if(j, "ray_points", c.ray_points);
  get_if(j, "ray_t_fraction", c.ray_t_fraction);
  get_if(j, "empirical_m", c.empirical_m);
  get_opt(j, "delta_override", c.delta_override);
  get_opt(j, "lambda_override", c.lambda_override);
  get_opt(j, "c_sob_fixed", c.c_sob_fixed);
  get_opt(j, "A_override", c.A_override);
  get_if(j, "fixed_point_max_iter", c.fixed_point_max_iter);
  get_if(j, "theta", c.theta);
  get_if(j, "override_hypothesis", c.override_hypothesis);
  get_if(j, "criterion_target", c.criterion_target);
  get_if(j, "criterion_A", c.criterion_A);
  get_if(j, "criterion_C", c.criterion_C);
  get_if(j, "schedule", c.schedule);
  get_opt(j, "eta_cap", c.eta_cap);
  get_if(j, "g_min", c.g_min);
  get_if(j, "g_max", c.g_max);
  get_if(j, "zone_r_fraction", c.zone_r_fraction);
  get_if(j, "cover_k", c.cover_k);
  get_if(j, "seed", c.seed);
  c.validate();
  return c;
}

void RunConfig::validate() const {
  const auto positive = [](double x, const char* name) {
    if (!(x > 0.0)) {
      throw PreconditionError(std::string("config: ") + name + " must be positive");
    }
  };
  positive(uniformize_tol, "uniformize_tol");
  positive(gauss_tol, "gauss_tol");
  positive(poisson_tol, "poisson_tol");
  positive(eigen_tol, "eigen_tol");
  positive(volume_tol, "volume_tol");
  positive(drift_tol, "drift_tol");
  positive(mean_tol, "mean_tol");
  if (!(eta > 0.0 && eta < 1.0)) throw PreconditionError("config: eta must lie in (0,1)");
  if (!(h4_eta > 0.0 && h4_eta < 0.5)) {
    throw PreconditionError("config: h4_eta must lie in (0,1/2)");
  }
  if (R.has_value() && !(*R > 0.0 && *R < 0.5)) {
    throw PreconditionError("config: R must lie in (0,1/2)");
  }
  if (t < 0.0) throw PreconditionError("config: t must be >= 0");
  if (d < 0) throw PreconditionError("config: d must be >= 0");
  if (f_source != "constant" && f_source != "section-norm") {
    throw PreconditionError("config: f_source must be 'constant' or 'section-norm'");
  }
  if (!(f_constant_fraction > 0.0 && f_constant_fraction <= 1.0)) {
    throw PreconditionError("config: f_constant_fraction must lie in (0,1]");
  }
  if (!(t_fraction > 0.0 && t_fraction <= 1.0)) {
    throw PreconditionError("config: t_fraction must lie in (0,1]");
  }
  if (scale_mode != "sup" && scale_mode != "l2") {
    throw PreconditionError("config: scale_mode must be 'sup' or 'l2'");
  }
  if (ray_points < 2) throw PreconditionError("config: ray_points must be >= 2");
  if (!(ray_t_fraction > 0.0 && ray_t_fraction <= 1.0)) {
    throw PreconditionError("config: ray_t_fraction must lie in (0,1]");
  }
  if (empirical_m < 1) throw PreconditionError("config: empirical_m must be >= 1");
  if (fixed_point_max_iter < 1) {
    throw PreconditionError("config: fixed_point_max_iter must be >= 1");
  }
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw PreconditionError("config: theta must lie in (0,1]");
  }
  if (criterion_target != "pu21" && criterion_target != "h4") {
    throw PreconditionError("config: criterion_target must be 'pu21' or 'h4'");
  }
  positive(criterion_A, "criterion_A");
  positive(criterion_C, "criterion_C");
  if (g_min < 2) throw PreconditionError("config: g_min must be >= 2");
  if (g_max < g_min) throw PreconditionError("config: g_max must be >= g_min");
  if (!(zone_r_fraction > 0.0 && zone_r_fraction < 1.0)) {
    throw PreconditionError("config: zone_r_fraction must lie in (0,1)");
  }
  if (cover_k.empty()) throw PreconditionError("config: cover_k must be nonempty");
  for (int k : cover_k) {
    if (k < 2) throw PreconditionError("config: cover degrees must be >= 2");
  }
  for (const auto& z : zeros) {
    if (z[1] < 1) throw PreconditionError("config: zero multiplicities must be >= 1");
  }
}

RunConfig load_config(const std::string& path) {
  return RunConfig::from_json(read_json_file(path));
}

void save_config(const RunConfig& config, const std::string& path) {
  write_json_file(path, config.to_json());
}

}  // namespace curvlab
