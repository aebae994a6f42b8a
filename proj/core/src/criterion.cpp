#include "curvlab/criterion.hpp"

#include <algorithm>
#include <cmath>

#include "curvlab/errors.hpp"

namespace curvlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double default_cap(CriterionTarget target) {
  return target == CriterionTarget::kPU21 ? 0.99 : 0.49;
}

// lhs/A and rhs at genus g for the given target.
struct PointEval {
  double lhs_over_A;
  double rhs;
  double eta;
  double vol;
  double R;
};

PointEval eval_point(CriterionTarget target, double C, int d, const std::string& schedule,
                     double eta_cap, long long g) {
  PointEval p;
  p.eta = eta_schedule(schedule, g, eta_cap);
  p.vol = kTwoPi * static_cast<double>(2 * g - 2);
  const double eta = p.eta;
  if (target == CriterionTarget::kPU21) {
    p.R = static_cast<double>(d) / static_cast<double>(6 * g - 6);
    p.lhs_over_A = std::exp(-12.0 * C * eta * std::sqrt(p.vol) / (2.0 * (2.0 + eta)));
    p.rhs = std::pow(2.0 + eta, 3) * p.R / (2.0 * eta);
  } else {
    p.R = static_cast<double>(d) / static_cast<double>(2 * g - 2);
    p.lhs_over_A = std::exp(-4.0 * C * eta * std::sqrt(p.vol) / (4.0 + eta));
    p.rhs = std::pow(8.0 + eta, 3) / (16.0 * eta) * p.R;
  }
  return p;
}

void validate_common(double A, double C, int d) {
  if (!(A > 0.0)) throw PreconditionError("criterion: A > 0 required");
  if (!(C > 0.0)) throw PreconditionError("criterion: C > 0 required");
  if (d < 1) throw PreconditionError("criterion: d >= 1 required");
}

}  // namespace

double eta_schedule(const std::string& name, long long g, double cap) {
  if (g < 2) throw PreconditionError("eta_schedule: g >= 2 required");
  if (!(cap > 0.0)) throw PreconditionError("eta_schedule: cap > 0 required");
  if (name == "default" || name == "g^-3/4") {
    return std::min(cap, std::pow(static_cast<double>(g), -0.75));
  }
  throw PreconditionError("eta_schedule: unknown schedule '" + name + "'");
}

const char* criterion_target_name(CriterionTarget t) {
  return t == CriterionTarget::kPU21 ? "complex-hyperbolic-plane" : "real-hyperbolic-4-space";
}

CriterionFormulas criterion_formulas(CriterionTarget target) {
  CriterionFormulas f;
  if (target == CriterionTarget::kPU21) {
    f.lhs = "A*exp(-12*C*eta*sqrt(Vol)/(2*(2+eta)))";
    f.rhs = "(2+eta)^3*R/(2*eta)";
    f.R = "d/(6g-6)";
  } else {
    f.lhs = "A*exp(-4*C*eta*sqrt(Vol)/(4+eta))";
    f.rhs = "(8+eta)^3/(16*eta)*R";
    f.R = "d/(2g-2)";
  }
  f.eta_cap = default_cap(target);
  return f;
}

CriterionRow criterion_row(CriterionTarget target, double A, double C, int d,
                           const std::string& schedule, double eta_cap, long long g) {
  validate_common(A, C, d);
  if (eta_cap <= 0.0) eta_cap = default_cap(target);
  const PointEval p = eval_point(target, C, d, schedule, eta_cap, g);
  CriterionRow row;
  row.g = g;
  row.vol = p.vol;
  row.R = p.R;
  row.eta = p.eta;
  row.lhs = A * p.lhs_over_A;
  row.rhs = p.rhs;
  row.pass = row.lhs >= row.rhs;
  return row;
}

CriterionScanResult criterion_scan(CriterionTarget target, double A, double C, int d,
                                   const std::string& schedule, long long g_min,
                                   long long g_max, double eta_cap) {
  validate_common(A, C, d);
  if (g_min < 2) throw PreconditionError("criterion_scan: g_min >= 2 required");
  if (g_max < g_min) throw PreconditionError("criterion_scan: g_max >= g_min required");
  if (eta_cap <= 0.0) eta_cap = default_cap(target);

  CriterionScanResult out;
  out.target = target;
  out.A = A;
  out.C = C;
  out.d = d;
  out.schedule = schedule;
  out.eta_cap = eta_cap;
  out.g_min = g_min;
  out.g_max = g_max;

  const long long span = g_max - g_min + 1;
  const long long max_rows = 4096;
  const long long stride = span <= max_rows ? 1 : (span + max_rows - 1) / max_rows;

  long long suffix_start = -1;  // start of the trailing all-pass run
  for (long long g = g_min; g <= g_max; ++g) {
    const PointEval p = eval_point(target, C, d, schedule, eta_cap, g);
    const double lhs = A * p.lhs_over_A;
    const bool pass = lhs >= p.rhs;
    ++out.n_evaluated;
    if (pass) {
      ++out.n_pass;
      if (suffix_start < 0) suffix_start = g;
    } else {
      suffix_start = -1;
      if (out.first_fail_g < 0) out.first_fail_g = g;
      out.last_fail_g = g;
    }
    if ((g - g_min) % stride == 0 || g == g_max) {
      CriterionRow row;
      row.g = g;
      row.vol = p.vol;
      row.R = p.R;
      row.eta = p.eta;
      row.lhs = lhs;
      row.rhs = p.rhs;
      row.pass = pass;
      out.rows.push_back(row);
    }
    if (g == g_max) {
      out.lhs_over_A_at_gmax = p.lhs_over_A;
      out.rhs_at_gmax = p.rhs;
    }
  }
  if (suffix_start >= 0) {
    out.g0_found = true;
    out.g0 = suffix_start;
  }
  return out;
}

AsymptoticSanity asymptotic_sanity(CriterionTarget target, double A, double C, int d,
                                   const std::string& schedule, double eta_cap,
                                   long long g_limit) {
  validate_common(A, C, d);
  if (eta_cap <= 0.0) eta_cap = default_cap(target);
  if (g_limit < 2) throw PreconditionError("asymptotic_sanity: g_limit >= 2 required");

  AsymptoticSanity out;
  const auto ok = [&](long long g) {
    const PointEval p = eval_point(target, C, d, schedule, eta_cap, g);
    return p.lhs_over_A >= out.lhs_threshold && p.rhs <= out.rhs_threshold;
  };

  // Both conditions improve as g grows once eta has left its cap: lhs/A ->
  // exp(-const * g^{-1/4}) -> 1, rhs ~ g^{1/4} * R -> 0.  Exponential search
  // for a passing g, then bisect for the least one.
  long long hi = 2;
  while (hi <= g_limit && !ok(hi)) {
    if (hi > g_limit / 2) return out;  // not found within the limit
    hi *= 2;
  }
  if (hi > g_limit) return out;

  long long lo = std::max<long long>(2, hi / 2);
  // invariant: ok(hi) true; ok(lo) unknown -> normalize so ok(lo) is false
  if (ok(lo)) {
    hi = lo;
    lo = 2;
    if (ok(2)) hi = 2;
  }
  while (hi - lo > 1 && hi > 2) {
    const long long mid = lo + (hi - lo) / 2;
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  const PointEval p = eval_point(target, C, d, schedule, eta_cap, hi);
  out.found = true;
  out.g = hi;
  out.lhs_over_A = p.lhs_over_A;
  out.rhs = p.rhs;
  return out;
}

}  // namespace curvlab
