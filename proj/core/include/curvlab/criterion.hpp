#pragma once

#include <string>
#include <vector>

namespace curvlab {

// eta as a function of genus.  The default schedule min(cap, g^{-3/4})
// satisfies both asymptotic requirements: g * eta_g grows without bound while
// sqrt(g) * eta_g tends to zero.
double eta_schedule(const std::string& name, long long g, double cap);

enum class CriterionTarget { kPU21, kH4 };
const char* criterion_target_name(CriterionTarget t);

// The two genus-threshold criteria share one skeleton:
//   lhs = A * exp(-exp_coef * C * eta * sqrt(Vol) / exp_den(eta)),
//   rhs = rhs_coef(eta) * R_g,   Vol = 2 pi (2g - 2),
// with target-specific exponent structure, rhs coefficient and R formula.
//   PU21: lhs = A*exp(-12*C*eta*sqrt(Vol)/(2*(2+eta))), rhs = (2+eta)^3*R/(2*eta),
//         R = d/(6g-6), eta cap 0.99;
//   H4:   lhs = A*exp(-4*C*eta*sqrt(Vol)/(4+eta)),      rhs = (8+eta)^3/(16*eta)*R,
//         R = d/(2g-2), eta cap 0.49.
struct CriterionRow {
  long long g = 0;
  double vol = 0.0;
  double R = 0.0;
  double eta = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;  // lhs >= rhs
};

struct CriterionFormulas {
  std::string lhs;
  std::string rhs;
  std::string R;
  double eta_cap = 0.0;
};

CriterionFormulas criterion_formulas(CriterionTarget target);
CriterionRow criterion_row(CriterionTarget target, double A, double C, int d,
                           const std::string& schedule, double eta_cap, long long g);

struct CriterionScanResult {
  CriterionTarget target = CriterionTarget::kPU21;
  double A = 0.0, C = 0.0;
  int d = 0;
  std::string schedule;
  double eta_cap = 0.0;
  long long g_min = 0, g_max = 0;

  // Every g in range is evaluated; rows keep a bounded sample (all of them
  // when the range is small) so reports stay a sane size.
  std::vector<CriterionRow> rows;
  long long n_evaluated = 0;
  long long n_pass = 0;
  long long first_fail_g = -1;
  long long last_fail_g = -1;

  bool g0_found = false;
  long long g0 = -1;  // least g such that every g' in [g0, g_max] passes
  double lhs_over_A_at_gmax = 0.0;
  double rhs_at_gmax = 0.0;
};

CriterionScanResult criterion_scan(CriterionTarget target, double A, double C, int d,
                                   const std::string& schedule, long long g_min,
                                   long long g_max, double eta_cap = -1.0);

// Mesh-free asymptotic probe: the least genus at which lhs/A clears 0.99 and
// rhs drops below 1e-2 (exponential search + bisection on the tail where
// both quantities are monotone).
struct AsymptoticSanity {
  bool found = false;
  long long g = -1;
  double lhs_over_A = 0.0;
  double rhs = 0.0;
  double lhs_threshold = 0.99;
  double rhs_threshold = 1e-2;
};

AsymptoticSanity asymptotic_sanity(CriterionTarget target, double A, double C, int d,
                                   const std::string& schedule, double eta_cap = -1.0,
                                   long long g_limit = (1LL << 50));

}  // namespace curvlab
