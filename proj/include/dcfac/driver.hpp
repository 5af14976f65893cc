#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dcfac/dc_core.hpp"
#include "dcfac/model.hpp"

namespace dcfac {

struct PenaltyConfig {
  double rho0 = 1e-3;
  double sigma = 1.005;
  double eps = 1e-8;
  double rho_max = 1e6;
  int l_max = 10000;
  int m = 0;  // 0 resolves to max(min(50, round(p / 2)), 2)
  std::uint64_t seed = 1;
  BetaMode beta_mode = BetaMode::Nesterov;
  std::optional<double> time_limit_s;
  std::optional<double> bval;  // overrides the instance's known best value
  int l_star = 0;              // penalty bound diagnostics
  std::optional<int> r_star;
  bool record_inner_traces = false;
  // Test hook, called once per outer iteration after the inner solve.
  std::function<void(int l, double rho, const DenseMat& v)> outer_observer;
};

struct SolveReport {
  std::string name;
  ProblemKind problem = ProblemKind::MaxCut;
  int n_binary = 0;
  int p = 0;
  int m = 0;
  std::uint64_t seed = 0;
  BetaMode beta_mode = BetaMode::Nesterov;

  std::vector<double> x;         // rank-one extraction, length p
  std::vector<double> x_binary;  // rounded sign vector, length p
  double obj = 0.0;              // original objective at the extraction
  double obj_rounded = 0.0;      // original objective at the rounded point
  double f_final = 0.0;          // ftilde at the final factor
  std::optional<double> bval;
  std::optional<double> gap_percent;  // 100 (obj - bval) / |bval|, signed
  double infeas_inf = 0.0;            // max_j ||x_j| - 1|
  double infeas_two = 0.0;            // ||x.x - e||_2

  int outer_iters = 0;
  long long inner_iters = 0;
  double rho_final = 0.0;
  bool exited_normally = false;
  std::string exit_reason;  // "gap", "l_max", "time_limit"
  double rank_one_gap_final = 0.0;
  double sigma1 = 0.0;
  double sigma_ratio = 0.0;  // sigma2 / sigma1 at the final factor (tie flag)
  double bound_term = 0.0;
  double wall_time_s = 0.0;

  std::vector<double> rho_trace;       // rho_0 .. rho_{l_f} (one past the last used)
  std::vector<double> specnorm_trace;  // ||V^{l+1}||^2 per outer iteration
  std::vector<std::vector<InnerTracePoint>> inner_traces;  // when requested
};

int auto_rank(int p);

/// Deterministic start: standard normal entries (row-major fill) from the
/// seeded generator, then column normalization.
FactorMatrix init_factor(int m, int p, std::uint64_t seed);

/// p - sigma_1(V)^2, clamped at zero.
double rank_one_gap(const FactorMatrix& v);

/// x = sigma_1 p_1; for homogenized instances the sign is fixed so x_1 >= 0.
std::vector<double> extract_rank_one(const FactorMatrix& v, bool homogenized);

struct Infeasibility {
  double inf_norm = 0.0;
  double two_norm = 0.0;
};
Infeasibility infeasibility(const std::vector<double>& x);

/// Componentwise sign with sign(0) = +1; homogenized vectors are first
/// multiplied by sign(x_1) so the fixed coordinate rounds to +1.
std::vector<double> round_binary(const std::vector<double>& x, bool homogenized);

/// Upper-bound term rho_lf s_lf - rho_l* p / r* + sum_j (rho_j - rho_{j+1}) s_j
/// + alpha eps from the penalty analysis; rho_trace must have one more entry
/// than specnorm_trace (rigorous for unextrapolated runs, diagnostic else).
double penalty_bound_term(const std::vector<double>& rho_trace,
                          const std::vector<double>& specnorm_trace, int l_star, int r_star,
                          double alpha, double eps, int p);

SolveReport solve(const Objective& obj, const Instance& inst, const PenaltyConfig& cfg);

}  // namespace dcfac
