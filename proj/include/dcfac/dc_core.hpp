#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "dcfac/linalg.hpp"
#include "dcfac/model.hpp"

namespace dcfac {

constexpr double kUnitColumnTol = 1e-12;

bool has_unit_columns(const DenseMat& m, double tol = kUnitColumnTol);

/// Factor matrix V with every column on the unit sphere (within 1e-12).
struct FactorMatrix {
  DenseMat mat;
};

/// Validates the unit-column invariant and wraps the matrix.
FactorMatrix make_factor(DenseMat m);

/// One record per inner iteration. merit = ftilde(V) - rho ||V||^2 and theta
/// is the proximal descent potential; both chains are nonincreasing for
/// unextrapolated steps with a valid Lipschitz majorization.
struct InnerTracePoint {
  int k = 0;
  double f_value = 0.0;
  double specnorm_sq = 0.0;
  double merit = 0.0;
  double residual = 0.0;
  double theta = 0.0;
};

enum class BetaMode { Nesterov, Zero };

/// Extrapolation weights t_1 = 1, t_{next} = (1 + sqrt(1 + 4 t^2)) / 2,
/// beta = (t - 1) / t_next. beta_0 = 0 and beta increases toward 1.
struct NesterovSchedule {
  double t = 1.0;
  double next_beta() {
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double beta = (t - 1.0) / t_next;
    t = t_next;
    return beta;
  }
};

struct InnerConfig {
  double rho = 0.0;
  BetaMode beta_mode = BetaMode::Nesterov;
  int k_max = 3000;
  double tau0 = 0.005;
  double tau_decay = 0.995;
  double tau_min = 1e-5;
  double eta = 1.0;  // residual threshold is tau_k * max(1, eta)

  bool fixed_step = true;  // linear objectives use a constant majorization
  double step_l = 0.0;     // the constant (fixed mode) or search warm start
  double search_cap = std::numeric_limits<double>::infinity();  // cap on the warm start

  // Diagnostics for the potential trace.
  double pot_gamma = 0.0;
  double pot_l = 0.0;

  bool record_trace = false;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct InnerResult {
  FactorMatrix v;
  SingularTriple triple;  // leading triple of the final V
  DenseMat gamma;         // subgradient at the final V
  int iters = 0;
  bool residual_converged = false;
  bool hit_deadline = false;
  double final_residual = std::numeric_limits<double>::infinity();
  double accepted_l = 0.0;
  std::vector<InnerTracePoint> trace;
};

/// Gamma = -2 V p1 p1^T, a subgradient of the concave penalty -||V||^2
/// evaluated through the leading right singular vector p1 of V.
DenseMat spectral_subgradient(const DenseMat& v);
DenseMat spectral_subgradient(const DenseMat& v, const SingularTriple& t);

/// Exact global minimizer over unit-norm columns of
///   <grad_u + rho gamma, V> + rho ||V||_F^2 + (l / 2) ||V - U||_F^2,
/// i.e. the column-normalized G = (l U - grad_u - rho gamma) / (l + 2 rho);
/// exactly-zero columns map to the first coordinate axis.
FactorMatrix mm_step(const DenseMat& u, const DenseMat& gamma, const DenseMat& grad_u, double l,
                     double rho);

/// The subproblem objective above, for optimality tests.
double subproblem_value(const DenseMat& v, const DenseMat& u, const DenseMat& gamma,
                        const DenseMat& grad_u, double l, double rho);

struct SearchResult {
  double l = 0.0;
  FactorMatrix v;
  int doublings = 0;
};

/// Doubles l from l_init until the descent lemma
///   ftilde(V) <= ftilde(U) + <grad, V - U> + (l / 2) ||V - U||^2
/// holds at the mm_step output; throws after 60 doublings.
SearchResult search_lipschitz(ObjectiveOracle& oracle, const DenseMat& u, double f_u,
                              const DenseMat& grad_u, const DenseMat& gamma, double rho,
                              double l_init);

/// || grad(V_next) - grad(U) - l (V_next - U) + rho (gamma_next - gamma) ||_F,
/// the stationarity residual of the accepted step.
double stationarity_residual(const DenseMat& v_next, const DenseMat& u, const DenseMat& grad_next,
                             const DenseMat& grad_u, const DenseMat& gamma_next,
                             const DenseMat& gamma, double l, double rho);

/// Convex conjugate of the negated spectral-norm penalty: one quarter of the
/// squared nuclear norm of gamma.
double penalty_conjugate(const DenseMat& gamma);

/// Proximal descent potential
///   ftilde(V) + rho ||V||_F^2 + rho <gamma, V> + rho conj(gamma)
///   + (pot_gamma * pot_l / 2) ||V - U||_F^2,
/// +infinity when V leaves the unit-column manifold.
double descent_potential(const Objective& obj, const DenseMat& v, const DenseMat& gamma,
                         const DenseMat& u, double rho, double pot_gamma, double pot_l);

/// Majorization-minimization with optional extrapolation for the penalized
/// subproblem at fixed rho, warm-started from `start`.
InnerResult solve_penalized(const Objective& obj, const FactorMatrix& start,
                            const InnerConfig& cfg);

}  // namespace dcfac
