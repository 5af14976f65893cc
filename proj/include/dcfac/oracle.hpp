#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcfac/dc_core.hpp"
#include "dcfac/model.hpp"

namespace dcfac {

struct BruteForceResult {
  double opt_value = 0.0;
  std::vector<double> argmax;  // one maximizer over the original sign variables
  std::uint64_t evaluations = 0;
};

/// Exhaustive optimum over all 2^{n_binary} assignments; refuses instances
/// with n_binary > 24. Linear objectives walk a Gray code with incremental
/// value updates; products evaluate every point directly. Ties resolve to the
/// lexicographically smallest maximizer (-1 before +1).
BruteForceResult brute_force(const Instance& inst);

/// Lifts a reduced sign assignment to solver coordinates: identity for
/// max-cut, a prepended +1 entry for homogenized instances.
std::vector<double> full_sign_vector(const Instance& inst, const std::vector<double>& reduced);

/// Max over entries of |fd - grad| / (1 + |grad|) with central differences of
/// the objective value; step > 0.
double fd_gradient_check(const Objective& obj, const DenseMat& v, double step);

/// Outcome of a certificate check; detail is empty on pass and names the
/// first violated identity otherwise.
struct CertificateReport {
  bool ok = true;
  std::string detail;
};

/// Certifies the spectral subgradient at V: <Gamma, V> = -2 sigma1(V)^2, Gamma
/// has rank one (sigma2 <= 1e-8 sigma1), and the conjugate identity
/// psi(V) - conj(Gamma) = <Gamma, V> holds within rel_tol. Never throws on a
/// failed identity.
CertificateReport check_gamma(const DenseMat& v, double rel_tol = 1e-9);

/// Certifies an inner-solve trace produced with extrapolation off: the merit
/// column matches f_value - rho * specnorm_sq, and both the merit and the
/// potential chains are nonincreasing within tol * (1 + |value|) per step.
/// Reports the first violating iteration.
CertificateReport check_descent(const std::vector<InnerTracePoint>& trace, double rho,
                                double tol = 1e-8);

}  // namespace dcfac
