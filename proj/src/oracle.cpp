#include "dcfac/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>

#include "sym_eig.hpp"

namespace dcfac {
namespace {

constexpr int kMaxBits = 24;
// Incremental Gray-code values drift by rounding; refresh them from scratch
// periodically and re-evaluate every near-maximal candidate exactly.
constexpr std::uint64_t kRefreshPeriod = 8192;

double reported_linear(const Instance& inst, double quad) {
  return inst.problem == ProblemKind::Ubqp ? -quad + inst.objective_offset : -quad;
}

/// Gray-code enumeration for quadratic objectives: flipping one sign updates
/// the value in O(row nnz) through the cached product g = C x.
BruteForceResult brute_force_linear(const Instance& inst) {
  const SparseSymMatrix& c = inst.objective.linear();
  const int nb = inst.n_binary;
  const int off = inst.homogenized() ? 1 : 0;
  const std::uint64_t points = 1ULL << nb;

  std::vector<double> diag(c.dim, 0.0);
  for (int i = 0; i < c.dim; ++i) {
    for (int idx = c.row_start[i]; idx < c.row_start[i + 1]; ++idx) {
      if (c.col[idx] == i) diag[i] = c.val[idx];
    }
  }

  std::vector<double> x(c.dim, -1.0);
  if (off == 1) x[0] = 1.0;
  std::vector<double> g = symm_matvec(c, x);
  auto quad_of = [&]() {
    double s = 0.0;
    for (int i = 0; i < c.dim; ++i) s += x[i] * g[i];
    return s;
  };
  double quad = quad_of();

  BruteForceResult best;
  best.evaluations = points;
  best.opt_value = objective_at_binary(inst, x);
  best.argmax.assign(x.begin() + off, x.end());

  std::vector<double> cand(nb, 0.0);
  for (std::uint64_t k = 1; k < points; ++k) {
    int j = std::countr_zero(k);  // Gray code: this bit flips between k-1 and k
    int xi = j + off;
    quad += -4.0 * x[xi] * g[xi] + 4.0 * diag[xi];
    for (int idx = c.row_start[xi]; idx < c.row_start[xi + 1]; ++idx) {
      g[c.col[idx]] -= 2.0 * x[xi] * c.val[idx];
    }
    x[xi] = -x[xi];
    if (k % kRefreshPeriod == 0) {
      g = symm_matvec(c, x);
      quad = quad_of();
    }

    double cur = reported_linear(inst, quad);
    if (cur >= best.opt_value - 1e-9 * (1.0 + std::abs(best.opt_value))) {
      double exact = objective_at_binary(inst, x);
      cand.assign(x.begin() + off, x.end());
      if (exact > best.opt_value ||
          (exact == best.opt_value &&
           std::lexicographical_compare(cand.begin(), cand.end(), best.argmax.begin(),
                                        best.argmax.end()))) {
        best.opt_value = exact;
        best.argmax = cand;
      }
    }
  }
  return best;
}

BruteForceResult brute_force_product(const Instance& inst) {
  const int nb = inst.n_binary;
  const int off = inst.homogenized() ? 1 : 0;
  const std::uint64_t points = 1ULL << nb;

  std::vector<double> x(static_cast<std::size_t>(inst.objective.p), -1.0);
  if (off == 1) x[0] = 1.0;

  BruteForceResult best;
  best.evaluations = points;
  best.opt_value = objective_at_binary(inst, x);
  best.argmax.assign(x.begin() + off, x.end());

  std::vector<double> cand(nb, 0.0);
  for (std::uint64_t k = 1; k < points; ++k) {
    int j = std::countr_zero(k);
    x[j + off] = -x[j + off];
    double cur = objective_at_binary(inst, x);
    cand.assign(x.begin() + off, x.end());
    if (cur > best.opt_value ||
        (cur == best.opt_value &&
         std::lexicographical_compare(cand.begin(), cand.end(), best.argmax.begin(),
                                      best.argmax.end()))) {
      best.opt_value = cur;
      best.argmax = cand;
    }
  }
  return best;
}

}  // namespace

BruteForceResult brute_force(const Instance& inst) {
  if (inst.n_binary < 1) throw std::invalid_argument("brute_force: empty instance");
  if (inst.n_binary > kMaxBits) {
    throw std::invalid_argument("brute_force: " + std::to_string(inst.n_binary) +
                                " binary variables exceed the enumeration limit of " +
                                std::to_string(kMaxBits));
  }
  return inst.objective.kind == ObjectiveKind::Linear ? brute_force_linear(inst)
                                                      : brute_force_product(inst);
}

std::vector<double> full_sign_vector(const Instance& inst, const std::vector<double>& reduced) {
  if (static_cast<int>(reduced.size()) != inst.n_binary) {
    throw std::invalid_argument("full_sign_vector: wrong length");
  }
  if (!inst.homogenized()) return reduced;
  std::vector<double> full;
  full.reserve(reduced.size() + 1);
  full.push_back(1.0);
  full.insert(full.end(), reduced.begin(), reduced.end());
  return full;
}

double fd_gradient_check(const Objective& obj, const DenseMat& v, double step) {
  if (step <= 0.0) throw std::invalid_argument("fd_gradient_check: step must be positive");
  DenseMat grad = objective_gradient(obj, v);
  DenseMat probe = v;
  double worst = 0.0;
  for (std::size_t e = 0; e < v.data.size(); ++e) {
    double saved = probe.data[e];
    probe.data[e] = saved + step;
    double up = objective_value(obj, probe);
    probe.data[e] = saved - step;
    double down = objective_value(obj, probe);
    probe.data[e] = saved;
    double fd = (up - down) / (2.0 * step);
    double rel = std::abs(fd - grad.data[e]) / (1.0 + std::abs(grad.data[e]));
    worst = std::max(worst, rel);
  }
  return worst;
}

CertificateReport check_gamma(const DenseMat& v, double rel_tol) {
  SingularTriple trip = leading_singular_triple(v);
  DenseMat gamma = spectral_subgradient(v, trip);
  std::ostringstream why;

  double inner = frob_dot(gamma, v);
  double want = -2.0 * trip.sigma * trip.sigma;
  if (std::abs(inner - want) > rel_tol * (1.0 + std::abs(want))) {
    why << "<Gamma, V> = " << inner << " but -2 sigma1^2 = " << want;
    return {false, why.str()};
  }

  std::vector<double> sv = detail::singular_values(gamma);
  if (sv.size() >= 2 && sv[1] > 1e-8 * sv[0]) {
    why << "Gamma is not rank one: sigma2 = " << sv[1] << " vs sigma1 = " << sv[0];
    return {false, why.str()};
  }

  // psi(V) = -sigma1(V)^2 and conj = (1/4) ||Gamma||_*^2; the equality
  // psi(V) - conj(Gamma) = <Gamma, V> certifies Gamma as an exact subgradient.
  double psi = -trip.sigma * trip.sigma;
  double conj = penalty_conjugate(gamma);
  double gap = psi - conj - inner;
  if (std::abs(gap) > rel_tol * (1.0 + std::abs(inner))) {
    why << "conjugate identity violated: psi - conj - <Gamma, V> = " << gap;
    return {false, why.str()};
  }
  return {true, ""};
}

CertificateReport check_descent(const std::vector<InnerTracePoint>& trace, double rho,
                                double tol) {
  std::ostringstream why;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    double want = trace[t].f_value - rho * trace[t].specnorm_sq;
    if (std::abs(trace[t].merit - want) > 1e-10 * (1.0 + std::abs(want))) {
      why << "merit column inconsistent at k = " << trace[t].k << ": stored " << trace[t].merit
          << ", recomputed " << want;
      return {false, why.str()};
    }
  }
  for (std::size_t t = 1; t < trace.size(); ++t) {
    double prev = trace[t - 1].merit;
    double cur = trace[t].merit;
    if (cur > prev + tol * (1.0 + std::abs(prev))) {
      why << "merit increased at k = " << trace[t].k << ": " << prev << " -> " << cur;
      return {false, why.str()};
    }
    double prev_th = trace[t - 1].theta;
    double cur_th = trace[t].theta;
    if (cur_th > prev_th + tol * (1.0 + std::abs(prev_th))) {
      why << "potential increased at k = " << trace[t].k << ": " << prev_th << " -> " << cur_th;
      return {false, why.str()};
    }
  }
  return {true, ""};
}

}  // namespace dcfac
