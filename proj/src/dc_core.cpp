#include "dcfac/dc_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sym_eig.hpp"

namespace dcfac {

namespace {

// out = a + s * (b - c), all shapes equal
void extrapolate_into(const DenseMat& a, double s, const DenseMat& b, const DenseMat& c,
                      DenseMat& out) {
  for (std::size_t i = 0; i < a.data.size(); ++i)
    out.data[i] = a.data[i] + s * (b.data[i] - c.data[i]);
}

void mm_step_into(const DenseMat& u, const DenseMat& gamma, const DenseMat& grad_u, double l,
                  double rho, DenseMat& out) {
  const int m = u.rows, p = u.cols;
  if (out.rows != m || out.cols != p) out = DenseMat(m, p);
  const double denom = l + 2.0 * rho;
  if (denom <= 0.0) throw std::invalid_argument("mm_step: nonpositive l + 2 rho");
  for (std::size_t i = 0; i < u.data.size(); ++i)
    out.data[i] = (l * u.data[i] - grad_u.data[i] - rho * gamma.data[i]) / denom;
  std::vector<double> norms(p, 0.0);
  for (int i = 0; i < m; ++i) {
    const double* r = out.row_ptr(i);
    for (int j = 0; j < p; ++j) norms[j] += r[j] * r[j];
  }
  for (double& n : norms) n = std::sqrt(n);
  for (int i = 0; i < m; ++i) {
    double* r = out.row_ptr(i);
    for (int j = 0; j < p; ++j) {
      if (norms[j] == 0.0)
        r[j] = (i == 0) ? 1.0 : 0.0;
      else
        r[j] /= norms[j];
    }
  }
}

void subgradient_into(const DenseMat& v, const SingularTriple& t, DenseMat& out) {
  const int m = v.rows, p = v.cols;
  if (out.rows != m || out.cols != p) out = DenseMat(m, p);
  // w = V p1, Gamma = -2 w p1^T (rank one by construction)
  std::vector<double> w(m, 0.0);
  for (int i = 0; i < m; ++i) {
    const double* r = v.row_ptr(i);
    double acc = 0.0;
    for (int j = 0; j < p; ++j) acc += r[j] * t.right[j];
    w[i] = acc;
  }
  for (int i = 0; i < m; ++i) {
    double* r = out.row_ptr(i);
    double wi = -2.0 * w[i];
    for (int j = 0; j < p; ++j) r[j] = wi * t.right[j];
  }
}

}  // namespace

bool has_unit_columns(const DenseMat& m, double tol) {
  std::vector<double> norms = column_norms(m);
  for (double n : norms)
    if (std::abs(n - 1.0) > tol) return false;
  return true;
}

FactorMatrix make_factor(DenseMat m) {
  if (!has_unit_columns(m))
    throw std::invalid_argument("factor matrix columns are not unit within 1e-12");
  return FactorMatrix{std::move(m)};
}

DenseMat spectral_subgradient(const DenseMat& v) {
  return spectral_subgradient(v, leading_singular_triple(v));
}

DenseMat spectral_subgradient(const DenseMat& v, const SingularTriple& t) {
  DenseMat out(v.rows, v.cols);
  subgradient_into(v, t, out);
  return out;
}

FactorMatrix mm_step(const DenseMat& u, const DenseMat& gamma, const DenseMat& grad_u, double l,
                     double rho) {
  DenseMat out;
  mm_step_into(u, gamma, grad_u, l, rho, out);
  return FactorMatrix{std::move(out)};
}

double subproblem_value(const DenseMat& v, const DenseMat& u, const DenseMat& gamma,
                        const DenseMat& grad_u, double l, double rho) {
  double lin = 0.0, vv = 0.0, dist = 0.0;
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    lin += (grad_u.data[i] + rho * gamma.data[i]) * v.data[i];
    vv += v.data[i] * v.data[i];
    double d = v.data[i] - u.data[i];
    dist += d * d;
  }
  return lin + rho * vv + 0.5 * l * dist;
}

SearchResult search_lipschitz(ObjectiveOracle& oracle, const DenseMat& u, double f_u,
                              const DenseMat& grad_u, const DenseMat& gamma, double rho,
                              double l_init) {
  if (l_init <= 0.0) throw std::invalid_argument("search_lipschitz: nonpositive start");
  double l = l_init;
  SearchResult res;
  for (int d = 0; d <= 60; ++d) {
    mm_step_into(u, gamma, grad_u, l, rho, res.v.mat);
    double f_v = oracle.value(res.v.mat);
    double lin = 0.0, dist = 0.0;
    for (std::size_t i = 0; i < u.data.size(); ++i) {
      double diff = res.v.mat.data[i] - u.data[i];
      lin += grad_u.data[i] * diff;
      dist += diff * diff;
    }
    if (f_v <= f_u + lin + 0.5 * l * dist) {
      res.l = l;
      res.doublings = d;
      return res;
    }
    l *= 2.0;
  }
  throw std::runtime_error("search_lipschitz: no valid majorization after 60 doublings");
}

double stationarity_residual(const DenseMat& v_next, const DenseMat& u, const DenseMat& grad_next,
                             const DenseMat& grad_u, const DenseMat& gamma_next,
                             const DenseMat& gamma, double l, double rho) {
  double s = 0.0;
  for (std::size_t i = 0; i < v_next.data.size(); ++i) {
    double r = grad_next.data[i] - grad_u.data[i] - l * (v_next.data[i] - u.data[i]) +
               rho * (gamma_next.data[i] - gamma.data[i]);
    s += r * r;
  }
  return std::sqrt(s);
}

double penalty_conjugate(const DenseMat& gamma) {
  bool all_zero = true;
  for (double v : gamma.data) {
    if (v != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) return 0.0;
  std::vector<double> sv = detail::singular_values(gamma);
  double nuc = 0.0;
  for (double s : sv) nuc += s;
  return 0.25 * nuc * nuc;
}

double descent_potential(const Objective& obj, const DenseMat& v, const DenseMat& gamma,
                         const DenseMat& u, double rho, double pot_gamma, double pot_l) {
  if (!has_unit_columns(v)) return std::numeric_limits<double>::infinity();
  ObjectiveOracle oracle(obj);
  double f = oracle.value(v);
  double vv = frob_dot(v, v);
  double gv = frob_dot(gamma, v);
  double prox = 0.0;
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    double d = v.data[i] - u.data[i];
    prox += d * d;
  }
  return f + rho * vv + rho * gv + rho * penalty_conjugate(gamma) +
         0.5 * pot_gamma * pot_l * prox;
}

InnerResult solve_penalized(const Objective& obj, const FactorMatrix& start,
                            const InnerConfig& cfg) {
  if (!has_unit_columns(start.mat))
    throw std::invalid_argument("solve_penalized: start is not a factor matrix");
  if (cfg.rho <= 0.0) throw std::invalid_argument("solve_penalized: rho must be positive");

  const int m = start.mat.rows, p = start.mat.cols;
  ObjectiveOracle oracle(obj);

  DenseMat v_prev = start.mat;
  DenseMat v_curr = start.mat;
  SingularTriple trip_curr = leading_singular_triple(v_curr);
  DenseMat gamma_curr(m, p), gamma_next(m, p);
  subgradient_into(v_curr, trip_curr, gamma_curr);

  DenseMat grad_curr(m, p), grad_ubuf(m, p), grad_next(m, p), u_buf(m, p);
  double f_curr;
  oracle.value_and_gradient(v_curr, f_curr, grad_curr);

  InnerResult out;
  if (cfg.record_trace) {
    // Baseline point so the first step of the descent chains is checkable.
    InnerTracePoint t0;
    t0.k = -1;
    t0.f_value = f_curr;
    t0.specnorm_sq = trip_curr.sigma * trip_curr.sigma;
    t0.merit = f_curr - cfg.rho * t0.specnorm_sq;
    t0.residual = std::numeric_limits<double>::infinity();
    double fv = frob_dot(v_curr, v_curr);
    t0.theta = f_curr + cfg.rho * fv + cfg.rho * frob_dot(gamma_curr, v_curr) +
               cfg.rho * 0.25 * frob_dot(gamma_curr, gamma_curr);
    out.trace.push_back(t0);
  }

  NesterovSchedule sched;
  double tau = cfg.tau0;
  double l_ws = cfg.fixed_step ? cfg.step_l : std::min(cfg.step_l, cfg.search_cap);
  const double thresh_scale = std::max(1.0, cfg.eta);
  FactorMatrix v_next;

  int k = 0;
  for (; k < cfg.k_max; ++k) {
    if (cfg.deadline && std::chrono::steady_clock::now() >= *cfg.deadline) {
      out.hit_deadline = true;
      break;
    }
    double beta = (cfg.beta_mode == BetaMode::Zero) ? 0.0 : sched.next_beta();

    const DenseMat* u = &v_curr;
    const DenseMat* grad_u = &grad_curr;
    double f_u = f_curr;
    if (beta != 0.0) {
      extrapolate_into(v_curr, beta, v_curr, v_prev, u_buf);
      oracle.value_and_gradient(u_buf, f_u, grad_ubuf);
      u = &u_buf;
      grad_u = &grad_ubuf;
    }

    double l_used;
    if (cfg.fixed_step) {
      l_used = cfg.step_l;
      mm_step_into(*u, gamma_curr, *grad_u, l_used, cfg.rho, v_next.mat);
    } else {
      SearchResult sr = search_lipschitz(oracle, *u, f_u, *grad_u, gamma_curr, cfg.rho, l_ws);
      l_used = sr.l;
      l_ws = sr.l;
      v_next.mat.swap(sr.v.mat);
    }

    SingularTriple trip_next = leading_singular_triple(v_next.mat);
    subgradient_into(v_next.mat, trip_next, gamma_next);
    double f_next;
    oracle.value_and_gradient(v_next.mat, f_next, grad_next);
    double resid = stationarity_residual(v_next.mat, *u, grad_next, *grad_u, gamma_next,
                                         gamma_curr, l_used, cfg.rho);

    if (cfg.record_trace) {
      InnerTracePoint tp;
      tp.k = k;
      tp.f_value = f_next;
      tp.specnorm_sq = trip_next.sigma * trip_next.sigma;
      tp.merit = f_next - cfg.rho * tp.specnorm_sq;
      tp.residual = resid;
      // Theta at (V^{k+1}, Gamma^k, V^k); the conjugate term collapses to
      // ||Gamma||_F^2 / 4 because the constructed subgradient is rank one.
      double fv = frob_dot(v_next.mat, v_next.mat);
      double prox = 0.0;
      for (std::size_t i = 0; i < v_next.mat.data.size(); ++i) {
        double d = v_next.mat.data[i] - v_curr.data[i];
        prox += d * d;
      }
      tp.theta = f_next + cfg.rho * fv + cfg.rho * frob_dot(gamma_curr, v_next.mat) +
                 cfg.rho * 0.25 * frob_dot(gamma_curr, gamma_curr) +
                 0.5 * cfg.pot_gamma * cfg.pot_l * prox;
      out.trace.push_back(tp);
    }

    v_prev.swap(v_curr);
    v_curr.swap(v_next.mat);
    grad_curr.swap(grad_next);
    f_curr = f_next;
    trip_curr = trip_next;
    gamma_curr.swap(gamma_next);
    out.final_residual = resid;

    if (resid <= tau * thresh_scale) {
      out.residual_converged = true;
      ++k;
      break;
    }
    tau = std::max(cfg.tau_min, cfg.tau_decay * tau);
  }

  out.iters = k;
  out.v.mat = std::move(v_curr);
  out.triple = trip_curr;
  out.gamma = std::move(gamma_curr);
  out.accepted_l = cfg.fixed_step ? cfg.step_l : l_ws;
  return out;
}

}  // namespace dcfac
