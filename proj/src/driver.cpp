#include "dcfac/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "dcfac/rng.hpp"
#include "sym_eig.hpp"

namespace dcfac {

namespace {

double evaluate_extracted(const Instance& inst, const std::vector<double>& x) {
  const Objective& obj = inst.objective;
  double f = 1.0;
  for (const auto& c : obj.factors) {
    std::vector<double> y = symm_matvec(*c, x);
    double s = 0.0;
    for (int i = 0; i < c->dim; ++i) s += x[i] * y[i];
    f *= s;
  }
  return -f + inst.objective_offset;
}

}  // namespace

int auto_rank(int p) {
  int half = static_cast<int>(std::llround(p / 2.0));
  return std::max(std::min(50, half), 2);
}

FactorMatrix init_factor(int m, int p, std::uint64_t seed) {
  if (m <= 0 || p <= 0) throw std::invalid_argument("init_factor: empty shape");
  Rng rng(seed);
  DenseMat v(m, p);
  for (double& x : v.data) x = rng.normal();
  std::vector<double> norms = column_norms(v);
  for (int i = 0; i < m; ++i) {
    double* r = v.row_ptr(i);
    for (int j = 0; j < p; ++j) {
      if (norms[j] == 0.0)
        r[j] = (i == 0) ? 1.0 : 0.0;
      else
        r[j] /= norms[j];
    }
  }
  return FactorMatrix{std::move(v)};
}

double rank_one_gap(const FactorMatrix& v) {
  SingularTriple t = leading_singular_triple(v.mat);
  return std::max(0.0, static_cast<double>(v.mat.cols) - t.sigma * t.sigma);
}

std::vector<double> extract_rank_one(const FactorMatrix& v, bool homogenized) {
  SingularTriple t = leading_singular_triple(v.mat);
  std::vector<double> x(t.right.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = t.sigma * t.right[i];
  if (homogenized && x[0] < 0.0)
    for (double& e : x) e = -e;
  return x;
}

Infeasibility infeasibility(const std::vector<double>& x) {
  Infeasibility r;
  double two = 0.0;
  for (double v : x) {
    double d = std::abs(std::abs(v) - 1.0);
    r.inf_norm = std::max(r.inf_norm, d);
    double e = v * v - 1.0;
    two += e * e;
  }
  r.two_norm = std::sqrt(two);
  return r;
}

std::vector<double> round_binary(const std::vector<double>& x, bool homogenized) {
  double s = 1.0;
  if (homogenized && !x.empty() && x[0] < 0.0) s = -1.0;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (s * x[i] < 0.0) ? -1.0 : 1.0;
  return out;
}

double penalty_bound_term(const std::vector<double>& rho_trace,
                          const std::vector<double>& specnorm_trace, int l_star, int r_star,
                          double alpha, double eps, int p) {
  if (rho_trace.size() != specnorm_trace.size() + 1)
    throw std::invalid_argument("penalty_bound_term: trace lengths must differ by one");
  const int lf = static_cast<int>(specnorm_trace.size());
  if (lf == 0) throw std::invalid_argument("penalty_bound_term: empty trace");
  if (l_star < 0 || l_star > lf)
    throw std::invalid_argument("penalty_bound_term: l_star out of range");
  if (r_star < 1) throw std::invalid_argument("penalty_bound_term: r_star must be positive");
  double bound = rho_trace[lf] * specnorm_trace[lf - 1] -
                 rho_trace[l_star] * static_cast<double>(p) / r_star;
  for (int j = l_star; j <= lf - 1; ++j)
    bound += (rho_trace[j] - rho_trace[j + 1]) * specnorm_trace[j];
  return bound + alpha * eps;
}

SolveReport solve(const Objective& obj, const Instance& inst, const PenaltyConfig& cfg) {
  if (cfg.rho0 <= 0.0) throw std::invalid_argument("solve: rho0 must be positive");
  if (cfg.sigma <= 1.0) throw std::invalid_argument("solve: sigma must exceed 1");
  if (cfg.eps <= 0.0) throw std::invalid_argument("solve: eps must be positive");
  if (cfg.rho_max < cfg.rho0) throw std::invalid_argument("solve: rho_max below rho0");
  if (cfg.l_max < 1) throw std::invalid_argument("solve: l_max must be at least 1");

  const auto t_start = std::chrono::steady_clock::now();
  const int p = obj.p;
  const int m = cfg.m > 0 ? cfg.m : auto_rank(p);

  SolveReport rep;
  rep.name = inst.name;
  rep.problem = inst.problem;
  rep.n_binary = inst.n_binary;
  rep.p = p;
  rep.m = m;
  rep.seed = cfg.seed;
  rep.beta_mode = cfg.beta_mode;

  FactorMatrix v = init_factor(m, p, cfg.seed);
  SingularTriple trip = leading_singular_triple(v.mat);

  const LipschitzInfo li = lipschitz_estimate(obj);
  const double eta = objective_scale(obj);
  const bool linear = obj.kind == ObjectiveKind::Linear;

  InnerConfig ic;
  ic.beta_mode = cfg.beta_mode;
  ic.eta = eta;
  ic.record_trace = cfg.record_inner_traces;
  if (linear) {
    ic.fixed_step = true;
    ic.step_l = 1.0005 * li.l_tilde;  // 2.001 ||C||, strictly above the exact constant
    ic.pot_l = ic.step_l;
    ic.pot_gamma = ic.step_l > 0.0 ? 0.25 * (ic.step_l - li.l_tilde) / ic.step_l : 0.0;
  } else {
    ic.fixed_step = false;
    ic.search_cap = li.l_tilde;
    ic.pot_l = 0.0;
    ic.pot_gamma = 0.0;
  }

  std::optional<std::chrono::steady_clock::time_point> deadline;
  if (cfg.time_limit_s)
    deadline = t_start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(*cfg.time_limit_s));
  ic.deadline = deadline;

  double rho = cfg.rho0;
  double accepted_l = li.l_tilde;  // product warm-start seed: the cap itself
  bool first_outer = true;
  rep.exit_reason = "l_max";

  for (int l = 0; l < cfg.l_max; ++l) {
    if (deadline && std::chrono::steady_clock::now() >= *deadline) {
      rep.exit_reason = "time_limit";
      break;
    }
    double incoming_gap = std::max(0.0, static_cast<double>(p) - trip.sigma * trip.sigma);
    ic.rho = rho;
    ic.k_max = incoming_gap > 1.0 ? 3 : 3000;
    if (!linear) {
      ic.step_l = first_outer ? li.l_tilde : std::min(0.5 * accepted_l, li.l_tilde);
      if (ic.step_l <= 0.0) ic.step_l = li.l_tilde;
    }

    InnerResult ir = solve_penalized(obj, v, ic);
    rep.inner_iters += ir.iters;
    v.mat.swap(ir.v.mat);
    trip = ir.triple;
    accepted_l = ir.accepted_l;
    first_outer = false;

    rep.rho_trace.push_back(rho);
    rep.specnorm_trace.push_back(trip.sigma * trip.sigma);
    if (cfg.record_inner_traces) rep.inner_traces.push_back(std::move(ir.trace));
    if (cfg.outer_observer) cfg.outer_observer(l, rho, v.mat);
    rep.outer_iters = l + 1;

    double gap = std::max(0.0, static_cast<double>(p) - trip.sigma * trip.sigma);
    if (gap <= cfg.eps) {
      rep.exited_normally = true;
      rep.exit_reason = "gap";
      break;
    }
    if (ir.hit_deadline) {
      rep.exit_reason = "time_limit";
      break;
    }
    rho = std::min(cfg.sigma * rho, cfg.rho_max);
  }

  rep.rho_final = rep.rho_trace.empty() ? cfg.rho0 : rep.rho_trace.back();
  // One-past-the-end entry so the bound term can use the post-update penalty.
  rep.rho_trace.push_back(std::min(cfg.sigma * rep.rho_final, cfg.rho_max));

  rep.sigma1 = trip.sigma;
  rep.rank_one_gap_final = std::max(0.0, static_cast<double>(p) - trip.sigma * trip.sigma);

  const bool homog = inst.homogenized();
  rep.x.assign(trip.right.size(), 0.0);
  for (std::size_t i = 0; i < rep.x.size(); ++i) rep.x[i] = trip.sigma * trip.right[i];
  if (homog && rep.x[0] < 0.0)
    for (double& e : rep.x) e = -e;

  Infeasibility inf = infeasibility(rep.x);
  rep.infeas_inf = inf.inf_norm;
  rep.infeas_two = inf.two_norm;
  rep.x_binary = round_binary(rep.x, homog);
  rep.obj = evaluate_extracted(inst, rep.x);
  rep.obj_rounded = objective_at_binary(inst, rep.x_binary);

  {
    ObjectiveOracle oracle(obj);
    rep.f_final = oracle.value(v.mat);
  }

  std::vector<double> sv = detail::singular_values(v.mat);
  rep.sigma_ratio = (sv.size() > 1 && sv[0] > 0.0) ? sv[1] / sv[0] : 0.0;

  rep.bval = cfg.bval ? cfg.bval : inst.known_best;
  if (rep.bval && *rep.bval != 0.0)
    rep.gap_percent = 100.0 * (rep.obj - *rep.bval) / std::abs(*rep.bval);

  if (!rep.specnorm_trace.empty()) {
    int r_star = cfg.r_star ? *cfg.r_star : m;
    int l_star = std::min(cfg.l_star, static_cast<int>(rep.specnorm_trace.size()));
    rep.bound_term = penalty_bound_term(rep.rho_trace, rep.specnorm_trace, l_star, r_star, eta,
                                        cfg.eps, p);
  }

  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

}  // namespace dcfac
