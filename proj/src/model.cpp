#include "dcfac/model.hpp"

#include <cmath>
#include <stdexcept>

namespace dcfac {

namespace {

std::shared_ptr<const SparseSymMatrix> share(SparseSymMatrix m) {
  return std::make_shared<const SparseSymMatrix>(std::move(m));
}

void check_binary(const std::vector<double>& x) {
  for (double v : x) {
    if (v != 1.0 && v != -1.0) throw std::invalid_argument("entry is not exactly +-1");
  }
}

double quad_form(const SparseSymMatrix& c, const std::vector<double>& x) {
  std::vector<double> y = symm_matvec(c, x);
  double s = 0.0;
  for (int i = 0; i < c.dim; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

const char* problem_kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::MaxCut: return "maxcut";
    case ProblemKind::Ubqp: return "ubqp";
    case ProblemKind::Product: return "product";
  }
  return "?";
}

std::pair<Objective, Instance> build_ubqp(const SparseSymMatrix& a, std::string name,
                                          std::optional<double> known_best) {
  const int n = a.dim;
  if (n <= 0) throw std::invalid_argument("build_ubqp: empty matrix");
  const int p = n + 1;
  // C = -(1/4) [[0, e^T A], [A e, A]]; constant offset e^T A e / 4.
  std::vector<double> row_sums(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = a.row_start[i]; k < a.row_start[i + 1]; ++k) row_sums[i] += a.val[k];
  double offset = 0.0;
  for (double s : row_sums) offset += s;
  offset *= 0.25;

  SymBuilder b(p);
  for (int i = 0; i < n; ++i) {
    if (row_sums[i] != 0.0) b.add(0, i + 1, -0.25 * row_sums[i]);
    for (int k = a.row_start[i]; k < a.row_start[i + 1]; ++k)
      if (a.val[k] != 0.0) b.add_raw(i + 1, a.col[k] + 1, -0.25 * a.val[k]);
  }
  Objective obj;
  obj.kind = ObjectiveKind::Linear;
  obj.p = p;
  obj.factors.push_back(share(b.build()));

  Instance inst;
  inst.problem = ProblemKind::Ubqp;
  inst.name = std::move(name);
  inst.known_best = known_best;
  inst.objective_offset = offset;
  inst.n_binary = n;
  inst.objective = obj;
  return {obj, inst};
}

std::pair<Objective, Instance> build_maxcut(const SparseSymMatrix& w, std::string name,
                                            std::optional<double> known_best) {
  const int n = w.dim;
  if (n <= 0) throw std::invalid_argument("build_maxcut: empty matrix");
  std::vector<double> row_sums(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int k = w.row_start[i]; k < w.row_start[i + 1]; ++k) {
      if (w.col[k] == i && w.val[k] != 0.0)
        throw std::invalid_argument("build_maxcut: nonzero diagonal weight");
      row_sums[i] += w.val[k];
    }
  }
  SymBuilder b(n);
  for (int i = 0; i < n; ++i) {
    if (row_sums[i] != 0.0) b.add_raw(i, i, -0.25 * row_sums[i]);
    for (int k = w.row_start[i]; k < w.row_start[i + 1]; ++k)
      if (w.val[k] != 0.0) b.add_raw(i, w.col[k], 0.25 * w.val[k]);
  }
  Objective obj;
  obj.kind = ObjectiveKind::Linear;
  obj.p = n;
  obj.factors.push_back(share(b.build()));

  Instance inst;
  inst.problem = ProblemKind::MaxCut;
  inst.name = std::move(name);
  inst.known_best = known_best;
  inst.objective_offset = 0.0;
  inst.n_binary = n;
  inst.objective = obj;
  return {obj, inst};
}

std::pair<Objective, Instance> build_product(const std::vector<ProductFactor>& parts,
                                             std::string name,
                                             std::optional<double> known_best) {
  const int q = static_cast<int>(parts.size());
  if (q < 2) throw std::invalid_argument("build_product: need at least two factors");
  const int l = parts.front().q.dim;
  for (const ProductFactor& f : parts) {
    if (f.q.dim != l || static_cast<int>(f.c.size()) != l)
      throw std::invalid_argument("build_product: inconsistent factor dimensions");
  }
  const int p = l * q + 1;

  Objective obj;
  obj.kind = ObjectiveKind::Product;
  obj.p = p;
  for (int i = 0; i < q; ++i) {
    const ProductFactor& f = parts[i];
    SymBuilder b(p);
    if (f.a != 0.0) b.add_raw(0, 0, f.a);
    const int base = 1 + l * i;
    for (int j = 0; j < l; ++j)
      if (f.c[j] != 0.0) b.add(0, base + j, 0.5 * f.c[j]);
    for (int r = 0; r < l; ++r)
      for (int k = f.q.row_start[r]; k < f.q.row_start[r + 1]; ++k)
        if (f.q.val[k] != 0.0) b.add_raw(base + r, base + f.q.col[k], f.q.val[k]);
    obj.factors.push_back(share(b.build()));
  }

  Instance inst;
  inst.problem = ProblemKind::Product;
  inst.name = std::move(name);
  inst.known_best = known_best;
  inst.objective_offset = 0.0;
  inst.n_binary = l * q;
  inst.objective = obj;
  return {obj, inst};
}

double objective_value(const Objective& obj, const DenseMat& v) {
  ObjectiveOracle oracle(obj);
  return oracle.value(v);
}

DenseMat objective_gradient(const Objective& obj, const DenseMat& v) {
  ObjectiveOracle oracle(obj);
  double f;
  DenseMat g;
  oracle.value_and_gradient(v, f, g);
  return g;
}

ObjectiveOracle::ObjectiveOracle(const Objective& obj) : obj_(&obj), work_(obj.factors.size()) {}

double ObjectiveOracle::value(const DenseMat& v) {
  double f = 1.0;
  for (std::size_t i = 0; i < obj_->factors.size(); ++i) {
    dense_times_sparse(v, *obj_->factors[i], work_[i]);
    f *= frob_dot(work_[i], v);
  }
  return f;
}

void ObjectiveOracle::value_and_gradient(const DenseMat& v, double& f, DenseMat& grad) {
  if (grad.rows != v.rows || grad.cols != v.cols) grad = DenseMat(v.rows, v.cols);
  if (obj_->kind == ObjectiveKind::Linear) {
    dense_times_sparse(v, obj_->linear(), work_[0]);
    f = frob_dot(work_[0], v);
    for (std::size_t i = 0; i < grad.data.size(); ++i) grad.data[i] = 2.0 * work_[0].data[i];
    return;
  }
  if (obj_->q() != 2)
    throw std::invalid_argument("gradient implemented for products of two factors only");
  dense_times_sparse(v, *obj_->factors[0], work_[0]);
  dense_times_sparse(v, *obj_->factors[1], work_[1]);
  double t1 = frob_dot(work_[0], v);
  double t2 = frob_dot(work_[1], v);
  f = t1 * t2;
  // grad ftilde = 2 V (t2 C1 + t1 C2)
  for (std::size_t i = 0; i < grad.data.size(); ++i)
    grad.data[i] = 2.0 * (t2 * work_[0].data[i] + t1 * work_[1].data[i]);
}

LipschitzInfo lipschitz_estimate(const Objective& obj) {
  if (obj.kind == ObjectiveKind::Linear)
    return {2.0 * spectral_norm(obj.linear()), true};
  if (obj.q() != 2)
    throw std::invalid_argument("lipschitz_estimate implemented for products of two factors only");
  const SparseSymMatrix& c1 = *obj.factors[0];
  const SparseSymMatrix& c2 = *obj.factors[1];
  double l = 6.0 * obj.p *
             (spectral_norm(c1) * c2.frob_norm() + c1.frob_norm() * spectral_norm(c2));
  return {l, false};
}

double objective_scale(const Objective& obj) {
  double s = 0.0;
  for (const auto& c : obj.factors) s = std::max(s, c->frob_norm());
  return s;
}

double objective_at_binary(const Instance& inst, const std::vector<double>& x) {
  const Objective& obj = inst.objective;
  if (static_cast<int>(x.size()) != obj.p)
    throw std::invalid_argument("objective_at_binary: wrong vector length");
  check_binary(x);
  std::vector<double> xs = x;
  if (inst.homogenized() && xs[0] < 0.0)
    for (double& v : xs) v = -v;
  switch (inst.problem) {
    case ProblemKind::MaxCut:
      return -quad_form(obj.linear(), xs);
    case ProblemKind::Ubqp:
      return -quad_form(obj.linear(), xs) + inst.objective_offset;
    case ProblemKind::Product: {
      double f = 1.0;
      for (const auto& c : obj.factors) f *= quad_form(*c, xs);
      return -f;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace dcfac
