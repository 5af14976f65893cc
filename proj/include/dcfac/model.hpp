#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dcfac/linalg.hpp"

namespace dcfac {

enum class ObjectiveKind { Linear, Product };

/// Objective f(X) over the factorized variable X = V^T V:
///  Linear  -> f(X) = <C, X>
///  Product -> f(X) = prod_i <C_i, X>
/// The factor matrices are shared so copies stay cheap.
struct Objective {
  ObjectiveKind kind = ObjectiveKind::Linear;
  int p = 0;
  std::vector<std::shared_ptr<const SparseSymMatrix>> factors;

  const SparseSymMatrix& linear() const { return *factors.front(); }
  int q() const { return static_cast<int>(factors.size()); }
};

enum class ProblemKind { MaxCut, Ubqp, Product };

const char* problem_kind_name(ProblemKind k);

/// A concrete problem instance. The offset is kept here rather than folded
/// into C so the reported objective matches the original formulation exactly.
struct Instance {
  ProblemKind problem = ProblemKind::MaxCut;
  std::string name;
  std::optional<double> known_best;
  double objective_offset = 0.0;
  int n_binary = 0;
  Objective objective;

  /// Instances embedded with a fixed first coordinate (x_1 = 1).
  bool homogenized() const { return problem != ProblemKind::MaxCut; }
};

struct LipschitzInfo {
  double l_tilde = 0.0;
  bool exact = false;
};

/// One factor of a product objective in original coordinates:
/// value_i(s) = a + c^T s + s^T Q s for s in {-1, 1}^l.
struct ProductFactor {
  SparseSymMatrix q;
  std::vector<double> c;
  double a = 0.0;
};

/// max z^T A z over {0,1}^n. A symmetric n x n. Embeds z = (x + 1) / 2 into
/// C over p = n + 1 sign variables; the constant offset e^T A e / 4 is kept
/// on the instance.
std::pair<Objective, Instance> build_ubqp(const SparseSymMatrix& a, std::string name,
                                          std::optional<double> known_best = std::nullopt);

/// Max-cut on symmetric weights W with zero diagonal; C = (W - Diag(W e)) / 4
/// over p = n sign variables.
std::pair<Objective, Instance> build_maxcut(const SparseSymMatrix& w, std::string name,
                                            std::optional<double> known_best = std::nullopt);

/// Product of q >= 2 factor quadratics over disjoint variable blocks of size
/// l each, homogenized to p = l*q + 1 sign variables. The reported objective
/// is the negated product.
std::pair<Objective, Instance> build_product(const std::vector<ProductFactor>& parts,
                                             std::string name,
                                             std::optional<double> known_best = std::nullopt);

/// f(V^T V).
double objective_value(const Objective& obj, const DenseMat& v);

/// Gradient of ftilde(V) = f(V^T V); only q = 2 products are supported.
DenseMat objective_gradient(const Objective& obj, const DenseMat& v);

/// Reusable evaluator that shares the V*C products between the value and the
/// gradient and avoids reallocation across repeated calls.
class ObjectiveOracle {
 public:
  explicit ObjectiveOracle(const Objective& obj);
  double value(const DenseMat& v);
  void value_and_gradient(const DenseMat& v, double& f, DenseMat& grad);
  const Objective& objective() const { return *obj_; }

 private:
  const Objective* obj_;
  std::vector<DenseMat> work_;
};

/// Upper estimate of the Lipschitz constant of grad ftilde on the feasible
/// set. Exact (2 ||C||) for Linear; the 6p(...) bound for q = 2 products.
LipschitzInfo lipschitz_estimate(const Objective& obj);

/// Scale constant used in the penalty bound diagnostics: ||C||_F for Linear,
/// max_i ||C_i||_F for products.
double objective_scale(const Objective& obj);

/// Original-formulation objective at a sign vector x (entries exactly +-1):
/// cut value for MaxCut, z^T A z for Ubqp, negated product for Product.
double objective_at_binary(const Instance& inst, const std::vector<double>& x);

}  // namespace dcfac
