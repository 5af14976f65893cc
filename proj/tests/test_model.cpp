#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "dcfac/driver.hpp"
#include "dcfac/model.hpp"
#include "dcfac/oracle.hpp"
#include "dcfac/rng.hpp"

using namespace dcfac;

namespace {

double dense_entry(const SparseSymMatrix& c, int i, int j) {
  for (int idx = c.row_start[i]; idx < c.row_start[i + 1]; ++idx) {
    if (c.col[idx] == j) return c.val[idx];
  }
  return 0.0;
}

double quad(const SparseSymMatrix& c, const std::vector<double>& x) {
  auto y = symm_matvec(c, x);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

SparseSymMatrix random_sym(int n, Rng& rng, double lo, double hi) {
  SymBuilder b(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = rng.uniform(lo, hi);
      if (i == j) b.add_raw(i, i, v);
      else b.add(i, j, v);
    }
  return b.build();
}

}  // namespace

TEST_CASE("build_ubqp on the 1x1 matrix [2]") {
  SymBuilder b(1);
  b.add_raw(0, 0, 2.0);
  auto [obj, inst] = build_ubqp(b.build(), "a2");

  CHECK(obj.kind == ObjectiveKind::Linear);
  CHECK(obj.p == 2);
  CHECK(inst.n_binary == 1);
  CHECK(inst.objective_offset == doctest::Approx(0.5));
  // C = [[0, -0.5], [-0.5, -0.5]]
  const auto& c = obj.linear();
  CHECK(dense_entry(c, 0, 0) == doctest::Approx(0.0));
  CHECK(dense_entry(c, 0, 1) == doctest::Approx(-0.5));
  CHECK(dense_entry(c, 1, 0) == doctest::Approx(-0.5));
  CHECK(dense_entry(c, 1, 1) == doctest::Approx(-0.5));

  // z = 1 attains z^T A z = 2 = -<C, xx^T> + offset at x = (1, 1).
  CHECK(objective_at_binary(inst, {1.0, 1.0}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(objective_at_binary(inst, {1.0, -1.0}) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("build_ubqp on the zero matrix") {
  SymBuilder b(2);
  auto [obj, inst] = build_ubqp(b.build(), "zero");
  CHECK(obj.linear().nnz() == 0);
  CHECK(inst.objective_offset == 0.0);
  CHECK(objective_at_binary(inst, {1.0, 1.0, -1.0}) == doctest::Approx(0.0));
}

TEST_CASE("build_ubqp expands the swap matrix") {
  SymBuilder b(2);
  b.add(0, 1, 1.0);
  auto [obj, inst] = build_ubqp(b.build(), "swap");
  const auto& c = obj.linear();
  // C = -1/4 [[0,1,1],[1,0,1],[1,1,0]], offset = 1/2.
  CHECK(inst.objective_offset == doctest::Approx(0.5));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double want = i == j ? 0.0 : -0.25;
      CHECK(dense_entry(c, i, j) == doctest::Approx(want));
    }
  }
}

TEST_CASE("build_maxcut on a single unit edge") {
  SymBuilder b(2);
  b.add(0, 1, 1.0);
  auto [obj, inst] = build_maxcut(b.build(), "edge");
  const auto& c = obj.linear();
  CHECK(dense_entry(c, 0, 0) == doctest::Approx(-0.25));
  CHECK(dense_entry(c, 0, 1) == doctest::Approx(0.25));
  CHECK(dense_entry(c, 1, 1) == doctest::Approx(-0.25));
  CHECK(objective_at_binary(inst, {1.0, -1.0}) == doctest::Approx(1.0));
  CHECK(objective_at_binary(inst, {1.0, 1.0}) == doctest::Approx(0.0));
}

TEST_CASE("build_maxcut rejects a nonzero diagonal") {
  SymBuilder b(2);
  b.add_raw(0, 0, 1.0);
  CHECK_THROWS(build_maxcut(b.build(), "bad"));
}

TEST_CASE("build_maxcut triangle has max cut 2") {
  SymBuilder b(3);
  b.add(0, 1, 1.0);
  b.add(1, 2, 1.0);
  b.add(0, 2, 1.0);
  auto [obj, inst] = build_maxcut(b.build(), "triangle");
  // C = (W - 2I) / 4: diagonal -0.5, off-diagonal 0.25.
  CHECK(dense_entry(obj.linear(), 0, 0) == doctest::Approx(-0.5));
  CHECK(dense_entry(obj.linear(), 0, 1) == doctest::Approx(0.25));

  double best = -1e300;
  for (int bits = 0; bits < 8; ++bits) {
    std::vector<double> x(3);
    for (int i = 0; i < 3; ++i) x[i] = (bits >> i) & 1 ? 1.0 : -1.0;
    best = std::max(best, objective_at_binary(inst, x));
  }
  CHECK(best == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("build_product places blocks per the bordered formula") {
  // Factor 1: Q = [1], c = 0, a = 0 -> entry 1 at position (1,1) (0-based).
  // Factor 2: Q = [0], c = (2), a = 0 -> entries 1 at (0,2) and (2,0).
  SymBuilder q1(1);
  q1.add_raw(0, 0, 1.0);
  SymBuilder q2(1);
  std::vector<ProductFactor> parts;
  parts.push_back({q1.build(), {0.0}, 0.0});
  parts.push_back({q2.build(), {2.0}, 0.0});
  auto [obj, inst] = build_product(parts, "placement");

  CHECK(obj.kind == ObjectiveKind::Product);
  CHECK(obj.p == 3);
  CHECK(inst.n_binary == 2);
  const auto& c1 = *obj.factors[0];
  const auto& c2 = *obj.factors[1];
  CHECK(dense_entry(c1, 1, 1) == doctest::Approx(1.0));
  CHECK(c1.nnz() == 1);
  CHECK(dense_entry(c2, 0, 2) == doctest::Approx(1.0));
  CHECK(dense_entry(c2, 2, 0) == doctest::Approx(1.0));
  CHECK(c2.nnz() == 2);
}

TEST_CASE("build_product with constant factors is identically one") {
  SymBuilder q(1);
  std::vector<ProductFactor> parts(2, ProductFactor{q.build(), {0.0}, 1.0});
  auto [obj, inst] = build_product(parts, "const");
  FactorMatrix v = init_factor(2, obj.p, 5);
  CHECK(objective_value(obj, v.mat) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(objective_at_binary(inst, {1.0, 1.0, -1.0}) == doctest::Approx(-1.0));  // negated product
}

TEST_CASE("objective_value matches hand evaluations") {
  SymBuilder eye(3);
  for (int i = 0; i < 3; ++i) eye.add_raw(i, i, 1.0);
  Objective ident{ObjectiveKind::Linear, 3, {std::make_shared<SparseSymMatrix>(eye.build())}};
  FactorMatrix v = init_factor(2, 3, 7);
  CHECK(objective_value(ident, v.mat) == doctest::Approx(3.0).epsilon(1e-12));

  SymBuilder edge(2);
  edge.add_raw(0, 0, -0.25);
  edge.add_raw(1, 1, -0.25);
  edge.add(0, 1, 0.25);
  Objective cut{ObjectiveKind::Linear, 2, {std::make_shared<SparseSymMatrix>(edge.build())}};
  DenseMat w(1, 2);
  w.at(0, 0) = 1.0;
  w.at(0, 1) = -1.0;
  CHECK(objective_value(cut, w) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("objective_gradient on linear objectives") {
  SymBuilder eye(4);
  for (int i = 0; i < 4; ++i) eye.add_raw(i, i, 1.0);
  Objective ident{ObjectiveKind::Linear, 4, {std::make_shared<SparseSymMatrix>(eye.build())}};

  DenseMat zero(3, 4);
  auto g0 = objective_gradient(ident, zero);
  for (double x : g0.data) CHECK(x == 0.0);

  FactorMatrix v = init_factor(3, 4, 2);
  auto g = objective_gradient(ident, v.mat);
  for (std::size_t e = 0; e < g.data.size(); ++e)
    CHECK(g.data[e] == doctest::Approx(2.0 * v.mat.data[e]).epsilon(1e-12));
}

TEST_CASE("objective_gradient on a product combines the factor weights") {
  Rng rng(21);
  SymBuilder b1(5);
  b1.add(0, 1, 1.0);
  b1.add_raw(2, 2, -0.5);
  SymBuilder b2(5);
  b2.add(3, 4, 2.0);
  b2.add_raw(0, 0, 1.5);
  auto c1 = std::make_shared<SparseSymMatrix>(b1.build());
  auto c2 = std::make_shared<SparseSymMatrix>(b2.build());
  Objective obj{ObjectiveKind::Product, 5, {c1, c2}};

  FactorMatrix v = init_factor(3, 5, 9);
  double t1 = 0.0, t2 = 0.0;
  {
    auto vc1 = dense_times_sparse(v.mat, *c1);
    auto vc2 = dense_times_sparse(v.mat, *c2);
    t1 = frob_dot(vc1, v.mat);
    t2 = frob_dot(vc2, v.mat);
    auto g = objective_gradient(obj, v.mat);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 5; ++j)
        CHECK(g.at(i, j) ==
              doctest::Approx(2.0 * (t2 * vc1.at(i, j) + t1 * vc2.at(i, j))).epsilon(1e-12));
  }
  (void)rng;
}

TEST_CASE("finite differences confirm both gradient kinds") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto a = random_sym(5, rng, -2.0, 2.0);
    auto [lin, lin_inst] = build_ubqp(a, "fd-lin");
    FactorMatrix v = init_factor(5, lin.p, rng.next_u64());
    CHECK(fd_gradient_check(lin, v.mat, 1e-6) <= 1e-5);

    SymBuilder q1(2), q2(2);
    q1.add(0, 1, rng.uniform(-1.0, 1.0));
    q1.add_raw(0, 0, rng.uniform(-1.0, 1.0));
    q2.add_raw(1, 1, rng.uniform(-1.0, 1.0));
    std::vector<ProductFactor> parts;
    parts.push_back({q1.build(), {rng.uniform(-1.0, 1.0), 0.0}, rng.uniform(-1.0, 1.0)});
    parts.push_back({q2.build(), {0.0, rng.uniform(-1.0, 1.0)}, rng.uniform(-1.0, 1.0)});
    auto [prod, prod_inst] = build_product(parts, "fd-prod");
    FactorMatrix w = init_factor(4, prod.p, rng.next_u64());
    CHECK(fd_gradient_check(prod, w.mat, 1e-6) <= 1e-5);
    (void)lin_inst;
    (void)prod_inst;
  }
}

TEST_CASE("lipschitz_estimate formulas") {
  SymBuilder eye(6);
  for (int i = 0; i < 6; ++i) eye.add_raw(i, i, 1.0);
  Objective ident{ObjectiveKind::Linear, 6, {std::make_shared<SparseSymMatrix>(eye.build())}};
  auto li = lipschitz_estimate(ident);
  CHECK(li.l_tilde == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(li.exact);

  SymBuilder swap(2);
  swap.add(0, 1, 1.0);
  Objective sw{ObjectiveKind::Linear, 2, {std::make_shared<SparseSymMatrix>(swap.build())}};
  CHECK(lipschitz_estimate(sw).l_tilde == doctest::Approx(2.0).epsilon(1e-10));

  SymBuilder eye3(3);
  for (int i = 0; i < 3; ++i) eye3.add_raw(i, i, 1.0);
  auto c = std::make_shared<SparseSymMatrix>(eye3.build());
  Objective prod{ObjectiveKind::Product, 3, {c, c}};
  auto lp = lipschitz_estimate(prod);
  CHECK(lp.l_tilde == doctest::Approx(36.0 * std::sqrt(3.0)).epsilon(1e-10));
  CHECK_FALSE(lp.exact);
}

TEST_CASE("objective_scale is Frobenius-based") {
  SymBuilder b(2);
  b.add(0, 1, 3.0);  // ||C||_F = sqrt(2 * 9) = sqrt(18)
  auto c = std::make_shared<SparseSymMatrix>(b.build());
  Objective lin{ObjectiveKind::Linear, 2, {c}};
  CHECK(objective_scale(lin) == doctest::Approx(std::sqrt(18.0)));

  SymBuilder b2(2);
  b2.add_raw(0, 0, 7.0);  // ||C2||_F = 7 > ||C1||_F
  auto c2 = std::make_shared<SparseSymMatrix>(b2.build());
  Objective prod{ObjectiveKind::Product, 2, {c, c2}};
  CHECK(objective_scale(prod) == doctest::Approx(7.0));
}

TEST_CASE("homogenization reproduces z^T A z for every assignment") {
  Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    int n = rng.uniform_int(2, 10);
    auto a = random_sym(n, rng, -3.0, 3.0);
    auto [obj, inst] = build_ubqp(a, "homog");
    (void)obj;
    for (int bits = 0; bits < (1 << n); ++bits) {
      std::vector<double> z(n), x(n + 1);
      x[0] = 1.0;
      for (int i = 0; i < n; ++i) {
        z[i] = (bits >> i) & 1;
        x[i + 1] = 2.0 * z[i] - 1.0;
      }
      double want = quad(a, z);
      CHECK(objective_at_binary(inst, x) == doctest::Approx(want).epsilon(1e-9));
    }
  }
}

TEST_CASE("objective_at_binary is sign-invariant") {
  Rng rng(51);
  auto a = random_sym(4, rng, -2.0, 2.0);
  auto [objU, ubqp] = build_ubqp(a, "s");
  std::vector<double> x{1.0, -1.0, 1.0, 1.0, -1.0};
  std::vector<double> nx;
  for (double v : x) nx.push_back(-v);
  CHECK(objective_at_binary(ubqp, x) == doctest::Approx(objective_at_binary(ubqp, nx)));
  (void)objU;

  SymBuilder w(3);
  w.add(0, 1, 1.0);
  w.add(1, 2, -2.0);
  auto [objC, cut] = build_maxcut(w.build(), "c");
  std::vector<double> y{1.0, -1.0, -1.0}, ny{-1.0, 1.0, 1.0};
  CHECK(objective_at_binary(cut, y) == doctest::Approx(objective_at_binary(cut, ny)));
  (void)objC;
}

TEST_CASE("objective_at_binary rejects non-binary entries") {
  SymBuilder w(2);
  w.add(0, 1, 1.0);
  auto [obj, inst] = build_maxcut(w.build(), "b");
  (void)obj;
  CHECK_THROWS(objective_at_binary(inst, {1.0, 0.5}));
  CHECK_THROWS(objective_at_binary(inst, {1.0}));
}

TEST_CASE("ubqp sign normalization fixes the homogenization coordinate") {
  SymBuilder b(1);
  b.add_raw(0, 0, 2.0);
  auto [obj, inst] = build_ubqp(b.build(), "a2");
  (void)obj;
  CHECK(objective_at_binary(inst, {-1.0, -1.0}) == doctest::Approx(2.0));
}

TEST_CASE("max-cut objective equals the explicit cut formula") {
  Rng rng(61);
  int n = 6;
  SymBuilder b(n);
  std::vector<Triplet> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform01() < 0.5) {
        double w = rng.uniform(-2.0, 2.0);
        b.add(i, j, w);
        edges.push_back({i, j, w});
      }
  auto [obj, inst] = build_maxcut(b.build(), "cutform");
  (void)obj;
  for (int bits = 0; bits < (1 << n); ++bits) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = (bits >> i) & 1 ? 1.0 : -1.0;
    double cutw = 0.0;
    for (const auto& e : edges) cutw += 0.5 * e.v * (1.0 - x[e.i] * x[e.j]);
    CHECK(objective_at_binary(inst, x) == doctest::Approx(cutw).epsilon(1e-9));
  }
}

TEST_CASE("ObjectiveOracle agrees with the standalone evaluators") {
  Rng rng(71);
  auto a = random_sym(6, rng, -2.0, 2.0);
  auto [lin, inst] = build_ubqp(a, "oracle");
  (void)inst;
  ObjectiveOracle oracle(lin);
  FactorMatrix v = init_factor(4, lin.p, 17);
  double f = 0.0;
  DenseMat g;
  oracle.value_and_gradient(v.mat, f, g);
  CHECK(f == doctest::Approx(objective_value(lin, v.mat)).epsilon(1e-13));
  auto g_ref = objective_gradient(lin, v.mat);
  for (std::size_t e = 0; e < g.data.size(); ++e)
    CHECK(g.data[e] == doctest::Approx(g_ref.data[e]).epsilon(1e-13));
  CHECK(oracle.value(v.mat) == doctest::Approx(f).epsilon(1e-13));
}

TEST_CASE("product objectives with more than two factors evaluate but do not differentiate") {
  SymBuilder q(1);
  q.add_raw(0, 0, 1.0);
  std::vector<ProductFactor> parts(3, ProductFactor{q.build(), {0.0}, 1.0});
  auto [obj, inst] = build_product(parts, "q3");
  (void)inst;
  FactorMatrix v = init_factor(2, obj.p, 3);
  CHECK(std::isfinite(objective_value(obj, v.mat)));
  CHECK_THROWS(objective_gradient(obj, v.mat));
  CHECK_THROWS(lipschitz_estimate(obj));
}
