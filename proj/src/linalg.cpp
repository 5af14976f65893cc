#include "dcfac/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dcfac {

namespace {

constexpr double kPowerRelTol = 1e-12;
constexpr int kPowerMaxIter = 2000;
constexpr int kPerturbIter = 50;
constexpr double kPerturbEps = 1e-6;

double vec_norm(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

void normalize_or_throw(std::vector<double>& x, const char* what) {
  double n = vec_norm(x);
  if (n == 0.0) throw std::runtime_error(std::string("cannot normalize zero vector in ") + what);
  for (double& v : x) v /= n;
}

}  // namespace

double frob_dot(const DenseMat& a, const DenseMat& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

double frob_norm(const DenseMat& a) { return std::sqrt(frob_dot(a, a)); }

std::vector<double> column_norms(const DenseMat& a) {
  std::vector<double> acc(a.cols, 0.0);
  for (int i = 0; i < a.rows; ++i) {
    const double* r = a.row_ptr(i);
    for (int j = 0; j < a.cols; ++j) acc[j] += r[j] * r[j];
  }
  for (double& v : acc) v = std::sqrt(v);
  return acc;
}

double SparseSymMatrix::frob_norm() const {
  double s = 0.0;
  for (double v : val) s += v * v;
  return std::sqrt(s);
}

SparseSymMatrix SparseSymMatrix::from_triplets(int dim, const std::vector<Triplet>& entries) {
  if (dim < 0) throw std::invalid_argument("negative matrix dimension");
  std::vector<Triplet> t = entries;
  for (const Triplet& e : t) {
    if (e.i < 0 || e.i >= dim || e.j < 0 || e.j >= dim)
      throw std::out_of_range("triplet index outside matrix dimension");
  }
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  SparseSymMatrix m;
  m.dim = dim;
  m.row_start.assign(dim + 1, 0);
  for (std::size_t k = 0; k < t.size();) {
    std::size_t e = k;
    double sum = 0.0;
    while (e < t.size() && t[e].i == t[k].i && t[e].j == t[k].j) sum += t[e++].v;
    m.col.push_back(t[k].j);
    m.val.push_back(sum);
    ++m.row_start[t[k].i + 1];
    k = e;
  }
  for (int i = 0; i < dim; ++i) m.row_start[i + 1] += m.row_start[i];

  // Symmetry check: every stored (i, j, v) must have a stored mirror (j, i, v).
  for (int i = 0; i < dim; ++i) {
    for (int k = m.row_start[i]; k < m.row_start[i + 1]; ++k) {
      int j = m.col[k];
      if (j == i) continue;
      const int* b = m.col.data() + m.row_start[j];
      const int* e = m.col.data() + m.row_start[j + 1];
      const int* it = std::lower_bound(b, e, i);
      if (it == e || *it != i)
        throw std::invalid_argument("sparse matrix pattern is not symmetric");
      double mirror = m.val[m.row_start[j] + (it - b)];
      if (mirror != m.val[k])
        throw std::invalid_argument("sparse matrix values are not symmetric");
    }
  }
  return m;
}

void SymBuilder::add(int i, int j, double v) {
  entries_.push_back({i, j, v});
  if (i != j) entries_.push_back({j, i, v});
}

void SymBuilder::add_raw(int i, int j, double v) { entries_.push_back({i, j, v}); }

SparseSymMatrix SymBuilder::build() const { return SparseSymMatrix::from_triplets(dim_, entries_); }

void symm_matvec(const SparseSymMatrix& c, const double* x, double* y) {
  for (int i = 0; i < c.dim; ++i) {
    double acc = 0.0;
    for (int k = c.row_start[i]; k < c.row_start[i + 1]; ++k) acc += c.val[k] * x[c.col[k]];
    y[i] = acc;
  }
}

std::vector<double> symm_matvec(const SparseSymMatrix& c, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != c.dim)
    throw std::invalid_argument("matvec dimension mismatch");
  std::vector<double> y(c.dim, 0.0);
  symm_matvec(c, x.data(), y.data());
  return y;
}

void dense_times_sparse(const DenseMat& v, const SparseSymMatrix& c, DenseMat& r) {
  if (v.cols != c.dim) throw std::invalid_argument("dense_times_sparse dimension mismatch");
  if (r.rows != v.rows || r.cols != v.cols) r = DenseMat(v.rows, v.cols);
  for (int i = 0; i < v.rows; ++i) symm_matvec(c, v.row_ptr(i), r.row_ptr(i));
}

DenseMat dense_times_sparse(const DenseMat& v, const SparseSymMatrix& c) {
  DenseMat r(v.rows, v.cols);
  dense_times_sparse(v, c, r);
  return r;
}

SingularTriple leading_singular_triple(const DenseMat& v) {
  const int m = v.rows;
  const int p = v.cols;
  if (m <= 0 || p <= 0) throw std::invalid_argument("leading_singular_triple: empty matrix");
  bool all_zero = true;
  for (double x : v.data) {
    if (x != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) throw std::invalid_argument("leading_singular_triple: zero matrix");

  // Small Gram matrix G = V V^T, built once; each power step is then O(m^2).
  std::vector<double> g(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    const double* ri = v.row_ptr(i);
    for (int j = i; j < m; ++j) {
      const double* rj = v.row_ptr(j);
      double s = 0.0;
      for (int k = 0; k < p; ++k) s += ri[k] * rj[k];
      g[static_cast<std::size_t>(i) * m + j] = s;
      g[static_cast<std::size_t>(j) * m + i] = s;
    }
  }

  std::vector<double> u(m, 1.0 / std::sqrt(static_cast<double>(m)));
  std::vector<double> w(m, 0.0);
  double rayleigh = 0.0;
  bool have_prev = false;
  bool converged = false;
  bool perturbed = false;
  for (int iter = 0; iter < kPowerMaxIter; ++iter) {
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      const double* gi = g.data() + static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; ++j) acc += gi[j] * u[j];
      w[i] = acc;
    }
    double wn = vec_norm(w);
    if (wn <= 1e-300) {
      // Start (numerically) annihilated by G. G != 0 is PSD, so some diagonal
      // entry is positive; restart from that axis.
      int jbest = 0;
      double dbest = -1.0;
      for (int j = 0; j < m; ++j) {
        double d = g[static_cast<std::size_t>(j) * m + j];
        if (d > dbest) {
          dbest = d;
          jbest = j;
        }
      }
      std::fill(u.begin(), u.end(), 0.0);
      u[jbest] = 1.0;
      have_prev = false;
      continue;
    }
    double r = 0.0;
    for (int i = 0; i < m; ++i) r += u[i] * w[i];
    if (have_prev && std::abs(r - rayleigh) <= kPowerRelTol * std::abs(r)) {
      rayleigh = r;
      converged = true;
      break;
    }
    rayleigh = r;
    have_prev = true;
    for (int i = 0; i < m; ++i) u[i] = w[i] / wn;
    if (iter == kPerturbIter && !perturbed) {
      u[0] += kPerturbEps;
      normalize_or_throw(u, "leading_singular_triple");
      have_prev = false;
      perturbed = true;
    }
  }

  SingularTriple out;
  out.converged = converged;
  out.left = u;
  out.right.assign(p, 0.0);
  for (int i = 0; i < m; ++i) {
    const double* ri = v.row_ptr(i);
    double ui = u[i];
    for (int k = 0; k < p; ++k) out.right[k] += ui * ri[k];
  }
  double sn = vec_norm(out.right);
  if (sn == 0.0) throw std::runtime_error("leading_singular_triple: degenerate iterate");
  for (double& x : out.right) x /= sn;
  out.sigma = sn;
  return out;
}

double spectral_norm(const SparseSymMatrix& c) {
  const int p = c.dim;
  if (p == 0) return 0.0;
  bool all_zero = true;
  for (double v : c.val) {
    if (v != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (c.empty() || all_zero) return 0.0;

  std::vector<double> x(p, 1.0 / std::sqrt(static_cast<double>(p)));
  std::vector<double> y(p, 0.0);
  double est = 0.0;
  bool have_prev = false;
  bool perturbed = false;
  for (int iter = 0; iter < kPowerMaxIter; ++iter) {
    symm_matvec(c, x.data(), y.data());
    double yn = vec_norm(y);
    if (yn <= 1e-300) {
      // x fell in the null space; lean on the first column that C acts on.
      int jnz = 0;
      for (int i = 0; i < p && jnz == 0; ++i) {
        for (int k = c.row_start[i]; k < c.row_start[i + 1]; ++k) {
          if (c.val[k] != 0.0) {
            jnz = c.col[k] + 1;
            break;
          }
        }
      }
      x[jnz - 1] += kPerturbEps;
      normalize_or_throw(x, "spectral_norm");
      have_prev = false;
      continue;
    }
    // ||C x|| for unit x is the square root of the Rayleigh quotient of C^2;
    // unlike x^T C x it converges to ||C|| even when +sigma and -sigma tie.
    if (have_prev && std::abs(yn - est) <= kPowerRelTol * yn) {
      est = yn;
      break;
    }
    est = yn;
    have_prev = true;
    for (int i = 0; i < p; ++i) x[i] = y[i] / yn;
    if (iter == kPerturbIter && !perturbed) {
      x[0] += kPerturbEps;
      normalize_or_throw(x, "spectral_norm");
      have_prev = false;
      perturbed = true;
    }
  }
  return est;
}

}  // namespace dcfac
