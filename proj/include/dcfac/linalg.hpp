#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace dcfac {

/// Dense row-major matrix of doubles.
struct DenseMat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  DenseMat() = default;
  DenseMat(int r, int c)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
  double* row_ptr(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row_ptr(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }
  std::size_t size() const { return data.size(); }

  void swap(DenseMat& other) noexcept {
    std::swap(rows, other.rows);
    std::swap(cols, other.cols);
    data.swap(other.data);
  }
};

double frob_dot(const DenseMat& a, const DenseMat& b);
double frob_norm(const DenseMat& a);
/// Euclidean norms of every column (length = cols).
std::vector<double> column_norms(const DenseMat& a);

struct Triplet {
  int i = 0;
  int j = 0;
  double v = 0.0;
};

/// Symmetric sparse matrix in CSR form. Both triangles are stored explicitly,
/// rows are sorted by column and hold no duplicate entries.
struct SparseSymMatrix {
  int dim = 0;
  std::vector<int> row_start;  // dim + 1 offsets
  std::vector<int> col;        // nnz column indices, sorted within each row
  std::vector<double> val;     // nnz values

  std::size_t nnz() const { return col.size(); }
  double frob_norm() const;
  bool empty() const { return col.empty(); }

  /// Builds from raw triplets that already list both triangles. Duplicate
  /// coordinates are summed. Throws if the result is not symmetric.
  static SparseSymMatrix from_triplets(int dim, const std::vector<Triplet>& entries);
};

/// Accumulates symmetric entries: add(i, j, v) inserts (i,j) and, when i != j,
/// its mirror. Duplicates are summed by build().
class SymBuilder {
 public:
  explicit SymBuilder(int dim) : dim_(dim) {}
  void add(int i, int j, double v);
  /// Inserts a single coordinate without mirroring; the caller must supply
  /// both triangles itself.
  void add_raw(int i, int j, double v);
  SparseSymMatrix build() const;

 private:
  int dim_;
  std::vector<Triplet> entries_;
};

/// y = C x for symmetric sparse C.
void symm_matvec(const SparseSymMatrix& c, const double* x, double* y);
std::vector<double> symm_matvec(const SparseSymMatrix& c, const std::vector<double>& x);

/// R = V C, computed one row at a time through symm_matvec. R must be
/// preallocated with the shape of V.
void dense_times_sparse(const DenseMat& v, const SparseSymMatrix& c, DenseMat& r);
DenseMat dense_times_sparse(const DenseMat& v, const SparseSymMatrix& c);

struct SingularTriple {
  double sigma = 0.0;
  std::vector<double> left;   // length rows
  std::vector<double> right;  // length cols
  bool converged = false;
};

/// Leading singular triple of V by power iteration on the small Gram matrix
/// V V^T. Deterministic: all-ones start, relative Rayleigh-change stop at
/// 1e-12 (2000 iterations cap), one fixed perturbation if still unconverged at
/// iteration 50. Throws if V is exactly zero.
SingularTriple leading_singular_triple(const DenseMat& v);

/// max_j |lambda_j(C)| by power iteration with the same deterministic start,
/// stop, and anti-stall rules. Tracks the norm-growth Rayleigh estimate
/// ||C x_k|| (unit x_k), which handles sign-dominant eigenvalue pairs.
double spectral_norm(const SparseSymMatrix& c);

}  // namespace dcfac
