#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "dcfac/linalg.hpp"

namespace dcfac::detail {

/// Eigenvalues of a dense symmetric n x n matrix (row-major, destroyed) by
/// cyclic Jacobi rotations; returned in descending order. Intended for the
/// small Gram matrices that appear in diagnostics (n <= a few hundred).
inline std::vector<double> jacobi_sym_eigenvalues(std::vector<double> a, int n) {
  auto idx = [n](int i, int j) { return static_cast<std::size_t>(i) * n + j; };
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a[idx(i, j)]));
  if (scale > 0.0) {
    for (int sweep = 0; sweep < 60; ++sweep) {
      double off = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) off += a[idx(i, j)] * a[idx(i, j)];
      if (std::sqrt(off) <= 1e-14 * scale * n) break;
      for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
          double apq = a[idx(p, q)];
          if (std::abs(apq) <= 1e-300) continue;
          double theta = (a[idx(q, q)] - a[idx(p, p)]) / (2.0 * apq);
          double t = (theta >= 0.0 ? 1.0 : -1.0) /
                     (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          double c = 1.0 / std::sqrt(t * t + 1.0);
          double s = t * c;
          for (int k = 0; k < n; ++k) {
            double akp = a[idx(k, p)];
            double akq = a[idx(k, q)];
            a[idx(k, p)] = c * akp - s * akq;
            a[idx(k, q)] = s * akp + c * akq;
          }
          for (int k = 0; k < n; ++k) {
            double apk = a[idx(p, k)];
            double aqk = a[idx(q, k)];
            a[idx(p, k)] = c * apk - s * aqk;
            a[idx(q, k)] = s * apk + c * aqk;
          }
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = a[idx(i, i)];
  std::sort(ev.begin(), ev.end(), [](double x, double y) { return x > y; });
  return ev;
}

/// Singular values of a dense matrix in descending order, via the eigenvalues
/// of the smaller Gram side.
inline std::vector<double> singular_values(const DenseMat& v) {
  const bool wide = v.cols >= v.rows;
  const int n = wide ? v.rows : v.cols;
  std::vector<double> g(static_cast<std::size_t>(n) * n, 0.0);
  if (wide) {
    for (int i = 0; i < n; ++i) {
      const double* ri = v.row_ptr(i);
      for (int j = i; j < n; ++j) {
        const double* rj = v.row_ptr(j);
        double s = 0.0;
        for (int k = 0; k < v.cols; ++k) s += ri[k] * rj[k];
        g[static_cast<std::size_t>(i) * n + j] = s;
        g[static_cast<std::size_t>(j) * n + i] = s;
      }
    }
  } else {
    for (int r = 0; r < v.rows; ++r) {
      const double* row = v.row_ptr(r);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) g[static_cast<std::size_t>(i) * n + j] += row[i] * row[j];
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        g[static_cast<std::size_t>(i) * n + j] = g[static_cast<std::size_t>(j) * n + i];
  }
  std::vector<double> ev = jacobi_sym_eigenvalues(std::move(g), n);
  // Forming the Gram matrix squares the conditioning: eigenvalues at the
  // n * eps * lambda_max level are pure rounding noise, and taking their
  // square root would fabricate singular values ~1e-8 * sigma_max on
  // exactly low-rank inputs. Flush them to zero instead of sqrt-ing them.
  const double noise_floor =
      (ev.empty() || ev[0] <= 0.0)
          ? 0.0
          : ev[0] * (64.0 * static_cast<double>(n) *
                     std::numeric_limits<double>::epsilon());
  for (double& e : ev) e = (e <= noise_floor) ? 0.0 : std::sqrt(e);
  return ev;
}

}  // namespace dcfac::detail
