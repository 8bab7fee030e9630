#include "tcsim/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "tcsim/errors.hpp"

namespace tcsim {

namespace {

void check_shape(std::span<const double> diag, std::span<const double> off) {
  if (diag.empty()) throw DomainError("tridiagonal solver: empty matrix");
  if (off.size() + 1 != diag.size()) {
    throw DomainError("tridiagonal solver: off-diagonal length must be dim-1");
  }
}

// Normalizes src into dst with the first significant component positive.
void normalize_signed(const double* src, double* dst, std::size_t n) {
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) norm += src[i] * src[i];
  norm = std::sqrt(norm);
  double sign = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::fabs(src[i]) > 1e-12 * norm) {
      sign = src[i] > 0 ? 1.0 : -1.0;
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i) dst[i] = sign * src[i] / norm;
}

TridiagonalEigen ql_solve(std::span<const double> diag, std::span<const double> off,
                          bool want_vectors, int max_sweeps_per_value) {
  const std::size_t n = diag.size();

  std::vector<double> d(diag.begin(), diag.end());
  // e[i] couples rows i and i+1; e[n-1] is a zero sentinel.
  std::vector<double> e(n, 0.0);
  std::copy(off.begin(), off.end(), e.begin());

  std::vector<double> v;
  if (want_vectors) {
    v.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  }
  // Apply a plane rotation to columns i and i+1 of v.
  auto rotate = [&](std::size_t i, double c, double s) {
    double* ci = v.data() + i * n;
    double* cj = v.data() + (i + 1) * n;
    for (std::size_t k = 0; k < n; ++k) {
      const double h = cj[k];
      cj[k] = s * ci[k] + c * h;
      ci[k] = c * ci[k] - s * h;
    }
  };

  const double eps = std::numeric_limits<double>::epsilon();
  double shift_total = 0.0;
  double tst1 = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::fabs(d[l]) + std::fabs(e[l]));
    std::size_t m = l;
    while (m < n && std::fabs(e[m]) > eps * tst1) ++m;
    if (m == n) m = n - 1;

    if (m > l) {
      int sweeps = 0;
      do {
        if (++sweeps > max_sweeps_per_value) {
          throw ConvergenceError("tridiagonal QL did not converge for eigenvalue " +
                                 std::to_string(l) + " of dim " + std::to_string(n));
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        shift_total += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          if (want_vectors) rotate(ii, c, s);
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::fabs(e[l]) > eps * tst1);
    }
    d[l] += shift_total;
    e[l] = 0.0;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  TridiagonalEigen out;
  out.dim = n;
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.values[k] = d[order[k]];
  if (want_vectors) {
    out.vectors.resize(n * n);
    for (std::size_t k = 0; k < n; ++k) {
      normalize_signed(v.data() + order[k] * n, out.vectors.data() + k * n, n);
    }
  }
  return out;
}

// LU factors of T - sigma I with partial pivoting (row i+1 may swap into
// row i), giving an upper factor with two superdiagonals.
class ShiftedLu {
 public:
  ShiftedLu(std::span<const double> diag, std::span<const double> off, double sigma, double tiny)
      : n_(diag.size()), dl_(off.begin(), off.end()), d_(n_), du_(off.begin(), off.end()),
        du2_(n_ > 2 ? n_ - 2 : 0, 0.0), swapped_(n_ > 0 ? n_ - 1 : 0, false) {
    for (std::size_t i = 0; i < n_; ++i) d_[i] = diag[i] - sigma;
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (std::fabs(d_[i]) >= std::fabs(dl_[i])) {
        if (d_[i] != 0.0) {
          const double f = dl_[i] / d_[i];
          dl_[i] = f;
          d_[i + 1] -= f * du_[i];
        } else {
          dl_[i] = 0.0;
        }
      } else {
        const double f = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = f;
        const double tmp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = tmp - f * d_[i + 1];
        if (i + 2 < n_) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -f * du_[i + 1];
        }
        swapped_[i] = true;
      }
    }
    // Near-singular is the point of inverse iteration; only exact or
    // denormal-scale pivots are nudged.
    for (double& p : d_) {
      if (std::fabs(p) < tiny) p = p < 0 ? -tiny : tiny;
    }
  }

  void solve(std::vector<double>& b) const {
    for (std::size_t i = 0; i + 1 < n_; ++i) {
      if (!swapped_[i]) {
        b[i + 1] -= dl_[i] * b[i];
      } else {
        const double t = b[i] - dl_[i] * b[i + 1];
        b[i] = b[i + 1];
        b[i + 1] = t;
      }
    }
    b[n_ - 1] /= d_[n_ - 1];
    if (n_ > 1) b[n_ - 2] = (b[n_ - 2] - du_[n_ - 2] * b[n_ - 1]) / d_[n_ - 2];
    for (std::size_t i = n_ - 2; i-- > 0;) {
      b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
    }
  }

 private:
  std::size_t n_;
  std::vector<double> dl_, d_, du_, du2_;
  std::vector<bool> swapped_;
};

// Eigenvalues closer than this (relative to the block norm) are treated as
// a cluster and their vectors reorthogonalized.
constexpr double kClusterGap = 1e-5;
constexpr int kInverseIterations = 3;

}  // namespace

TridiagonalEigen solve_symmetric_tridiagonal(std::span<const double> diag,
                                             std::span<const double> off,
                                             bool want_vectors,
                                             int max_sweeps_per_value) {
  check_shape(diag, off);
  if (want_vectors && diag.size() > kQlVectorMaxDim) {
    return solve_by_inverse_iteration(diag, off, max_sweeps_per_value);
  }
  return ql_solve(diag, off, want_vectors, max_sweeps_per_value);
}

TridiagonalEigen solve_by_inverse_iteration(std::span<const double> diag,
                                            std::span<const double> off,
                                            int max_sweeps_per_value) {
  check_shape(diag, off);
  const std::size_t n = diag.size();
  const double eps = std::numeric_limits<double>::epsilon();

  struct Pair {
    double value;
    std::vector<double> vector;  // full length n
  };
  std::vector<Pair> pairs;
  pairs.reserve(n);
  std::mt19937_64 rng(0x7c0ffee);
  std::uniform_real_distribution<double> start(-1.0, 1.0);

  std::size_t b0 = 0;
  while (b0 < n) {
    std::size_t b1 = b0 + 1;
    while (b1 < n && std::fabs(off[b1 - 1]) > eps * (std::fabs(diag[b1 - 1]) + std::fabs(diag[b1]))) {
      ++b1;
    }
    const std::size_t m = b1 - b0;
    const auto bd = diag.subspan(b0, m);
    const auto be = off.subspan(b0, m - 1);
    if (m == 1) {
      Pair p{diag[b0], std::vector<double>(n, 0.0)};
      p.vector[b0] = 1.0;
      pairs.push_back(std::move(p));
      b0 = b1;
      continue;
    }
    double bnorm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double row = std::fabs(bd[i]);
      if (i > 0) row += std::fabs(be[i - 1]);
      if (i + 1 < m) row += std::fabs(be[i]);
      bnorm = std::max(bnorm, row);
    }
    const auto values = ql_solve(bd, be, false, max_sweeps_per_value).values;
    const double tiny = eps * bnorm;
    std::size_t cluster_begin = pairs.size();
    double last_sigma = -std::numeric_limits<double>::infinity();
    std::vector<double> x(m);
    for (std::size_t j = 0; j < m; ++j) {
      if (j == 0 || values[j] - values[j - 1] >= kClusterGap * bnorm) cluster_begin = pairs.size();
      // Coincident shifts would give coincident vectors.
      const double sigma = std::max(values[j], last_sigma + 10.0 * tiny);
      last_sigma = sigma;
      const ShiftedLu lu(bd, be, sigma, tiny);
      for (double& xi : x) xi = start(rng);
      for (int it = 0; it < kInverseIterations; ++it) {
        double scale = 0.0;
        for (double xi : x) scale = std::max(scale, std::fabs(xi));
        for (double& xi : x) xi /= scale;
        lu.solve(x);
        for (std::size_t q = cluster_begin; q < pairs.size(); ++q) {
          const double* u = pairs[q].vector.data() + b0;
          double dot = 0.0;
          for (std::size_t i = 0; i < m; ++i) dot += u[i] * x[i];
          for (std::size_t i = 0; i < m; ++i) x[i] -= dot * u[i];
        }
        double norm = 0.0;
        for (double xi : x) norm += xi * xi;
        norm = std::sqrt(norm);
        for (double& xi : x) xi /= norm;
      }
      Pair p{values[j], std::vector<double>(n, 0.0)};
      std::copy(x.begin(), x.end(), p.vector.begin() + static_cast<std::ptrdiff_t>(b0));
      pairs.push_back(std::move(p));
    }
    b0 = b1;
  }

  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.value < b.value; });
  TridiagonalEigen out;
  out.dim = n;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = pairs[k].value;
    normalize_signed(pairs[k].vector.data(), out.vectors.data() + k * n, n);
  }
  return out;
}

}  // namespace tcsim
