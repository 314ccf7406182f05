#pragma once

// Dense symmetric eigensolvers.
//
// eig_symmetric returns the full decomposition (Householder tridiagonalization followed by
// implicit-shift QR on the tridiagonal, via Eigen). PartialEigensolver shares the same
// Householder reduction but computes eigenvalues with an implicit QL sweep and only the
// requested eigenvectors by inverse iteration, which keeps PSD projection and the
// spectral method at O(n^2 k) beyond the reduction itself.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "hsbm/error.hpp"

namespace hsbm {

struct EigenDecomposition {
  /// Sorted descending.
  Eigen::VectorXd values;
  /// Column i pairs with values(i).
  Eigen::MatrixXd vectors;
};

/// Flips v so that its largest-magnitude entry is positive; ties go to the lowest index.
inline void canonicalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  if (v.size() == 0) return;
  const double peak = v.cwiseAbs().maxCoeff();
  const double cut = peak * (1.0 - 1e-12);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= cut) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

inline double symmetry_defect(const Eigen::MatrixXd& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

inline void require_symmetric(const Eigen::MatrixXd& m, double tolerance = 1e-12) {
  detail::require(m.rows() == m.cols(), "matrix must be square");
  if (m.size() == 0) return;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  detail::require(symmetry_defect(m) <= tolerance * scale, "matrix must be symmetric");
}

inline EigenDecomposition eig_symmetric(const Eigen::MatrixXd& m) {
  require_symmetric(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver did not converge");
  const Eigen::Index n = m.rows();
  EigenDecomposition out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < n; ++j) canonicalize_sign(out.vectors.col(j));
  return out;
}

namespace detail {

/// Eigenvalues of the symmetric tridiagonal (diag, sub) by implicit-shift QL; returned ascending.
/// sub[i] couples rows i and i + 1.
inline std::vector<double> tridiagonal_eigenvalues(std::vector<double> diag, std::vector<double> sub) {
  const int n = static_cast<int>(diag.size());
  if (n == 0) return diag;
  sub.resize(static_cast<std::size_t>(n), 0.0);
  sub[static_cast<std::size_t>(n - 1)] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  double scale = 0.0;
  for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(diag[i]) + std::abs(sub[i]));
  const double floor = eps * scale;
  for (int l = 0; l < n; ++l) {
    int iterations = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
        if (std::abs(sub[m]) <= eps * dd || std::abs(sub[m]) <= floor) break;
      }
      if (m != l) {
        if (++iterations > 60) throw ConvergenceError("tridiagonal QL did not converge");
        double g = (diag[l + 1] - diag[l]) / (2.0 * sub[l]);
        double r = std::hypot(g, 1.0);
        g = diag[m] - diag[l] + sub[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        bool deflated = false;
        for (i = m - 1; i >= l; --i) {
          const double f = s * sub[i];
          const double b = c * sub[i];
          r = std::hypot(f, g);
          sub[i + 1] = r;
          if (r == 0.0) {
            diag[i + 1] -= p;
            sub[m] = 0.0;
            deflated = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = diag[i + 1] - p;
          r = (diag[i] - g) * s + 2.0 * c * b;
          p = s * r;
          diag[i + 1] = g + p;
          g = c * r - b;
        }
        if (deflated) continue;
        diag[l] -= p;
        sub[l] = g;
        sub[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(diag.begin(), diag.end());
  return diag;
}

/// LU with partial pivoting of (T - shift I), LAPACK gttrf layout.
struct TridiagonalLu {
  std::vector<double> d, du, du2, dl;
  std::vector<char> swapped;

  TridiagonalLu(const std::vector<double>& diag, const std::vector<double>& sub, double shift, double tiny) {
    const std::size_t n = diag.size();
    d.resize(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = diag[i] - shift;
    du.assign(sub.begin(), sub.begin() + static_cast<std::ptrdiff_t>(n > 0 ? n - 1 : 0));
    dl = du;
    du2.assign(n > 1 ? n - 2 : 0, 0.0);
    swapped.assign(n > 0 ? n - 1 : 0, 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = tiny;
        const double fact = dl[i] / d[i];
        dl[i] = fact;
        d[i + 1] -= fact * du[i];
      } else {
        const double fact = d[i] / dl[i];
        d[i] = dl[i];
        dl[i] = fact;
        const double temp = du[i];
        du[i] = d[i + 1];
        d[i + 1] = temp - fact * d[i + 1];
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du[i + 1];
        }
        swapped[i] = 1;
      }
    }
    for (auto& v : d)
      if (v == 0.0) v = tiny;
  }

  void solve(std::vector<double>& x) const {
    const std::size_t n = d.size();
    if (n == 0) return;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!swapped[i]) {
        x[i + 1] -= dl[i] * x[i];
      } else {
        const double temp = x[i];
        x[i] = x[i + 1];
        x[i + 1] = temp - dl[i] * x[i];
      }
    }
    x[n - 1] /= d[n - 1];
    if (n > 1) x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    for (std::size_t k = n - 2; k-- > 0;) x[k] = (x[k] - du[k] * x[k + 1] - du2[k] * x[k + 2]) / d[k];
  }
};

inline double normalize(std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  s = std::sqrt(s);
  if (s > 0.0)
    for (double& v : x) v /= s;
  return s;
}

}  // namespace detail

/// Householder reduction of a symmetric matrix plus eigenvalues; vectors on request.
class PartialEigensolver {
 public:
  explicit PartialEigensolver(const Eigen::MatrixXd& m, bool check_symmetry = true) : tri_(m.rows()) {
    if (check_symmetry) require_symmetric(m);
    n_ = m.rows();
    if (n_ == 0) return;
    tri_.compute(m);
    const Eigen::VectorXd main = tri_.diagonal();
    const Eigen::VectorXd off = tri_.subDiagonal();
    diag_.assign(main.data(), main.data() + n_);
    sub_.assign(off.data(), off.data() + (n_ - 1));
    ascending_ = detail::tridiagonal_eigenvalues(diag_, sub_);
    norm_ = 0.0;
    for (std::size_t i = 0; i < diag_.size(); ++i) {
      double row = std::abs(diag_[i]);
      if (i > 0) row += std::abs(sub_[i - 1]);
      if (i + 1 < diag_.size()) row += std::abs(sub_[i]);
      norm_ = std::max(norm_, row);
    }
  }

  Eigen::Index size() const { return n_; }

  /// All eigenvalues, ascending.
  const std::vector<double>& eigenvalues_ascending() const { return ascending_; }

  double spectral_norm() const {
    if (ascending_.empty()) return 0.0;
    return std::max(std::abs(ascending_.front()), std::abs(ascending_.back()));
  }

  /// Eigenvectors for the ascending-order eigenvalue indices `which` (must be sorted).
  Eigen::MatrixXd eigenvectors(const std::vector<std::size_t>& which) const {
    const std::size_t n = static_cast<std::size_t>(n_);
    const std::size_t k = which.size();
    Eigen::MatrixXd y(n_, static_cast<Eigen::Index>(k));
    if (k == 0) return y;
    const double eps = std::numeric_limits<double>::epsilon();
    const double scale = std::max(norm_, std::numeric_limits<double>::min());
    const double tiny = eps * scale;
    const double cluster_gap = 1e-3 * scale;
    std::vector<double> x(n);
    std::size_t cluster_start = 0;
    double shift_prev = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double shift = ascending_[which[c]];
      if (c > 0 && shift - ascending_[which[c - 1]] > cluster_gap) cluster_start = c;
      // Nudge coincident shifts apart so each column sees a distinct factorization.
      if (c > cluster_start && shift <= shift_prev) shift = shift_prev + 10.0 * eps * scale;
      shift_prev = shift;
      detail::TridiagonalLu lu(diag_, sub_, shift, tiny);
      std::uint64_t state = 0x9e3779b97f4a7c15ULL * (which[c] + 1);
      for (auto& v : x) {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        v = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
      }
      detail::normalize(x);
      for (int iter = 0; iter < 4; ++iter) {
        lu.solve(x);
        for (std::size_t p = cluster_start; p < c; ++p) {
          const double dot = y.col(static_cast<Eigen::Index>(p)).dot(Eigen::Map<const Eigen::VectorXd>(x.data(), n_));
          for (std::size_t i = 0; i < n; ++i) x[i] -= dot * y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p));
        }
        if (detail::normalize(x) == 0.0) throw ConvergenceError("inverse iteration collapsed");
      }
      y.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(x.data(), n_);
    }
    return tri_.matrixQ() * y;
  }

  /// Eigenpairs with the k largest eigenvalues, descending, canonical signs.
  EigenDecomposition top(std::size_t k) const {
    k = std::min<std::size_t>(k, static_cast<std::size_t>(n_));
    std::vector<std::size_t> which(k);
    for (std::size_t i = 0; i < k; ++i) which[i] = static_cast<std::size_t>(n_) - k + i;
    Eigen::MatrixXd vecs = eigenvectors(which);
    EigenDecomposition out;
    out.values.resize(static_cast<Eigen::Index>(k));
    out.vectors.resize(n_, static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
      const auto src = static_cast<Eigen::Index>(k - 1 - i);
      out.values(static_cast<Eigen::Index>(i)) = ascending_[which[k - 1 - i]];
      out.vectors.col(static_cast<Eigen::Index>(i)) = vecs.col(src);
      canonicalize_sign(out.vectors.col(static_cast<Eigen::Index>(i)));
    }
    return out;
  }

 private:
  Eigen::Index n_ = 0;
  Eigen::Tridiagonalization<Eigen::MatrixXd> tri_;
  std::vector<double> diag_, sub_, ascending_;
  double norm_ = 0.0;
};

/// Largest |eigenvalue|.
inline double spectral_norm(const Eigen::MatrixXd& m) { return PartialEigensolver(m).spectral_norm(); }

struct PsdProjection {
  Eigen::MatrixXd matrix;
  std::size_t rank = 0;
};

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clipped to 0. Works from whichever
/// side of the spectrum is smaller.
inline PsdProjection project_psd(const Eigen::MatrixXd& v) {
  const Eigen::Index n = v.rows();
  PsdProjection out;
  if (n == 0) return out;
  PartialEigensolver solver(v, false);
  const auto& ev = solver.eigenvalues_ascending();
  const double floor = 0.0;
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < ev.size(); ++i) (ev[i] > floor ? pos : neg).push_back(i);
  out.rank = pos.size();
  const auto& side = pos.size() <= neg.size() ? pos : neg;
  const std::size_t small_side = side.size();
  if (small_side * 4 > static_cast<std::size_t>(n)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(v);
    if (full.info() != Eigen::Success) throw ConvergenceError("PSD projection eigensolver failed");
    Eigen::VectorXd lam = full.eigenvalues().cwiseMax(0.0);
    out.matrix = full.eigenvectors() * lam.asDiagonal() * full.eigenvectors().transpose();
    out.rank = static_cast<std::size_t>((full.eigenvalues().array() > floor).count());
    return out;
  }
  Eigen::MatrixXd vecs = solver.eigenvectors(side);
  Eigen::VectorXd lam(static_cast<Eigen::Index>(small_side));
  for (std::size_t i = 0; i < small_side; ++i) lam(static_cast<Eigen::Index>(i)) = ev[side[i]];
  Eigen::MatrixXd part = vecs * lam.asDiagonal() * vecs.transpose();
  if (&side == &pos) {
    out.matrix = std::move(part);
  } else {
    out.matrix = v - part;
  }
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

}  // namespace hsbm
