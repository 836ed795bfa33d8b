#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pdalm/types.hpp"

namespace pdalm {

struct SingularSystem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResidualTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pivot sign counts of a factored symmetric matrix.
struct Inertia {
  int n_pos = 0;
  int n_neg = 0;
  int n_zero = 0;
};

/**
 * Dense LDLᵀ factorization with symmetric pivoting and 1×1/2×2 pivot blocks
 * (Bunch-Kaufman partial pivoting). Handles indefinite matrices, reports the
 * inertia, and flags singularity when a pivot falls below the drop tolerance.
 *
 * Immutable after construction; concurrent solves on one factorization are
 * safe.
 */
class SymIndefFactorization {
 public:
  [[nodiscard]] bool singular() const { return singular_; }
  [[nodiscard]] const Inertia& inertia() const { return inertia_; }
  [[nodiscard]] Index dim() const { return original_.rows(); }

  /// Solves A y = b and verifies the residual against the original matrix.
  /// Throws SingularSystem when the factorization flagged a zero pivot and
  /// ResidualTooLarge when ‖Ay − b‖_∞ > 1e-8·max(1, ‖b‖_∞).
  [[nodiscard]] Vector solve(const Vector& b) const {
    const Index m = dim();
    if (b.size() != m) {
      throw std::invalid_argument("solve: rhs has size " +
                                  std::to_string(b.size()) + ", expected " +
                                  std::to_string(m));
    }
    if (singular_) {
      throw SingularSystem("solve: matrix is singular to working precision");
    }

    Vector y = b;
    for (const auto& [s, t] : swaps_) std::swap(y[s], y[t]);

    // Forward substitution with the unit lower factor.
    Index k = 0;
    while (k < m) {
      if (block_size_[static_cast<size_t>(k)] == 1) {
        for (Index j = k + 1; j < m; ++j) y[j] -= factors_(j, k) * y[k];
        ++k;
      } else {
        for (Index j = k + 2; j < m; ++j) {
          y[j] -= factors_(j, k) * y[k] + factors_(j, k + 1) * y[k + 1];
        }
        k += 2;
      }
    }

    // Block-diagonal solve.
    k = 0;
    while (k < m) {
      if (block_size_[static_cast<size_t>(k)] == 1) {
        y[k] /= factors_(k, k);
        ++k;
      } else {
        const double a = factors_(k, k);
        const double c = factors_(k + 1, k);
        const double d = factors_(k + 1, k + 1);
        const double det = a * d - c * c;
        const double w0 = y[k];
        const double w1 = y[k + 1];
        y[k] = (d * w0 - c * w1) / det;
        y[k + 1] = (a * w1 - c * w0) / det;
        k += 2;
      }
    }

    // Backward substitution with the transposed factor.
    k = m;
    while (k > 0) {
      const Index start = (k >= 2 && block_size_[static_cast<size_t>(k - 2)] == 2) ? k - 2 : k - 1;
      for (Index col = start; col < k; ++col) {
        double acc = 0.0;
        for (Index j = k; j < m; ++j) acc += factors_(j, col) * y[j];
        y[col] -= acc;
      }
      k = start;
    }

    for (auto it = swaps_.rbegin(); it != swaps_.rend(); ++it) {
      std::swap(y[it->first], y[it->second]);
    }

    const double bnorm = inf_norm(b);
    const double resid = m == 0 ? 0.0 : inf_norm(original_ * y - b);
    if (resid > 1e-8 * std::max(1.0, bnorm)) {
      throw ResidualTooLarge("solve: residual " + std::to_string(resid) +
                             " exceeds tolerance");
    }
    return y;
  }

 private:
  friend SymIndefFactorization factor_symmetric_indefinite(const Matrix&,
                                                           double);
  SymIndefFactorization() = default;

  Matrix factors_;                             // L below diag, D on (sub)diag
  Matrix original_;                            // kept for residual checks
  std::vector<int> block_size_;                // 1, 2, or 0 (second 2×2 col)
  std::vector<std::pair<Index, Index>> swaps_; // symmetric row/col swaps, in order
  Inertia inertia_;
  bool singular_ = false;
};

/**
 * Factors a symmetric matrix into P A Pᵀ = L D Lᵀ with Bunch-Kaufman
 * pivoting. `drop_tol` < 0 selects the default 1e-12·max|A_ij| threshold;
 * pivots at or below it count as zero and mark the factorization singular.
 * Non-symmetric input (beyond 1e-12 relative) is rejected.
 */
inline SymIndefFactorization factor_symmetric_indefinite(const Matrix& A,
                                                         double drop_tol = -1.0) {
  const Index m = A.rows();
  if (A.cols() != m) {
    throw std::invalid_argument("factor: matrix is not square");
  }
  const double scale = m == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
  if (m > 0) {
    const double asym = (A - A.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, scale)) {
      throw std::invalid_argument("factor: matrix is not symmetric");
    }
  }
  if (drop_tol < 0.0) drop_tol = 1e-12 * scale;

  SymIndefFactorization fact;
  fact.original_ = A;
  fact.factors_ = 0.5 * (A + A.transpose());  // exact symmetry for pivot search
  fact.block_size_.assign(static_cast<size_t>(m), 0);

  Matrix& F = fact.factors_;
  constexpr double kAlpha = 0.6403882032022076;  // (1 + sqrt(17)) / 8

  auto swap_sym = [&](Index s, Index t, Index k) {
    if (s == t) return;
    fact.swaps_.emplace_back(s, t);
    for (Index c = 0; c < k; ++c) std::swap(F(s, c), F(t, c));  // L rows
    for (Index c = k; c < m; ++c) std::swap(F(s, c), F(t, c));
    for (Index r = k; r < m; ++r) std::swap(F(r, s), F(r, t));
  };

  Index k = 0;
  while (k < m) {
    // Largest off-diagonal magnitude in column k of the active block.
    double lambda = 0.0;
    Index r = k;
    for (Index i = k + 1; i < m; ++i) {
      if (std::abs(F(i, k)) > lambda) {
        lambda = std::abs(F(i, k));
        r = i;
      }
    }
    const double akk = std::abs(F(k, k));

    if (std::max(akk, lambda) <= drop_tol) {
      // Negligible column: zero pivot, nothing to eliminate.
      fact.singular_ = true;
      ++fact.inertia_.n_zero;
      fact.block_size_[static_cast<size_t>(k)] = 1;
      for (Index j = k + 1; j < m; ++j) F(j, k) = 0.0;
      ++k;
      continue;
    }

    bool two_by_two = false;
    if (akk < kAlpha * lambda) {
      // sigma: largest off-diagonal magnitude in row/column r.
      double sigma = 0.0;
      for (Index i = k; i < m; ++i) {
        if (i == r) continue;
        sigma = std::max(sigma, std::abs(F(std::max(i, r), std::min(i, r))));
      }
      if (akk * sigma >= kAlpha * lambda * lambda) {
        // keep 1×1 pivot at k
      } else if (std::abs(F(r, r)) >= kAlpha * sigma) {
        swap_sym(k, r, k);
      } else {
        swap_sym(k + 1, r, k);
        two_by_two = true;
      }
    }

    if (!two_by_two) {
      const double d = F(k, k);
      if (std::abs(d) <= drop_tol) {
        fact.singular_ = true;
        ++fact.inertia_.n_zero;
        fact.block_size_[static_cast<size_t>(k)] = 1;
        for (Index j = k + 1; j < m; ++j) F(j, k) = 0.0;
        ++k;
        continue;
      }
      (d > 0 ? fact.inertia_.n_pos : fact.inertia_.n_neg) += 1;
      fact.block_size_[static_cast<size_t>(k)] = 1;
      const Vector w = F.col(k).segment(k + 1, m - k - 1);
      for (Index j = k + 1; j < m; ++j) {
        const double mj = w[j - k - 1] / d;
        for (Index i = k + 1; i <= j; ++i) {
          F(j, i) -= mj * w[i - k - 1];
          F(i, j) = F(j, i);
        }
        F(j, k) = mj;
      }
      ++k;
    } else {
      const double a = F(k, k);
      const double c = F(k + 1, k);
      const double d = F(k + 1, k + 1);
      const double det = a * d - c * c;
      if (std::abs(det) <= drop_tol * drop_tol) {
        // Cannot happen for a healthy Bunch-Kaufman 2×2 block; be safe.
        fact.singular_ = true;
        fact.inertia_.n_zero += 2;
        fact.block_size_[static_cast<size_t>(k)] = 2;
        for (Index j = k + 2; j < m; ++j) F(j, k) = F(j, k + 1) = 0.0;
        k += 2;
        continue;
      }
      if (det < 0) {
        ++fact.inertia_.n_pos;
        ++fact.inertia_.n_neg;
      } else {
        (a + d > 0 ? fact.inertia_.n_pos : fact.inertia_.n_neg) += 2;
      }
      fact.block_size_[static_cast<size_t>(k)] = 2;
      const Index tail = m - k - 2;
      if (tail > 0) {
        const Vector w0 = F.col(k).segment(k + 2, tail);
        const Vector w1 = F.col(k + 1).segment(k + 2, tail);
        for (Index j = k + 2; j < m; ++j) {
          const double b0 = w0[j - k - 2];
          const double b1 = w1[j - k - 2];
          const double m0 = (d * b0 - c * b1) / det;
          const double m1 = (a * b1 - c * b0) / det;
          for (Index i = k + 2; i <= j; ++i) {
            F(j, i) -= m0 * w0[i - k - 2] + m1 * w1[i - k - 2];
            F(i, j) = F(j, i);
          }
          F(j, k) = m0;
          F(j, k + 1) = m1;
        }
      }
      k += 2;
    }
  }
  return fact;
}

/// Componentwise projection onto the box [lower, upper].
inline Vector project_box(const Vector& x, const Vector& lower,
                          const Vector& upper) {
  if (x.size() != lower.size() || x.size() != upper.size()) {
    throw std::invalid_argument("project_box: dimension mismatch");
  }
  return x.cwiseMax(lower).cwiseMin(upper);
}

}  // namespace pdalm
