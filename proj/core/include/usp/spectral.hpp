#pragma once

// Gram matrix of the complex-sector spectral filters and the filter bank
// built from its leading eigenvectors.
//
// With mu(alpha) = (1 - alpha^2) (1, alpha, ..., alpha^(T-1)) the matrix is
//   Z = integral over C_beta of mu(alpha) mu(conj(alpha))^T dA,
// integrated in polar coordinates. Entry (j, k) only depends on j + k and
// m = j - k:
//   Z_jk = S(m) (1/(j+k+2) + 1/(j+k+6)) - (S(m+2) + S(m-2)) / (j+k+4),
//   S(m) = 2 sin(m beta) / m,  S(0) = 2 beta.

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "usp/poly.hpp"

namespace usp {

/// Largest filter horizon accepted by build_Z.
inline constexpr std::size_t kMaxFilterHorizon = 8192;

/// Closed-form entry Z_jk (0-based indices).
double gram_entry(std::size_t j, std::size_t k, const ComplexSector& sector);

/// T' x T' symmetric Gram matrix. Throws ValidationError for T' = 0 or
/// T' > kMaxFilterHorizon.
Eigen::MatrixXd build_Z(std::size_t horizon, const ComplexSector& sector);

/// Top-k eigenpairs of a symmetric Gram matrix. Immutable; safe to share
/// read-only between learners.
class FilterBank {
 public:
  FilterBank(Eigen::VectorXd eigenvalues, Eigen::MatrixXd filters,
             std::optional<ComplexSector> sector);

  std::size_t horizon() const noexcept { return static_cast<std::size_t>(filters_.rows()); }
  std::size_t k() const noexcept { return static_cast<std::size_t>(filters_.cols()); }
  /// All eigenvalues, descending.
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  /// Column j is the filter phi_{j+1}.
  const Eigen::MatrixXd& filters() const noexcept { return filters_; }
  const std::optional<ComplexSector>& sector() const noexcept { return sector_; }

 private:
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd filters_;
  std::optional<ComplexSector> sector_;
};

/// Dense symmetric eigendecomposition of Z keeping the k leading
/// eigenvectors; each is signed so its first nonzero component is positive.
FilterBank filter_bank(const Eigen::MatrixXd& Z, std::size_t k,
                       std::optional<ComplexSector> sector = std::nullopt);

/// build_Z followed by filter_bank.
FilterBank make_filter_bank(std::size_t horizon, const ComplexSector& sector, std::size_t k);

/// k x d_in matrix whose row j is phi_j^T padded_inputs / sqrt(horizon_T).
/// padded_inputs is T' x d_in, most recent input first, zero padded.
Eigen::MatrixXd filter_project(const FilterBank& bank, const Eigen::MatrixXd& padded_inputs,
                               double horizon_T);

/// Number of eigenvalues strictly greater than `threshold`.
std::size_t count_above(const Eigen::VectorXd& eigenvalues, double threshold);

}  // namespace usp
