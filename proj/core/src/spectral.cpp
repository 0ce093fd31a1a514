#include "usp/spectral.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "usp/error.hpp"

namespace usp {

namespace {

// Integral of e^{i m theta} over [-beta, beta].
double arc_moment(long m, double beta) {
  if (m == 0) return 2.0 * beta;
  const double md = static_cast<double>(m);
  return 2.0 * std::sin(md * beta) / md;
}

}  // namespace

double gram_entry(std::size_t j, std::size_t k, const ComplexSector& sector) {
  const double beta = sector.beta();
  const long m = static_cast<long>(j) - static_cast<long>(k);
  const double s = static_cast<double>(j + k);
  return arc_moment(m, beta) * (1.0 / (s + 2.0) + 1.0 / (s + 6.0)) -
         (arc_moment(m + 2, beta) + arc_moment(m - 2, beta)) / (s + 4.0);
}

Eigen::MatrixXd build_Z(std::size_t horizon, const ComplexSector& sector) {
  if (horizon == 0) throw ValidationError("filter horizon must be at least 1");
  if (horizon > kMaxFilterHorizon) {
    throw ValidationError("filter horizon " + std::to_string(horizon) + " exceeds the limit of " +
                          std::to_string(kMaxFilterHorizon));
  }
  const auto n = static_cast<Eigen::Index>(horizon);
  Eigen::MatrixXd Z(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k <= j; ++k) {
      const double v = gram_entry(static_cast<std::size_t>(j), static_cast<std::size_t>(k), sector);
      Z(j, k) = v;
      Z(k, j) = v;
    }
  }
  return Z;
}

FilterBank::FilterBank(Eigen::VectorXd eigenvalues, Eigen::MatrixXd filters,
                       std::optional<ComplexSector> sector)
    : eigenvalues_(std::move(eigenvalues)), filters_(std::move(filters)), sector_(sector) {
  if (filters_.rows() != eigenvalues_.size()) {
    throw ValidationError("filter length must equal the number of eigenvalues");
  }
  if (filters_.cols() > filters_.rows()) throw ValidationError("more filters than the horizon");
}

FilterBank filter_bank(const Eigen::MatrixXd& Z, std::size_t k, std::optional<ComplexSector> sector) {
  if (Z.rows() == 0 || Z.rows() != Z.cols()) throw ValidationError("Z must be square and nonempty");
  const auto n = Z.rows();
  if (static_cast<Eigen::Index>(k) > n) {
    throw ValidationError("requested " + std::to_string(k) + " filters but the horizon is " +
                          std::to_string(n));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");

  const Eigen::VectorXd values = es.eigenvalues().reverse();
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd filters = es.eigenvectors().rowwise().reverse().leftCols(kk);
  for (Eigen::Index j = 0; j < kk; ++j) {
    auto col = filters.col(j);
    const double tiny = 1e-12 * col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(col(i)) > tiny) {
        if (col(i) < 0.0) col *= -1.0;
        break;
      }
    }
  }
  return FilterBank(values, std::move(filters), sector);
}

FilterBank make_filter_bank(std::size_t horizon, const ComplexSector& sector, std::size_t k) {
  return filter_bank(build_Z(horizon, sector), k, sector);
}

Eigen::MatrixXd filter_project(const FilterBank& bank, const Eigen::MatrixXd& padded_inputs,
                               double horizon_T) {
  if (static_cast<std::size_t>(padded_inputs.rows()) != bank.horizon()) {
    throw ValidationError("padded inputs have " + std::to_string(padded_inputs.rows()) +
                          " rows, filter horizon is " + std::to_string(bank.horizon()));
  }
  if (!(horizon_T > 0.0)) throw ValidationError("horizon must be positive");
  return bank.filters().transpose() * padded_inputs / std::sqrt(horizon_T);
}

std::size_t count_above(const Eigen::VectorXd& eigenvalues, double threshold) {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues(i) > threshold) ++n;
  }
  return n;
}

}  // namespace usp
