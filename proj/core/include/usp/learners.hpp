#pragma once

// Online learners on preconditioned targets:
//  * regression on a window of inputs,
//  * regression plus complex-sector spectral filter features,
//  * regression with jointly learned preconditioning coefficients.
// All use projected online subgradient descent on the l1 loss with
// eta_t = eta_scale / sqrt(t).

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "usp/dynsys.hpp"
#include "usp/poly.hpp"
#include "usp/precond.hpp"
#include "usp/spectral.hpp"

namespace usp {

enum class ProjectionNorm { Spectral, Frobenius };

/// Euclidean projection of `m` onto {||m|| <= radius}; spectral norm by
/// clipping singular values, Frobenius by rescaling.
void project_to_ball(Eigen::MatrixXd& m, double radius, ProjectionNorm norm = ProjectionNorm::Spectral);

double spectral_norm(const Eigen::MatrixXd& m);

/// Elementwise sign with sign(0) = 0.
Eigen::VectorXd sign_of(const Eigen::VectorXd& v);

/// Full input stream, newest first through lag(); supports the zero-padded
/// long windows spectral features need.
class InputHistory {
 public:
  explicit InputHistory(Eigen::Index dim);

  void push(const Eigen::VectorXd& u);
  std::size_t size() const noexcept { return size_; }
  Eigen::Index dim() const noexcept { return dim_; }
  /// u_{t-lag}, where lag 0 is the newest input; zero beyond the history.
  Eigen::VectorXd lag(std::size_t lag) const;
  /// length x dim matrix with row i = lag(offset + i).
  Eigen::MatrixXd padded(std::size_t offset, std::size_t length) const;
  /// Equals filter_project(bank, padded(offset, bank.horizon()), horizon_T)
  /// without materialising the padded block.
  Eigen::MatrixXd filter_features(const FilterBank& bank, std::size_t offset, double horizon_T) const;

 private:
  Eigen::Index dim_;
  std::size_t size_ = 0;
  Eigen::MatrixXd rows_;  // time-ordered, capacity grows geometrically
};

// ---------------------------------------------------------------------------
// Regression

struct RegressionState {
  std::vector<Eigen::MatrixXd> Q;  // Q_0 .. Q_{taps-1}, each d_out x d_in
  double radius = 1.0;
  double eta_scale = 1.0;
  std::size_t step = 0;  // updates applied so far
  ProjectionNorm norm = ProjectionNorm::Spectral;

  static RegressionState zeros(std::size_t taps, Eigen::Index d_out, Eigen::Index d_in,
                               double radius, double eta_scale);
  std::size_t taps() const noexcept { return Q.size(); }
};

/// D / G with D = 2 * radius * taps and G = taps * sqrt(d_out).
double regression_eta_scale(double radius, std::size_t taps, Eigen::Index d_out);

/// sum_j Q_j u_{t-j}, with u_window.at(j) = u_{t-j}.
Eigen::VectorXd regression_model_output(const RegressionState& state, const LagBuffer& u_window);

/// -sum_{i>=1} c_i y_{t-i} + sum_j Q_j u_{t-j}, with y_window.at(i-1) = y_{t-i}.
Eigen::VectorXd regression_predict(const RegressionState& state, const LagBuffer& u_window,
                                   const LagBuffer& y_window, const CoefficientVector& c);

/// One projected subgradient step on ||y_hat - y||_1 given residual = y_hat - y:
/// Q_j <- Proj(Q_j - eta_t sign(residual) u_{t-j}^T).
void regression_update(RegressionState& state, const Eigen::VectorXd& residual,
                       const LagBuffer& u_window);

struct RegressionConfig {
  std::size_t taps = 1;
  double radius = 1.0;
  std::optional<double> eta_scale;  // defaults to regression_eta_scale
  ProjectionNorm norm = ProjectionNorm::Spectral;
};

/// Inner model wrapping RegressionState; trained on whatever target the
/// surrounding wrapper feeds it.
class RegressionModel final : public InnerModel {
 public:
  RegressionModel(Eigen::Index d_in, Eigen::Index d_out, const RegressionConfig& config);

  Eigen::Index d_in() const override { return d_in_; }
  Eigen::Index d_out() const override { return d_out_; }
  Eigen::VectorXd predict(const Eigen::VectorXd& u_t) override;
  void update(const Eigen::VectorXd& target) override;

  const RegressionState& state() const noexcept { return state_; }
  RegressionState& state() noexcept { return state_; }

 private:
  Eigen::Index d_in_;
  Eigen::Index d_out_;
  RegressionState state_;
  LagBuffer inputs_;
  Eigen::VectorXd last_output_;
};

/// Regression inside the preconditioning wrapper.
std::unique_ptr<PreconditionedPredictor> make_regression_predictor(
    const CoefficientVector& c, Eigen::Index d_in, Eigen::Index d_out, const RegressionConfig& config);

/// Comparator weights Q_s = sum_{i=0..s} c_i C A^(s-i) B for s = 0 .. taps-1
/// (taps defaults to the degree of c).
std::vector<Eigen::MatrixXd> oracle_weights(const LinearSystem& sys, const CoefficientVector& c,
                                            std::optional<std::size_t> taps = std::nullopt);

// ---------------------------------------------------------------------------
// Spectral filtering

/// Coefficients of (x^2 - 1) p(x): the expansion of (1 - x^2) p(x) negated
/// so the result is monic. Length grows by two.
CoefficientVector tilde_expand(const CoefficientVector& c);

struct SpectralLearnerState {
  CoefficientVector tilde{std::vector<double>{1.0}};
  std::vector<Eigen::MatrixXd> Q;  // Q_0 .. Q_n
  std::vector<Eigen::MatrixXd> M;  // M_1 .. M_k
  double radius_q = 1.0;
  double radius_m = 1.0;
  std::shared_ptr<const FilterBank> bank;
  double horizon_T = 1.0;    // T in the 1/sqrt(T) feature scale
  std::size_t offset = 1;    // the padded window starts at u_{t-offset}
  double eta_scale = 1.0;
  std::size_t step = 0;
  ProjectionNorm norm = ProjectionNorm::Spectral;
};

/// D / G with D = n_Q R_Q + k R_M and G = (n_Q + k) sqrt(d_out).
double spectral_eta_scale(double radius_q, double radius_m, std::size_t n_q, std::size_t k,
                          Eigen::Index d_out);

/// -sum_{i>=1} c~_i y_{t-i} + sum_j Q_j u_{t-j} + sum_j M_j phi_j^T u~ / sqrt(T).
Eigen::VectorXd spectral_predict(const SpectralLearnerState& state, const InputHistory& u_history,
                                 const LagBuffer& y_window);

/// Projected subgradient step on Q and M given residual = y_hat - y.
void spectral_update(SpectralLearnerState& state, const Eigen::VectorXd& residual,
                     const InputHistory& u_history);

struct SpectralConfig {
  std::size_t horizon = 2000;    // T
  std::size_t k = 24;
  double beta = 0.1;
  double radius_q = 1.0;
  double radius_m = 1.0;
  std::optional<double> eta_scale;
  ProjectionNorm norm = ProjectionNorm::Spectral;
  bool precondition = true;      // false: plain spectral filtering, c~ = [1]
};

/// Horizon of the filter bank for base degree n: T - n - 1.
std::size_t spectral_filter_horizon(std::size_t T, std::size_t degree);

/// Default radii: R_Q = norm_bound ||c~||_1 and
/// R_M = 2 norm_bound kappa log(T) beta^(4/3) T^(7/6) max_{C_beta} |p|.
std::pair<double, double> spectral_default_radii(const CoefficientVector& c, double norm_bound,
                                                 double kappa, std::size_t T, double beta);

class SpectralModel final : public InnerModel {
 public:
  SpectralModel(Eigen::Index d_in, Eigen::Index d_out, SpectralLearnerState state);

  Eigen::Index d_in() const override { return d_in_; }
  Eigen::Index d_out() const override { return d_out_; }
  Eigen::VectorXd predict(const Eigen::VectorXd& u_t) override;
  void update(const Eigen::VectorXd& target) override;

  const SpectralLearnerState& state() const noexcept { return state_; }

 private:
  Eigen::Index d_in_;
  Eigen::Index d_out_;
  SpectralLearnerState state_;
  InputHistory inputs_;
  Eigen::VectorXd last_output_;
};

/// Spectral filtering inside the preconditioning wrapper (with c~ when
/// config.precondition is set). `bank` must have horizon
/// spectral_filter_horizon(T, degree) and at least config.k filters.
std::unique_ptr<PreconditionedPredictor> make_spectral_predictor(
    const CoefficientVector& c, Eigen::Index d_in, Eigen::Index d_out, const SpectralConfig& config,
    std::shared_ptr<const FilterBank> bank);

// ---------------------------------------------------------------------------
// Learned coefficients

struct LearnedCoeffState {
  std::vector<double> coeffs;  // c_0 .. c_n, c_0 pinned to 1
  RegressionState model;       // model.eta_scale is eta_model
  double eta_coeffs = 0.01;
  std::size_t step = 0;

  CoefficientVector coefficients() const;
};

/// Joint step: c_i -= eta_t * (-sum_o sign(residual_o) y_{t-i,o}) for i >= 1
/// (no projection) and a regression_update of the model.
void learned_coeff_step(LearnedCoeffState& state, const Eigen::VectorXd& residual,
                        const LagBuffer& y_window, const LagBuffer& u_window);

class LearnedCoefficientPredictor final : public OnlinePredictor {
 public:
  LearnedCoefficientPredictor(const CoefficientVector& init, Eigen::Index d_in, Eigen::Index d_out,
                              const RegressionConfig& model_config, double eta_coeffs);

  Eigen::Index d_in() const override { return d_in_; }
  Eigen::Index d_out() const override { return d_out_; }
  Eigen::VectorXd predict(const Eigen::VectorXd& u_t) override;
  StepRecord observe(const Eigen::VectorXd& y_t) override;

  const LearnedCoeffState& state() const noexcept { return state_; }

 private:
  Eigen::Index d_in_;
  Eigen::Index d_out_;
  LearnedCoeffState state_;
  LagBuffer inputs_;
  LagBuffer outputs_;
  Eigen::VectorXd prediction_;
  Eigen::VectorXd model_output_;
  bool pending_ = false;
};

}  // namespace usp
