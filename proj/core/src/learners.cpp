#include "usp/learners.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "usp/error.hpp"

namespace usp {

void project_to_ball(Eigen::MatrixXd& m, double radius, ProjectionNorm norm) {
  if (!(radius >= 0.0)) throw ValidationError("projection radius must be nonnegative");
  const double fro = m.norm();
  if (fro <= radius) return;  // spectral <= Frobenius
  if (norm == ProjectionNorm::Frobenius || m.rows() == 1 || m.cols() == 1) {
    // Rank-one shapes: the two norms coincide.
    m *= radius / fro;
    return;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd s = svd.singularValues();
  if (s(0) <= radius) return;
  s = s.cwiseMin(radius);
  m = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

Eigen::VectorXd sign_of(const Eigen::VectorXd& v) {
  return v.unaryExpr([](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

InputHistory::InputHistory(Eigen::Index dim) : dim_(dim), rows_(64, dim) {
  if (dim < 1) throw ValidationError("input history dimension must be positive");
}

void InputHistory::push(const Eigen::VectorXd& u) {
  if (u.size() != dim_) {
    throw ValidationError("input has dimension " + std::to_string(u.size()) + ", expected " +
                          std::to_string(dim_));
  }
  if (static_cast<Eigen::Index>(size_) == rows_.rows()) {
    rows_.conservativeResize(rows_.rows() * 2, dim_);
  }
  rows_.row(static_cast<Eigen::Index>(size_)) = u.transpose();
  ++size_;
}

Eigen::VectorXd InputHistory::lag(std::size_t lag) const {
  if (lag >= size_) return Eigen::VectorXd::Zero(dim_);
  return rows_.row(static_cast<Eigen::Index>(size_ - 1 - lag)).transpose();
}

Eigen::MatrixXd InputHistory::padded(std::size_t offset, std::size_t length) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(length), dim_);
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t l = offset + i;
    if (l >= size_) break;
    out.row(static_cast<Eigen::Index>(i)) = rows_.row(static_cast<Eigen::Index>(size_ - 1 - l));
  }
  return out;
}

Eigen::MatrixXd InputHistory::filter_features(const FilterBank& bank, std::size_t offset,
                                              double horizon_T) const {
  const auto k = static_cast<Eigen::Index>(bank.k());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, dim_);
  if (size_ <= offset) return out;
  const std::size_t m = std::min(size_ - offset, bank.horizon());
  const auto mm = static_cast<Eigen::Index>(m);
  // Rows lag(offset) .. lag(offset + m - 1), newest first.
  const auto first = static_cast<Eigen::Index>(size_ - offset - m);
  out.noalias() = bank.filters().topRows(mm).transpose() * rows_.middleRows(first, mm).colwise().reverse();
  return out / std::sqrt(horizon_T);
}

// ---------------------------------------------------------------------------

RegressionState RegressionState::zeros(std::size_t taps, Eigen::Index d_out, Eigen::Index d_in,
                                       double radius, double eta_scale) {
  RegressionState s;
  s.Q.assign(taps, Eigen::MatrixXd::Zero(d_out, d_in));
  s.radius = radius;
  s.eta_scale = eta_scale;
  return s;
}

double regression_eta_scale(double radius, std::size_t taps, Eigen::Index d_out) {
  const double n = static_cast<double>(std::max<std::size_t>(taps, 1));
  const double D = 2.0 * radius * n;
  const double G = n * std::sqrt(static_cast<double>(d_out));
  return D / G;
}

Eigen::VectorXd regression_model_output(const RegressionState& state, const LagBuffer& u_window) {
  if (state.Q.empty()) return Eigen::VectorXd();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(state.Q.front().rows());
  for (std::size_t j = 0; j < state.Q.size(); ++j) {
    const auto& q = state.Q[j];
    if (q.cols() != u_window.dim()) throw ValidationError("input window dimension does not match Q");
    out.noalias() += q * u_window.at(j);
  }
  return out;
}

Eigen::VectorXd regression_predict(const RegressionState& state, const LagBuffer& u_window,
                                   const LagBuffer& y_window, const CoefficientVector& c) {
  Eigen::VectorXd model = regression_model_output(state, u_window);
  if (model.size() == 0) model = Eigen::VectorXd::Zero(y_window.dim());
  if (model.size() != y_window.dim()) throw ValidationError("output window dimension does not match Q");
  return reconstruct_prediction(model, y_window, c);
}

void regression_update(RegressionState& state, const Eigen::VectorXd& residual,
                       const LagBuffer& u_window) {
  ++state.step;
  const double eta = state.eta_scale / std::sqrt(static_cast<double>(state.step));
  const Eigen::VectorXd s = sign_of(residual);
  if (s.isZero(0.0)) return;
  for (std::size_t j = 0; j < state.Q.size(); ++j) {
    auto& q = state.Q[j];
    if (q.rows() != s.size()) throw ValidationError("residual dimension does not match Q");
    q.noalias() -= eta * s * u_window.at(j).transpose();
    project_to_ball(q, state.radius, state.norm);
  }
}

RegressionModel::RegressionModel(Eigen::Index d_in, Eigen::Index d_out, const RegressionConfig& config)
    : d_in_(d_in), d_out_(d_out), inputs_(d_in, config.taps) {
  if (d_out < 1) throw ValidationError("d_out must be positive");
  const double eta = config.eta_scale.value_or(regression_eta_scale(config.radius, config.taps, d_out));
  state_ = RegressionState::zeros(config.taps, d_out, d_in, config.radius, eta);
  state_.norm = config.norm;
}

Eigen::VectorXd RegressionModel::predict(const Eigen::VectorXd& u_t) {
  inputs_.push(u_t);
  last_output_ = regression_model_output(state_, inputs_);
  if (last_output_.size() == 0) last_output_ = Eigen::VectorXd::Zero(d_out_);
  return last_output_;
}

void RegressionModel::update(const Eigen::VectorXd& target) {
  regression_update(state_, last_output_ - target, inputs_);
}

std::unique_ptr<PreconditionedPredictor> make_regression_predictor(
    const CoefficientVector& c, Eigen::Index d_in, Eigen::Index d_out, const RegressionConfig& config) {
  return std::make_unique<PreconditionedPredictor>(std::make_unique<RegressionModel>(d_in, d_out, config), c);
}

std::vector<Eigen::MatrixXd> oracle_weights(const LinearSystem& sys, const CoefficientVector& c,
                                            std::optional<std::size_t> taps) {
  sys.validate();
  const std::size_t n = taps.value_or(c.degree());
  // markov[s] = C A^s B
  std::vector<Eigen::MatrixXd> markov;
  markov.reserve(n);
  Eigen::MatrixXd AkB = sys.B;
  for (std::size_t s = 0; s < n; ++s) {
    markov.push_back(sys.C * AkB);
    AkB = sys.A * AkB;
  }
  std::vector<Eigen::MatrixXd> out(n, Eigen::MatrixXd::Zero(sys.d_out(), sys.d_in()));
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i <= s && i < c.size(); ++i) out[s] += c[i] * markov[s - i];
  }
  return out;
}

// ---------------------------------------------------------------------------

CoefficientVector tilde_expand(const CoefficientVector& c) {
  const std::size_t n = c.degree();
  std::vector<double> out(n + 3, 0.0);
  // (x^2 - 1) p(x): coefficient k (highest power first) is c_k - c_{k-2}.
  for (std::size_t k = 0; k <= n + 2; ++k) {
    const double a = k <= n ? c[k] : 0.0;
    const double b = k >= 2 ? c[k - 2] : 0.0;
    out[k] = a - b;
  }
  return CoefficientVector(std::move(out), PolyFamily::Custom);
}

double spectral_eta_scale(double radius_q, double radius_m, std::size_t n_q, std::size_t k,
                          Eigen::Index d_out) {
  const double D = static_cast<double>(n_q) * radius_q + static_cast<double>(k) * radius_m;
  const double G = static_cast<double>(std::max<std::size_t>(n_q + k, 1)) * std::sqrt(static_cast<double>(d_out));
  return D / G;
}

namespace {

Eigen::VectorXd spectral_model_output(const SpectralLearnerState& state, const InputHistory& u_history,
                                      const Eigen::MatrixXd& features) {
  const Eigen::Index d_out = !state.Q.empty() ? state.Q.front().rows() : state.M.front().rows();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d_out);
  for (std::size_t j = 0; j < state.Q.size(); ++j) out.noalias() += state.Q[j] * u_history.lag(j);
  for (std::size_t j = 0; j < state.M.size(); ++j) {
    out.noalias() += state.M[j] * features.row(static_cast<Eigen::Index>(j)).transpose();
  }
  return out;
}

Eigen::MatrixXd spectral_features(const SpectralLearnerState& state, const InputHistory& u_history) {
  if (!state.bank) throw ValidationError("spectral learner has no filter bank");
  if (state.bank->k() < state.M.size()) throw ValidationError("filter bank holds fewer filters than M blocks");
  return u_history.filter_features(*state.bank, state.offset, state.horizon_T);
}

void spectral_update_with(SpectralLearnerState& state, const Eigen::VectorXd& residual,
                          const InputHistory& u_history, const Eigen::MatrixXd& features) {
  ++state.step;
  const double eta = state.eta_scale / std::sqrt(static_cast<double>(state.step));
  const Eigen::VectorXd s = sign_of(residual);
  if (s.isZero(0.0)) return;
  for (std::size_t j = 0; j < state.Q.size(); ++j) {
    state.Q[j].noalias() -= eta * s * u_history.lag(j).transpose();
    project_to_ball(state.Q[j], state.radius_q, state.norm);
  }
  for (std::size_t j = 0; j < state.M.size(); ++j) {
    state.M[j].noalias() -= eta * s * features.row(static_cast<Eigen::Index>(j));
    project_to_ball(state.M[j], state.radius_m, state.norm);
  }
}

}  // namespace

Eigen::VectorXd spectral_predict(const SpectralLearnerState& state, const InputHistory& u_history,
                                 const LagBuffer& y_window) {
  const Eigen::MatrixXd features = spectral_features(state, u_history);
  const Eigen::VectorXd model = spectral_model_output(state, u_history, features);
  if (model.size() != y_window.dim()) throw ValidationError("output window dimension does not match the learner");
  return reconstruct_prediction(model, y_window, state.tilde);
}

void spectral_update(SpectralLearnerState& state, const Eigen::VectorXd& residual,
                     const InputHistory& u_history) {
  spectral_update_with(state, residual, u_history, spectral_features(state, u_history));
}

std::size_t spectral_filter_horizon(std::size_t T, std::size_t degree) {
  if (T < degree + 2) throw ValidationError("horizon T is too short for the polynomial degree");
  return T - degree - 1;
}

std::pair<double, double> spectral_default_radii(const CoefficientVector& c, double norm_bound,
                                                 double kappa, std::size_t T, double beta) {
  const double r_q = norm_bound * tilde_expand(c).l1_norm();
  const double t = static_cast<double>(T);
  const double sup = sup_on_sector(c, ComplexSector(beta), 128);
  const double r_m = 2.0 * norm_bound * kappa * std::log(t) * std::pow(beta, 4.0 / 3.0) *
                     std::pow(t, 7.0 / 6.0) * sup;
  return {r_q, r_m};
}

SpectralModel::SpectralModel(Eigen::Index d_in, Eigen::Index d_out, SpectralLearnerState state)
    : d_in_(d_in), d_out_(d_out), state_(std::move(state)), inputs_(d_in) {
  if (!state_.bank) throw ValidationError("spectral model needs a filter bank");
  if (state_.Q.empty() && state_.M.empty()) throw ValidationError("spectral model has no parameters");
  for (const auto* blocks : {&state_.Q, &state_.M}) {
    for (const auto& b : *blocks) {
      if (b.rows() != d_out || b.cols() != d_in) throw ValidationError("parameter block has the wrong shape");
    }
  }
}

Eigen::VectorXd SpectralModel::predict(const Eigen::VectorXd& u_t) {
  inputs_.push(u_t);
  const Eigen::MatrixXd features = spectral_features(state_, inputs_);
  last_output_ = spectral_model_output(state_, inputs_, features);
  return last_output_;
}

void SpectralModel::update(const Eigen::VectorXd& target) {
  const Eigen::MatrixXd features = spectral_features(state_, inputs_);
  spectral_update_with(state_, last_output_ - target, inputs_, features);
}

std::unique_ptr<PreconditionedPredictor> make_spectral_predictor(
    const CoefficientVector& c, Eigen::Index d_in, Eigen::Index d_out, const SpectralConfig& config,
    std::shared_ptr<const FilterBank> bank) {
  if (!bank) throw ValidationError("spectral predictor needs a filter bank");
  const std::size_t degree = config.precondition ? c.degree() : 0;
  const std::size_t expected = spectral_filter_horizon(config.horizon, degree);
  if (bank->horizon() != expected) {
    throw ValidationError("filter bank horizon " + std::to_string(bank->horizon()) +
                          " does not match T - n - 1 = " + std::to_string(expected));
  }
  if (bank->k() < config.k) throw ValidationError("filter bank holds fewer than k filters");

  SpectralLearnerState st;
  st.tilde = config.precondition ? tilde_expand(c) : CoefficientVector({1.0});
  st.Q.assign(degree + 1, Eigen::MatrixXd::Zero(d_out, d_in));
  st.M.assign(config.k, Eigen::MatrixXd::Zero(d_out, d_in));
  st.radius_q = config.radius_q;
  st.radius_m = config.radius_m;
  st.bank = std::move(bank);
  st.horizon_T = static_cast<double>(config.horizon);
  st.offset = degree + 1;
  st.eta_scale = config.eta_scale.value_or(
      spectral_eta_scale(config.radius_q, config.radius_m, st.Q.size(), config.k, d_out));
  st.norm = config.norm;
  CoefficientVector wrapper_c = st.tilde;
  return std::make_unique<PreconditionedPredictor>(
      std::make_unique<SpectralModel>(d_in, d_out, std::move(st)), std::move(wrapper_c));
}

// ---------------------------------------------------------------------------

CoefficientVector LearnedCoeffState::coefficients() const {
  return CoefficientVector(coeffs, PolyFamily::Learned);
}

void learned_coeff_step(LearnedCoeffState& state, const Eigen::VectorXd& residual,
                        const LagBuffer& y_window, const LagBuffer& u_window) {
  ++state.step;
  const double eta = state.eta_coeffs / std::sqrt(static_cast<double>(state.step));
  const Eigen::VectorXd s = sign_of(residual);
  if (!s.isZero(0.0)) {
    for (std::size_t i = 1; i < state.coeffs.size(); ++i) {
      const double grad = -s.dot(y_window.at(i - 1));
      state.coeffs[i] -= eta * grad;
    }
  }
  state.coeffs[0] = 1.0;
  regression_update(state.model, residual, u_window);
}

LearnedCoefficientPredictor::LearnedCoefficientPredictor(const CoefficientVector& init, Eigen::Index d_in,
                                                         Eigen::Index d_out,
                                                         const RegressionConfig& model_config,
                                                         double eta_coeffs)
    : d_in_(d_in), d_out_(d_out), inputs_(d_in, model_config.taps), outputs_(d_out, init.degree()) {
  state_.coeffs = init.values();
  const double eta = model_config.eta_scale.value_or(
      regression_eta_scale(model_config.radius, model_config.taps, d_out));
  state_.model = RegressionState::zeros(model_config.taps, d_out, d_in, model_config.radius, eta);
  state_.model.norm = model_config.norm;
  state_.eta_coeffs = eta_coeffs;
}

Eigen::VectorXd LearnedCoefficientPredictor::predict(const Eigen::VectorXd& u_t) {
  if (u_t.size() != d_in_) throw ValidationError("input dimension does not match the predictor");
  inputs_.push(u_t);
  model_output_ = regression_model_output(state_.model, inputs_);
  if (model_output_.size() == 0) model_output_ = Eigen::VectorXd::Zero(d_out_);
  prediction_ = reconstruct_prediction(model_output_, outputs_, state_.coefficients());
  pending_ = true;
  return prediction_;
}

StepRecord LearnedCoefficientPredictor::observe(const Eigen::VectorXd& y_t) {
  if (!pending_) throw ValidationError("observe() called without a preceding predict()");
  if (y_t.size() != d_out_) throw ValidationError("output dimension does not match the predictor");
  const CoefficientVector c = state_.coefficients();
  StepRecord rec;
  rec.prediction = prediction_;
  rec.target = y_t;
  rec.preconditioned_target = preconditioned_target(y_t, outputs_, c);
  rec.raw_loss = (prediction_ - y_t).lpNorm<1>();
  rec.preconditioned_loss = (model_output_ - rec.preconditioned_target).lpNorm<1>();
  learned_coeff_step(state_, prediction_ - y_t, outputs_, inputs_);
  outputs_.push(y_t);
  pending_ = false;
  return rec;
}

}  // namespace usp
