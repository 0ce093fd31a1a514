#pragma once

// Target preconditioning: causal convolution of outputs with monic
// coefficients, reconstruction of raw-scale predictions, and the streaming
// wrapper that turns any inner model into a preconditioned predictor.

#include <cstddef>
#include <deque>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "usp/dynsys.hpp"
#include "usp/poly.hpp"

namespace usp {

/// Most recent vectors of a stream, newest first. at(0) is the last pushed
/// vector; lags beyond what has been pushed read as zero.
class LagBuffer {
 public:
  LagBuffer(Eigen::Index dim, std::size_t depth);

  void push(const Eigen::VectorXd& v);
  /// Zero vector when `lag` exceeds the pushed history or the depth.
  Eigen::VectorXd at(std::size_t lag) const;
  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t pushed() const noexcept { return pushed_; }

 private:
  Eigen::Index dim_;
  std::size_t depth_;
  std::size_t pushed_ = 0;
  std::deque<Eigen::VectorXd> items_;
};

/// out[t] = sum_{j=0..n} c_j y[t-j] with y[s] = 0 for s < 0. y is T x d.
Eigen::MatrixXd convolve(const Eigen::MatrixXd& y, const CoefficientVector& c);

/// model_out - sum_{i=1..n} c_i y_{t-i}, with history.at(i - 1) = y_{t-i}.
Eigen::VectorXd reconstruct_prediction(const Eigen::VectorXd& model_out,
                                       const LagBuffer& history, const CoefficientVector& c);

/// Same, with history rows y_{t-1}, y_{t-2}, ...; missing rows read as zero.
Eigen::VectorXd reconstruct_prediction(const Eigen::VectorXd& model_out,
                                       const Eigen::MatrixXd& history, const CoefficientVector& c);

/// y_t + sum_{i=1..n} c_i y_{t-i}.
Eigen::VectorXd preconditioned_target(const Eigen::VectorXd& y_t, const LagBuffer& history,
                                      const CoefficientVector& c);

/// A learner that predicts a (preconditioned) target from the input stream.
/// Each step calls predict(u_t) once and then update(target_t) once.
class InnerModel {
 public:
  virtual ~InnerModel() = default;
  virtual Eigen::Index d_in() const = 0;
  virtual Eigen::Index d_out() const = 0;
  virtual Eigen::VectorXd predict(const Eigen::VectorXd& u_t) = 0;
  virtual void update(const Eigen::VectorXd& target) = 0;
};

/// Always predicts zero.
class ZeroModel final : public InnerModel {
 public:
  ZeroModel(Eigen::Index d_in, Eigen::Index d_out) : d_in_(d_in), d_out_(d_out) {}
  Eigen::Index d_in() const override { return d_in_; }
  Eigen::Index d_out() const override { return d_out_; }
  Eigen::VectorXd predict(const Eigen::VectorXd&) override { return Eigen::VectorXd::Zero(d_out_); }
  void update(const Eigen::VectorXd&) override {}

 private:
  Eigen::Index d_in_;
  Eigen::Index d_out_;
};

struct StepRecord {
  Eigen::VectorXd prediction;             // y_hat_t on the raw scale
  Eigen::VectorXd target;                 // y_t
  Eigen::VectorXd preconditioned_target;  // y_t + sum c_i y_{t-i}
  double raw_loss = 0.0;                  // ||y_hat_t - y_t||_1
  double preconditioned_loss = 0.0;       // ||inner_t - preconditioned_t||_1
};

/// Online raw-scale predictor: predict(u_t) then observe(y_t), once per step.
class OnlinePredictor {
 public:
  virtual ~OnlinePredictor() = default;
  virtual Eigen::Index d_in() const = 0;
  virtual Eigen::Index d_out() const = 0;
  virtual Eigen::VectorXd predict(const Eigen::VectorXd& u_t) = 0;
  virtual StepRecord observe(const Eigen::VectorXd& y_t) = 0;
};

/// Streaming preconditioning around an inner model: emits
/// y_hat_t = -sum c_j y_{t-j} + inner(u_{1:t}) and trains the inner model on
/// the preconditioned target. Single owner per stream.
class PreconditionedPredictor final : public OnlinePredictor {
 public:
  PreconditionedPredictor(std::unique_ptr<InnerModel> inner, CoefficientVector c);

  Eigen::Index d_in() const override { return inner_->d_in(); }
  Eigen::Index d_out() const override { return inner_->d_out(); }
  Eigen::VectorXd predict(const Eigen::VectorXd& u_t) override;
  StepRecord observe(const Eigen::VectorXd& y_t) override;

  const CoefficientVector& coefficients() const noexcept { return c_; }
  InnerModel& inner() noexcept { return *inner_; }

 private:
  std::unique_ptr<InnerModel> inner_;
  CoefficientVector c_;
  LagBuffer history_;
  Eigen::VectorXd inner_out_;
  Eigen::VectorXd prediction_;
  bool pending_ = false;
};

struct PredictionStream {
  Eigen::MatrixXd predictions;  // T x d_out
  std::vector<double> raw_loss;
  std::vector<double> preconditioned_loss;
};

/// Runs an online predictor over a whole trajectory.
PredictionStream run_online(OnlinePredictor& predictor, const Trajectory& traj);

/// Offline form: convolve the outputs up front, stream (u_t, target_t) into
/// the inner model, and reconstruct raw predictions from the true history.
PredictionStream run_offline_pipeline(InnerModel& inner, const Trajectory& traj,
                                      const CoefficientVector& c);

}  // namespace usp
