#include "usp/precond.hpp"

#include <algorithm>

#include "usp/error.hpp"

namespace usp {

LagBuffer::LagBuffer(Eigen::Index dim, std::size_t depth) : dim_(dim), depth_(depth) {
  if (dim < 1) throw ValidationError("lag buffer dimension must be positive");
}

void LagBuffer::push(const Eigen::VectorXd& v) {
  if (v.size() != dim_) {
    throw ValidationError("lag buffer expects dimension " + std::to_string(dim_) + ", got " +
                          std::to_string(v.size()));
  }
  ++pushed_;
  if (depth_ == 0) return;
  items_.push_front(v);
  if (items_.size() > depth_) items_.pop_back();
}

Eigen::VectorXd LagBuffer::at(std::size_t lag) const {
  if (lag < items_.size()) return items_[lag];
  return Eigen::VectorXd::Zero(dim_);
}

Eigen::MatrixXd convolve(const Eigen::MatrixXd& y, const CoefficientVector& c) {
  if (y.rows() == 0) throw ValidationError("cannot convolve an empty sequence");
  const Eigen::Index T = y.rows();
  const auto n = static_cast<Eigen::Index>(c.degree());
  Eigen::MatrixXd out = y;  // c_0 = 1
  for (Eigen::Index j = 1; j <= n; ++j) {
    if (j >= T) break;
    out.bottomRows(T - j) += c[static_cast<std::size_t>(j)] * y.topRows(T - j);
  }
  return out;
}

Eigen::VectorXd reconstruct_prediction(const Eigen::VectorXd& model_out, const LagBuffer& history,
                                       const CoefficientVector& c) {
  if (history.dim() != model_out.size()) {
    throw ValidationError("history dimension does not match the model output");
  }
  Eigen::VectorXd out = model_out;
  for (std::size_t i = 1; i < c.size(); ++i) out -= c[i] * history.at(i - 1);
  return out;
}

Eigen::VectorXd reconstruct_prediction(const Eigen::VectorXd& model_out,
                                       const Eigen::MatrixXd& history, const CoefficientVector& c) {
  if (history.rows() > 0 && history.cols() != model_out.size()) {
    throw ValidationError("history dimension does not match the model output");
  }
  Eigen::VectorXd out = model_out;
  for (std::size_t i = 1; i < c.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i - 1);
    if (row < history.rows()) out -= c[i] * history.row(row).transpose();
  }
  return out;
}

Eigen::VectorXd preconditioned_target(const Eigen::VectorXd& y_t, const LagBuffer& history,
                                      const CoefficientVector& c) {
  Eigen::VectorXd out = y_t;
  for (std::size_t i = 1; i < c.size(); ++i) out += c[i] * history.at(i - 1);
  return out;
}

PreconditionedPredictor::PreconditionedPredictor(std::unique_ptr<InnerModel> inner,
                                                 CoefficientVector c)
    : inner_(std::move(inner)), c_(std::move(c)),
      history_(inner_ ? inner_->d_out() : 1, c_.degree()) {
  if (!inner_) throw ValidationError("preconditioned predictor needs an inner model");
}

Eigen::VectorXd PreconditionedPredictor::predict(const Eigen::VectorXd& u_t) {
  if (u_t.size() != inner_->d_in()) {
    throw ValidationError("input has dimension " + std::to_string(u_t.size()) + ", inner model expects " +
                          std::to_string(inner_->d_in()));
  }
  inner_out_ = inner_->predict(u_t);
  if (inner_out_.size() != inner_->d_out()) {
    throw ValidationError("inner model returned a vector of the wrong dimension");
  }
  prediction_ = reconstruct_prediction(inner_out_, history_, c_);
  pending_ = true;
  return prediction_;
}

StepRecord PreconditionedPredictor::observe(const Eigen::VectorXd& y_t) {
  if (!pending_) throw ValidationError("observe() called without a preceding predict()");
  if (y_t.size() != inner_->d_out()) {
    throw ValidationError("output has dimension " + std::to_string(y_t.size()) + ", expected " +
                          std::to_string(inner_->d_out()));
  }
  StepRecord rec;
  rec.prediction = prediction_;
  rec.target = y_t;
  rec.preconditioned_target = preconditioned_target(y_t, history_, c_);
  rec.raw_loss = (prediction_ - y_t).lpNorm<1>();
  rec.preconditioned_loss = (inner_out_ - rec.preconditioned_target).lpNorm<1>();
  inner_->update(rec.preconditioned_target);
  history_.push(y_t);
  pending_ = false;
  return rec;
}

PredictionStream run_online(OnlinePredictor& predictor, const Trajectory& traj) {
  traj.validate();
  if (traj.d_in() != predictor.d_in() || traj.d_out() != predictor.d_out()) {
    throw ValidationError("trajectory dimensions (" + std::to_string(traj.d_in()) + " in, " +
                          std::to_string(traj.d_out()) + " out) do not match the predictor");
  }
  const Eigen::Index T = traj.length();
  PredictionStream out;
  out.predictions.resize(T, traj.d_out());
  out.raw_loss.reserve(static_cast<std::size_t>(T));
  out.preconditioned_loss.reserve(static_cast<std::size_t>(T));
  for (Eigen::Index t = 0; t < T; ++t) {
    out.predictions.row(t) = predictor.predict(traj.inputs.row(t).transpose()).transpose();
    const auto rec = predictor.observe(traj.outputs.row(t).transpose());
    out.raw_loss.push_back(rec.raw_loss);
    out.preconditioned_loss.push_back(rec.preconditioned_loss);
  }
  return out;
}

PredictionStream run_offline_pipeline(InnerModel& inner, const Trajectory& traj,
                                      const CoefficientVector& c) {
  traj.validate();
  if (traj.d_in() != inner.d_in() || traj.d_out() != inner.d_out()) {
    throw ValidationError("trajectory dimensions do not match the inner model");
  }
  const Eigen::MatrixXd targets = convolve(traj.outputs, c);
  const Eigen::Index T = traj.length();
  PredictionStream out;
  out.predictions.resize(T, traj.d_out());
  LagBuffer history(traj.d_out(), c.degree());
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::VectorXd f = inner.predict(traj.inputs.row(t).transpose());
    const Eigen::VectorXd target = targets.row(t).transpose();
    inner.update(target);
    const Eigen::VectorXd y_hat = reconstruct_prediction(f, history, c);
    out.predictions.row(t) = y_hat.transpose();
    const Eigen::VectorXd y_t = traj.outputs.row(t).transpose();
    out.raw_loss.push_back((y_hat - y_t).lpNorm<1>());
    out.preconditioned_loss.push_back((f - target).lpNorm<1>());
    history.push(y_t);
  }
  return out;
}

}  // namespace usp
