#pragma once

// Synthetic data generators: linear dynamical systems with a controlled
// eigenvalue spectrum, a two-layer nonlinear system, and Gaussian inputs.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace usp {

/// x_t = A x_{t-1} + B u_t, y_t = C x_t + eps_t with x_0 = 0 and D = 0.
struct LinearSystem {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  std::vector<std::complex<double>> eigenvalues;
  double kappa = 1.0;        // cond(P) for an eigenbasis P of A
  double noise_sigma = 0.0;  // output noise standard deviation

  Eigen::Index d_hidden() const { return A.rows(); }
  Eigen::Index d_in() const { return B.cols(); }
  Eigen::Index d_out() const { return C.rows(); }

  /// Throws ValidationError on inconsistent shapes or broken invariants.
  void validate() const;
};

/// Wraps explicit matrices, filling eigenvalues and kappa from a dense
/// eigendecomposition of A.
LinearSystem make_linear_system(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::MatrixXd C,
                                double noise_sigma = 0.0);

/// Cyclic permutation transition with B = C = I; its eigenvalues are the
/// d_hidden-th roots of unity.
LinearSystem memory_system(Eigen::Index d_hidden);

struct SystemConfig {
  Eigen::Index d_hidden = 50;
  Eigen::Index d_in = 1;
  Eigen::Index d_out = 1;
  double tau = 0.01;          // bound on |Im z_j|
  double radius_lo = 0.9;     // L
  double radius_hi = 1.0;     // U
  double noise_sigma = 0.1;
  double max_condition = 10.0;
  bool nonnegative_real = false;  // restrict eigenvalues to Re z >= 0
};

/// Eigenvalues uniform on {L <= |z| <= U, |Im z| <= tau} in conjugate pairs
/// (one real eigenvalue when d_hidden is odd; all real when tau = 0),
/// realified as 2x2 rotation-scaling blocks conjugated by P = O diag(s),
/// O Haar-orthogonal, cond(diag(s)) <= max_condition. B and C are standard
/// Gaussian scaled by 1/sqrt(d_hidden).
LinearSystem sample_system(const SystemConfig& config, std::uint64_t seed);

/// Sorted-by-(real, imag) copy, for multiset comparisons.
std::vector<std::complex<double>> sorted_spectrum(std::vector<std::complex<double>> values);

struct Trajectory {
  Eigen::MatrixXd inputs;   // T x d_in
  Eigen::MatrixXd outputs;  // T x d_out
  std::uint64_t seed = 0;
  std::string generator_tag;
  std::map<std::string, std::string> provenance;

  Eigen::Index length() const { return outputs.rows(); }
  Eigen::Index d_in() const { return inputs.cols(); }
  Eigen::Index d_out() const { return outputs.cols(); }

  void validate() const;
};

/// Runs the recurrence over `inputs` (T x d_in); noise is drawn from `seed`.
Trajectory simulate_lds(const LinearSystem& sys, const Eigen::MatrixXd& inputs,
                        std::uint64_t seed);

enum class Activation { Tanh, Identity };

struct NonlinearSystem {
  Eigen::MatrixXd A1, B1, A2, B2, C;
  Activation activation = Activation::Tanh;
  double noise_sigma = 0.0;

  void validate() const;
};

struct NonlinearConfig {
  Eigen::Index d_hidden = 10;
  Eigen::Index d_in = 1;
  Eigen::Index d_out = 1;
  double tau = 0.01;
  double radius_lo = 0.9;
  double radius_hi = 1.0;
  double noise_sigma = 0.1;
  Activation activation = Activation::Tanh;
};

/// Samples (A1, B1, C) and (A2, B2) with the linear-system sampler.
NonlinearSystem sample_nonlinear(const NonlinearConfig& config, std::uint64_t seed);

/// x0_t = A1 x_{t-1} + B1 u_t; x1_t = act(x0_t); x_t = A2 x1_t + B2 u_t;
/// y_t = C x_t + eps_t.
Trajectory simulate_nonlinear(const NonlinearSystem& sys, const Eigen::MatrixXd& inputs,
                              std::uint64_t seed);

enum class InputScaling { Raw, UnitNorm };

/// T x d_in matrix of i.i.d. N(0, 1) entries; UnitNorm rescales every row to
/// unit l2 norm.
Eigen::MatrixXd gaussian_inputs(Eigen::Index T, Eigen::Index d_in, std::uint64_t seed,
                                InputScaling scaling = InputScaling::Raw);

}  // namespace usp
