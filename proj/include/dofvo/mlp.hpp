#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "dofvo/activation.hpp"
#include "dofvo/se3.hpp"

namespace dofvo {

using Vec6 = Eigen::Matrix<double, 6, 1>;

inline Vec6 to_vec6(const DoFVector& d) { return Eigen::Map<const Vec6>(d.values.data()); }
inline DoFVector to_dof(const Vec6& v) { return {v(0), v(1), v(2), v(3), v(4), v(5)}; }

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// One fully connected network refining a single degree of freedom.
///
/// The input is z-scored with (input_mean, input_std), masked, pushed through
/// the hidden layers with `activation`, and the last layer is a linear scalar.
struct MlpBranch {
  int dof_index = 0;
  ActivationKind activation = ActivationKind::Tanh;
  std::vector<DenseLayer> layers;
  Vec6 input_mean = Vec6::Zero();
  Vec6 input_std = Vec6::Ones();
  std::array<bool, 6> input_mask{true, true, true, true, true, true};
  bool frozen = false;

  std::size_t parameter_count() const;
  /// Throws usage_error on incompatible shapes, non-finite parameters, or std < 1e-8.
  void validate() const;
  Vec6 normalize(const Vec6& input) const;
};

struct BranchGradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
  double loss = 0.0;
  double output = 0.0;
};

/// Randomly initialized branch: He-uniform for the ReLU family, Xavier-uniform otherwise.
MlpBranch make_branch(int dof_index, const std::vector<int>& hidden, ActivationKind activation, std::uint64_t seed);

double forward(const MlpBranch& branch, const Vec6& input);

/// Reverse-mode gradients of (forward(input) - target)^2.
BranchGradients backward(const MlpBranch& branch, const Vec6& input, double target);

/// Parameters in layer order, each layer's weights row-major followed by its bias.
Eigen::VectorXd flatten_parameters(const MlpBranch& branch);
void assign_parameters(MlpBranch& branch, const Eigen::VectorXd& params);
Eigen::VectorXd flatten_gradients(const BranchGradients& grads);

/// True when some hidden pre-activation lies within `margin` of a kink.
bool near_activation_kink(const MlpBranch& branch, const Vec6& input, double margin);

struct GradientCheckOptions {
  double step = 1e-6;
  /// Denominator floor of the relative error.
  double floor = 1e-8;
};

/// max over parameters of |analytic - central difference| / max(|analytic|, floor).
double gradient_check(const MlpBranch& branch, const Vec6& input, double target, const GradientCheckOptions& opts = {});

}  // namespace dofvo
