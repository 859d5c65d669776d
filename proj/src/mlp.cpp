#include "dofvo/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dofvo/error.hpp"

namespace dofvo {

std::size_t MlpBranch::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

void MlpBranch::validate() const {
  if (dof_index < 0 || dof_index > 5) throw usage_error("branch dof_index must be in 0..5");
  if (layers.empty()) throw usage_error("branch has no layers");
  Eigen::Index in = 6;
  for (const auto& l : layers) {
    if (l.weight.cols() != in || l.bias.size() != l.weight.rows()) {
      throw usage_error("branch layer dimensions are incompatible");
    }
    if (!l.weight.allFinite() || !l.bias.allFinite()) throw usage_error("branch has non-finite parameters");
    in = l.weight.rows();
  }
  if (in != 1) throw usage_error("branch output layer must produce a single scalar");
  if ((input_std.array() < 1e-8).any() || !input_std.allFinite() || !input_mean.allFinite()) {
    throw usage_error("branch normalization must be finite with std >= 1e-8");
  }
}

Vec6 MlpBranch::normalize(const Vec6& input) const {
  Vec6 z = (input - input_mean).cwiseQuotient(input_std);
  for (int i = 0; i < 6; ++i)
    if (!input_mask[static_cast<std::size_t>(i)]) z(i) = 0.0;
  return z;
}

MlpBranch make_branch(int dof_index, const std::vector<int>& hidden, ActivationKind activation, std::uint64_t seed) {
  MlpBranch b;
  b.dof_index = dof_index;
  b.activation = activation;
  std::mt19937_64 rng(seed);
  int in = 6;
  std::vector<int> widths = hidden;
  widths.push_back(1);
  const bool relu_family = activation == ActivationKind::ReLU || activation == ActivationKind::LeakyReLU ||
                           activation == ActivationKind::ELU || activation == ActivationKind::SELU;
  for (std::size_t li = 0; li < widths.size(); ++li) {
    const int out = widths[li];
    if (out <= 0) throw usage_error("hidden layer widths must be positive");
    const bool last = li + 1 == widths.size();
    const double limit = (relu_family && !last) ? std::sqrt(6.0 / in) : std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    b.layers.push_back(std::move(layer));
    in = out;
  }
  return b;
}

double forward(const MlpBranch& branch, const Vec6& input) {
  Eigen::VectorXd a = branch.normalize(input);
  for (std::size_t li = 0; li < branch.layers.size(); ++li) {
    const auto& l = branch.layers[li];
    Eigen::VectorXd z = l.weight * a + l.bias;
    if (li + 1 < branch.layers.size()) {
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = activation_forward(branch.activation, z(i));
    }
    a = std::move(z);
  }
  return a(0);
}

BranchGradients backward(const MlpBranch& branch, const Vec6& input, double target) {
  const std::size_t n = branch.layers.size();
  std::vector<Eigen::VectorXd> acts{branch.normalize(input)};  // layer inputs
  std::vector<Eigen::VectorXd> pre;
  for (std::size_t li = 0; li < n; ++li) {
    const auto& l = branch.layers[li];
    Eigen::VectorXd z = l.weight * acts.back() + l.bias;
    pre.push_back(z);
    if (li + 1 < n) {
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = activation_forward(branch.activation, z(i));
    }
    acts.push_back(std::move(z));
  }
  BranchGradients g;
  g.output = acts.back()(0);
  const double err = g.output - target;
  g.loss = err * err;
  g.weight.resize(n);
  g.bias.resize(n);

  Eigen::VectorXd delta = Eigen::VectorXd::Constant(1, 2.0 * err);  // dL/dz of the output layer
  for (std::size_t li = n; li-- > 0;) {
    g.weight[li] = delta * acts[li].transpose();
    g.bias[li] = delta;
    if (li == 0) break;
    Eigen::VectorXd back = branch.layers[li].weight.transpose() * delta;
    for (Eigen::Index i = 0; i < back.size(); ++i) back(i) *= activation_derivative(branch.activation, pre[li - 1](i));
    delta = std::move(back);
  }
  return g;
}

Eigen::VectorXd flatten_parameters(const MlpBranch& branch) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(branch.parameter_count()));
  Eigen::Index k = 0;
  for (const auto& l : branch.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out(k++) = l.weight(r, c);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) out(k++) = l.bias(r);
  }
  return out;
}

void assign_parameters(MlpBranch& branch, const Eigen::VectorXd& params) {
  if (static_cast<std::size_t>(params.size()) != branch.parameter_count()) {
    throw usage_error("parameter vector size does not match branch");
  }
  Eigen::Index k = 0;
  for (auto& l : branch.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = params(k++);
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = params(k++);
  }
}

Eigen::VectorXd flatten_gradients(const BranchGradients& grads) {
  Eigen::Index total = 0;
  for (std::size_t i = 0; i < grads.weight.size(); ++i) total += grads.weight[i].size() + grads.bias[i].size();
  Eigen::VectorXd out(total);
  Eigen::Index k = 0;
  for (std::size_t i = 0; i < grads.weight.size(); ++i) {
    const auto& w = grads.weight[i];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) out(k++) = w(r, c);
    for (Eigen::Index r = 0; r < grads.bias[i].size(); ++r) out(k++) = grads.bias[i](r);
  }
  return out;
}

bool near_activation_kink(const MlpBranch& branch, const Vec6& input, double margin) {
  if (!has_kink(branch.activation)) return false;
  Eigen::VectorXd a = branch.normalize(input);
  for (std::size_t li = 0; li + 1 < branch.layers.size(); ++li) {
    Eigen::VectorXd z = branch.layers[li].weight * a + branch.layers[li].bias;
    if ((z.array().abs() < margin).any()) return true;
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = activation_forward(branch.activation, z(i));
    a = std::move(z);
  }
  return false;
}

double gradient_check(const MlpBranch& branch, const Vec6& input, double target, const GradientCheckOptions& opts) {
  const Eigen::VectorXd analytic = flatten_gradients(backward(branch, input, target));
  const Eigen::VectorXd base = flatten_parameters(branch);
  MlpBranch probe = branch;
  const auto loss_at = [&](const Eigen::VectorXd& p) {
    assign_parameters(probe, p);
    const double e = forward(probe, input) - target;
    return e * e;
  };
  double worst = 0.0;
  Eigen::VectorXd p = base;
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    p(i) = base(i) + opts.step;
    const double up = loss_at(p);
    p(i) = base(i) - opts.step;
    const double down = loss_at(p);
    p(i) = base(i);
    const double numeric = (up - down) / (2.0 * opts.step);
    const double err = std::abs(analytic(i) - numeric) / std::max(std::abs(analytic(i)), opts.floor);
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace dofvo
