#include "dofvo/refiner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

namespace dofvo {

namespace {

struct Split {
  std::vector<const TrainingSample*> train;
  std::vector<const TrainingSample*> val;
};

Split split_samples(const std::vector<TrainingSample>& samples, double val_fraction) {
  std::vector<const TrainingSample*> usable;
  for (const auto& s : samples)
    if (!s.failed && s.input.all_finite() && s.target.all_finite()) usable.push_back(&s);
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(usable.size()) * val_fraction));
  Split out;
  out.train.assign(usable.begin(), usable.end() - static_cast<std::ptrdiff_t>(n_val));
  out.val.assign(usable.end() - static_cast<std::ptrdiff_t>(n_val), usable.end());
  return out;
}

std::size_t draw_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % n);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<std::size_t>(v % n);
}

// Column-per-sample batch evaluation of a branch, keeping what backprop needs.
struct BatchPass {
  std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activations of each layer
};

Eigen::RowVectorXd batch_forward(const MlpBranch& b, const Eigen::MatrixXd& x, BatchPass* keep) {
  Eigen::MatrixXd a = x;
  for (std::size_t li = 0; li < b.layers.size(); ++li) {
    const auto& l = b.layers[li];
    Eigen::MatrixXd z = l.weight * a;
    z.colwise() += l.bias;
    if (keep) {
      keep->inputs.push_back(a);
      keep->pre.push_back(z);
    }
    if (li + 1 < b.layers.size()) z = z.unaryExpr([&](double v) { return activation_forward(b.activation, v); });
    a = std::move(z);
  }
  return a.row(0);
}

double mse(const MlpBranch& b, const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y) {
  if (y.size() == 0) return 0.0;
  return (batch_forward(b, x, nullptr) - y).squaredNorm() / static_cast<double>(y.size());
}

// Gradient of the batch MSE, flattened in flatten_parameters order.
Eigen::VectorXd batch_gradient(const MlpBranch& b, const Eigen::MatrixXd& x, const Eigen::RowVectorXd& y) {
  BatchPass pass;
  const Eigen::RowVectorXd out = batch_forward(b, x, &pass);
  const double inv_n = 1.0 / static_cast<double>(y.size());
  Eigen::MatrixXd delta = (2.0 * inv_n) * (out - y);
  const std::size_t n = b.layers.size();
  std::vector<Eigen::MatrixXd> dw(n);
  std::vector<Eigen::VectorXd> db(n);
  for (std::size_t li = n; li-- > 0;) {
    dw[li] = delta * pass.inputs[li].transpose();
    db[li] = delta.rowwise().sum();
    if (li == 0) break;
    Eigen::MatrixXd back = b.layers[li].weight.transpose() * delta;
    const Eigen::MatrixXd deriv =
        pass.pre[li - 1].unaryExpr([&](double v) { return activation_derivative(b.activation, v); });
    delta = back.cwiseProduct(deriv);
  }
  BranchGradients g;
  g.weight = std::move(dw);
  g.bias = std::move(db);
  return flatten_gradients(g);
}

Eigen::MatrixXd normalized_inputs(const MlpBranch& b, const std::vector<const TrainingSample*>& s) {
  Eigen::MatrixXd x(6, static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = b.normalize(to_vec6(s[i]->input));
  return x;
}

Eigen::RowVectorXd targets(const std::vector<const TrainingSample*>& s, int dof) {
  Eigen::RowVectorXd y(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) y(static_cast<Eigen::Index>(i)) = s[i]->target[static_cast<std::size_t>(dof)];
  return y;
}

}  // namespace

void TrainConfig::validate() const {
  for (int w : hidden)
    if (w <= 0) throw usage_error("train: hidden layer widths must be positive");
  if (!(learning_rate > 0.0)) throw usage_error("train: learning rate must be positive");
  if (batch_size <= 0) throw usage_error("train: batch size must be positive");
  if (epochs <= 0) throw usage_error("train: epochs must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction <= 0.5)) {
    throw usage_error("train: validation fraction must lie in [0, 0.5]");
  }
  if (patience <= 0) throw usage_error("train: patience must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw usage_error("train: momentum must lie in [0, 1)");
}

std::map<std::string, std::string> TrainConfig::describe() const {
  std::map<std::string, std::string> m;
  std::ostringstream widths;
  for (std::size_t i = 0; i < hidden.size(); ++i) widths << (i ? "," : "") << hidden[i];
  m["train.hidden"] = widths.str();
  std::ostringstream lr;
  lr.precision(17);
  lr << learning_rate;
  m["train.learning_rate"] = lr.str();
  m["train.optimizer"] = optimizer == OptimizerKind::Adam ? "adam" : "sgd";
  m["train.batch_size"] = std::to_string(batch_size);
  m["train.epochs"] = std::to_string(epochs);
  std::ostringstream vf;
  vf << validation_fraction;
  m["train.validation_fraction"] = vf.str();
  m["train.seed"] = std::to_string(seed);
  m["train.patience"] = std::to_string(patience);
  return m;
}

BranchTraining train_branch(const std::vector<TrainingSample>& samples, int dof_index, ActivationKind activation,
                            const TrainConfig& cfg) {
  cfg.validate();
  if (dof_index < 0 || dof_index > 5) throw usage_error("train_branch: dof_index must be in 0..5");
  const std::size_t usable = static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const TrainingSample& s) { return !s.failed; }));
  const std::size_t needed = 10 * static_cast<std::size_t>(cfg.batch_size);
  if (usable < needed) {
    throw TooFewSamplesError("train_branch: " + std::to_string(usable) + " usable samples, need at least " +
                             std::to_string(needed));
  }
  const Split split = split_samples(samples, cfg.validation_fraction);

  // Sub-seed per branch so branches differ but each stays reproducible.
  MlpBranch branch = make_branch(dof_index, cfg.hidden, activation, cfg.seed * 1000003ULL + static_cast<std::uint64_t>(dof_index));
  branch.input_mask = cfg.input_mask;
  {
    Vec6 mean = Vec6::Zero(), sq = Vec6::Zero();
    for (const auto* s : split.train) {
      const Vec6 v = to_vec6(s->input);
      mean += v;
      sq += v.cwiseProduct(v);
    }
    const double n = static_cast<double>(split.train.size());
    mean /= n;
    Vec6 var = sq / n - mean.cwiseProduct(mean);
    for (int i = 0; i < 6; ++i) {
      const double sd = std::sqrt(std::max(var(i), 0.0));
      branch.input_std(i) = sd >= 1e-8 ? sd : 1.0;
    }
    branch.input_mean = mean;
  }

  const Eigen::MatrixXd x_train = normalized_inputs(branch, split.train);
  const Eigen::RowVectorXd y_train = targets(split.train, dof_index);
  const Eigen::MatrixXd x_val = normalized_inputs(branch, split.val);
  const Eigen::RowVectorXd y_val = targets(split.val, dof_index);
  const bool has_val = !split.val.empty();

  // Layer evaluation below runs on already-normalized columns.
  MlpBranch work = branch;
  work.input_mean.setZero();
  work.input_std.setOnes();
  work.input_mask = {true, true, true, true, true, true};

  BranchTraining out;
  const auto evaluate = [&](int epoch) {
    CurvePoint p{epoch, mse(work, x_train, y_train), has_val ? mse(work, x_val, y_val) : 0.0};
    if (!std::isfinite(p.train_loss) || !std::isfinite(p.val_loss)) {
      throw DivergenceError("train_branch: non-finite loss at epoch " + std::to_string(epoch) + " (dof " +
                                std::to_string(dof_index) + ")",
                            epoch);
    }
    out.curve.push_back(p);
    return has_val ? p.val_loss : p.train_loss;
  };

  Eigen::VectorXd params = flatten_parameters(work);
  Eigen::VectorXd best_params = params;
  double best_loss = evaluate(0);
  out.initial_val_loss = out.curve.front().val_loss;
  int since_best = 0;

  Eigen::VectorXd m = Eigen::VectorXd::Zero(params.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(params.size());
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long step = 0;

  std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(dof_index + 1)));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x_train.cols()));
  std::iota(order.begin(), order.end(), 0);
  const auto bs = static_cast<Eigen::Index>(cfg.batch_size);
  Eigen::MatrixXd xb(6, bs);
  Eigen::RowVectorXd yb(bs);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[draw_index(rng, i)]);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(bs)) {
      const auto count = static_cast<Eigen::Index>(std::min<std::size_t>(static_cast<std::size_t>(bs), order.size() - start));
      xb.resize(6, count);
      yb.resize(count);
      for (Eigen::Index j = 0; j < count; ++j) {
        xb.col(j) = x_train.col(order[start + static_cast<std::size_t>(j)]);
        yb(j) = y_train(order[start + static_cast<std::size_t>(j)]);
      }
      const Eigen::VectorXd g = batch_gradient(work, xb, yb);
      ++step;
      if (cfg.optimizer == OptimizerKind::Adam) {
        m = kBeta1 * m + (1.0 - kBeta1) * g;
        v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
        params.array() -= cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
      } else {
        m = cfg.momentum * m - cfg.learning_rate * g;
        params += m;
      }
      assign_parameters(work, params);
    }
    const double loss = evaluate(epoch);
    if (loss < best_loss) {
      best_loss = loss;
      best_params = params;
      out.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }

  assign_parameters(branch, best_params);
  out.branch = std::move(branch);
  out.final_val_loss = best_loss;
  return out;
}

void CombinedModel::validate() const {
  if (branches.size() != 6) throw usage_error("combined model must hold exactly 6 branches");
  for (std::size_t i = 0; i < 6; ++i) {
    branches[i].validate();
    if (branches[i].dof_index != static_cast<int>(i)) throw usage_error("combined model branches out of order");
  }
  if (has_fusion && (!fusion_weight.allFinite() || !fusion_bias.allFinite())) {
    throw usage_error("combined model has non-finite fusion parameters");
  }
}

void CombinedModel::reset_fusion_to_identity() {
  fusion_weight.setZero();
  fusion_weight.leftCols<6>().setIdentity();
  fusion_bias.setZero();
}

CombinedModel combine_branches(std::vector<MlpBranch> branches, bool freeze) {
  std::array<int, 6> seen{};
  for (const auto& b : branches) {
    if (b.dof_index < 0 || b.dof_index > 5) throw usage_error("combine: dof_index out of range");
    if (++seen[static_cast<std::size_t>(b.dof_index)] > 1) {
      throw usage_error("combine: duplicate branch for dof_index " + std::to_string(b.dof_index));
    }
  }
  for (std::size_t i = 0; i < 6; ++i) {
    if (seen[i] == 0) throw usage_error("combine: missing branch for dof_index " + std::to_string(i));
  }
  std::sort(branches.begin(), branches.end(), [](const MlpBranch& a, const MlpBranch& b) { return a.dof_index < b.dof_index; });
  CombinedModel model;
  model.branches = std::move(branches);
  if (freeze)
    for (auto& b : model.branches) b.frozen = true;
  model.has_fusion = true;
  model.reset_fusion_to_identity();
  model.validate();
  return model;
}

Vec6 branch_outputs(const CombinedModel& model, const Vec6& raw) {
  Vec6 out;
  for (std::size_t i = 0; i < 6; ++i) out(static_cast<Eigen::Index>(i)) = forward(model.branches[i], raw);
  return out;
}

DoFVector infer(const CombinedModel& model, const DoFVector& raw) {
  const Vec6 x = to_vec6(raw);
  const Vec6 o = branch_outputs(model, x);
  if (!model.has_fusion) return to_dof(o);
  Eigen::Matrix<double, 12, 1> features;
  features << o, x;
  return to_dof(model.fusion_weight * features + model.fusion_bias);
}

FusionTraining train_combined(const CombinedModel& model, const std::vector<TrainingSample>& samples,
                              const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  for (const auto& b : model.branches) {
    if (!b.frozen) {
      throw usage_error("train_combined: branch " + std::to_string(b.dof_index) + " is not frozen");
    }
  }
  const Split split = split_samples(samples, cfg.validation_fraction);
  if (split.train.size() < 13) throw TooFewSamplesError("train_combined: fewer than 13 usable training samples");

  FusionTraining out;
  out.model = model;
  if (!out.model.has_fusion) {
    out.model.has_fusion = true;
    out.model.reset_fusion_to_identity();
  }

  const auto features_of = [&](const TrainingSample& s) {
    const Vec6 x = to_vec6(s.input);
    Eigen::Matrix<double, 13, 1> f;
    f << branch_outputs(model, x), x, 1.0;
    return f;
  };
  const auto loss_on = [&](const CombinedModel& m, const std::vector<const TrainingSample*>& set) {
    if (set.empty()) return 0.0;
    double acc = 0.0;
    for (const auto* s : set) acc += (to_vec6(infer(m, s->input)) - to_vec6(s->target)).squaredNorm();
    return acc / (6.0 * static_cast<double>(set.size()));
  };
  const auto& selection = split.val.empty() ? split.train : split.val;

  out.pre_fusion_val_loss = loss_on(out.model, selection);
  if (!std::isfinite(out.pre_fusion_val_loss)) {
    throw DivergenceError("train_combined: non-finite pre-fusion loss", 0);
  }

  // Minimum-norm least-squares correction of the current head.
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(split.train.size()), 13);
  Eigen::MatrixXd resid(static_cast<Eigen::Index>(split.train.size()), 6);
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    phi.row(r) = features_of(*split.train[i]).transpose();
    resid.row(r) = (to_vec6(split.train[i]->target) - to_vec6(infer(out.model, split.train[i]->input))).transpose();
  }
  const Eigen::MatrixXd delta = phi.completeOrthogonalDecomposition().solve(resid);  // 13 x 6
  if (!delta.allFinite()) throw DivergenceError("train_combined: non-finite fusion solution", 1);

  CombinedModel candidate = out.model;
  candidate.fusion_weight += delta.topRows<12>().transpose();
  candidate.fusion_bias += delta.row(12).transpose();
  const double candidate_loss = loss_on(candidate, selection);
  if (std::isfinite(candidate_loss) && candidate_loss <= out.pre_fusion_val_loss) {
    out.model = std::move(candidate);
    out.post_fusion_val_loss = candidate_loss;
  } else {
    out.post_fusion_val_loss = out.pre_fusion_val_loss;
  }
  return out;
}

CombinedModel identity_model() {
  std::vector<MlpBranch> branches;
  for (int i = 0; i < 6; ++i) {
    MlpBranch b;
    b.dof_index = i;
    b.activation = ActivationKind::Identity;
    DenseLayer l{Eigen::MatrixXd::Zero(1, 6), Eigen::VectorXd::Zero(1)};
    l.weight(0, i) = 1.0;
    b.layers.push_back(std::move(l));
    branches.push_back(std::move(b));
  }
  return combine_branches(std::move(branches));
}

}  // namespace dofvo
