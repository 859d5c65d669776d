#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dofvo/error.hpp"
#include "dofvo/mlp.hpp"

namespace dofvo {

/// One frame pair: the (metrically scaled) frontend pose and its ground truth.
struct TrainingSample {
  DoFVector input;
  DoFVector target;
  bool failed = false;
};

enum class OptimizerKind { Sgd, Adam };

struct TrainConfig {
  std::vector<int> hidden{32, 32};
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double momentum = 0.9;  // SGD only
  int batch_size = 64;
  int epochs = 200;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;
  int patience = 20;
  std::array<bool, 6> input_mask{true, true, true, true, true, true};

  void validate() const;
  std::map<std::string, std::string> describe() const;
};

struct CurvePoint {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct BranchTraining {
  MlpBranch branch;
  std::vector<CurvePoint> curve;  // epoch 0 is the untrained network
  double initial_val_loss = 0.0;
  double final_val_loss = 0.0;
  int best_epoch = 0;
};

class TooFewSamplesError : public Error {
 public:
  explicit TooFewSamplesError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch) : Error(ErrorKind::Numerical, what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Fits branch `dof_index` to target[dof_index] by mini-batch MSE. Failed
/// samples are skipped; the last `validation_fraction` of the remaining
/// samples (in order) is held out and drives early stopping. Returns the
/// best-validation parameters.
BranchTraining train_branch(const std::vector<TrainingSample>& samples, int dof_index, ActivationKind activation,
                            const TrainConfig& cfg);

/// Six frozen branches plus a linear fusion head over [branch outputs; raw input].
struct CombinedModel {
  std::vector<MlpBranch> branches;  // index i holds dof_index i
  bool has_fusion = true;
  Eigen::Matrix<double, 6, 12> fusion_weight = Eigen::Matrix<double, 6, 12>::Zero();
  Vec6 fusion_bias = Vec6::Zero();
  std::map<std::string, std::string> metadata;

  void validate() const;
  /// Fusion head that forwards branch i to output i.
  void reset_fusion_to_identity();
};

/// Orders the branches by dof_index; throws usage_error on duplicates or gaps.
CombinedModel combine_branches(std::vector<MlpBranch> branches, bool freeze = true);

struct FusionTraining {
  CombinedModel model;
  double pre_fusion_val_loss = 0.0;
  double post_fusion_val_loss = 0.0;
};

/// Fits only the fusion head (least squares on the training split, accepted
/// only if validation loss does not increase). Requires every branch frozen.
FusionTraining train_combined(const CombinedModel& model, const std::vector<TrainingSample>& samples,
                              const TrainConfig& cfg);

/// Forward pass only.
DoFVector infer(const CombinedModel& model, const DoFVector& raw);

/// Stacked per-branch outputs without the fusion head.
Vec6 branch_outputs(const CombinedModel& model, const Vec6& raw);

/// A model whose inference returns the input unchanged.
CombinedModel identity_model();

}  // namespace dofvo
