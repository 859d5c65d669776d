#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "dofvo/activation.hpp"
#include "dofvo/epipolar.hpp"
#include "dofvo/frontend.hpp"
#include "dofvo/refiner.hpp"

namespace dofvo {

/// Contiguous time-block split of the pair sequence.
struct SplitConfig {
  double train = 0.8;
  double validation = 0.1;  // the remainder is the held-out test block

  void validate() const;
};

struct PipelineConfig {
  std::filesystem::path dataset_root;
  std::string camera = "cam0";
  CameraIntrinsics intrinsics{458.654, 457.296, 367.215, 248.375};  // EuRoC cam0
  FrontendConfig frontend;
  TrainConfig train;
  ActivationKind activation = ActivationKind::Tanh;
  SplitConfig split;
  /// GT timestamps may be clamped to the boundary record within this margin.
  std::int64_t max_extrapolation_ns = 0;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "dofvo_out";

  /// Range checks only; path existence is checked by the command that needs it.
  void validate() const;
  /// Flat `section.key = value` snapshot, stable order.
  std::map<std::string, std::string> snapshot() const;
  /// FNV-1a over the snapshot, as 16 hex digits.
  std::string hash() const;
};

/// Named sub-seed so every random consumer draws from an independent stream.
std::uint64_t sub_seed(std::uint64_t seed, const std::string& name);

PipelineConfig load_config(const std::filesystem::path& path);
/// INI text with every key at its default and a comment describing it.
std::string config_template();

}  // namespace dofvo
