#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dofvo/config.hpp"
#include "dofvo/metrics.hpp"
#include "dofvo/trajectory_io.hpp"

namespace dofvo {

/// Everything a command needs beyond the config file. Empty paths mean the
/// default file name inside `config.output_dir`.
struct CommandContext {
  PipelineConfig config;
  bool align = true;
  AngleUnits units = AngleUnits::Radians;
  std::filesystem::path gt_csv;       // relative_gt.csv
  std::filesystem::path raw_csv;      // raw_poses.csv
  std::filesystem::path refined_csv;  // refined_poses.csv
  std::filesystem::path model_path;   // model.odof
  bool test_only = false;             // eval: restrict to the held-out block
  std::vector<ActivationKind> activations;  // ablate; empty means all six
  int bench_pairs = 200;
  unsigned threads = 0;  // 0: hardware concurrency
  std::ostream* log = nullptr;  // defaults to std::cout

  std::filesystem::path gt_path() const;
  std::filesystem::path raw_path() const;
  std::filesystem::path refined_path() const;
  std::filesystem::path model_file() const;
  std::filesystem::path out(const std::string& name) const { return config.output_dir / name; }
  std::ostream& os() const;
};

inline constexpr const char* kRelativeGtFile = "relative_gt.csv";
inline constexpr const char* kRawPosesFile = "raw_poses.csv";
inline constexpr const char* kRefinedPosesFile = "refined_poses.csv";
inline constexpr const char* kModelFile = "model.odof";

/// Stage timing summary in microseconds.
struct LatencyStats {
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  std::size_t samples = 0;
};
LatencyStats latency_stats(std::vector<double> values_us);

/// Per-command record written as `manifest_<command>.json` at run end.
class RunManifest {
 public:
  RunManifest(std::string command, const PipelineConfig& config);
  void stage(const std::string& name, double wall_ms) { stages_[name] = wall_ms; }
  void count(const std::string& name, std::size_t n) { counts_[name] = n; }
  void output(const std::filesystem::path& p) { outputs_.push_back(p); }
  void note(const std::string& key, const std::string& value) { notes_[key] = value; }
  const std::vector<std::filesystem::path>& outputs() const { return outputs_; }
  /// Atomic: temporary sibling + rename. Returns the manifest path.
  std::filesystem::path write(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  std::map<std::string, std::string> config_;
  std::string config_hash_;
  std::map<std::string, double> stages_;
  std::map<std::string, std::size_t> counts_;
  std::map<std::string, std::string> notes_;
  std::vector<std::filesystem::path> outputs_;
};

struct ConvertGtResult {
  std::size_t pairs = 0;
  std::size_t dropped = 0;
  std::size_t normalization_warnings = 0;
};
ConvertGtResult cmd_convert_gt(const CommandContext& ctx);

struct RunVoResult {
  std::vector<PoseRow> rows;
  std::size_t failures = 0;
  bool metric_scale = false;  // translations rescaled by ground-truth step length
  std::map<std::string, LatencyStats> timing;
};
RunVoResult cmd_run_vo(const CommandContext& ctx);

struct DofRmse {
  std::array<double, 6> raw{};
  std::array<double, 6> refined{};
};
struct TrainResult {
  DofRmse validation;
  DofRmse test;
  double pre_fusion_val_loss = 0.0;
  double post_fusion_val_loss = 0.0;
};
TrainResult cmd_train(const CommandContext& ctx);

struct InferResult {
  std::vector<PoseRow> rows;
  LatencyStats latency;
};
InferResult cmd_infer(const CommandContext& ctx);

struct EvalResult {
  RpeReport raw_rpe;
  AteReport raw_ate;
  std::optional<RpeReport> refined_rpe;
  std::optional<AteReport> refined_ate;
  /// Relative change of the pooled RPE translation and mean ATE, in percent (negative is better).
  std::optional<double> rpe_change_pct;
  std::optional<double> ate_change_pct;
};
EvalResult cmd_eval(const CommandContext& ctx);

struct AblateResult {
  std::vector<AblationRow> rows;
  AblationRow baseline;
  AblationTables tables;
};
AblateResult cmd_ablate(const CommandContext& ctx);

struct BenchResult {
  std::map<std::string, LatencyStats> stages;  // harris, shi_tomasi, track, essential, recover, infer, pair
  double fps = 0.0;
  std::size_t pairs = 0;
};
BenchResult cmd_bench(const CommandContext& ctx);

/// Writes the annotated default config to `path` (refuses to overwrite).
void cmd_init_config(const std::filesystem::path& path);

}  // namespace dofvo
