#include "dofvo/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "dofvo/csv.hpp"
#include "dofvo/euroc_io.hpp"
#include "dofvo/frontend.hpp"
#include "dofvo/image.hpp"
#include "dofvo/model_io.hpp"
#include "dofvo/refiner.hpp"

#ifndef DOFVO_VERSION
#define DOFVO_VERSION "0.0.0"
#endif

namespace dofvo {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double us_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::micro>(b - a).count();
}

unsigned worker_count(const CommandContext& ctx, std::size_t jobs) {
  unsigned n = ctx.threads ? ctx.threads : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

/// Runs `fn(begin, end)` on contiguous chunks; results land by index so order
/// never depends on scheduling. The first exception is rethrown.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned workers, Fn fn) {
  if (workers <= 1 || n <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t b = n * w / workers, e = n * (w + 1) / workers;
    pool.emplace_back([&, w, b, e] {
      try {
        fn(b, e);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string fixed(double v, int decimals = 4) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

void ensure_output_dir(const CommandContext& ctx) { fs::create_directories(ctx.config.output_dir); }

void write_text(const fs::path& p, const std::string& text) {
  auto out = csv::open_for_write(p);
  out << text;
}

std::vector<RelativeGtRow> require_gt(const CommandContext& ctx) {
  const fs::path p = ctx.gt_path();
  if (!fs::exists(p)) throw data_error("relative ground truth not found: " + p.string() + " (run convert-gt first)");
  return read_relative_gt_csv(p);
}

std::vector<PoseRow> require_poses(const fs::path& p, const char* hint) {
  if (!fs::exists(p)) throw data_error("pose file not found: " + p.string() + " (" + hint + ")");
  return read_pose_csv(p);
}

void check_aligned(const std::vector<PoseRow>& rows, const std::vector<RelativeGtRow>& gt, const fs::path& what) {
  const std::size_t n = std::min(rows.size(), gt.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].timestamp_a != gt[i].timestamp_a || rows[i].timestamp_b != gt[i].timestamp_b) {
      throw data_error("alignment mismatch at row " + std::to_string(i + 1) + " of " + what.string() + ": pair " +
                       std::to_string(rows[i].timestamp_a) + "->" + std::to_string(rows[i].timestamp_b) +
                       " vs ground truth " + std::to_string(gt[i].timestamp_a) + "->" +
                       std::to_string(gt[i].timestamp_b));
    }
  }
  if (rows.size() != gt.size()) {
    throw data_error("alignment mismatch at row " + std::to_string(n + 1) + " of " + what.string() + ": " +
                     std::to_string(rows.size()) + " pose rows vs " + std::to_string(gt.size()) +
                     " ground-truth rows");
  }
}

struct SplitBounds {
  std::size_t train_end;
  std::size_t val_end;
};

SplitBounds split_bounds(std::size_t n, const SplitConfig& s) {
  const auto train_end = static_cast<std::size_t>(std::floor(s.train * static_cast<double>(n)));
  const auto val_end = static_cast<std::size_t>(std::floor((s.train + s.validation) * static_cast<double>(n)));
  return {train_end, std::min(val_end, n)};
}

std::vector<TrainingSample> make_samples(const std::vector<PoseRow>& rows, const std::vector<RelativeGtRow>& gt) {
  std::vector<TrainingSample> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = {rows[i].dof, gt[i].dof, rows[i].failed};
  return out;
}

struct TrainedModel {
  CombinedModel model;
  std::vector<BranchTraining> branches;
  FusionTraining fusion;
};

TrainConfig effective_train_config(const CommandContext& ctx, const SplitBounds& b) {
  TrainConfig cfg = ctx.config.train;
  cfg.seed = sub_seed(ctx.config.seed, "train");
  cfg.validation_fraction = b.val_end ? static_cast<double>(b.val_end - b.train_end) / static_cast<double>(b.val_end) : 0.0;
  return cfg;
}

TrainedModel train_model(const CommandContext& ctx, const std::vector<TrainingSample>& fit, ActivationKind act,
                         const TrainConfig& cfg) {
  TrainedModel out;
  out.branches.resize(6);
  parallel_chunks(6, worker_count(ctx, 6), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out.branches[i] = train_branch(fit, static_cast<int>(i), act, cfg);
  });
  std::vector<MlpBranch> branches;
  for (const auto& bt : out.branches) branches.push_back(bt.branch);
  out.fusion = train_combined(combine_branches(std::move(branches)), fit, cfg);
  out.model = out.fusion.model;
  out.model.metadata = cfg.describe();
  out.model.metadata["activation"] = token(act);
  out.model.metadata["config_hash"] = ctx.config.hash();
  out.model.metadata["seed"] = std::to_string(ctx.config.seed);
  return out;
}

std::vector<PoseRow> refine(const CombinedModel& model, const std::vector<PoseRow>& rows) {
  std::vector<PoseRow> out = rows;
  for (auto& r : out)
    if (!r.failed) r.dof = infer(model, r.dof);
  return out;
}

struct Reports {
  RpeReport rpe;
  AteReport ate;
};

Reports evaluate(const std::vector<PoseRow>& rows, const std::vector<RelativeGtRow>& gt, std::size_t begin,
                 std::size_t end, bool align) {
  if (end <= begin) throw data_error("evaluation range is empty");
  std::vector<DoFVector> est, ref;
  std::vector<std::uint8_t> failed;
  std::vector<Nanoseconds> stamps{rows[begin].timestamp_a};
  for (std::size_t i = begin; i < end; ++i) {
    est.push_back(rows[i].failed ? DoFVector{} : rows[i].dof);
    ref.push_back(gt[i].dof);
    failed.push_back(rows[i].failed ? 1 : 0);
    stamps.push_back(rows[i].timestamp_b);
  }
  Reports r;
  r.rpe = compute_rpe(est, ref, failed);
  r.ate = compute_ate(chain_relative(Transform::identity(), est, stamps), chain_relative(Transform::identity(), ref, stamps),
                      align);
  return r;
}

std::array<double, 6> dof_rmse(const std::vector<TrainingSample>& s, std::size_t begin, std::size_t end,
                               const CombinedModel* model) {
  std::array<std::vector<double>, 6> err;
  for (std::size_t i = begin; i < end; ++i) {
    if (s[i].failed) continue;
    const DoFVector pred = model ? infer(*model, s[i].input) : s[i].input;
    for (std::size_t d = 0; d < 6; ++d) err[d].push_back(pred[d] - s[i].target[d]);
  }
  std::array<double, 6> out;
  for (std::size_t d = 0; d < 6; ++d) out[d] = err[d].empty() ? std::nan("") : rmse(err[d]);
  return out;
}

void write_tables(const CommandContext& ctx, RunManifest& m, const std::string& stem, const AblationTables& t) {
  const std::pair<const char*, const std::string*> files[] = {
      {"_rpe.csv", &t.rpe_csv}, {"_rpe.txt", &t.rpe_text}, {"_ate.csv", &t.ate_csv}, {"_ate.txt", &t.ate_text}};
  for (const auto& [suffix, text] : files) {
    const fs::path p = ctx.out(stem + suffix);
    write_text(p, *text);
    m.output(p);
  }
}

std::string cpu_model() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) return line.substr(line.find_first_not_of(' ', colon + 1));
    }
  }
  return "unknown";
}

CombinedModel default_model(const PipelineConfig& cfg) {
  std::vector<MlpBranch> branches;
  for (int i = 0; i < 6; ++i) {
    branches.push_back(make_branch(i, cfg.train.hidden, cfg.activation, sub_seed(cfg.seed, "bench") + static_cast<std::uint64_t>(i)));
  }
  CombinedModel m = combine_branches(std::move(branches));
  m.reset_fusion_to_identity();
  return m;
}

void print_latency_row(std::ostream& os, const std::string& name, const LatencyStats& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "  %-12s mean %10.1f us  median %10.1f us  p95 %10.1f us\n", name.c_str(), s.mean,
                s.median, s.p95);
  os << buf;
}

std::string latency_csv(const std::map<std::string, LatencyStats>& stats, const std::vector<std::string>& order) {
  std::string out = "stage,mean_us,median_us,p95_us,samples\n";
  for (const auto& name : order) {
    const auto it = stats.find(name);
    if (it == stats.end()) continue;
    out += name + "," + fixed(it->second.mean, 3) + "," + fixed(it->second.median, 3) + "," + fixed(it->second.p95, 3) +
           "," + std::to_string(it->second.samples) + "\n";
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

fs::path CommandContext::gt_path() const { return gt_csv.empty() ? out(kRelativeGtFile) : gt_csv; }
fs::path CommandContext::raw_path() const { return raw_csv.empty() ? out(kRawPosesFile) : raw_csv; }
fs::path CommandContext::refined_path() const { return refined_csv.empty() ? out(kRefinedPosesFile) : refined_csv; }
fs::path CommandContext::model_file() const { return model_path.empty() ? out(kModelFile) : model_path; }
std::ostream& CommandContext::os() const { return log ? *log : std::cout; }

LatencyStats latency_stats(std::vector<double> v) {
  LatencyStats s;
  s.samples = v.size();
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  const std::size_t n = v.size();
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  // nearest-rank percentile
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95 = v[std::max<std::size_t>(rank, 1) - 1];
  return s;
}

RunManifest::RunManifest(std::string command, const PipelineConfig& config)
    : command_(std::move(command)), config_(config.snapshot()), config_hash_(config.hash()) {}

fs::path RunManifest::write(const fs::path& dir) const {
  nlohmann::ordered_json j;
  j["tool"] = "dofvo";
  j["version"] = DOFVO_VERSION;
  j["command"] = command_;
  j["config_hash"] = config_hash_;
  j["config"] = config_;
  j["stage_wall_ms"] = stages_;
  j["counts"] = counts_;
  if (!notes_.empty()) j["notes"] = notes_;
  auto outs = nlohmann::ordered_json::array();
  for (const auto& p : outputs_) outs.push_back({{"path", p.string()}, {"config_hash", config_hash_}});
  j["outputs"] = outs;

  fs::create_directories(dir);
  const fs::path target = dir / ("manifest_" + command_ + ".json");
  const fs::path tmp = fs::path(target).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw data_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw data_error("short write to " + tmp.string());
  }
  fs::rename(tmp, target);
  return target;
}

// ---------------------------------------------------------------------------

ConvertGtResult cmd_convert_gt(const CommandContext& ctx) {
  const auto t0 = Clock::now();
  RunManifest m("convert-gt", ctx.config);
  const EurocLayout layout{ctx.config.dataset_root, ctx.config.camera};
  if (!fs::exists(layout.groundtruth())) throw data_error("ground truth not found: expected " + layout.groundtruth().string());
  if (!fs::exists(layout.camera_index())) throw data_error("camera index not found: expected " + layout.camera_index().string());
  const auto frames = load_camera_index(layout.camera_index());
  const auto gt = load_groundtruth(layout.groundtruth());
  const auto built = build_pairs(frames, gt.records, ctx.config.max_extrapolation_ns);
  if (built.pairs.empty()) throw data_error("no frame pair overlaps the ground-truth time range");

  ensure_output_dir(ctx);
  const fs::path out = ctx.gt_path();
  write_relative_gt_csv(out, built.pairs);
  m.output(out);

  ConvertGtResult r{built.pairs.size(), built.dropped, gt.normalization_warnings};
  ctx.os() << "convert-gt: " << r.pairs << " pairs written, " << r.dropped << " dropped";
  if (r.normalization_warnings) ctx.os() << ", " << r.normalization_warnings << " quaternions renormalized";
  ctx.os() << "\n  -> " << out.string() << '\n';
  m.count("frames", frames.size());
  m.count("pairs", r.pairs);
  m.count("dropped", r.dropped);
  m.count("normalization_warnings", r.normalization_warnings);
  m.stage("total", ms_since(t0));
  m.write(ctx.config.output_dir);
  return r;
}

// ---------------------------------------------------------------------------

RunVoResult cmd_run_vo(const CommandContext& ctx) {
  const auto t0 = Clock::now();
  RunManifest m("run-vo", ctx.config);
  const PipelineConfig& cfg = ctx.config;
  const EurocLayout layout{cfg.dataset_root, cfg.camera};
  if (!fs::exists(layout.camera_index())) throw data_error("camera index not found: expected " + layout.camera_index().string());
  if (!fs::is_directory(layout.image_dir()) || fs::is_empty(layout.image_dir())) {
    throw data_error("no images in " + layout.image_dir().string());
  }
  const auto frames = load_camera_index(layout.camera_index());

  // With ground truth present, process exactly the associated pairs so the
  // output lines up with convert-gt row for row and carries metric scale.
  struct Job {
    FrameRecord a, b;
    std::optional<DoFVector> gt;
  };
  std::vector<Job> jobs;
  RunVoResult result;
  if (fs::exists(layout.groundtruth())) {
    const auto gt = load_groundtruth(layout.groundtruth());
    for (auto& p : build_pairs(frames, gt.records, cfg.max_extrapolation_ns).pairs) {
      jobs.push_back({p.frame_a, p.frame_b, p.gt_dof});
    }
    result.metric_scale = true;
  } else {
    for (std::size_t i = 0; i + 1 < frames.size(); ++i) jobs.push_back({frames[i], frames[i + 1], std::nullopt});
  }
  if (jobs.empty()) throw data_error("no frame pairs to process");

  std::vector<PairResult> results(jobs.size());
  parallel_chunks(jobs.size(), worker_count(ctx, jobs.size()), [&](std::size_t begin, std::size_t end) {
    Nanoseconds cached_ts = -1;
    std::optional<GrayImage> cached;
    const auto load = [&](const FrameRecord& f) -> std::optional<GrayImage> {
      if (cached && cached_ts == f.timestamp) return cached;
      try {
        return load_image(layout.image_path(f));
      } catch (const Error&) {
        return std::nullopt;
      }
    };
    for (std::size_t i = begin; i < end; ++i) {
      const auto a = load(jobs[i].a);
      const auto b = load(jobs[i].b);
      cached = b;
      cached_ts = jobs[i].b.timestamp;
      if (!a || !b) {
        results[i].failed = true;
        results[i].diagnostics.failure_reason = "unreadable image";
        continue;
      }
      FrontendConfig fc = cfg.frontend;
      fc.ransac.seed = sub_seed(cfg.seed, "ransac/" + std::to_string(i));
      results[i] = process_pair(*a, *b, cfg.intrinsics, fc);
    }
  });

  std::map<std::string, std::size_t> reasons;
  std::vector<double> t_harris, t_st, t_track, t_est, t_rec, t_total;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = results[i];
    PoseRow row;
    row.timestamp_a = jobs[i].a.timestamp;
    row.timestamp_b = jobs[i].b.timestamp;
    row.failed = r.failed;
    row.inliers = r.diagnostics.inliers;
    row.dof = r.failed ? DoFVector{} : (jobs[i].gt ? apply_gt_scale(r.pose, *jobs[i].gt) : r.pose);
    result.rows.push_back(row);
    if (r.failed) {
      ++result.failures;
      ++reasons[r.diagnostics.failure_reason.empty() ? "unknown" : r.diagnostics.failure_reason];
    }
    const auto& t = r.diagnostics.times;
    if (t.total_us > 0.0) {
      t_harris.push_back(t.harris_us);
      t_st.push_back(t.shi_tomasi_us);
      t_track.push_back(t.track_us);
      t_est.push_back(t.estimate_us);
      t_rec.push_back(t.recover_us);
      t_total.push_back(t.total_us);
    }
  }
  result.timing = {{"harris", latency_stats(t_harris)}, {"shi_tomasi", latency_stats(t_st)},
                   {"track", latency_stats(t_track)},   {"estimate", latency_stats(t_est)},
                   {"recover", latency_stats(t_rec)},   {"pair", latency_stats(t_total)}};

  ensure_output_dir(ctx);
  const fs::path raw = ctx.raw_path();
  write_pose_csv(raw, result.rows);
  m.output(raw);
  const std::vector<std::string> order{"harris", "shi_tomasi", "track", "estimate", "recover", "pair"};
  const fs::path timing = ctx.out("run_vo_timing.csv");
  write_text(timing, latency_csv(result.timing, order));
  m.output(timing);

  auto& os = ctx.os();
  os << "run-vo (" << to_string(cfg.frontend.mode) << "): " << result.rows.size() << " pairs, " << result.failures
     << " failed" << (result.metric_scale ? ", translation scaled by ground-truth step length" : ", unit translation")
     << '\n';
  for (const auto& [why, n] : reasons) os << "  failure: " << why << " x" << n << '\n';
  os << "stage timing per pair:\n";
  for (const auto& name : order) print_latency_row(os, name, result.timing[name]);
  os << "  -> " << raw.string() << '\n';

  m.count("frames", frames.size());
  m.count("pairs", result.rows.size());
  m.count("failures", result.failures);
  m.note("mode", to_string(cfg.frontend.mode));
  m.note("scale", result.metric_scale ? "ground-truth step length" : "unit");
  m.stage("total", ms_since(t0));
  m.write(cfg.output_dir);
  return result;
}

// ---------------------------------------------------------------------------

TrainResult cmd_train(const CommandContext& ctx) {
  const auto t0 = Clock::now();
  RunManifest m("train", ctx.config);
  const auto gt = require_gt(ctx);
  const auto raw = require_poses(ctx.raw_path(), "run run-vo first");
  check_aligned(raw, gt, ctx.raw_path());
  const auto samples = make_samples(raw, gt);
  const SplitBounds b = split_bounds(samples.size(), ctx.config.split);
  const TrainConfig cfg = effective_train_config(ctx, b);
  const std::vector<TrainingSample> fit(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(b.val_end));

  const auto t_fit = Clock::now();
  const TrainedModel trained = train_model(ctx, fit, ctx.config.activation, cfg);
  m.stage("fit", ms_since(t_fit));

  TrainResult r;
  r.validation.raw = dof_rmse(samples, b.train_end, b.val_end, nullptr);
  r.validation.refined = dof_rmse(samples, b.train_end, b.val_end, &trained.model);
  r.test.raw = dof_rmse(samples, b.val_end, samples.size(), nullptr);
  r.test.refined = dof_rmse(samples, b.val_end, samples.size(), &trained.model);
  r.pre_fusion_val_loss = trained.fusion.pre_fusion_val_loss;
  r.post_fusion_val_loss = trained.fusion.post_fusion_val_loss;

  ensure_output_dir(ctx);
  const fs::path model_path = ctx.model_file();
  save_model(trained.model, model_path);
  m.output(model_path);

  const fs::path curves = ctx.out("curves.csv");
  {
    auto out = csv::open_for_write(curves);
    out << "dof,epoch,train_loss,val_loss\n";
    for (std::size_t d = 0; d < 6; ++d) {
      for (const auto& p : trained.branches[d].curve) {
        out << DoFVector::kNames[d] << ',' << p.epoch << ',' << csv::format_double(p.train_loss, 9) << ','
            << csv::format_double(p.val_loss, 9) << '\n';
      }
    }
  }
  m.output(curves);

  const fs::path report = ctx.out("train_report.csv");
  {
    auto out = csv::open_for_write(report);
    out << "split,dof,raw_rmse,refined_rmse\n";
    for (const auto& [name, block] : {std::pair{"validation", &r.validation}, std::pair{"test", &r.test}}) {
      for (std::size_t d = 0; d < 6; ++d) {
        out << name << ',' << DoFVector::kNames[d] << ',' << csv::format_double(block->raw[d], 9) << ','
            << csv::format_double(block->refined[d], 9) << '\n';
      }
    }
  }
  m.output(report);

  auto& os = ctx.os();
  os << "train (" << display_name(ctx.config.activation) << "): " << b.train_end << " train / "
     << (b.val_end - b.train_end) << " validation / " << (samples.size() - b.val_end) << " test pairs\n";
  os << "  dof   val raw     val refined  change\n";
  for (std::size_t d = 0; d < 6; ++d) {
    const double change = 100.0 * (r.validation.refined[d] - r.validation.raw[d]) / r.validation.raw[d];
    char buf[128];
    std::snprintf(buf, sizeof buf, "  %-4s  %-10s  %-11s  %s%%\n", DoFVector::kNames[d], fixed(r.validation.raw[d], 6).c_str(),
                  fixed(r.validation.refined[d], 6).c_str(), fixed(change, 1).c_str());
    os << buf;
  }
  os << "  fusion head: validation loss " << csv::format_double(r.pre_fusion_val_loss, 6) << " -> "
     << csv::format_double(r.post_fusion_val_loss, 6) << '\n';
  os << "  -> " << model_path.string() << '\n';

  m.count("pairs", samples.size());
  m.count("train_pairs", b.train_end);
  m.count("validation_pairs", b.val_end - b.train_end);
  m.count("test_pairs", samples.size() - b.val_end);
  m.count("failures", static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(),
                                                             [](const TrainingSample& s) { return s.failed; })));
  m.stage("total", ms_since(t0));
  m.write(ctx.config.output_dir);
  return r;
}

// ---------------------------------------------------------------------------

InferResult cmd_infer(const CommandContext& ctx) {
  const auto t0 = Clock::now();
  RunManifest m("infer", ctx.config);
  const CombinedModel model = load_model(ctx.model_file());
  const auto raw = require_poses(ctx.raw_path(), "run run-vo first");

  InferResult r;
  r.rows = raw;
  std::vector<double> lat;
  for (auto& row : r.rows) {
    if (row.failed) continue;
    const auto a = Clock::now();
    row.dof = infer(model, row.dof);
    lat.push_back(us_between(a, Clock::now()));
  }
  r.latency = latency_stats(lat);

  ensure_output_dir(ctx);
  const fs::path out = ctx.refined_path();
  write_pose_csv(out, r.rows);
  m.output(out);
  const fs::path lat_path = ctx.out("infer_latency.csv");
  write_text(lat_path, latency_csv({{"infer", r.latency}}, {"infer"}));
  m.output(lat_path);

  ctx.os() << "infer: " << lat.size() << " pairs refined, " << (r.rows.size() - lat.size())
           << " failed pairs passed through\n";
  print_latency_row(ctx.os(), "infer", r.latency);
  ctx.os() << "  -> " << out.string() << '\n';
  m.count("pairs", r.rows.size());
  m.count("refined", lat.size());
  m.stage("total", ms_since(t0));
  m.write(ctx.config.output_dir);
  return r;
}

// ---------------------------------------------------------------------------

EvalResult cmd_eval(const CommandContext& ctx) {
  const auto t0 = Clock::now();
  RunManifest m("eval", ctx.config);
  const auto gt = require_gt(ctx);
  const auto raw = require_poses(ctx.raw_path(), "run run-vo first");
  check_aligned(raw, gt, ctx.raw_path());
  std::optional<std::vector<PoseRow>> refined;
  if (!ctx.refined_csv.empty() || fs::exists(ctx.refined_path())) {
    refined = require_poses(ctx.refined_path(), "run infer first");
    check_aligned(*refined, gt, ctx.refined_path());
  }
  const SplitBounds b = split_bounds(raw.size(), ctx.config.split);
  const std::size_t begin = ctx.test_only ? b.val_end : 0;

  EvalResult r;
  const Reports base = evaluate(raw, gt, begin, raw.size(), ctx.align);
  r.raw_rpe = base.rpe;
  r.raw_ate = base.ate;
  std::vector<AblationRow> rows{{"raw", base.rpe, base.ate}};
  if (refined) {
    const Reports ref = evaluate(*refined, gt, begin, refined->size(), ctx.align);
    r.refined_rpe = ref.rpe;
    r.refined_ate = ref.ate;
    r.rpe_change_pct = 100.0 * (ref.rpe.trans - base.rpe.trans) / base.rpe.trans;
    r.ate_change_pct = 100.0 * (ref.ate.mean - base.ate.mean) / base.ate.mean;
    rows.push_back({"refined", ref.rpe, ref.ate});
  }
  const AblationTables tables = emit_ablation_table(rows, ctx.units, "Estimate");

  ensure_output_dir(ctx);
  write_tables(ctx, m, "eval", tables);
  const fs::path summary = ctx.out("eval_summary.csv");
  {
    auto out = csv::open_for_write(summary);
    out << "metric,raw,refined,change_pct\n";
    const auto line = [&](const char* name, double a, std::optional<double> c, std::optional<double> pct) {
      out << name << ',' << fixed(a, 6) << ',' << (c ? fixed(*c, 6) : "") << ',' << (pct ? fixed(*pct, 2) : "") << '\n';
    };
    line("rpe_trans", r.raw_rpe.trans, r.refined_rpe ? std::optional(r.refined_rpe->trans) : std::nullopt, r.rpe_change_pct);
    line("ate_mean", r.raw_ate.mean, r.refined_ate ? std::optional(r.refined_ate->mean) : std::nullopt, r.ate_change_pct);
  }
  m.output(summary);

  auto& os = ctx.os();
  os << "eval over " << (raw.size() - begin) << " pairs (" << (ctx.test_only ? "held-out test block" : "all pairs")
     << ", " << r.raw_rpe.excluded << " failed excluded from RPE, ATE " << (ctx.align ? "aligned" : "unaligned")
     << ", rotations in " << (ctx.units == AngleUnits::Degrees ? "deg" : "rad") << ", translations in m)\n";
  os << tables.rpe_text << '\n' << tables.ate_text;
  if (r.rpe_change_pct) {
    os << "RPE Trans. change: " << fixed(*r.rpe_change_pct, 2) << "%, Mean ATE change: " << fixed(*r.ate_change_pct, 2)
       << "%\n";
  }
  m.count("pairs", raw.size() - begin);
  m.count("excluded", r.raw_rpe.excluded);
  m.stage("total", ms_since(t0));
  m.write(ctx.config.output_dir);
  return r;
}

// ---------------------------------------------------------------------------

AblateResult cmd_ablate(const CommandContext& ctx) {
  const auto t0 = Clock::now();
  RunManifest m("ablate", ctx.config);
  const auto gt = require_gt(ctx);
  const auto raw = require_poses(ctx.raw_path(), "run run-vo first");
  check_aligned(raw, gt, ctx.raw_path());
  const auto samples = make_samples(raw, gt);
  const SplitBounds b = split_bounds(samples.size(), ctx.config.split);
  if (b.val_end >= raw.size()) throw data_error("ablate: the held-out test block is empty");
  const TrainConfig cfg = effective_train_config(ctx, b);
  const std::vector<TrainingSample> fit(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(b.val_end));

  std::vector<ActivationKind> kinds = ctx.activations;
  if (kinds.empty()) kinds.assign(kNonlinearActivations.begin(), kNonlinearActivations.end());

  AblateResult r;
  const Reports base = evaluate(raw, gt, b.val_end, raw.size(), ctx.align);
  r.baseline = {"Raw", base.rpe, base.ate};
  auto& os = ctx.os();
  for (ActivationKind kind : kinds) {
    const auto ta = Clock::now();
    AblationRow row{display_name(kind), std::nullopt, std::nullopt};
    try {
      const TrainedModel trained = train_model(ctx, fit, kind, cfg);
      const Reports rep = evaluate(refine(trained.model, raw), gt, b.val_end, raw.size(), ctx.align);
      row.rpe = rep.rpe;
      row.ate = rep.ate;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical) throw;
      os << "ablate: " << display_name(kind) << " failed (" << e.what() << "), recorded as NaN\n";
      m.note("failed." + token(kind), e.what());
    }
    m.stage("train." + token(kind), ms_since(ta));
    r.rows.push_back(std::move(row));
  }
  r.tables = emit_ablation_table(r.rows, ctx.units);

  ensure_output_dir(ctx);
  write_tables(ctx, m, "ablation", r.tables);
  const AblationTables baseline = emit_ablation_table({r.baseline}, ctx.units, "Estimate");
  write_tables(ctx, m, "ablation_baseline", baseline);

  os << "ablation over the held-out test block (" << (raw.size() - b.val_end) << " pairs)\n";
  os << r.tables.rpe_text << '\n' << r.tables.ate_text << "\nbaseline without refinement:\n"
     << baseline.rpe_text << '\n' << baseline.ate_text;
  m.count("activations", kinds.size());
  m.count("test_pairs", raw.size() - b.val_end);
  m.stage("total", ms_since(t0));
  m.write(ctx.config.output_dir);
  return r;
}

// ---------------------------------------------------------------------------

BenchResult cmd_bench(const CommandContext& ctx) {
  const auto t0 = Clock::now();
  RunManifest m("bench", ctx.config);
  const PipelineConfig& cfg = ctx.config;
  const EurocLayout layout{cfg.dataset_root, cfg.camera};
  if (!fs::exists(layout.camera_index())) throw data_error("camera index not found: expected " + layout.camera_index().string());
  const auto frames = load_camera_index(layout.camera_index());
  if (ctx.bench_pairs < 1) throw usage_error("bench: pair count must be positive");

  const bool trained = fs::exists(ctx.model_file());
  const CombinedModel model = trained ? load_model(ctx.model_file()) : default_model(cfg);

  // Cycle through the available pairs until the requested count is reached.
  std::vector<double> harris, st, track, est, rec, inf, pair;
  std::size_t failures = 0;
  const std::size_t available = frames.size() - 1;
  std::optional<GrayImage> img_a, img_b;
  std::size_t loaded_a = SIZE_MAX;
  for (int n = 0; n < ctx.bench_pairs; ++n) {
    const std::size_t i = static_cast<std::size_t>(n) % available;
    if (loaded_a + 1 == i && img_b) {
      img_a = std::move(img_b);
    } else {
      img_a = load_image(layout.image_path(frames[i]));
    }
    img_b = load_image(layout.image_path(frames[i + 1]));
    loaded_a = i;
    FrontendConfig fc = cfg.frontend;
    fc.ransac.seed = sub_seed(cfg.seed, "ransac/" + std::to_string(i));
    const auto a = Clock::now();
    const PairResult pr = process_pair(*img_a, *img_b, cfg.intrinsics, fc);
    const auto b = Clock::now();
    const DoFVector refined = infer(model, pr.pose);
    const auto c = Clock::now();
    (void)refined;
    if (pr.failed) ++failures;
    const auto& t = pr.diagnostics.times;
    harris.push_back(t.harris_us);
    st.push_back(t.shi_tomasi_us);
    track.push_back(t.track_us);
    est.push_back(t.estimate_us);
    rec.push_back(t.recover_us);
    inf.push_back(us_between(b, c));
    pair.push_back(us_between(a, c));
  }

  BenchResult r;
  r.pairs = static_cast<std::size_t>(ctx.bench_pairs);
  r.stages = {{"harris", latency_stats(harris)}, {"shi_tomasi", latency_stats(st)},   {"track", latency_stats(track)},
              {"essential", latency_stats(est)}, {"recover", latency_stats(rec)},     {"infer", latency_stats(inf)},
              {"pair", latency_stats(pair)}};
  r.fps = r.stages["pair"].median > 0.0 ? 1e6 / r.stages["pair"].median : 0.0;

  ensure_output_dir(ctx);
  const std::vector<std::string> order{"harris", "shi_tomasi", "track", "essential", "recover", "infer", "pair"};
  const fs::path out = ctx.out("bench.csv");
  write_text(out, latency_csv(r.stages, order));
  m.output(out);

  auto& os = ctx.os();
  const std::string cpu = cpu_model();
  os << "bench: " << r.pairs << " pairs (" << available << " distinct), " << failures << " failed, "
     << to_string(cfg.frontend.mode) << " mode, " << (trained ? "trained" : "untrained default") << " model\n";
  os << "  hardware: " << cpu << ", " << std::thread::hardware_concurrency() << " hardware threads\n";
  for (const auto& name : order) print_latency_row(os, name, r.stages[name]);
  os << "  effective rate: " << fixed(r.fps, 1) << " frames per second (1 / median pair time)\n";
  os << "  reference claim: 35 to 64 frames per second on a Core i7 laptop (informational only)\n";

  m.note("hardware", cpu);
  m.note("hardware_threads", std::to_string(std::thread::hardware_concurrency()));
  m.note("infer_median_us", fixed(r.stages["infer"].median, 3));
  m.note("fps", fixed(r.fps, 2));
  m.count("pairs", r.pairs);
  m.count("failures", failures);
  m.stage("total", ms_since(t0));
  m.write(cfg.output_dir);
  return r;
}

void cmd_init_config(const fs::path& path) {
  if (fs::exists(path)) throw usage_error("refusing to overwrite existing " + path.string());
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_text(path, config_template());
}

}  // namespace dofvo
