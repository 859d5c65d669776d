// Acceptance runner: one PASS/FAIL/SKIP line per criterion, exit status 1 if
// anything failed. Each criterion carries its own wall-clock budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dofvo/commands.hpp"
#include "dofvo/epipolar.hpp"
#include "dofvo/metrics.hpp"
#include "dofvo/mlp.hpp"
#include "dofvo/refiner.hpp"
#include "dofvo/se3.hpp"
#include "dofvo/synthetic.hpp"
#include "oracles/metrics_oracle.hpp"
#include "oracles/mlp_oracle.hpp"
#include "oracles/two_view.hpp"
#include "support/scratch_dir.hpp"

using namespace dofvo;
using testsupport::ScratchDir;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
  enum Status { Pass, Fail, Skip } status = Pass;
  std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Skip, std::move(d)}; }

std::string fmt(double v, int prec = 3, bool sci = true) {
  std::ostringstream s;
  if (sci) s << std::scientific;
  s << std::setprecision(prec) << v;
  return s.str();
}

bool run(const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.status != Outcome::Skip && secs > budget_s) {
    o = fail(o.detail + "; took " + fmt(secs, 2, false) + " s, budget " + fmt(budget_s, 0, false) + " s");
  }
  const char* tag = o.status == Outcome::Pass ? "PASS" : o.status == Outcome::Fail ? "FAIL" : "SKIP";
  std::cout << tag << "  " << name << "  (" << o.detail << "; " << std::fixed << std::setprecision(2) << secs
            << " s)" << std::defaultfloat << std::endl;
  return o.status != Outcome::Fail;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

// ---------------------------------------------------------------------------

Outcome se3_suite() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi), pos(-20.0, 20.0);
  double worst_inv = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Transform t{euler_to_rotation({ang(rng), 0.49 * ang(rng), ang(rng)}), Vec3(pos(rng), pos(rng), pos(rng))};
    const Mat4 a = t.homogeneous() * invert(t).homogeneous();
    const Mat4 b = invert(t).homogeneous() * t.homogeneous();
    worst_inv = std::max({worst_inv, (a - Mat4::Identity()).cwiseAbs().maxCoeff(),
                          (b - Mat4::Identity()).cwiseAbs().maxCoeff()});
  }

  // Closed-form trajectory, so the reference carries no accumulated error.
  const auto pose_at = [](int i) {
    const double s = i;
    return Transform{euler_to_rotation({0.3 * std::sin(0.01 * s), 0.2 * std::cos(0.013 * s), 0.004 * s}),
                     Vec3(10.0 * std::sin(0.003 * s), 5.0 * std::cos(0.002 * s), 0.001 * s)};
  };
  constexpr int kSteps = 10000;
  std::vector<DoFVector> rels;
  rels.reserve(kSteps);
  for (int i = 0; i < kSteps; ++i) rels.push_back(transform_to_dof(relative_pose(pose_at(i), pose_at(i + 1))));
  const Trajectory chain = chain_relative(pose_at(0), rels);
  double worst_chain = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    worst_chain = std::max(worst_chain, (chain.poses[static_cast<std::size_t>(i)].pose.translation - pose_at(i).translation).norm());
  }
  const std::string d = "max |T inv(T) - I| " + fmt(worst_inv) + ", 10000-step chain error " + fmt(worst_chain) + " m";
  return worst_inv < 1e-9 && worst_chain < 1e-6 ? pass(d) : fail(d);
}

// ---------------------------------------------------------------------------

Outcome epipolar_suite() {
  std::mt19937_64 rng(202);
  double worst_sampson = 0.0, worst_rot = 0.0, worst_dir = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const oracle::Scene s = oracle::random_scene(rng, {50, 0.25, 0.0});
    const EssentialMatrix e = estimate_essential(s.pixels, s.k);
    for (std::size_t i = 0; i < s.pixels.size(); ++i) {
      worst_sampson = std::max(worst_sampson,
                               sampson_distance(e.matrix, s.k.normalize(s.pixels.a[i]), s.k.normalize(s.pixels.b[i])));
    }
    const RecoveredPose p = recover_pose(e, s.pixels, s.k);
    worst_rot = std::max(worst_rot, oracle::rotation_error(p.rotation, s.rotation));
    worst_dir = std::max(worst_dir, oracle::angle_between(p.translation_direction, s.translation));
  }
  int good = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const oracle::Scene s = oracle::random_scene(rng, {50, 0.25, 0.5});
    try {
      const RecoveredPose p = recover_pose(estimate_essential(s.pixels, s.k), s.pixels, s.k);
      if (oracle::rotation_error(p.rotation, s.rotation) < 0.5 * kDeg &&
          oracle::angle_between(p.translation_direction, s.translation) < 2.0 * kDeg)
        ++good;
    } catch (const Error&) {
    }
  }
  const std::string d = "noise-free max Sampson " + fmt(worst_sampson) + ", rot " + fmt(worst_rot) + " rad, dir " +
                        fmt(worst_dir) + " rad; 0.5 px noise " + std::to_string(good) + "/100 within 0.5 deg / 2 deg";
  return worst_sampson < 1e-8 && worst_rot < 1e-6 && worst_dir < 1e-6 && good >= 95 ? pass(d) : fail(d);
}

// ---------------------------------------------------------------------------

oracle::Real (*oracle_activation(ActivationKind k))(oracle::Real) {
  switch (k) {
    case ActivationKind::ReLU: return oracle::relu;
    case ActivationKind::LeakyReLU: return oracle::leaky_relu;
    case ActivationKind::ELU: return oracle::elu;
    case ActivationKind::SELU: return oracle::selu;
    case ActivationKind::Tanh: return oracle::tanh_;
    case ActivationKind::Sigmoid: return oracle::sigmoid;
    case ActivationKind::Identity: break;
  }
  return [](oracle::Real x) { return x; };
}

oracle::Net to_oracle(const MlpBranch& b) {
  oracle::Net net;
  for (const auto& l : b.layers) {
    oracle::Layer ol;
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      std::vector<oracle::Real> row;
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) row.push_back(l.weight(r, c));
      ol.w.push_back(row);
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) ol.b.push_back(l.bias(r));
    net.layers.push_back(ol);
  }
  for (int i = 0; i < 6; ++i) {
    net.mean.push_back(b.input_mean(i));
    net.stddev.push_back(b.input_std(i));
    net.mask.push_back(b.input_mask[static_cast<std::size_t>(i)]);
  }
  net.act = oracle_activation(b.activation);
  return net;
}

Outcome gradient_suite() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> width(2, 8), depth(1, 2), dof(0, 5);
  std::uniform_real_distribution<double> u(-0.5, 0.5), sd(0.5, 2.0), target(-1.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  std::size_t checked = 0;
  for (auto k : kNonlinearActivations) {
    for (int net = 0; net < 100; ++net) {
      std::vector<int> hidden(static_cast<std::size_t>(depth(rng)));
      for (int& h : hidden) h = width(rng);
      MlpBranch b = make_branch(dof(rng), hidden, k, rng());
      for (int i = 0; i < 6; ++i) {
        b.input_mean(i) = u(rng);
        b.input_std(i) = sd(rng);
      }
      for (auto& l : b.layers) l.bias = l.bias.unaryExpr([&](double) { return u(rng); });
      Vec6 x;
      do {
        for (int i = 0; i < 6; ++i) x(i) = n(rng);
      } while (has_kink(k) && near_activation_kink(b, x, 1e-4));
      const double y = target(rng);
      const Eigen::VectorXd g = flatten_gradients(backward(b, x, y));
      const auto fd = oracle::numeric_gradient(to_oracle(b), {x.data(), x.data() + 6}, y, 1e-6);
      if (fd.size() != static_cast<std::size_t>(g.size())) return fail("parameter count mismatch");
      for (std::size_t i = 0; i < fd.size(); ++i) {
        const double gi = g(static_cast<Eigen::Index>(i));
        worst = std::max(worst, std::abs(gi - fd[i]) / std::max(std::abs(gi), 1e-6));
        ++checked;
      }
    }
  }
  const std::string d = "600 networks, " + std::to_string(checked) + " partials, worst relative gap " + fmt(worst);
  return worst < 1e-4 ? pass(d) : fail(d);
}

// ---------------------------------------------------------------------------

std::vector<TrainingSample> affine_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gt(0.0, 1.0), noise(0.0, 0.01);
  std::vector<TrainingSample> out(n);
  for (auto& s : out) {
    for (std::size_t k = 0; k < 6; ++k) {
      s.target[k] = gt(rng);
      s.input[k] = 0.8 * s.target[k] + 0.05 + noise(rng);
    }
  }
  return out;
}

Outcome refinement_efficacy() {
  const auto train = affine_samples(2000, 404);
  const auto held_out = affine_samples(500, 405);
  // The library defaults are still descending at epoch 200 on this fixture;
  // a single narrow layer with a larger step converges well inside the budget.
  TrainConfig cfg;
  cfg.hidden = {16};
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 32;
  cfg.epochs = 300;
  cfg.seed = 404;
  double worst_ratio = 0.0, worst_fusion = -1.0;
  std::string worst_label;
  for (auto act : kNonlinearActivations) {
    std::vector<MlpBranch> branches;
    for (int k = 0; k < 6; ++k) {
      MlpBranch b = train_branch(train, k, act, cfg).branch;
      double raw = 0.0, refined = 0.0;
      for (const auto& s : held_out) {
        const double r = s.input[static_cast<std::size_t>(k)] - s.target[static_cast<std::size_t>(k)];
        const double e = forward(b, to_vec6(s.input)) - s.target[static_cast<std::size_t>(k)];
        raw += r * r;
        refined += e * e;
      }
      const double ratio = std::sqrt(refined / raw);
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst_label = std::string(display_name(act)) + " " + DoFVector::kNames[k];
      }
      branches.push_back(std::move(b));
    }
    const FusionTraining f = train_combined(combine_branches(std::move(branches)), train, cfg);
    worst_fusion = std::max(worst_fusion, f.post_fusion_val_loss - f.pre_fusion_val_loss);
  }
  const std::string d = "worst refined/raw RMSE " + fmt(worst_ratio, 4, false) + " (" + worst_label +
                        "), worst fusion loss change " + fmt(worst_fusion);
  return worst_ratio <= 0.2 && worst_fusion <= 1e-9 ? pass(d) : fail(d);
}

// ---------------------------------------------------------------------------

Outcome metric_oracle_suite() {
  std::mt19937_64 rng(505);
  std::uniform_int_distribution<int> len(2, 20);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst_rpe = 0.0, worst_ate = 0.0, worst_mean = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rels = static_cast<std::size_t>(len(rng)) - 1;
    std::vector<DoFVector> gt, est;
    std::vector<oracle::Dof> ogt, oest;
    for (std::size_t i = 0; i < rels; ++i) {
      DoFVector g(0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng), 0.2 * u(rng), 0.2 * u(rng), 0.2 * u(rng));
      DoFVector e = g;
      for (std::size_t k = 0; k < 6; ++k) e[k] += (k < 3 ? 0.05 : 0.01) * n(rng);
      gt.push_back(g);
      est.push_back(e);
      ogt.push_back(g.values);
      oest.push_back(e.values);
    }
    const RpeReport r = compute_rpe(est, gt);
    const oracle::Rpe o = oracle::rpe(oest, ogt);
    for (auto [a, b] : {std::pair{r.trans_x, o.x}, {r.trans_y, o.y}, {r.trans_z, o.z}, {r.trans, o.pooled},
                        {r.rot_rx, o.rx}, {r.rot_ry, o.ry}, {r.rot_rz, o.rz}})
      worst_rpe = std::max(worst_rpe, std::abs(a - b));
    const AteReport a =
        compute_ate(chain_relative(Transform::identity(), est), chain_relative(Transform::identity(), gt), false);
    const oracle::Ate oa = oracle::ate_unaligned(oest, ogt);
    for (auto [x, y] : {std::pair{a.x, oa.x}, {a.y, oa.y}, {a.z, oa.z}, {a.mean, oa.mean}})
      worst_ate = std::max(worst_ate, std::abs(x - y));
    worst_mean = std::max(worst_mean, std::abs(a.mean - (a.x + a.y + a.z) / 3.0));
  }

  AteReport tanh{1.2642, 1.4221, 1.4629, 0.0, 0};
  tanh.mean = (tanh.x + tanh.y + tanh.z) / 3.0;
  const std::string row = emit_ablation_table({{"Tanh", std::nullopt, tanh}}).ate_csv;
  const std::string tanh_row = row.substr(row.find('\n') + 1, row.find('\n', row.find('\n') + 1) - row.find('\n') - 1);

  const std::string d = "100 trajectories, worst RPE gap " + fmt(worst_rpe) + ", ATE gap " + fmt(worst_ate) +
                        ", mean-of-axes gap " + fmt(worst_mean) + "; Tanh row \"" + tanh_row + "\"";
  return worst_rpe < 1e-12 && worst_ate < 1e-12 && worst_mean < 1e-15 && tanh_row == "Tanh,1.2642,1.4221,1.4629,1.3831"
             ? pass(d)
             : fail(d);
}

// ---------------------------------------------------------------------------

/// Writes relative_gt.csv and raw_poses.csv with raw = gain * gt + bias + noise.
void write_biased_pairs(const CommandContext& ctx, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  fs::create_directories(ctx.config.output_dir);
  std::ofstream gt(ctx.gt_path());
  gt << "timestamp_a_ns,timestamp_b_ns,tx,ty,tz,rx,ry,rz\n";
  gt.precision(17);
  std::vector<PoseRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    PoseRow r;
    r.timestamp_a = 1000 + 50 * static_cast<Nanoseconds>(i);
    r.timestamp_b = r.timestamp_a + 50;
    r.inliers = 100;
    gt << r.timestamp_a << ',' << r.timestamp_b;
    for (std::size_t k = 0; k < 6; ++k) {
      const double t = 0.1 * g(rng);
      gt << ',' << t;
      r.dof[k] = 0.9 * t + 0.02 + 0.005 * g(rng);
    }
    gt << '\n';
    rows.push_back(r);
  }
  write_pose_csv(ctx.raw_path(), rows);
}

void small_training(PipelineConfig& cfg) {
  cfg.train.hidden = {16};
  cfg.train.batch_size = 8;
  cfg.train.epochs = 40;
  cfg.train.learning_rate = 1e-2;
  cfg.train.patience = 10;
}

Outcome ablation_schema() {
  ScratchDir dir("accept_ablate");
  std::ostringstream log;
  CommandContext ctx;
  ctx.config.output_dir = dir / "out";
  ctx.log = &log;
  small_training(ctx.config);
  write_biased_pairs(ctx, 200, 606);
  const AblateResult r = cmd_ablate(ctx);

  const std::string rpe_header =
      "Activation,RPE Trans. X,RPE Trans. Y,RPE Trans. Z,RPE Trans.,RPE Rot. RX,RPE Rot. RY,RPE Rot. RZ";
  const std::string ate_header = "Activation,ATE Trans. X,ATE Trans. Y,ATE Trans. Z,Mean ATE";
  std::vector<std::string> problems;
  if (first_line(r.tables.rpe_csv) != rpe_header) problems.push_back("RPE csv header");
  if (first_line(r.tables.ate_csv) != ate_header) problems.push_back("ATE csv header");
  if (first_line(slurp(ctx.out("ablation_rpe.csv"))) != rpe_header) problems.push_back("ablation_rpe.csv header");
  if (first_line(slurp(ctx.out("ablation_ate.csv"))) != ate_header) problems.push_back("ablation_ate.csv header");
  // The aligned text tables carry the same columns, in order, in their first line.
  const auto in_order = [](const std::string& line, const auto& cols) {
    std::size_t at = 0;
    for (const char* c : cols) {
      at = line.find(c, at);
      if (at == std::string::npos) return false;
      at += std::string(c).size();
    }
    return true;
  };
  if (!in_order(first_line(r.tables.rpe_text), kRpeColumns)) problems.push_back("RPE text header");
  if (!in_order(first_line(r.tables.ate_text), kAteColumns)) problems.push_back("ATE text header");
  if (r.rows.size() != kNonlinearActivations.size()) problems.push_back("row count " + std::to_string(r.rows.size()));
  for (std::size_t i = 0; i < r.rows.size() && i < kNonlinearActivations.size(); ++i) {
    if (r.rows[i].label != display_name(kNonlinearActivations[i])) problems.push_back("row label " + r.rows[i].label);
  }
  if (!problems.empty()) {
    std::string d = "mismatch:";
    for (const auto& p : problems) d += " " + p + ";";
    return fail(d);
  }
  return pass("6 rows, headers match the RPE and ATE column sets");
}

// ---------------------------------------------------------------------------

const std::vector<std::string> kMetricFiles = {
    "relative_gt.csv",   "raw_poses.csv",   "refined_poses.csv",        "train_report.csv",
    "curves.csv",        "eval_summary.csv", "ablation_rpe.csv",        "ablation_ate.csv",
    "ablation_baseline_rpe.csv", "ablation_baseline_ate.csv"};

void full_pipeline(const fs::path& root, unsigned threads) {
  std::ostringstream log;
  CommandContext ctx;
  synthetic::DatasetSpec spec;
  spec.frames = 130;
  synthetic::write_dataset(root / "data", spec);
  ctx.config.dataset_root = root / "data";
  ctx.config.intrinsics = spec.intrinsics;
  ctx.config.output_dir = root / "out";
  ctx.config.seed = 42;
  small_training(ctx.config);
  ctx.log = &log;
  ctx.threads = threads;
  ctx.activations = {ActivationKind::ReLU, ActivationKind::Tanh};
  cmd_convert_gt(ctx);
  cmd_run_vo(ctx);
  cmd_train(ctx);
  cmd_infer(ctx);
  cmd_eval(ctx);
  cmd_ablate(ctx);
}

Outcome determinism() {
  ScratchDir a("accept_det_a"), b("accept_det_b");
  // Different worker counts on purpose: results may not depend on scheduling.
  full_pipeline(a.path(), 1);
  full_pipeline(b.path(), 2);
  std::vector<std::string> differing;
  for (const auto& name : kMetricFiles) {
    const fs::path pa = a / "out" / name, pb = b / "out" / name;
    if (!fs::exists(pa) || !fs::exists(pb)) return fail("missing " + name);
    if (slurp(pa) != slurp(pb)) differing.push_back(name);
  }
  if (!differing.empty()) {
    std::string d = "differs:";
    for (const auto& n : differing) d += " " + n;
    return fail(d);
  }
  return pass(std::to_string(kMetricFiles.size()) + " metric files byte-identical across two runs");
}

// ---------------------------------------------------------------------------

/// Directory tree exposing the first `frames` rows of the camera index; images
/// and ground truth are symlinked from the original sequence.
void subset_sequence(const fs::path& src, const fs::path& dst, std::size_t frames) {
  const EurocLayout from{src}, to{dst};
  fs::create_directories(to.camera_index().parent_path());
  fs::create_directories(to.groundtruth().parent_path());
  fs::create_directory_symlink(fs::absolute(from.image_dir()), to.image_dir());
  fs::create_symlink(fs::absolute(from.groundtruth()), to.groundtruth());
  std::ifstream in(from.camera_index());
  std::ofstream out(to.camera_index());
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line) && rows < frames;) {
    out << line << '\n';
    if (!line.empty() && line[0] != '#') ++rows;
  }
}

Outcome euroc_smoke() {
  const char* root = std::getenv("DOFVO_EUROC_ROOT");
  if (!root) return skip("DOFVO_EUROC_ROOT not set");
  if (!fs::exists(EurocLayout{root}.camera_index())) return skip(std::string("no camera index under ") + root);
  ScratchDir dir("accept_euroc");
  subset_sequence(root, dir / "seq", 200);
  double rpe[2] = {0, 0}, ate[2] = {0, 0};
  std::size_t failures[2] = {0, 0};
  const GeometryMode modes[2] = {GeometryMode::Essential, GeometryMode::Fundamental};
  for (int m = 0; m < 2; ++m) {
    std::ostringstream log;
    CommandContext ctx;
    ctx.config.dataset_root = dir / "seq";
    ctx.config.output_dir = dir / to_string(modes[m]);
    ctx.config.frontend.mode = modes[m];
    ctx.log = &log;
    cmd_convert_gt(ctx);
    failures[m] = cmd_run_vo(ctx).failures;
    const EvalResult e = cmd_eval(ctx);
    rpe[m] = e.raw_rpe.trans;
    ate[m] = e.raw_ate.mean;
  }
  std::ostringstream d;
  d << "essential RPE " << fmt(rpe[0]) << " m, ATE " << fmt(ate[0]) << " m, " << failures[0] << " failed pairs; "
    << "fundamental RPE " << fmt(rpe[1]) << " m, ATE " << fmt(ate[1]) << " m, " << failures[1] << " failed pairs; "
    << "essential <= fundamental + 0.1 m: " << (rpe[0] <= rpe[1] + 0.1 ? "yes" : "no") << " (informational)";
  const bool finite = std::isfinite(ate[0]) && std::isfinite(ate[1]);
  return finite ? pass(d.str()) : fail(d.str());
}

}  // namespace

int main() {
  bool ok = true;
  ok &= run("SE(3) suite: T*inv(T) = I within 1e-9 over 1000 transforms, 10000-step chain error < 1e-6 m", 5.0,
            se3_suite);
  ok &= run("Epipolar suite: noise-free exact to 1e-8 / 1e-6, noisy within 0.5 deg / 2 deg in >= 95 of 100", 30.0,
            epipolar_suite);
  ok &= run("Gradient suite: backward vs central differences within 1e-4 relative, 6 activations x 100 networks", 10.0,
            gradient_suite);
  ok &= run("Refinement efficacy: per-DoF RMSE <= 20% of raw for every activation, fusion never worse", 120.0,
            refinement_efficacy);
  ok &= run("Metric oracle suite: RPE/ATE within 1e-12 of brute force, mean ATE is the mean of axes", 5.0,
            metric_oracle_suite);
  ok &= run("Ablation schema: RPE and ATE table headers", 60.0, ablation_schema);
  ok &= run("Determinism: two full fixture pipeline runs give byte-identical metric CSVs", 300.0, determinism);
  ok &= run("EuRoC smoke test (conditional): 200-frame subset, both geometry modes", 300.0, euroc_smoke);
  std::cout << (ok ? "ALL CRITERIA PASSED" : "SOME CRITERIA FAILED") << std::endl;
  return ok ? 0 : 1;
}
