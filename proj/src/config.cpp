#include "dofvo/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dofvo/csv.hpp"

namespace dofvo {

namespace {

std::string fmt(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double to_d(const std::string& key, const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0' || !std::isfinite(v)) throw usage_error("config: " + key + " expects a number, got '" + s + "'");
  return v;
}

long long to_i(const std::string& key, const std::string& s) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw usage_error("config: " + key + " expects an integer, got '" + s + "'");
  }
  return v;
}

bool to_b(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw usage_error("config: " + key + " expects true or false, got '" + s + "'");
}

struct Entry {
  const char* section;
  const char* key;
  const char* doc;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string& name, const std::string& value)> set;
};

#define DOFVO_DOUBLE(sec, name, field, doc)                                                    \
  Entry {                                                                                       \
    sec, name, doc, [](const PipelineConfig& c) { return fmt(c.field); },                      \
        [](PipelineConfig& c, const std::string& k, const std::string& v) { c.field = to_d(k, v); } \
  }
#define DOFVO_INT(sec, name, field, doc)                                                        \
  Entry {                                                                                       \
    sec, name, doc, [](const PipelineConfig& c) { return std::to_string(c.field); },           \
        [](PipelineConfig& c, const std::string& k, const std::string& v) {                    \
          c.field = static_cast<decltype(c.field)>(to_i(k, v));                                 \
        }                                                                                       \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      {"dataset", "root", "ASL-format sequence directory (contains mav0/)",
       [](const PipelineConfig& c) { return c.dataset_root.string(); },
       [](PipelineConfig& c, const std::string&, const std::string& v) { c.dataset_root = v; }},
      {"dataset", "camera", "camera subdirectory under mav0/",
       [](const PipelineConfig& c) { return c.camera; },
       [](PipelineConfig& c, const std::string&, const std::string& v) { c.camera = v; }},
      DOFVO_INT("dataset", "max_extrapolation_ns", max_extrapolation_ns,
                "frames this close outside the GT range use the boundary pose (>= 0)"),
      DOFVO_DOUBLE("intrinsics", "fx", intrinsics.fx, "focal length x in pixels (> 0)"),
      DOFVO_DOUBLE("intrinsics", "fy", intrinsics.fy, "focal length y in pixels (> 0)"),
      DOFVO_DOUBLE("intrinsics", "cx", intrinsics.cx, "principal point x in pixels"),
      DOFVO_DOUBLE("intrinsics", "cy", intrinsics.cy, "principal point y in pixels"),
      {"frontend", "mode", "essential | fundamental",
       [](const PipelineConfig& c) { return std::string(to_string(c.frontend.mode)); },
       [](PipelineConfig& c, const std::string&, const std::string& v) { c.frontend.mode = parse_geometry_mode(v); }},
      DOFVO_DOUBLE("frontend", "min_parallax_px", frontend.min_parallax_px,
                   "median track length below which a pair is marked failed (>= 0)"),
      DOFVO_INT("harris", "block_size", frontend.harris.block_size, "structure tensor window, odd (3..15)"),
      DOFVO_DOUBLE("harris", "k", frontend.harris.k, "Harris sensitivity (0.01..0.25)"),
      DOFVO_INT("harris", "max_features", frontend.harris.max_features, "corners kept per frame (>= 8)"),
      DOFVO_DOUBLE("harris", "quality", frontend.harris.quality, "response floor relative to the max (0..1)"),
      DOFVO_DOUBLE("harris", "min_distance", frontend.harris.min_distance, "minimum corner spacing in pixels (>= 0)"),
      DOFVO_INT("harris", "border", frontend.harris.border, "ignored image margin in pixels (>= 1)"),
      DOFVO_INT("shi_tomasi", "patch_radius", frontend.shi_tomasi.patch_radius, "min-eigenvalue patch radius (1..10)"),
      DOFVO_DOUBLE("shi_tomasi", "quality", frontend.shi_tomasi.quality, "score floor relative to the max (0..1)"),
      DOFVO_INT("flow", "window", frontend.flow.window, "tracking window width, odd (5..51)"),
      DOFVO_INT("flow", "levels", frontend.flow.levels, "pyramid levels including the base (1..6)"),
      DOFVO_INT("flow", "max_iterations", frontend.flow.max_iterations, "per level (>= 1)"),
      DOFVO_DOUBLE("flow", "epsilon", frontend.flow.epsilon, "convergence step in pixels (> 0)"),
      DOFVO_DOUBLE("flow", "max_residual", frontend.flow.max_residual, "mean absolute intensity error, 0..1 scale (> 0)"),
      DOFVO_DOUBLE("flow", "min_eigen", frontend.flow.min_eigen, "normalized structure tensor floor (> 0)"),
      DOFVO_INT("ransac", "max_iterations", frontend.ransac.max_iterations, "upper bound on hypotheses (>= 1)"),
      {"ransac", "adaptive", "shrink the iteration budget from the inlier ratio",
       [](const PipelineConfig& c) { return std::string(c.frontend.ransac.adaptive ? "true" : "false"); },
       [](PipelineConfig& c, const std::string& k, const std::string& v) { c.frontend.ransac.adaptive = to_b(k, v); }},
      DOFVO_DOUBLE("ransac", "confidence", frontend.ransac.confidence, "adaptive stopping confidence (0..1)"),
      DOFVO_DOUBLE("ransac", "threshold_px", frontend.ransac.threshold_px, "Sampson inlier threshold in pixels (> 0)"),
      {"train", "hidden", "comma-separated hidden layer widths",
       [](const PipelineConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.train.hidden.size(); ++i) s += (i ? "," : "") + std::to_string(c.train.hidden[i]);
         return s;
       },
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         c.train.hidden.clear();
         if (v.empty()) return;
         for (const auto& part : csv::split(v)) c.train.hidden.push_back(static_cast<int>(to_i(k, part)));
       }},
      {"train", "activation", "relu | leaky_relu | elu | selu | tanh | sigmoid",
       [](const PipelineConfig& c) { return token(c.activation); },
       [](PipelineConfig& c, const std::string&, const std::string& v) { c.activation = parse_activation(v); }},
      {"train", "optimizer", "adam | sgd",
       [](const PipelineConfig& c) { return std::string(c.train.optimizer == OptimizerKind::Adam ? "adam" : "sgd"); },
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         if (v == "adam") {
           c.train.optimizer = OptimizerKind::Adam;
         } else if (v == "sgd") {
           c.train.optimizer = OptimizerKind::Sgd;
         } else {
           throw usage_error("config: " + k + " must be adam or sgd, got '" + v + "'");
         }
       }},
      DOFVO_DOUBLE("train", "learning_rate", train.learning_rate, "(> 0)"),
      DOFVO_DOUBLE("train", "momentum", train.momentum, "SGD momentum [0, 1)"),
      DOFVO_INT("train", "batch_size", train.batch_size, "mini-batch size; needs 10x this many usable pairs (>= 1)"),
      DOFVO_INT("train", "epochs", train.epochs, "(>= 1)"),
      DOFVO_INT("train", "patience", train.patience, "early-stop patience in epochs (>= 1)"),
      DOFVO_DOUBLE("split", "train", split.train, "leading fraction of pairs used for fitting"),
      DOFVO_DOUBLE("split", "validation", split.validation, "next fraction, drives early stopping; the rest is test"),
      {"run", "seed", "root of every random stream",
       [](const PipelineConfig& c) { return std::to_string(c.seed); },
       [](PipelineConfig& c, const std::string& k, const std::string& v) {
         std::uint64_t s = 0;
         const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
         if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
           throw usage_error("config: " + k + " expects an unsigned integer, got '" + v + "'");
         }
         c.seed = s;
       }},
      {"run", "output_dir", "where every command writes its files",
       [](const PipelineConfig& c) { return c.output_dir.string(); },
       [](PipelineConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
  };
  return table;
}

#undef DOFVO_DOUBLE
#undef DOFVO_INT

void require(bool ok, const std::string& what) {
  if (!ok) throw usage_error("config: " + what);
}

}  // namespace

void SplitConfig::validate() const {
  require(train > 0.0 && validation > 0.0 && train + validation < 1.0 + 1e-12,
          "split fractions must be positive and sum to at most 1");
}

void PipelineConfig::validate() const {
  require(!camera.empty(), "dataset.camera must not be empty");
  require(max_extrapolation_ns >= 0, "dataset.max_extrapolation_ns must be >= 0");
  require(intrinsics.fx > 0.0 && intrinsics.fy > 0.0, "intrinsics fx, fy must be positive");
  require(frontend.min_parallax_px >= 0.0, "frontend.min_parallax_px must be >= 0");
  const auto& h = frontend.harris;
  require(h.block_size >= 3 && h.block_size <= 15 && h.block_size % 2 == 1, "harris.block_size must be odd in 3..15");
  require(h.k >= 0.01 && h.k <= 0.25, "harris.k must lie in 0.01..0.25");
  require(h.max_features >= 8, "harris.max_features must be >= 8");
  require(h.quality > 0.0 && h.quality < 1.0, "harris.quality must lie in (0, 1)");
  require(h.min_distance >= 0.0, "harris.min_distance must be >= 0");
  require(h.border >= 1, "harris.border must be >= 1");
  require(frontend.shi_tomasi.patch_radius >= 1 && frontend.shi_tomasi.patch_radius <= 10,
          "shi_tomasi.patch_radius must lie in 1..10");
  require(frontend.shi_tomasi.quality >= 0.0 && frontend.shi_tomasi.quality < 1.0,
          "shi_tomasi.quality must lie in [0, 1)");
  const auto& f = frontend.flow;
  require(f.window >= 5 && f.window <= 51 && f.window % 2 == 1, "flow.window must be odd in 5..51");
  require(f.levels >= 1 && f.levels <= 6, "flow.levels must lie in 1..6");
  require(f.max_iterations >= 1, "flow.max_iterations must be >= 1");
  require(f.epsilon > 0.0 && f.max_residual > 0.0 && f.min_eigen > 0.0,
          "flow.epsilon, max_residual and min_eigen must be positive");
  const auto& r = frontend.ransac;
  require(r.max_iterations >= 1, "ransac.max_iterations must be >= 1");
  require(r.confidence > 0.0 && r.confidence < 1.0, "ransac.confidence must lie in (0, 1)");
  require(r.threshold_px > 0.0, "ransac.threshold_px must be positive");
  require(activation != ActivationKind::Identity, "train.activation must be nonlinear");
  split.validate();
  train.validate();
}

std::map<std::string, std::string> PipelineConfig::snapshot() const {
  std::map<std::string, std::string> out;
  for (const auto& e : entries()) out[std::string(e.section) + "." + e.key] = e.get(*this);
  return out;
}

std::string PipelineConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& [k, v] : snapshot()) {
    for (char ch : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t sub_seed(std::uint64_t seed, const std::string& name) {
  // splitmix64 over seed xor FNV-1a(name)
  std::uint64_t h = 1469598103934665603ULL;
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ULL;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw usage_error("config file not found: " + path.string());
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw usage_error("config: " + std::string(e.what()));
  }
  PipelineConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw usage_error("config: key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      const Entry* hit = nullptr;
      for (const auto& e : entries()) {
        if (section == e.section && key == e.key) hit = &e;
      }
      if (!hit) throw usage_error("config: unknown key " + name);
      hit->set(cfg, name, value.get_value<std::string>());
    }
  }
  // Relative paths resolve against the config file's directory.
  const auto base = path.parent_path();
  if (!cfg.dataset_root.empty() && cfg.dataset_root.is_relative()) cfg.dataset_root = base / cfg.dataset_root;
  if (cfg.output_dir.is_relative()) cfg.output_dir = base / cfg.output_dir;
  cfg.validate();
  return cfg;
}

std::string config_template() {
  const PipelineConfig defaults;
  std::ostringstream out;
  out << "; dofvo pipeline configuration. Relative paths resolve against this file.\n";
  std::string current;
  for (const auto& e : entries()) {
    if (current != e.section) {
      out << (current.empty() ? "" : "\n") << '[' << e.section << "]\n";
      current = e.section;
    }
    out << "; " << e.doc << '\n' << e.key << " = " << e.get(defaults) << '\n';
  }
  return out.str();
}

}  // namespace dofvo
