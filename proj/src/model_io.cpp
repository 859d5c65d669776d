#include "dofvo/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

namespace dofvo {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    const auto* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32() {
    const auto* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
  }
  double f64() {
    const auto* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  std::string str() {
    const std::uint32_t n = u32();
    const auto* p = take(n);
    return {reinterpret_cast<const char*>(p), n};
  }
  bool done() const { return pos_ == size_; }

 private:
  const std::uint8_t* take(std::size_t n) {
    if (n > size_ - pos_) throw CorruptModelError("model file truncated");
    const auto* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(const std::uint8_t* data, std::size_t n) {
  return static_cast<std::uint32_t>(crc32(0L, data, static_cast<uInt>(n)));
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const CombinedModel& model) {
  model.validate();
  Writer w;
  for (char c : kModelMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u16(kModelFormatVersion);
  w.u8(static_cast<std::uint8_t>(model.branches.size()));
  for (const auto& b : model.branches) {
    w.u8(static_cast<std::uint8_t>(b.dof_index));
    w.u8(static_cast<std::uint8_t>(b.activation));
    w.u8(b.frozen ? 1 : 0);
    std::uint8_t mask = 0;
    for (std::size_t i = 0; i < 6; ++i)
      if (b.input_mask[i]) mask |= static_cast<std::uint8_t>(1u << i);
    w.u8(mask);
    w.u32(static_cast<std::uint32_t>(b.layers.size()));
    for (const auto& l : b.layers) {
      w.u32(static_cast<std::uint32_t>(l.weight.rows()));
      w.u32(static_cast<std::uint32_t>(l.weight.cols()));
    }
    for (int i = 0; i < 6; ++i) w.f64(b.input_mean(i));
    for (int i = 0; i < 6; ++i) w.f64(b.input_std(i));
    for (const auto& l : b.layers) {
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.f64(l.weight(r, c));
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) w.f64(l.bias(r));
    }
  }
  w.u8(model.has_fusion ? 1 : 0);
  if (model.has_fusion) {
    for (Eigen::Index r = 0; r < 6; ++r)
      for (Eigen::Index c = 0; c < 12; ++c) w.f64(model.fusion_weight(r, c));
    for (Eigen::Index r = 0; r < 6; ++r) w.f64(model.fusion_bias(r));
  }
  w.u32(static_cast<std::uint32_t>(model.metadata.size()));
  for (const auto& [k, v] : model.metadata) {
    w.str(k);
    w.str(v);
  }
  const std::uint32_t crc = checksum(w.bytes().data(), w.bytes().size());
  w.u32(crc);
  return std::move(w.bytes());
}

CombinedModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 + 2 + 4 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
    throw CorruptModelError("not a model file (bad magic or truncated header)");
  }
  Reader header(bytes.data() + 4, 2);
  const std::uint16_t version = header.u16();
  if (version != kModelFormatVersion) {
    throw ModelVersionError("model format version " + std::to_string(version) + " is not supported (expected " +
                            std::to_string(kModelFormatVersion) + ")");
  }
  const std::size_t body = bytes.size() - 4;
  Reader tail(bytes.data() + body, 4);
  if (tail.u32() != checksum(bytes.data(), body)) throw CorruptModelError("model file checksum mismatch");

  Reader r(bytes.data() + 6, body - 6);
  CombinedModel model;
  const std::uint8_t count = r.u8();
  for (std::uint8_t bi = 0; bi < count; ++bi) {
    MlpBranch b;
    b.dof_index = r.u8();
    const std::uint8_t act = r.u8();
    if (act > static_cast<std::uint8_t>(ActivationKind::Identity)) throw CorruptModelError("unknown activation id");
    b.activation = static_cast<ActivationKind>(act);
    b.frozen = r.u8() != 0;
    const std::uint8_t mask = r.u8();
    for (std::size_t i = 0; i < 6; ++i) b.input_mask[i] = (mask >> i) & 1u;
    const std::uint32_t n_layers = r.u32();
    if (n_layers > 64) throw CorruptModelError("implausible layer count");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> dims(n_layers);
    for (auto& d : dims) {
      d.first = r.u32();
      d.second = r.u32();
      if (d.first > 4096 || d.second > 4096) throw CorruptModelError("implausible layer size");
    }
    for (int i = 0; i < 6; ++i) b.input_mean(i) = r.f64();
    for (int i = 0; i < 6; ++i) b.input_std(i) = r.f64();
    for (const auto& [rows, cols] : dims) {
      DenseLayer l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
      for (Eigen::Index i = 0; i < l.weight.rows(); ++i)
        for (Eigen::Index j = 0; j < l.weight.cols(); ++j) l.weight(i, j) = r.f64();
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = r.f64();
      b.layers.push_back(std::move(l));
    }
    model.branches.push_back(std::move(b));
  }
  model.has_fusion = r.u8() != 0;
  if (model.has_fusion) {
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 12; ++j) model.fusion_weight(i, j) = r.f64();
    for (Eigen::Index i = 0; i < 6; ++i) model.fusion_bias(i) = r.f64();
  }
  const std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str();
    model.metadata[std::move(k)] = r.str();
  }
  if (!r.done()) throw CorruptModelError("trailing bytes in model file");
  try {
    model.validate();
  } catch (const Error& e) {
    throw CorruptModelError(std::string("invalid model contents: ") + e.what());
  }
  return model;
}

void save_model(const CombinedModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write model file " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw data_error("cannot write model file " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CombinedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open model file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace dofvo
