#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dofvo/error.hpp"
#include "dofvo/refiner.hpp"

namespace dofvo {

inline constexpr char kModelMagic[4] = {'O', 'D', 'O', 'F'};
inline constexpr std::uint16_t kModelFormatVersion = 1;

class CorruptModelError : public Error {
 public:
  explicit CorruptModelError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ModelVersionError : public Error {
 public:
  explicit ModelVersionError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

/// Binary layout (little-endian):
///   "ODOF" | u16 version | u8 branch count
///   per branch: u8 dof_index | u8 activation | u8 frozen | u8 input mask bits |
///               u32 layer count | (u32 rows, u32 cols) per layer |
///               f64[6] mean | f64[6] std | per layer: weights row-major, bias
///   u8 fusion flag | [f64[72] weight row-major | f64[6] bias]
///   u32 metadata count | (u32 len, key bytes, u32 len, value bytes)...
///   u32 CRC-32 of every preceding byte
std::vector<std::uint8_t> serialize_model(const CombinedModel& model);
CombinedModel deserialize_model(const std::vector<std::uint8_t>& bytes);

/// Written to a temporary sibling and renamed into place.
void save_model(const CombinedModel& model, const std::filesystem::path& path);
CombinedModel load_model(const std::filesystem::path& path);

}  // namespace dofvo
