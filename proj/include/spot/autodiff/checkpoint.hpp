#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "spot/autodiff/tensor.hpp"

namespace spot::autodiff {

struct NamedTensor {
  std::string name;
  Tensor value;

  bool operator==(const NamedTensor&) const = default;
};

// Flat parameter file:
//   "SPOTCKPT" | u8 version | u32 count |
//   count x (u32 name_len | name | u32 rank | rank x u64 dim | f64 data...)
// All integers and reals little-endian.
inline constexpr char kCheckpointMagic[9] = "SPOTCKPT";
inline constexpr std::uint8_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const std::vector<NamedTensor>& ts);
std::vector<NamedTensor> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

// Looks up `name`; throws FormatError when absent.
const Tensor& find_tensor(const std::vector<NamedTensor>& tensors,
                          const std::string& name);

}  // namespace spot::autodiff
