#include "spot/autodiff/checkpoint.hpp"

#include <fstream>

#include "spot/errors.hpp"
#include "spot/io/binary.hpp"

namespace spot::autodiff {

void write_checkpoint(std::ostream& out, const std::vector<NamedTensor>& ts) {
  io::write_magic(out, kCheckpointMagic);
  io::write_pod<std::uint8_t>(out, kCheckpointVersion);
  io::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ts.size()));
  for (const NamedTensor& t : ts) {
    io::write_string(out, t.name);
    io::write_pod<std::uint32_t>(out, 2);
    io::write_pod<std::uint64_t>(out, t.value.rows());
    io::write_pod<std::uint64_t>(out, t.value.cols());
    for (double x : t.value.data()) io::write_pod<double>(out, x);
  }
}

std::vector<NamedTensor> read_checkpoint(std::istream& in) {
  io::expect_magic(in, kCheckpointMagic, "checkpoint");
  const auto version = io::read_pod<std::uint8_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version));
  }
  const auto count = io::read_pod<std::uint32_t>(in, "tensor count");
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = io::read_string(in, "tensor name");
    const auto rank = io::read_pod<std::uint32_t>(in, "rank");
    if (rank != 2) {
      throw FormatError("tensor '" + t.name + "' has unsupported rank " +
                        std::to_string(rank));
    }
    const auto rows = io::read_pod<std::uint64_t>(in, "dims");
    const auto cols = io::read_pod<std::uint64_t>(in, "dims");
    if (rows > (1u << 28) || cols > (1u << 28) || rows * cols > (1u << 28)) {
      throw FormatError("tensor '" + t.name + "' has implausible dims");
    }
    std::vector<double> data(rows * cols);
    for (double& x : data) x = io::read_pod<double>(in, "tensor data");
    t.value = Tensor(Shape{rows, cols}, std::move(data));
    out.push_back(std::move(t));
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path,
                     const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_checkpoint(out, tensors);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_checkpoint(in);
}

const Tensor& find_tensor(const std::vector<NamedTensor>& tensors,
                          const std::string& name) {
  for (const NamedTensor& t : tensors) {
    if (t.name == name) return t.value;
  }
  throw FormatError("checkpoint has no tensor named '" + name + "'");
}

}  // namespace spot::autodiff
