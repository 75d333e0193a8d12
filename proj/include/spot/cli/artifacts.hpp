#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace spot::cli {

// Hex SHA-1 of "blob <size>\0<bytes>", the object id git would assign.
std::string git_blob_hash(std::string_view bytes);
// Throws IoError when the file cannot be read.
std::string git_blob_hash_file(const std::filesystem::path& path);

// Output directory for a command: `requested` when given (relative paths
// resolve against $SPOT_OUTPUT_ROOT if set), else $SPOT_OUTPUT_ROOT/<command>,
// else ./runs/<command>.
std::filesystem::path resolve_output_dir(const std::string& requested,
                                         const std::string& command);

// Writes `text` to dir/name, creating dir; throws IoError on failure.
void write_text(const std::filesystem::path& dir, const std::string& name,
                const std::string& text);

// Collects a command's provenance and writes config.json and manifest.json.
class RunRecorder {
 public:
  RunRecorder(std::string command, std::filesystem::path dir,
              nlohmann::ordered_json config, std::uint64_t seed);

  const std::filesystem::path& dir() const { return dir_; }
  // "<command>-<first 12 hex digits of the config hash>".
  std::string run_id() const;

  void add_input(const std::string& role, const std::filesystem::path& path);
  // Writes dir/name and records its hash.
  void add_output(const std::string& name, const std::string& text);
  // Records a file some library call already wrote into dir.
  void add_output_file(const std::string& name);
  void add_note(const std::string& key, nlohmann::ordered_json value);

  // config.json, then manifest.json listing inputs, the config hash, seed
  // and every output hash.
  void finish();

 private:
  std::string command_;
  std::filesystem::path dir_;
  std::string config_text_;
  std::string config_hash_;
  std::uint64_t seed_;
  nlohmann::ordered_json inputs_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json outputs_ = nlohmann::ordered_json::object();
  nlohmann::ordered_json notes_ = nlohmann::ordered_json::object();
  std::string started_;
};

}  // namespace spot::cli
