#include "spot/cli/artifacts.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "spot/errors.hpp"

namespace spot::cli {

namespace fs = std::filesystem;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string git_blob_hash(std::string_view bytes) {
  const std::string header = "blob " + std::to_string(bytes.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), header.data(), header.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw Error(ErrorKind::kIo, "SHA-1 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

std::string git_blob_hash_file(const fs::path& path) {
  return git_blob_hash(read_file(path));
}

fs::path resolve_output_dir(const std::string& requested, const std::string& command) {
  const char* root = std::getenv("SPOT_OUTPUT_ROOT");
  const fs::path base = (root != nullptr && *root != '\0') ? fs::path(root) : fs::path("runs");
  if (requested.empty()) return base / command;
  const fs::path p(requested);
  if (p.is_absolute() || root == nullptr || *root == '\0') return p;
  return base / p;
}

void write_text(const fs::path& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  std::ofstream out(dir / name, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write '" + (dir / name).string() + "'");
}

RunRecorder::RunRecorder(std::string command, fs::path dir,
                         nlohmann::ordered_json config, std::uint64_t seed)
    : command_(std::move(command)), dir_(std::move(dir)),
      config_text_(config.dump(2) + "\n"), config_hash_(git_blob_hash(config_text_)),
      seed_(seed), started_(utc_now()) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create '" + dir_.string() + "': " + ec.message());
}

std::string RunRecorder::run_id() const { return command_ + "-" + config_hash_.substr(0, 12); }

void RunRecorder::add_input(const std::string& role, const fs::path& path) {
  inputs_[role] = {{"path", path.string()}, {"hash", git_blob_hash_file(path)}};
}

void RunRecorder::add_output(const std::string& name, const std::string& text) {
  write_text(dir_, name, text);
  outputs_[name] = git_blob_hash(text);
}

void RunRecorder::add_output_file(const std::string& name) {
  outputs_[name] = git_blob_hash_file(dir_ / name);
}

void RunRecorder::add_note(const std::string& key, nlohmann::ordered_json value) {
  notes_[key] = std::move(value);
}

void RunRecorder::finish() {
  write_text(dir_, "config.json", config_text_);
  nlohmann::ordered_json m;
  m["run_id"] = run_id();
  m["command"] = command_;
  m["seed"] = seed_;
  m["config_hash"] = config_hash_;
  m["inputs"] = inputs_;
  m["outputs"] = outputs_;
  if (!notes_.empty()) m["notes"] = notes_;
  m["started_at"] = started_;
  m["finished_at"] = utc_now();
  write_text(dir_, "manifest.json", m.dump(2) + "\n");
}

}  // namespace spot::cli
