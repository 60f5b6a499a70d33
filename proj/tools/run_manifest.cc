#include "run_manifest.h"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>

#include "uqkit/error.h"
#include "uqkit/tensor_io.h"
#include "uqkit/version.h"

namespace uqkit::tools {

std::string Sha256File(const std::filesystem::path& path) {
  const auto bytes = ReadFileBytes(path);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int size = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &size,
                 EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "sha256 failed for " + path.string());
  }
  std::string hex;
  hex.reserve(2 * size);
  for (unsigned int i = 0; i < size; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof(buf), "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

RunManifest::RunManifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)),
      argv_(std::move(argv)),
      start_(std::chrono::steady_clock::now()) {}

void RunManifest::AddInput(const std::string& role,
                           const std::filesystem::path& path) {
  nlohmann::json entry = {{"path", path.string()}};
  try {
    entry["sha256"] = Sha256File(path);
  } catch (const Error&) {
    entry["sha256"] = nullptr;
  }
  inputs_[role] = entry;
}

void RunManifest::AddOutput(const std::filesystem::path& path) {
  outputs_.push_back(path.string());
}

void RunManifest::SetExtra(const std::string& key, nlohmann::json value) {
  extra_[key] = std::move(value);
}

nlohmann::json RunManifest::Finish(int exit_code,
                                   const std::string& error) const {
  const std::chrono::duration<double> wall =
      std::chrono::steady_clock::now() - start_;
  nlohmann::json doc = {{"command", command_},
                        {"argv", argv_},
                        {"tool_version", kVersion},
                        {"inputs", inputs_},
                        {"outputs", outputs_},
                        {"exit_code", exit_code},
                        {"status", exit_code == 0 ? "ok" : "failed"},
                        {"wall_time_seconds", wall.count()}};
  doc["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
  if (!error.empty()) doc["error"] = error;
  for (const auto& [key, value] : extra_.items()) doc[key] = value;
  return doc;
}

void RunManifest::Write(const std::filesystem::path& path, int exit_code,
                        const std::string& error) const {
  WriteFileAtomic(path, Finish(exit_code, error).dump(2) + "\n");
}

}  // namespace uqkit::tools
