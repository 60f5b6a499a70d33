#ifndef UQKIT_TOOLS_RUN_MANIFEST_H_
#define UQKIT_TOOLS_RUN_MANIFEST_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace uqkit::tools {

// Lowercase hex SHA-256 of a file's bytes.
std::string Sha256File(const std::filesystem::path& path);

// Provenance record written next to every command's outputs, on success
// and on failure.
class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> argv);

  void AddInput(const std::string& role, const std::filesystem::path& path);
  void SetSeed(std::uint64_t seed) { seed_ = seed; }
  void AddOutput(const std::filesystem::path& path);
  void SetExtra(const std::string& key, nlohmann::json value);

  nlohmann::json Finish(int exit_code, const std::string& error = {}) const;
  void Write(const std::filesystem::path& path, int exit_code,
             const std::string& error = {}) const;

 private:
  std::string command_;
  std::vector<std::string> argv_;
  nlohmann::json inputs_ = nlohmann::json::object();
  nlohmann::json outputs_ = nlohmann::json::array();
  nlohmann::json extra_ = nlohmann::json::object();
  std::optional<std::uint64_t> seed_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace uqkit::tools

#endif  // UQKIT_TOOLS_RUN_MANIFEST_H_
