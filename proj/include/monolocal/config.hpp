#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "monolocal/pipeline.hpp"
#include "monolocal/synth.hpp"

namespace monolocal {

// Flat "key = value" text, one per line, '#' comments. The first setting must be
// config_version = 1. Every key that is set must be read by someone: callers
// finish with check_unused() so typos surface as errors.
class Config {
 public:
  static constexpr int kVersion = 1;

  static Config parse(const std::string& text, std::filesystem::path base_dir = {});
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::string require(const std::string& key) const;
  double get_double(const std::string& key, double fallback, double lo, double hi) const;
  long long get_int(const std::string& key, long long fallback, long long lo, long long hi) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Relative paths resolve against the config file's directory.
  std::filesystem::path get_path(const std::string& key, const std::filesystem::path& fallback = {}) const;
  std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  void set(const std::string& key, const std::string& value);
  void check_unused() const;

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };
  const Entry* find(const std::string& key) const;
  [[noreturn]] void bad(const std::string& key, const std::string& why) const;

  std::map<std::string, Entry> entries_;
  std::filesystem::path base_dir_;
  mutable std::set<std::string> used_;
};

PipelineParams pipeline_params(const Config& cfg);
synth::SuiteConfig suite_config(const Config& cfg);

// Files matching the glob's final component, sorted by name. Only the last path
// component may contain wildcards.
std::vector<std::filesystem::path> expand_frame_glob(const std::string& pattern,
                                                     const std::filesystem::path& base_dir = {});

}  // namespace monolocal
