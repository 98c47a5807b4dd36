#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "echochamber/error.hpp"

namespace echochamber::pipeline {

/// Bad configuration or command line; the CLI exits with status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Every recognized key with its default, in documentation order.
const std::vector<ConfigKey>& config_keys();

/// Flat key=value configuration. Precedence: set() > load_file() > defaults,
/// provided the file is loaded before overrides are applied.
class Config {
 public:
  Config();

  /// `key = value` lines; '#' starts a comment, blank lines are ignored.
  /// Throws UsageError on unknown keys or malformed lines, Error when the
  /// file cannot be read.
  void load_file(const std::filesystem::path& path);
  void set(std::string_view key, std::string value);

  const std::string& get(std::string_view key) const;
  double get_double(std::string_view key) const;
  std::uint64_t get_u64(std::string_view key) const;
  std::size_t get_size(std::string_view key) const { return static_cast<std::size_t>(get_u64(key)); }
  bool get_bool(std::string_view key) const;
  std::vector<double> get_list(std::string_view key) const;
  /// Empty string when unset.
  std::filesystem::path get_path(std::string_view key) const { return get(key); }

  const std::map<std::string, std::string, std::less<>>& values() const { return values_; }
  /// Sorted `key=value` lines of the effective configuration, leaving out
  /// outdir and threads, which do not affect results.
  std::string canonical() const;
  std::string hash() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

/// Subcommand names in pipeline order.
const std::vector<std::string>& subcommands();

/// Subcommands bundled by `report`.
const std::vector<std::string>& report_steps();

std::string version();

/// Runs one subcommand. Artifacts are written to <outdir>/<name>/ through a
/// temporary directory that replaces the target only on success. Throws
/// UsageError for an unknown name.
void run_subcommand(std::string_view name, const Config& cfg);

}  // namespace echochamber::pipeline
