#pragma once

// Flat, typed `key = value` configuration for simulator runs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rankshape/collapse_sim.hpp"

namespace rankshape {

using ConfigValue = std::variant<std::int64_t, double, bool, std::string>;

class RunConfig {
 public:
  /// All accepted keys with their defaults.
  RunConfig();

  /// Parses and stores `value` with the key's declared type. Unknown keys are
  /// rejected with the list of accepted keys.
  void set(std::string_view key, std::string_view value);

  /// "key=value" as given on the command line.
  void set_assignment(std::string_view assignment);

  /// Lines of `key = value`; blank lines and '#' comments are ignored.
  void parse(std::string_view text);
  void load(const std::filesystem::path& path);

  std::int64_t get_int(std::string_view key) const;
  double get_double(std::string_view key) const;
  bool get_bool(std::string_view key) const;
  const std::string& get_string(std::string_view key) const;

  const std::map<std::string, ConfigValue, std::less<>>& values() const noexcept { return values_; }
  std::vector<std::string> keys() const;

  EnvParams env_params() const;
  TrainConfig train_config() const;

  /// Output basename; derived from alpha and seed when `label` is empty.
  std::string label() const;

 private:
  const ConfigValue& at(std::string_view key) const;

  std::map<std::string, ConfigValue, std::less<>> values_;
};

}  // namespace rankshape
