#pragma once

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sdeid/fk_solver.hpp"
#include "sdeid/identify.hpp"
#include "sdeid/model.hpp"
#include "sdeid/observe.hpp"

namespace sdeid {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

/// Nested key/value experiment description stored as JSON. Every key has a
/// default; user documents are merged onto the defaults (unknown keys are a
/// ConfigError) and then resolved, so to_text() lists every setting,
/// including the gallery parameters of each model.
class ExperimentConfig {
 public:
  ExperimentConfig();

  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);

  /// Override one setting: `key` is a dotted path ("grid.nx", "model.params.theta"),
  /// `value` is parsed as JSON and falls back to a plain string.
  void set(const std::string& key, const std::string& value);

  const Json& json() const { return doc_; }
  std::string to_text() const;
  bool operator==(const ExperimentConfig& other) const { return doc_ == other.doc_; }

  std::string pipeline() const;
  SdeModel model() const;
  /// Second model of the distinguish pipeline.
  SdeModel model_b() const;
  Grid1D grid(const SdeModel& model) const;
  FkOptions fk() const;
  ObservationConfig observation() const;

 private:
  explicit ExperimentConfig(Json user);
  void resolve();

  Json user_;  // overrides as supplied
  Json doc_;   // defaults + overrides, resolved
};

/// The default document.
const Json& default_config();

struct RunResult {
  int exit_code = 0;
  std::string message;
  Json manifest;
};

/// Runs the configured pipeline, writing outputs, `config.json` and
/// `manifest.json` into the `out` directory. Never throws; failures map to
/// exit codes (2 for invalid input, 3 for numerical failure).
RunResult run_experiment(const ExperimentConfig& config, std::ostream& log);

/// 2 for usage/config/data errors, 3 for numerical errors, 1 otherwise.
int exit_code_for(const std::exception& error);

/// One line per gallery model: name, formulas, parameter defaults.
std::string models_listing();
/// Full description of one gallery model; UsageError for unknown names.
std::string model_details(const std::string& name);

}  // namespace sdeid
