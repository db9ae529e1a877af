#pragma once

#include "varan/catalogue.hpp"
#include "varan/uniform_infimum.hpp"
#include "varan/verdict.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace varan {

std::string toolkit_version();
inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultSeed = 1;

/// A malformed scenario; key() is the dotted path of the offending entry.
class ScenarioError : public std::invalid_argument {
 public:
  ScenarioError(const std::string& key, const std::string& why)
      : std::invalid_argument("scenario key '" + key + "': " + why), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// A catalogue name or an inline description.
struct InstanceRef {
  std::string name;  ///< empty for inline instances
  Json description;  ///< inline description, null for catalogue refs
};

struct Scenario {
  std::string name;
  std::string operation;
  std::vector<InstanceRef> instances;
  Json config_overrides = Json::object();  ///< LimitConfig keys
  std::optional<double> resolution;          ///< mesh.resolution
  std::optional<PenaltySpec> penalty;
  Json params = Json::object();
  std::optional<Status> expected;
  std::optional<std::uint64_t> seed;
};

/// Names accepted in "operation".
const std::vector<std::string>& scenario_operations();

/// JSON text; comments are allowed. Validates keys, types, operation and
/// catalogue names; throws ScenarioError.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::uint64_t> seed;      ///< command-line seed
  std::optional<std::uint64_t> env_seed;  ///< TOOLKIT_SEED
  bool timings = true;
};

struct RunReport {
  Json json;
  Status status = Status::Inconclusive;
  std::optional<bool> expectation_met;
  std::string csv;

  /// 0 on Holds or a met expectation, 2 on Fails or a missed expectation,
  /// 3 on Inconclusive.
  int exit_code() const;
  /// Pretty-printed JSON with a trailing newline.
  std::string text() const;
};

int exit_code(Status s);

/// Runs the operation on every referenced instance; the report status is
/// the conjunction of the per-instance statuses.
RunReport run_scenario(const Scenario& s, const RunOptions& opt = {});

/// Exact table n -> (r, inf) for the sparse counterexample; Fails when a row
/// deviates from (-1/n, -1/(n+1)). Throws TruncationTooSmall.
RunReport reproduce_counterexample(int n_max, int dimension, int k_max = 0, bool timings = true);

struct SweepSpec {
  std::string instance;
  std::vector<double> exponents{1.0, 2.0};
  std::vector<double> n_schedule;
  std::optional<double> resolution;
  double tol = 1e-3;
  std::uint64_t seed = kDefaultSeed;
};

/// exponent, n, penalty_value, uniform_infimum, gap
std::string penalty_sweep_csv(const SweepSpec& spec);
/// n values first, first*factor, ... up to last.
std::vector<double> sweep_schedule(const std::string& kind, double first, double last, double factor = 2.0);

}  // namespace varan
