#pragma once

#include "varan/ext_real.hpp"

#include "json.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace varan {

using Json = nlohmann::ordered_json;

enum class Status { Holds, Fails, Inconclusive };

std::string to_string(Status s);
Status status_from_string(const std::string& s);

/// Three-valued outcome of a finite-schedule check.
///
/// `margin` is the measured quantity that decided the status: for an
/// inequality check "q <= 0" it is q itself, for a positivity check "x > 0"
/// it is x. The witness holds whatever evidence the check collected.
struct Verdict {
  Status status = Status::Inconclusive;
  double margin = 0.0;
  Json witness = Json::object();

  bool holds() const { return status == Status::Holds; }
  bool fails() const { return status == Status::Fails; }
  bool decisive() const { return status != Status::Inconclusive; }
};

/// A check whose precondition is itself a verdict that came out Fails.
class PreconditionFailed : public std::invalid_argument {
 public:
  PreconditionFailed(const std::string& what, Verdict v) : std::invalid_argument(what), verdict_(std::move(v)) {}
  const Verdict& verdict() const { return verdict_; }

 private:
  Verdict verdict_;
};

/// "q <= 0" up to tol: Holds if q <= tol, Fails if q >= 2 tol, else Inconclusive.
Verdict decide_at_most(double q, double tol, Json witness = Json::object());

/// "x > 0" up to tol: Holds if x >= 2 tol, Fails if x <= tol, else Inconclusive.
Verdict decide_positive(double x, double tol, Json witness = Json::object());

/// Fails if any part fails, Holds if all hold, Inconclusive otherwise.
/// The margin is the one of the first part with the worst status.
Verdict conjunction(const std::vector<Verdict>& parts, Json witness = Json::object());

/// JSON number, or the strings "+inf" / "-inf".
Json json_number(double v);
inline Json json_number(ExtReal v) { return json_number(v.raw()); }

/// Finite meaning for "for all delta > 0", "liminf over n" and "eventually".
///
/// The eventually-window is the suffix of n_schedule over which limits are
/// judged; 0 selects the last half.
struct LimitConfig {
  std::vector<long> n_schedule;
  std::vector<double> delta_ladder;
  std::vector<double> radius_ladder;
  std::size_t eventually_window = 0;
  double tol = 1e-6;

  /// n = 1..64, delta = 2^-k (k = 1..12), radius = 2^-k (k = 1..10), tol 1e-6.
  static LimitConfig defaults();

  /// Throws std::invalid_argument on empty or non-monotone schedules.
  void validate() const;

  std::size_t window_size() const;
  /// The suffix of n_schedule used for limits.
  std::vector<long> window() const;
  /// Index in n_schedule where the window starts.
  std::size_t window_start() const { return n_schedule.size() - window_size(); }

  Json to_json() const;
  /// Reads the keys present in `j` over `base`.
  static LimitConfig from_json(const Json& j, LimitConfig base = defaults());
};

/// {status, margin, witness, schedules}
Json to_json(const Verdict& v, const LimitConfig& cfg);
Json to_json(const Verdict& v);

std::vector<long> int_range(long first, long last);
/// first, first*factor, ... while <= last (rounded to integers, deduplicated).
std::vector<long> geometric_schedule(long first, long last, double factor);
/// first * ratio^k for k = 0..count-1.
std::vector<double> geometric_ladder(double first, double ratio, int count);

}  // namespace varan
