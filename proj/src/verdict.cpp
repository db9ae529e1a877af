#include "varan/verdict.hpp"

#include <cmath>
#include <stdexcept>

namespace varan {

std::string to_string(Status s) {
  switch (s) {
    case Status::Holds: return "Holds";
    case Status::Fails: return "Fails";
    case Status::Inconclusive: return "Inconclusive";
  }
  return "?";
}

Status status_from_string(const std::string& s) {
  if (s == "Holds") return Status::Holds;
  if (s == "Fails") return Status::Fails;
  if (s == "Inconclusive") return Status::Inconclusive;
  throw std::invalid_argument("unknown status '" + s + "'");
}

Verdict decide_at_most(double q, double tol, Json witness) {
  if (std::isnan(q)) throw std::invalid_argument("decide_at_most: NaN measurement");
  Verdict v;
  v.margin = q;
  v.witness = std::move(witness);
  if (q <= tol) v.status = Status::Holds;
  else if (q >= 2.0 * tol) v.status = Status::Fails;
  else v.status = Status::Inconclusive;
  return v;
}

Verdict decide_positive(double x, double tol, Json witness) {
  if (std::isnan(x)) throw std::invalid_argument("decide_positive: NaN measurement");
  Verdict v;
  v.margin = x;
  v.witness = std::move(witness);
  if (x >= 2.0 * tol) v.status = Status::Holds;
  else if (x <= tol) v.status = Status::Fails;
  else v.status = Status::Inconclusive;
  return v;
}

Verdict conjunction(const std::vector<Verdict>& parts, Json witness) {
  auto rank = [](Status s) { return s == Status::Fails ? 2 : s == Status::Inconclusive ? 1 : 0; };
  Verdict out;
  out.status = Status::Holds;
  out.witness = std::move(witness);
  bool first = true;
  for (const auto& p : parts) {
    if (first || rank(p.status) > rank(out.status)) {
      out.status = p.status;
      out.margin = p.margin;
      first = false;
    }
  }
  return out;
}

Json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (v == std::numeric_limits<double>::infinity()) return "+inf";
  if (v == -std::numeric_limits<double>::infinity()) return "-inf";
  return v;
}

LimitConfig LimitConfig::defaults() {
  LimitConfig c;
  c.n_schedule = int_range(1, 64);
  c.delta_ladder = geometric_ladder(0.5, 0.5, 12);
  c.radius_ladder = geometric_ladder(0.5, 0.5, 10);
  return c;
}

void LimitConfig::validate() const {
  if (n_schedule.empty()) throw std::invalid_argument("LimitConfig: empty n_schedule");
  if (delta_ladder.empty()) throw std::invalid_argument("LimitConfig: empty delta_ladder");
  if (radius_ladder.empty()) throw std::invalid_argument("LimitConfig: empty radius_ladder");
  for (std::size_t i = 1; i < n_schedule.size(); ++i)
    if (n_schedule[i] <= n_schedule[i - 1]) throw std::invalid_argument("LimitConfig: n_schedule must increase");
  if (n_schedule.front() < 1) throw std::invalid_argument("LimitConfig: n_schedule must be positive");
  auto decreasing = [](const std::vector<double>& l, const char* what) {
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (!(l[i] > 0.0) || !std::isfinite(l[i])) throw std::invalid_argument(std::string("LimitConfig: ") + what + " must be positive");
      if (i > 0 && !(l[i] < l[i - 1])) throw std::invalid_argument(std::string("LimitConfig: ") + what + " must decrease");
    }
  };
  decreasing(delta_ladder, "delta_ladder");
  decreasing(radius_ladder, "radius_ladder");
  if (eventually_window > n_schedule.size()) throw std::invalid_argument("LimitConfig: window longer than n_schedule");
  if (!(tol > 0.0)) throw std::invalid_argument("LimitConfig: tol must be positive");
}

std::size_t LimitConfig::window_size() const {
  if (eventually_window != 0) return eventually_window;
  return std::max<std::size_t>(1, n_schedule.size() / 2);
}

std::vector<long> LimitConfig::window() const {
  return std::vector<long>(n_schedule.begin() + static_cast<std::ptrdiff_t>(window_start()), n_schedule.end());
}

Json LimitConfig::to_json() const {
  Json j;
  j["n_schedule"] = n_schedule;
  j["delta_ladder"] = delta_ladder;
  j["radius_ladder"] = radius_ladder;
  j["eventually_window"] = window_size();
  j["tol"] = tol;
  return j;
}

LimitConfig LimitConfig::from_json(const Json& j, LimitConfig base) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k == "n_schedule") base.n_schedule = it->get<std::vector<long>>();
    else if (k == "n_range") base.n_schedule = int_range(it->at(0).get<long>(), it->at(1).get<long>());
    else if (k == "n_geometric")
      base.n_schedule = geometric_schedule(it->at(0).get<long>(), it->at(1).get<long>(), it->at(2).get<double>());
    else if (k == "delta_ladder") base.delta_ladder = it->get<std::vector<double>>();
    else if (k == "delta_levels") base.delta_ladder = geometric_ladder(0.5, 0.5, it->get<int>());
    else if (k == "radius_ladder") base.radius_ladder = it->get<std::vector<double>>();
    else if (k == "radius_levels") base.radius_ladder = geometric_ladder(0.5, 0.5, it->get<int>());
    else if (k == "eventually_window") base.eventually_window = it->get<std::size_t>();
    else if (k == "tol") base.tol = it->get<double>();
    else throw std::invalid_argument("config: unknown key '" + k + "'");
  }
  base.validate();
  return base;
}

Json to_json(const Verdict& v) {
  Json j;
  j["status"] = to_string(v.status);
  j["margin"] = json_number(v.margin);
  j["witness"] = v.witness;
  return j;
}

Json to_json(const Verdict& v, const LimitConfig& cfg) {
  Json j = to_json(v);
  j["schedules"] = cfg.to_json();
  return j;
}

std::vector<long> int_range(long first, long last) {
  std::vector<long> out;
  for (long n = first; n <= last; ++n) out.push_back(n);
  return out;
}

std::vector<long> geometric_schedule(long first, long last, double factor) {
  if (first < 1 || !(factor > 1.0)) throw std::invalid_argument("geometric_schedule: need first >= 1 and factor > 1");
  std::vector<long> out;
  for (double x = static_cast<double>(first); x <= static_cast<double>(last) + 0.5; x *= factor) {
    const long n = std::lround(x);
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  return out;
}

std::vector<double> geometric_ladder(double first, double ratio, int count) {
  std::vector<double> out;
  double x = first;
  for (int k = 0; k < count; ++k, x *= ratio) out.push_back(x);
  return out;
}

}  // namespace varan
