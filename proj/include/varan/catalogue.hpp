#pragma once

#include "varan/function_model.hpp"
#include "varan/region.hpp"
#include "varan/slopes.hpp"
#include "varan/verdict.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace varan {

/// How f_n is built from an instance.
enum class SequenceKind { Constant, Envelope, Perturbed, Penalty };
std::string to_string(SequenceKind k);
SequenceKind sequence_kind_from_string(const std::string& s);

/// Everything an operation may need, fully built. Optional parts are
/// checked by the operation that uses them.
struct Instance {
  Instance(std::string name_, FunctionModel f_) : name(std::move(name_)), f(std::move(f_)) {}

  std::string name;
  FunctionModel f;
  std::optional<FunctionModel> g;  ///< perturbation, tilt partner or slope-control term
  std::optional<Region> set;
  Point point;
  SequenceKind sequence = SequenceKind::Constant;
  std::optional<SubdifferentialOracle> f_oracle;
  std::optional<SubdifferentialOracle> g_oracle;
  std::vector<FunctionModel> components;  ///< decoupled sum terms
  std::vector<SubdifferentialOracle> component_oracles;
  Eigen::VectorXd xstar;                  ///< default functional for tilt / Frechet tests
  double resolution = 1.0 / 64;           ///< default mesh spacing
  std::vector<double> delta_ladder;       ///< replaces the configured ladder when non-empty
  bool mesh_free = false;                 ///< FiniteException instance evaluated without a mesh
};

/// Inputs a builder may depend on.
struct InstanceParams {
  double resolution = 1.0 / 64;
  double tol = 0.05;
  std::uint64_t seed = 1;
};

struct CatalogueEntry {
  std::string name;
  std::string role;
  std::vector<std::string> tags;
  std::string description;
  double default_resolution = 1.0 / 64;
  std::function<Instance(const InstanceParams&)> build;

  bool has_tag(const std::string& tag) const;
};

class UnknownInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

const std::vector<CatalogueEntry>& catalogue();
/// Throws UnknownInstance.
const CatalogueEntry& catalogue_entry(const std::string& name);
/// Entries carrying `tag` (all entries for an empty tag).
std::vector<const CatalogueEntry*> catalogue_filter(const std::string& tag);
Json catalogue_json(const std::vector<const CatalogueEntry*>& entries);
/// "name: role [tag, tag]" per line.
std::string catalogue_text(const std::vector<const CatalogueEntry*>& entries);

/// Seeded piecewise function on [-1, 1]: linear pieces between random
/// breakpoints with jumps at the breakpoints, lower semicontinuous.
FunctionModel random_piecewise(std::uint64_t seed, int pieces = 4);

/// Instance described inline in a scenario file; throws
/// std::invalid_argument naming the offending key.
Instance inline_instance(const Json& j, const InstanceParams& params);

}  // namespace varan
