#pragma once

#include <algorithm>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hardyq/statevector.hpp"
#include "json.hpp"

namespace hardyq {

/// Entanglement configuration: one multi-controlled X per control set,
/// each onto its own dedicated ancilla. Particle indices are 1-based
/// externally; qubit k-1 carries particle k.
struct EntanglerSpec {
  int n = 0;
  std::vector<std::vector<int>> control_sets;  // 1-based, each sorted
};

enum class SpecKind { Cycle, Complete, Custom };

/// Which particles receive the reverse rotation and are therefore read in
/// the {c,d} basis; the complement stays in {u,v}.
struct MeasurementSetting {
  std::set<int> reversed;  // 1-based particles

  static MeasurementSetting none() { return {}; }
  static MeasurementSetting single(int k) { return {{k}}; }
  static MeasurementSetting all(int n) {
    MeasurementSetting s;
    for (int k = 1; k <= n; ++k) s.reversed.insert(k);
    return s;
  }
  bool is_reversed(int k) const { return reversed.count(k) != 0; }
};

namespace detail {

inline void validate_control_sets(int n, const std::vector<std::vector<int>>& sets) {
  if (sets.empty()) throw std::invalid_argument("spec needs at least one control set");
  std::set<std::vector<int>> seen;
  for (const auto& cs : sets) {
    if (cs.size() < 2) throw std::invalid_argument("control set needs at least 2 members");
    std::set<int> uniq(cs.begin(), cs.end());
    if (uniq.size() != cs.size()) throw std::invalid_argument("duplicate particle in control set");
    for (int k : cs) {
      if (k < 1 || k > n) throw std::invalid_argument("control set particle out of range");
    }
    if (!seen.insert(cs).second) throw std::invalid_argument("control sets must be distinct");
  }
}

}  // namespace detail

inline EntanglerSpec make_spec(SpecKind kind, int n,
                               std::optional<std::vector<std::vector<int>>> custom_sets = {}) {
  if (n < 2) throw std::invalid_argument("need at least 2 particles");
  EntanglerSpec spec;
  spec.n = n;
  switch (kind) {
    case SpecKind::Cycle: {
      if (n < 3) throw std::invalid_argument("cycle needs at least 3 particles");
      for (int k = 1; k <= n; ++k) {
        std::vector<int> cs{k, k % n + 1};
        std::sort(cs.begin(), cs.end());
        spec.control_sets.push_back(std::move(cs));
      }
      break;
    }
    case SpecKind::Complete: {
      std::vector<int> cs;
      for (int k = 1; k <= n; ++k) cs.push_back(k);
      spec.control_sets.push_back(std::move(cs));
      break;
    }
    case SpecKind::Custom: {
      if (!custom_sets) throw std::invalid_argument("custom spec needs control sets");
      spec.control_sets = *custom_sets;
      for (auto& cs : spec.control_sets) std::sort(cs.begin(), cs.end());
      break;
    }
  }
  detail::validate_control_sets(n, spec.control_sets);
  return spec;
}

inline EntanglerSpec cycle_spec(int n) { return make_spec(SpecKind::Cycle, n); }
inline EntanglerSpec complete_spec(int n) { return make_spec(SpecKind::Complete, n); }

/// All n-bit strings in which at least one control set reads all-ones;
/// these carry exactly zero probability after post-selection.
inline std::set<std::string> vanished_states(const EntanglerSpec& spec) {
  std::set<std::string> out;
  const std::size_t dim = std::size_t{1} << spec.n;
  for (std::size_t s = 0; s < dim; ++s) {
    const std::string bits = detail::index_to_bits(s, spec.n);
    for (const auto& cs : spec.control_sets) {
      bool all_ones = true;
      for (int k : cs) all_ones = all_ones && bits[static_cast<std::size_t>(k - 1)] == '1';
      if (all_ones) {
        out.insert(bits);
        break;
      }
    }
  }
  return out;
}

/// Rule-based states of interest: strings in which some control set has at
/// least two members set. For pairwise sets this reduces to "some pair is
/// both-1" (the vanished strings); for the single full set it reduces to
/// "at least two ones". For other custom specs the rule is a conjecture
/// and the LHV oracle is the ground truth.
inline std::set<std::string> interest_states_rule(const EntanglerSpec& spec) {
  std::set<std::string> out;
  const std::size_t dim = std::size_t{1} << spec.n;
  for (std::size_t s = 0; s < dim; ++s) {
    const std::string bits = detail::index_to_bits(s, spec.n);
    for (const auto& cs : spec.control_sets) {
      int ones = 0;
      for (int k : cs) ones += bits[static_cast<std::size_t>(k - 1)] == '1';
      if (ones >= 2) {
        out.insert(bits);
        break;
      }
    }
  }
  return out;
}

/// Circuit for one condition set: Ry(theta) on every data qubit, one MCX
/// per control set onto its own fresh ancilla, then Ry(-theta) on every
/// particle of the reversed set. Qubit order is data first, then ancillas.
inline Circuit build_circuit(const EntanglerSpec& spec, double theta,
                             const MeasurementSetting& setting) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi + 1e-12))
    throw std::invalid_argument("theta must lie in [0, pi]");
  for (int k : setting.reversed) {
    if (k < 1 || k > spec.n) throw std::invalid_argument("reversed particle out of range");
  }
  Circuit c;
  c.num_data = spec.n;
  c.num_ancilla = static_cast<int>(spec.control_sets.size());
  for (int q = 0; q < spec.n; ++q) c.gates.push_back(Gate::ry(theta, q));
  for (std::size_t i = 0; i < spec.control_sets.size(); ++i) {
    std::vector<int> controls;
    for (int k : spec.control_sets[i]) controls.push_back(k - 1);
    c.gates.push_back(Gate::mcx(std::move(controls), spec.n + static_cast<int>(i)));
  }
  for (int k : setting.reversed) c.gates.push_back(Gate::ry(-theta, k - 1));
  return c;
}

/// JSON schema for custom spec files: {"n": int, "control_sets":
/// [[int,...],...]} with 1-based indices.
inline EntanglerSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("control_sets"))
    throw std::invalid_argument("spec file needs fields \"n\" and \"control_sets\"");
  const int n = j.at("n").get<int>();
  auto sets = j.at("control_sets").get<std::vector<std::vector<int>>>();
  return make_spec(SpecKind::Custom, n, std::move(sets));
}

inline nlohmann::json spec_to_json(const EntanglerSpec& spec) {
  return nlohmann::json{{"n", spec.n}, {"control_sets", spec.control_sets}};
}

}  // namespace hardyq
