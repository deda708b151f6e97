#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hardyq/analytic.hpp"
#include "hardyq/entangler.hpp"
#include "json.hpp"

namespace hardyq {

/// Exhaustive enumeration is kept exact up to this many particles
/// (2^16 deterministic strategies); larger requests are refused.
inline constexpr int kMaxOracleParticles = 8;

/// One deterministic local-hidden-variable assignment: per-particle
/// outcomes for both observables. '1' in u_bits means U_k = 1, '1' in
/// d_bits means D_k = 1.
struct LhvStrategy {
  std::string u_bits;
  std::string d_bits;
};

/// Outcome strings a setting assigns probability > eps (eps = 1e-9).
struct SupportSet {
  MeasurementSetting setting;
  std::set<std::string> support;
};

/// What a single D_k = 1 observation forces on the other particles,
/// read off the setting-{k} support: every option is one support string
/// with d_k = 1; forced_zero/forced_one hold across all options, and
/// at least one partner bit is set in each option.
struct CorrelationImplication {
  int particle = 0;
  std::vector<std::string> options;
  std::set<int> forced_zero;
  std::set<int> forced_one;
  std::set<int> partners;
};

/// One way a strategy that honors the correlation implications of a
/// target state is forced into a vanished state.
struct ContradictionChain {
  std::string target_state;
  std::vector<std::pair<int, std::string>> implications_used;  // (particle, chosen support string)
  std::string violated_vanished_state;
};

struct StrategyCheck {
  bool consistent = false;
  int witness_setting = -1;  // index into the supports list, -1 if consistent
};

/// The full certificate for one configuration and angle.
struct ParadoxReport {
  EntanglerSpec spec;
  double theta = 0.0;
  std::set<std::string> paradox_states;
  double p_success = 0.0;
  std::size_t consistent_count = 0;
  std::vector<ContradictionChain> chains;
};

/// Supports for the n+2 settings in the fixed order: no reversal, each
/// singleton {1}..{n}, then all particles reversed.
inline std::vector<SupportSet> quantum_supports(const EntanglerSpec& spec, double theta) {
  const BasisCoeffs coeffs = uniform_coeffs(theta, spec.n);
  std::vector<SupportSet> out;
  std::vector<MeasurementSetting> settings;
  settings.push_back(MeasurementSetting::none());
  for (int k = 1; k <= spec.n; ++k) settings.push_back(MeasurementSetting::single(k));
  settings.push_back(MeasurementSetting::all(spec.n));
  for (const MeasurementSetting& s : settings) {
    out.push_back({s, amplitudes_for_setting(spec, coeffs, s).support()});
  }
  return out;
}

namespace detail {

inline int particles_of(const std::vector<SupportSet>& supports) {
  if (supports.size() < 3) throw std::invalid_argument("supports must cover all n+2 settings");
  const int n = static_cast<int>(supports.size()) - 2;
  if (!supports[0].setting.reversed.empty() ||
      supports[static_cast<std::size_t>(n) + 1].setting.reversed.size() !=
          static_cast<std::size_t>(n))
    throw std::invalid_argument("supports must be ordered: none, singletons, all");
  for (int k = 1; k <= n; ++k) {
    const auto& rev = supports[static_cast<std::size_t>(k)].setting.reversed;
    if (rev.size() != 1 || *rev.begin() != k)
      throw std::invalid_argument("supports must be ordered: none, singletons, all");
  }
  return n;
}

/// Deterministic outcome of a strategy under one setting.
inline std::string strategy_outcome(const LhvStrategy& strategy, const MeasurementSetting& setting) {
  std::string out = strategy.u_bits;
  for (int k : setting.reversed) out[static_cast<std::size_t>(k - 1)] = strategy.d_bits[static_cast<std::size_t>(k - 1)];
  return out;
}

}  // namespace detail

/// A strategy is consistent iff for every setting its deterministic
/// outcome lies in that setting's support; otherwise the first failing
/// setting is recorded as witness.
inline StrategyCheck check_strategy(const LhvStrategy& strategy,
                                    const std::vector<SupportSet>& supports) {
  const int n = detail::particles_of(supports);
  if (static_cast<int>(strategy.u_bits.size()) != n ||
      static_cast<int>(strategy.d_bits.size()) != n)
    throw std::invalid_argument("strategy length must match particle count");
  for (std::size_t i = 0; i < supports.size(); ++i) {
    if (!supports[i].support.count(detail::strategy_outcome(strategy, supports[i].setting)))
      return {false, static_cast<int>(i)};
  }
  return {true, -1};
}

/// All 2^(2n) strategies whose outcomes live inside every support, in
/// strategy-index order (u_bits major, d_bits minor).
inline std::vector<LhvStrategy> enumerate_consistent_strategies(
    const std::vector<SupportSet>& supports) {
  const int n = detail::particles_of(supports);
  if (n > kMaxOracleParticles)
    throw CapacityError("exhaustive strategy enumeration is capped at 8 particles");
  const std::size_t dim = std::size_t{1} << n;

  // per-setting membership table and reversed-particle mask (MSB-first)
  std::vector<std::vector<char>> member(supports.size(), std::vector<char>(dim, 0));
  std::vector<std::size_t> rev_mask(supports.size(), 0);
  for (std::size_t i = 0; i < supports.size(); ++i) {
    for (const std::string& s : supports[i].support) {
      std::size_t idx = 0;
      for (char b : s) idx = (idx << 1) | static_cast<std::size_t>(b == '1');
      member[i][idx] = 1;
    }
    for (int k : supports[i].setting.reversed)
      rev_mask[i] |= std::size_t{1} << (n - k);
  }

  std::vector<LhvStrategy> out;
  for (std::size_t u = 0; u < dim; ++u) {
    for (std::size_t d = 0; d < dim; ++d) {
      bool ok = true;
      for (std::size_t i = 0; i < supports.size() && ok; ++i) {
        const std::size_t outcome = (u & ~rev_mask[i]) | (d & rev_mask[i]);
        ok = member[i][outcome] != 0;
      }
      if (ok) out.push_back({detail::index_to_bits(u, n), detail::index_to_bits(d, n)});
    }
  }
  return out;
}

/// Strings in the setting-all support that no consistent strategy can
/// produce under the all-reversed setting: observing one contradicts
/// every local-hidden-variable account of the other settings.
inline std::set<std::string> paradox_states_oracle(const EntanglerSpec& spec, double theta) {
  const std::vector<SupportSet> supports = quantum_supports(spec, theta);
  std::set<std::string> reachable;
  for (const LhvStrategy& s : enumerate_consistent_strategies(supports)) reachable.insert(s.d_bits);
  std::set<std::string> out;
  for (const std::string& s : supports.back().support) {
    if (!reachable.count(s)) out.insert(s);
  }
  return out;
}

inline CorrelationImplication correlation_implications(const EntanglerSpec& spec, double theta,
                                                       int k) {
  if (k < 1 || k > spec.n) throw std::invalid_argument("particle index out of range");
  const BasisCoeffs coeffs = uniform_coeffs(theta, spec.n);
  const std::set<std::string> support =
      amplitudes_for_setting(spec, coeffs, MeasurementSetting::single(k)).support();

  CorrelationImplication imp;
  imp.particle = k;
  for (const std::string& s : support) {
    if (s[static_cast<std::size_t>(k - 1)] == '1') imp.options.push_back(s);
  }
  for (int j = 1; j <= spec.n; ++j) {
    if (j == k) continue;
    bool always_zero = true;
    bool always_one = true;
    bool sometimes_one = false;
    for (const std::string& opt : imp.options) {
      const bool one = opt[static_cast<std::size_t>(j - 1)] == '1';
      always_zero = always_zero && !one;
      always_one = always_one && one;
      sometimes_one = sometimes_one || one;
    }
    if (!imp.options.empty()) {
      if (always_zero) imp.forced_zero.insert(j);
      if (always_one) imp.forced_one.insert(j);
      if (sometimes_one) imp.partners.insert(j);
    }
  }
  return imp;
}

namespace detail {

inline std::vector<ContradictionChain> chains_for_target(const EntanglerSpec& spec, double theta,
                                                         const std::string& target) {
  std::vector<CorrelationImplication> triggered;
  for (int k = 1; k <= spec.n; ++k) {
    if (target[static_cast<std::size_t>(k - 1)] == '1')
      triggered.push_back(correlation_implications(spec, theta, k));
  }
  // With no triggered implication, or one that can never fire, there is no
  // selection to enumerate; the contradiction is then immediate.
  if (triggered.empty()) return {};
  for (const CorrelationImplication& imp : triggered) {
    if (imp.options.empty()) return {};
  }

  std::vector<ContradictionChain> chains;
  std::vector<std::size_t> choice(triggered.size(), 0);
  while (true) {
    std::string merged(static_cast<std::size_t>(spec.n), '0');
    ContradictionChain chain;
    chain.target_state = target;
    for (std::size_t t = 0; t < triggered.size(); ++t) {
      const std::string& opt = triggered[t].options[choice[t]];
      chain.implications_used.emplace_back(triggered[t].particle, opt);
      for (int j = 1; j <= spec.n; ++j) {
        if (j != triggered[t].particle && opt[static_cast<std::size_t>(j - 1)] == '1')
          merged[static_cast<std::size_t>(j - 1)] = '1';
      }
    }
    chain.violated_vanished_state = merged;
    chains.push_back(std::move(chain));

    // advance the mixed-radix selection
    std::size_t t = 0;
    for (; t < triggered.size(); ++t) {
      if (++choice[t] < triggered[t].options.size()) break;
      choice[t] = 0;
    }
    if (t == triggered.size()) break;
  }
  return chains;
}

}  // namespace detail

/// Every selection of one support string per triggered implication, with
/// the vanished state the selection forces: the union of the selected
/// U = 1 constraints, all other particles at V.
inline std::vector<ContradictionChain> contradiction_chains(const EntanglerSpec& spec, double theta,
                                                            const std::string& target) {
  if (!paradox_states_oracle(spec, theta).count(target))
    throw std::invalid_argument("target is not a paradox state");
  return detail::chains_for_target(spec, theta, target);
}

/// Full certificate: paradox states with their total quantum probability,
/// the consistent-strategy census, and every contradiction chain.
inline ParadoxReport verify_paradox(const EntanglerSpec& spec, double theta) {
  ParadoxReport report;
  report.spec = spec;
  report.theta = theta;

  const std::vector<SupportSet> supports = quantum_supports(spec, theta);
  const std::vector<LhvStrategy> consistent = enumerate_consistent_strategies(supports);
  report.consistent_count = consistent.size();

  std::set<std::string> reachable;
  for (const LhvStrategy& s : consistent) reachable.insert(s.d_bits);
  for (const std::string& s : supports.back().support) {
    if (!reachable.count(s)) report.paradox_states.insert(s);
  }

  const AmplitudeMap all = amplitudes_for_setting(spec, uniform_coeffs(theta, spec.n),
                                                  MeasurementSetting::all(spec.n));
  for (const std::string& s : report.paradox_states) {
    const double a = all.entries.at(s);
    report.p_success += a * a;
  }
  for (const std::string& s : report.paradox_states) {
    auto chains = detail::chains_for_target(spec, theta, s);
    report.chains.insert(report.chains.end(), chains.begin(), chains.end());
  }
  return report;
}

inline nlohmann::json paradox_report_to_json(const ParadoxReport& report) {
  nlohmann::json chains = nlohmann::json::array();
  for (const ContradictionChain& c : report.chains) {
    nlohmann::json choices = nlohmann::json::array();
    for (const auto& [particle, option] : c.implications_used) {
      choices.push_back({{"particle", particle}, {"support_state", option}});
    }
    chains.push_back({{"target", c.target_state},
                      {"choices", choices},
                      {"violated", c.violated_vanished_state}});
  }
  return nlohmann::json{{"spec", spec_to_json(report.spec)},
                        {"theta", report.theta},
                        {"paradox_states", std::vector<std::string>(report.paradox_states.begin(),
                                                                    report.paradox_states.end())},
                        {"p_success", report.p_success},
                        {"consistent_count", report.consistent_count},
                        {"chains", chains}};
}

}  // namespace hardyq
