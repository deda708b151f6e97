// Acceptance suite: end-to-end checks of the engine against its frozen
// reference data and qualitative orderings, one pass/fail line each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hardyq/analytic.hpp"
#include "hardyq/entangler.hpp"
#include "hardyq/lhv.hpp"
#include "hardyq/noise.hpp"
#include "hardyq/statevector.hpp"

using namespace hardyq;

namespace {

const double kTheta = 0.423 * std::numbers::pi;
constexpr std::uint64_t kShots = 409600;
constexpr std::uint64_t kSeed = 1;

// Reference measurement frequencies (percent) at theta = 0.423pi,
// recorded at 2048*200 shots.
const std::map<std::string, double> kSet1Reference = {
    {"0000", 23.77}, {"0001", 14.65}, {"0010", 14.46}, {"0100", 14.61},
    {"0101", 8.89},  {"1000", 14.58}, {"1010", 9.04}};

const std::map<std::string, double> kSet2Reference = {
    {"0000", 38.25}, {"0001", 9.03}, {"0010", 23.65}, {"0100", 8.93},
    {"0101", 5.58},  {"1001", 5.45}, {"1100", 5.65},  {"1101", 3.46}};

const std::map<std::string, double> kSet3Reference = {
    {"0000", 61.83}, {"0001", 5.60}, {"0010", 5.51}, {"0011", 1.30},
    {"0100", 5.62},  {"0101", 3.45}, {"0110", 1.31}, {"0111", 0.80},
    {"1000", 5.58},  {"1001", 1.30}, {"1010", 3.40}, {"1011", 0.80},
    {"1100", 1.33},  {"1101", 0.81}, {"1110", 0.85}, {"1111", 0.50}};

const std::set<std::string> kRing4Vanished = {"0011", "0110", "0111", "1001", "1011",
                                              "1100", "1101", "1110", "1111"};

void require(bool condition, const std::string& message) {
  if (!condition) throw std::runtime_error(message);
}

struct SetRun {
  std::map<std::string, double> sampled;   // frequency per outcome
  std::map<std::string, double> analytic;  // probability per outcome
  Histogram hist;
  double post_selection_rate = 0.0;
};

SetRun run_set(const EntanglerSpec& spec, const MeasurementSetting& setting) {
  const Circuit circuit = build_circuit(spec, kTheta, setting);
  std::set<int> ancillas;
  for (int a = circuit.num_data; a < circuit.num_qubits(); ++a) ancillas.insert(a);
  const auto [data, weight] = postselect_ancillas(run_circuit(circuit), ancillas, 0);

  SetRun r;
  r.post_selection_rate = weight;
  r.hist = sample_histogram(probabilities(data), kShots, kSeed);
  for (const auto& [state, count] : r.hist.counts)
    r.sampled[state] = static_cast<double>(count) / static_cast<double>(kShots);
  for (const auto& [state, amp] :
       amplitudes_for_setting(spec, uniform_coeffs(kTheta, spec.n), setting).entries)
    r.analytic[state] = amp * amp;
  return r;
}

void check_against_reference(const SetRun& run, const std::map<std::string, double>& reference,
                             double tolerance_percent, const char* label) {
  for (const auto& [state, ref_percent] : reference) {
    const double sampled_percent = 100.0 * run.sampled.at(state);
    require(std::abs(sampled_percent - ref_percent) < tolerance_percent,
            std::string(label) + " outcome " + state + " off reference: " +
                std::to_string(sampled_percent) + " vs " + std::to_string(ref_percent));
  }
}

double truncate_two_significant(double x) {
  const double mag = std::pow(10.0, std::floor(std::log10(x)) - 1.0);
  return std::floor(x / mag) * mag;
}

// criterion 1: plain setting — exact zeros and reference agreement (1.0% abs)
std::string criterion1() {
  const EntanglerSpec spec = cycle_spec(4);
  const SetRun run = run_set(spec, MeasurementSetting::none());
  for (const std::string& v : kRing4Vanished) {
    require(run.analytic.at(v) < 1e-12, "vanished state " + v + " has nonzero analytic weight");
    require(run.hist.counts.at(v) == 0, "vanished state " + v + " was sampled");
  }
  check_against_reference(run, kSet1Reference, 1.0, "set1");
  return "9 vanished states exactly zero; 7 survivors within 1.0% of reference";
}

// criterion 2: single reversed particle — reference agreement and live interest states
std::string criterion2() {
  const EntanglerSpec spec = cycle_spec(4);
  const SetRun run = run_set(spec, MeasurementSetting::single(1));
  check_against_reference(run, kSet2Reference, 1.0, "set2");
  for (const char* s : {"1001", "1100", "1101"}) {
    require(run.hist.counts.at(s) > 0, std::string("interest state ") + s + " never sampled");
  }
  return "8 outcomes within 1.0% of reference; interest states 1001/1100/1101 all nonzero";
}

// criterion 3: all reversed — reference agreement (0.6%), p_success windows,
// and the documented low-precision discrepancy
std::string criterion3() {
  const EntanglerSpec spec = cycle_spec(4);
  const SetRun run = run_set(spec, MeasurementSetting::all(4));
  check_against_reference(run, kSet3Reference, 0.6, "set3");

  const std::set<std::string> interest = interest_states_rule(spec);
  double sampled = 0.0;
  double via_statevector = 0.0;
  for (const std::string& s : interest) {
    sampled += run.sampled.at(s);
    via_statevector += run.analytic.at(s);
  }
  // run.analytic carries the closed form; recompute the statevector route
  const Circuit circuit = build_circuit(spec, kTheta, MeasurementSetting::all(4));
  const auto probs = probabilities(
      postselect_ancillas(run_circuit(circuit), std::set<int>{4, 5, 6, 7}, 0).first);
  via_statevector = 0.0;
  for (const std::string& s : interest) via_statevector += probs.at(s);

  const double analytic = p_success_analytic(spec, uniform_coeffs(kTheta, 4), interest);
  require(std::abs(sampled - 0.090) <= 0.003,
          "sampled p_success " + std::to_string(sampled) + " outside 9.0% +/- 0.3%");
  require(std::abs(analytic - via_statevector) < 1e-9,
          "closed form and statevector p_success disagree");
  require(analytic >= 0.089 && analytic <= 0.091, "analytic p_success outside [8.9%, 9.1%]");

  // the historical low-precision evaluation (A=0.617, B=0.786, N=1.26 with
  // per-term truncation) is documented, not targeted
  const double A = 0.617, B = 0.786;
  const double t2 = truncate_two_significant(std::pow(A * A * std::pow(B, 6.0), 2.0));
  const double t3 = truncate_two_significant(std::pow(A * A * A * std::pow(B, 5.0), 2.0));
  const double t4 = truncate_two_significant(std::pow(A * A * A * A * B * B * B * B, 2.0));
  const double low_precision = 1.26 * 1.26 * (4.0 * t2 + 4.0 * t3 + t4);
  require(low_precision > 0.085 && low_precision < 0.089,
          "low-precision reproduction moved: " + std::to_string(low_precision));
  std::ostringstream os;
  os << "16 outcomes within 0.6%; sampled p_success " << sampled << "; closed form " << analytic
     << " (documented low-precision value " << low_precision << ", not a target)";
  return os.str();
}

// criterion 4: normalization constant and post-selection rate
std::string criterion4() {
  const EntanglerSpec spec = cycle_spec(4);
  const NormalizationResult norm = normalization_constant(spec, uniform_coeffs(kTheta, 4));
  require(std::abs(norm.N - 1.0 / std::sqrt(1.0 + norm.C)) < 1e-12, "N != 1/sqrt(1+C)");
  require(norm.N >= 1.26 && norm.N <= 1.275, "N outside [1.26, 1.275]");

  const Circuit circuit = build_circuit(spec, kTheta, MeasurementSetting::none());
  const double rate =
      postselect_ancillas(run_circuit(circuit), std::set<int>{4, 5, 6, 7}, 0).second;
  require(std::abs(rate - (1.0 + norm.C)) < 1e-9, "1+C differs from the measured rate");
  std::ostringstream os;
  os << "N = " << norm.N << ", 1+C = " << 1.0 + norm.C << " equals the measured rate";
  return os.str();
}

// criterion 5: fine-grid sweep maximum
std::string criterion5() {
  const EntanglerSpec spec = cycle_spec(4);
  const auto [theta_star, p_star] = max_p_success(spec, interest_states_rule(spec));
  require(theta_star >= 0.41 * std::numbers::pi && theta_star <= 0.44 * std::numbers::pi,
          "argmax theta " + std::to_string(theta_star / std::numbers::pi) + " pi outside window");
  require(p_star >= 0.090 && p_star <= 0.091,
          "max p_success " + std::to_string(p_star) + " outside [9.0%, 9.1%]");
  std::ostringstream os;
  os << "argmax theta = " << theta_star / std::numbers::pi << " pi, max p_success = " << p_star;
  return os.str();
}

// criterion 6: exhaustive local-hidden-variable certificate
std::string criterion6() {
  const EntanglerSpec spec = cycle_spec(4);
  const auto supports = quantum_supports(spec, kTheta);

  std::size_t scanned = 0;
  std::size_t consistent = 0;
  const auto paradox = paradox_states_oracle(spec, kTheta);
  for (std::size_t u = 0; u < 16; ++u) {
    for (std::size_t d = 0; d < 16; ++d) {
      ++scanned;
      const LhvStrategy s{detail::index_to_bits(u, 4), detail::index_to_bits(d, 4)};
      if (!check_strategy(s, supports).consistent) continue;
      ++consistent;
      require(!paradox.count(s.d_bits),
              "consistent strategy reaches paradox state " + s.d_bits);
    }
  }
  require(scanned == 256, "expected 256 strategies");
  require(consistent == enumerate_consistent_strategies(supports).size(),
          "enumeration disagrees with the direct scan");
  require(paradox == kRing4Vanished, "oracle paradox set differs from the rule set");

  const auto chains = contradiction_chains(spec, kTheta, "1100");
  require(chains.size() == 9, "expected exactly 9 chains for 1100, got " +
                                  std::to_string(chains.size()));
  for (const ContradictionChain& chain : chains) {
    require(kRing4Vanished.count(chain.violated_vanished_state) == 1,
            "chain ends in non-vanished state " + chain.violated_vanished_state);
  }
  std::ostringstream os;
  os << "256 strategies, " << consistent
     << " consistent, none reaching the 9 paradox states; 9 chains for 1100, all vanished";
  return os.str();
}

// criterion 7: configuration comparison
std::string criterion7() {
  const EntanglerSpec ring = cycle_spec(4);
  const EntanglerSpec complete = complete_spec(4);
  const auto [theta_ring, p_ring] = max_p_success(ring, interest_states_rule(ring));
  const auto [theta_comp, p_comp] = max_p_success(complete, interest_states_rule(complete));

  const ParadoxReport report = verify_paradox(complete, theta_comp);
  require(report.paradox_states.size() == 11, "complete graph paradox set is not 11 states");
  require(std::abs(p_comp - 0.125) <= 0.005,
          "complete graph max p_success " + std::to_string(p_comp) + " outside 12.5% +/- 0.5%");
  require(p_ring < p_comp, "ring maximum is not strictly smaller");
  std::ostringstream os;
  os << "complete(4): 11 paradox states, max " << p_comp << "; ring max " << p_ring
     << " strictly smaller";
  return os.str();
}

// criterion 8: property suites (equivalence, symmetry, determinism, noise orderings)
std::string criterion8() {
  const EntanglerSpec spec = cycle_spec(4);
  std::mt19937_64 rng(2027);

  std::vector<MeasurementSetting> settings{MeasurementSetting::none(), MeasurementSetting::all(4)};
  for (int k = 1; k <= 4; ++k) settings.push_back(MeasurementSetting::single(k));

  for (int trial = 0; trial < 20; ++trial) {
    const double theta = (0.02 + 0.96 * detail::canonical_uniform(rng)) * std::numbers::pi;
    const BasisCoeffs coeffs = uniform_coeffs(theta, 4);
    for (const MeasurementSetting& setting : settings) {
      const Circuit circuit = build_circuit(spec, theta, setting);
      const auto probs = probabilities(
          postselect_ancillas(run_circuit(circuit), std::set<int>{4, 5, 6, 7}, 0).first);
      for (const auto& [state, amp] : amplitudes_for_setting(spec, coeffs, setting).entries) {
        require(std::abs(amp * amp - probs.at(state)) < 1e-9,
                "circuit/closed-form mismatch at state " + state);
      }
    }
  }

  // cyclic relabeling symmetry
  for (int trial = 0; trial < 3; ++trial) {
    const double theta = (0.1 + 0.8 * detail::canonical_uniform(rng)) * std::numbers::pi;
    const AmplitudeMap all =
        amplitudes_for_setting(spec, uniform_coeffs(theta, 4), MeasurementSetting::all(4));
    for (const auto& [state, amp] : all.entries) {
      std::string rotated(4, '0');
      for (int i = 0; i < 4; ++i) rotated[(i + 1) % 4] = state[i];
      require(std::abs(amp * amp - std::pow(all.entries.at(rotated), 2.0)) < 1e-12,
              "cyclic relabeling changed a probability");
    }
  }

  // determinism under fixed seeds
  const auto probs = probabilities(
      postselect_ancillas(run_circuit(build_circuit(spec, kTheta, MeasurementSetting::all(4))),
                          std::set<int>{4, 5, 6, 7}, 0)
          .first);
  require(sample_histogram(probs, 100000, 5).counts == sample_histogram(probs, 100000, 5).counts,
          "sampling is not deterministic");
  const Circuit noisy_circuit = build_circuit(spec, kTheta, MeasurementSetting::none());
  const NoiseModel noise{0.01, 0.02, 0.01};
  require(run_noisy(noisy_circuit, noise, 20000, 9).counts ==
              run_noisy(noisy_circuit, noise, 20000, 9).counts,
          "noisy trajectories are not deterministic");

  // qualitative noise orderings
  const DiagnosticReport report = diagnostic_suite(noise, 400000, 5);
  std::map<std::string, double> tvds;
  for (const DiagnosticFamily& f : report.families) tvds[f.name] = f.ideal_vs_noisy_tvd;
  require(tvds.at("multi_control_3q") > tvds.at("single_control_3q"),
          "multi-control TVD does not exceed single-control TVD");
  require(tvds.at("overlapping_controls_3q") > tvds.at("single_control_3q"),
          "overlapping-control TVD does not exceed single-control TVD");
  require(tvds.at("rotation_0.45pi") >= tvds.at("rotation_0.20pi"),
          "TVD at 0.45pi fell below TVD at 0.20pi");
  std::ostringstream os;
  os << "equivalence at 20 angles; symmetry; determinism; orderings (multi "
     << tvds.at("multi_control_3q") << " / overlap " << tvds.at("overlapping_controls_3q")
     << " > single " << tvds.at("single_control_3q") << "; 0.45pi " << tvds.at("rotation_0.45pi")
     << " >= 0.20pi " << tvds.at("rotation_0.20pi") << ")";
  return os.str();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"plain-setting exactness and reference agreement", criterion1},
      {"single-reversal reference agreement and interest states", criterion2},
      {"all-reversal reference agreement and p_success windows", criterion3},
      {"normalization constant and post-selection rate", criterion4},
      {"fine-grid sweep maximum", criterion5},
      {"exhaustive local-hidden-variable certificate", criterion6},
      {"ring versus complete-graph comparison", criterion7},
      {"property suites: equivalence, symmetry, determinism, noise orderings", criterion8},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool passed = true;
    try {
      detail = criteria[i].second();
    } catch (const std::exception& e) {
      passed = false;
      detail = e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %zu: %s — %s (%.2fs)\n", passed ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), detail.c_str(), seconds);
    if (!passed) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
