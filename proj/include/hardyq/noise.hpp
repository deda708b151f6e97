#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hardyq/statevector.hpp"
#include "json.hpp"

namespace hardyq {

/// Monte-Carlo trajectory noise: depolarizing after gates plus an
/// independent readout flip per measured qubit.
struct NoiseModel {
  double p1 = 0.0;    // after each 1-qubit gate
  double p_mc = 0.0;  // per participating qubit, after each multi-controlled gate
  double p_ro = 0.0;  // readout bit-flip per measured qubit

  bool is_zero() const { return p1 == 0.0 && p_mc == 0.0 && p_ro == 0.0; }
};

namespace detail {

inline void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

inline void apply_pauli(std::vector<Complex>& amps, int num_qubits, int qubit, int pauli) {
  switch (pauli) {
    case 0:  // X
      apply_single(amps, num_qubits, qubit, 0.0, 1.0, 1.0, 0.0);
      break;
    case 1:  // Y
      apply_single(amps, num_qubits, qubit, 0.0, Complex{0.0, -1.0}, Complex{0.0, 1.0}, 0.0);
      break;
    default:  // Z
      apply_single(amps, num_qubits, qubit, 1.0, 0.0, 0.0, -1.0);
      break;
  }
}

}  // namespace detail

/// Per shot: evolve |0...0> through the circuit, after each gate hitting
/// every affected qubit with an independent depolarizing draw (uniform
/// X/Y/Z on trigger), measure all qubits, flip each read bit with p_ro,
/// then keep the shot only if every ancilla reads 0. Counts are over the
/// data substring of retained shots; deterministic under a fixed seed.
inline Histogram run_noisy(const Circuit& circuit, const NoiseModel& noise, std::uint64_t shots,
                           std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be at least 1");
  detail::check_probability(noise.p1, "p1");
  detail::check_probability(noise.p_mc, "p_mc");
  detail::check_probability(noise.p_ro, "p_ro");

  const int n = circuit.num_qubits();
  std::mt19937_64 rng(seed);

  // Noise-free trajectories share one cached evolution.
  const Statevector ideal = run_circuit(circuit);
  std::vector<Complex> work;

  Histogram hist;
  std::uint64_t kept = 0;

  for (std::uint64_t shot = 0; shot < shots; ++shot) {
    // Draw the full noise pattern first; the RNG stream is identical
    // whether or not the cached evolution can be reused.
    std::vector<std::pair<std::size_t, std::pair<int, int>>> events;  // (gate, (qubit, pauli))
    for (std::size_t g = 0; g < circuit.gates.size(); ++g) {
      const Gate& gate = circuit.gates[g];
      const double p = gate.kind == Gate::Kind::Mcx ? noise.p_mc : noise.p1;
      for (int q : gate.qubits()) {
        if (detail::canonical_uniform(rng) < p) {
          const int pauli = std::min(2, static_cast<int>(detail::canonical_uniform(rng) * 3.0));
          events.push_back({g, {q, pauli}});
        }
      }
    }

    const std::vector<Complex>* amps = &ideal.amplitudes;
    if (!events.empty()) {
      work.assign(ideal.dim(), Complex{0.0, 0.0});
      work[0] = Complex{1.0, 0.0};
      std::size_t next_event = 0;
      for (std::size_t g = 0; g < circuit.gates.size(); ++g) {
        detail::apply_gate_in_place(work, n, circuit.gates[g]);
        while (next_event < events.size() && events[next_event].first == g) {
          detail::apply_pauli(work, n, events[next_event].second.first,
                              events[next_event].second.second);
          ++next_event;
        }
      }
      amps = &work;
    }

    // projective measurement of all qubits
    double u = detail::canonical_uniform(rng);
    std::size_t outcome = amps->size() - 1;
    double cum = 0.0;
    for (std::size_t i = 0; i < amps->size(); ++i) {
      cum += std::norm((*amps)[i]);
      if (u < cum) {
        outcome = i;
        break;
      }
    }

    // readout channel
    for (int q = 0; q < n; ++q) {
      if (detail::canonical_uniform(rng) < noise.p_ro)
        outcome ^= detail::qubit_mask(n, q);
    }

    if (circuit.num_ancilla > 0) {
      std::size_t anc_mask = 0;
      for (int a = circuit.num_data; a < n; ++a) anc_mask |= detail::qubit_mask(n, a);
      if (outcome & anc_mask) continue;  // post-selection failed
    }
    ++kept;
    std::size_t data_idx = outcome >> (n - circuit.num_data);
    ++hist.counts[detail::index_to_bits(data_idx, circuit.num_data)];
  }

  hist.shots = kept;
  hist.post_selection_rate = static_cast<double>(kept) / static_cast<double>(shots);
  return hist;
}

/// Total variation distance between two normalized distributions over the
/// same outcome space.
inline double tvd(const std::map<std::string, double>& p, const std::map<std::string, double>& q) {
  double ptot = 0.0, qtot = 0.0;
  std::size_t key_len = 0;
  for (const auto& [k, v] : p) {
    key_len = k.size();
    ptot += v;
  }
  for (const auto& [k, v] : q) {
    if (key_len != 0 && k.size() != key_len) throw std::invalid_argument("mismatched key lengths");
    qtot += v;
  }
  if (ptot <= 0.0 || qtot <= 0.0) throw std::invalid_argument("empty distribution");

  double dist = 0.0;
  auto it_p = p.begin();
  auto it_q = q.begin();
  while (it_p != p.end() || it_q != q.end()) {
    if (it_q == q.end() || (it_p != p.end() && it_p->first < it_q->first)) {
      dist += std::abs(it_p->second / ptot);
      ++it_p;
    } else if (it_p == p.end() || it_q->first < it_p->first) {
      dist += std::abs(it_q->second / qtot);
      ++it_q;
    } else {
      dist += std::abs(it_p->second / ptot - it_q->second / qtot);
      ++it_p;
      ++it_q;
    }
  }
  return 0.5 * dist;
}

inline std::map<std::string, double> frequencies(const Histogram& hist) {
  std::map<std::string, double> out;
  for (const auto& [k, c] : hist.counts) out[k] = static_cast<double>(c);
  return out;
}

inline double tvd(const Histogram& h1, const Histogram& h2) {
  return tvd(frequencies(h1), frequencies(h2));
}

/// Diagnostic circuit families probing which circuit features amplify
/// error: independent single-control gates behind an H sandwich, the
/// rotation-angle dependence of the post-selected protocol, and the
/// control-count / control-overlap dependence of the entangler.
namespace diagnostics {

/// Per qubit: H, a single-control X onto a dedicated ancilla, H again.
inline Circuit single_control_family(int num_data) {
  Circuit c;
  c.num_data = num_data;
  c.num_ancilla = num_data;
  for (int q = 0; q < num_data; ++q) c.gates.push_back(Gate::h(q));
  for (int q = 0; q < num_data; ++q) c.gates.push_back(Gate::mcx({q}, num_data + q));
  for (int q = 0; q < num_data; ++q) c.gates.push_back(Gate::h(q));
  return c;
}

/// Ry(theta) layer, then one single-control X per qubit onto its own
/// ancilla; read out post-selected, as in the main protocol.
inline Circuit rotation_family(int num_data, double theta) {
  Circuit c;
  c.num_data = num_data;
  c.num_ancilla = num_data;
  for (int q = 0; q < num_data; ++q) c.gates.push_back(Gate::ry(theta, q));
  for (int q = 0; q < num_data; ++q) c.gates.push_back(Gate::mcx({q}, num_data + q));
  return c;
}

/// Ry(theta) layer, then one gate controlled by every data qubit.
inline Circuit multi_control_family(int num_data, double theta) {
  Circuit c;
  c.num_data = num_data;
  c.num_ancilla = 1;
  std::vector<int> controls;
  for (int q = 0; q < num_data; ++q) {
    c.gates.push_back(Gate::ry(theta, q));
    controls.push_back(q);
  }
  c.gates.push_back(Gate::mcx(controls, num_data));
  return c;
}

/// Ry(theta) layer, then two-control gates over every qubit pair, each
/// onto a dedicated ancilla; every qubit controls more than one gate.
inline Circuit overlapping_control_family(int num_data, double theta) {
  Circuit c;
  c.num_data = num_data;
  for (int q = 0; q < num_data; ++q) c.gates.push_back(Gate::ry(theta, q));
  int anc = num_data;
  for (int i = 0; i < num_data; ++i) {
    for (int j = i + 1; j < num_data; ++j) {
      c.gates.push_back(Gate::mcx({i, j}, anc++));
      ++c.num_ancilla;
    }
  }
  return c;
}

}  // namespace diagnostics

struct DiagnosticFamily {
  std::string name;
  double ideal_vs_noisy_tvd = 0.0;
  std::map<std::string, double> params;
};

struct DiagnosticReport {
  std::vector<DiagnosticFamily> families;
};

namespace detail {

inline std::map<std::string, double> ideal_postselected(const Circuit& circuit) {
  Statevector sv = run_circuit(circuit);
  if (circuit.num_ancilla > 0) {
    std::set<int> anc;
    for (int a = circuit.num_data; a < circuit.num_qubits(); ++a) anc.insert(a);
    sv = postselect_ancillas(sv, anc, 0).first;
  }
  return probabilities(sv);
}

}  // namespace detail

/// Runs every diagnostic family ideal and noisy and reports the total
/// variation distance per family.
inline DiagnosticReport diagnostic_suite(const NoiseModel& noise, std::uint64_t shots = 100000,
                                       std::uint64_t seed = 1) {
  struct Entry {
    std::string name;
    Circuit circuit;
    double theta;
  };
  const double t20 = 0.20 * std::numbers::pi;
  const double t45 = 0.45 * std::numbers::pi;
  const std::vector<Entry> entries = {
      {"single_control_2q", diagnostics::single_control_family(2), 0.0},
      {"single_control_3q", diagnostics::single_control_family(3), 0.0},
      {"rotation_0.20pi", diagnostics::rotation_family(3, t20), t20},
      {"rotation_0.45pi", diagnostics::rotation_family(3, t45), t45},
      {"multi_control_3q", diagnostics::multi_control_family(3, t45), t45},
      {"overlapping_controls_3q", diagnostics::overlapping_control_family(3, t45), t45},
  };

  DiagnosticReport report;
  std::uint64_t family_seed = seed;
  for (const Entry& e : entries) {
    const Histogram noisy = run_noisy(e.circuit, noise, shots, family_seed++);
    DiagnosticFamily fam;
    fam.name = e.name;
    fam.ideal_vs_noisy_tvd = tvd(detail::ideal_postselected(e.circuit), frequencies(noisy));
    fam.params = {{"p1", noise.p1},
                  {"p_mc", noise.p_mc},
                  {"p_ro", noise.p_ro},
                  {"theta", e.theta},
                  {"shots", static_cast<double>(shots)},
                  {"kept_shots", static_cast<double>(noisy.shots)}};
    report.families.push_back(std::move(fam));
  }
  return report;
}

inline nlohmann::json diagnostic_report_to_json(const DiagnosticReport& report) {
  nlohmann::json families = nlohmann::json::array();
  for (const DiagnosticFamily& f : report.families) {
    families.push_back(
        {{"name", f.name}, {"ideal_vs_noisy_tvd", f.ideal_vs_noisy_tvd}, {"params", f.params}});
  }
  return nlohmann::json{{"families", families}};
}

}  // namespace hardyq
