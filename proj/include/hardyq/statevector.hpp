#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hardyq {

using Complex = std::complex<double>;

/// Branch weight below which post-selection is treated as impossible
/// rather than round-off.
inline constexpr double kBranchEps = 1e-12;

/// Probability threshold separating true zeros from numerical residue.
inline constexpr double kSupportEps = 1e-9;

/// Dense statevectors are capped at 24 qubits (12 data + 12 ancilla).
inline constexpr int kMaxQubits = 24;

/// Post-selection onto a branch carrying (numerically) zero weight.
class PostselectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Request beyond a hard capability cap (qubit count, enumeration size).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense complex amplitude vector over 2^num_qubits basis states.
///
/// Qubit 0 occupies the most significant index bit, so the bitstring of an
/// index, read left to right, lists qubit 0, 1, ... — particle 1 comes
/// first in every externally visible string.
struct Statevector {
  int num_qubits = 0;
  std::vector<Complex> amplitudes;

  static Statevector zero_state(int num_qubits) {
    if (num_qubits < 1) throw std::invalid_argument("statevector needs at least one qubit");
    if (num_qubits > kMaxQubits) throw CapacityError("statevector capped at 24 qubits");
    Statevector sv;
    sv.num_qubits = num_qubits;
    sv.amplitudes.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
    sv.amplitudes[0] = Complex{1.0, 0.0};
    return sv;
  }

  std::size_t dim() const { return amplitudes.size(); }

  double norm_squared() const {
    double s = 0.0;
    for (const Complex& a : amplitudes) s += std::norm(a);
    return s;
  }

  /// Value of qubit q in basis index idx.
  int bit(std::size_t idx, int q) const {
    return static_cast<int>((idx >> (num_qubits - 1 - q)) & std::size_t{1});
  }
};

/// One circuit element. Ry uses the rotation matrix
/// [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]]; Mcx flips the target
/// iff every control reads 1.
struct Gate {
  enum class Kind { Ry, X, H, Mcx };

  Kind kind = Kind::X;
  double angle = 0.0;         // Ry only
  std::vector<int> controls;  // Mcx only
  int target = 0;

  static Gate ry(double angle, int target) {
    Gate g;
    g.kind = Kind::Ry;
    g.angle = angle;
    g.target = target;
    return g;
  }

  static Gate x(int target) {
    Gate g;
    g.kind = Kind::X;
    g.target = target;
    return g;
  }

  static Gate h(int target) {
    Gate g;
    g.kind = Kind::H;
    g.target = target;
    return g;
  }

  static Gate mcx(std::vector<int> controls, int target) {
    if (controls.empty()) throw std::invalid_argument("mcx needs at least one control");
    std::set<int> uniq(controls.begin(), controls.end());
    if (uniq.size() != controls.size()) throw std::invalid_argument("mcx controls must be distinct");
    if (uniq.count(target)) throw std::invalid_argument("mcx target must not be a control");
    Gate g;
    g.kind = Kind::Mcx;
    g.controls = std::move(controls);
    g.target = target;
    return g;
  }

  /// Every qubit the gate touches (controls then target).
  std::vector<int> qubits() const {
    std::vector<int> qs = controls;
    qs.push_back(target);
    return qs;
  }
};

struct Circuit {
  int num_data = 0;
  int num_ancilla = 0;
  std::vector<Gate> gates;

  int num_qubits() const { return num_data + num_ancilla; }
};

/// Shot counts over data bitstrings. Keys use the external convention:
/// leftmost char is particle 1, '1' means the u/d outcome, '0' means v/c.
/// `shots` is the number of retained (post-selected) shots, so counts
/// always sum to it; post_selection_rate records the retained fraction.
struct Histogram {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t shots = 0;
  double post_selection_rate = 1.0;
};

namespace detail {

inline std::size_t qubit_mask(int num_qubits, int qubit) {
  return std::size_t{1} << (num_qubits - 1 - qubit);
}

inline void check_qubit(int q, int num_qubits) {
  if (q < 0 || q >= num_qubits) throw std::out_of_range("qubit index out of range");
}

/// In-place single-qubit update |t=0>,|t=1> -> m * (a0, a1).
inline void apply_single(std::vector<Complex>& amps, int num_qubits, int target, Complex m00,
                         Complex m01, Complex m10, Complex m11) {
  const std::size_t mask = qubit_mask(num_qubits, target);
  const std::size_t dim = amps.size();
  for (std::size_t i = 0; i < dim; ++i) {
    if (i & mask) continue;
    const std::size_t j = i | mask;
    const Complex a0 = amps[i];
    const Complex a1 = amps[j];
    amps[i] = m00 * a0 + m01 * a1;
    amps[j] = m10 * a0 + m11 * a1;
  }
}

inline void apply_mcx(std::vector<Complex>& amps, int num_qubits, const std::vector<int>& controls,
                      int target) {
  std::size_t cmask = 0;
  for (int c : controls) cmask |= qubit_mask(num_qubits, c);
  const std::size_t tmask = qubit_mask(num_qubits, target);
  const std::size_t dim = amps.size();
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & cmask) == cmask && !(i & tmask)) std::swap(amps[i], amps[i | tmask]);
  }
}

inline void apply_gate_in_place(std::vector<Complex>& amps, int num_qubits, const Gate& gate) {
  check_qubit(gate.target, num_qubits);
  switch (gate.kind) {
    case Gate::Kind::Ry: {
      const double c = std::cos(gate.angle / 2.0);
      const double s = std::sin(gate.angle / 2.0);
      apply_single(amps, num_qubits, gate.target, c, -s, s, c);
      break;
    }
    case Gate::Kind::X:
      apply_single(amps, num_qubits, gate.target, 0.0, 1.0, 1.0, 0.0);
      break;
    case Gate::Kind::H: {
      const double r = 1.0 / std::sqrt(2.0);
      apply_single(amps, num_qubits, gate.target, r, r, r, -r);
      break;
    }
    case Gate::Kind::Mcx:
      for (int c : gate.controls) check_qubit(c, num_qubits);
      apply_mcx(amps, num_qubits, gate.controls, gate.target);
      break;
  }
}

inline std::string index_to_bits(std::size_t idx, int num_bits) {
  std::string s(static_cast<std::size_t>(num_bits), '0');
  for (int q = 0; q < num_bits; ++q) {
    if (idx & (std::size_t{1} << (num_bits - 1 - q))) s[static_cast<std::size_t>(q)] = '1';
  }
  return s;
}

/// Uniform double in [0,1) from the top 53 bits of the generator output;
/// fully determined by the engine state, independent of the platform's
/// distribution implementations.
inline double canonical_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Unitary action of one gate; the input is left untouched.
inline Statevector apply_gate(const Statevector& state, const Gate& gate) {
  Statevector out = state;
  detail::apply_gate_in_place(out.amplitudes, out.num_qubits, gate);
  return out;
}

/// Applies all gates in order to |0...0>.
inline Statevector run_circuit(const Circuit& circuit) {
  Statevector sv = Statevector::zero_state(circuit.num_qubits());
  for (const Gate& g : circuit.gates) {
    detail::apply_gate_in_place(sv.amplitudes, sv.num_qubits, g);
  }
  return sv;
}

/// Projects onto the branch where every listed ancilla equals
/// required_value, drops the ancillas and renormalizes. Returns the
/// reduced state together with the pre-projection branch weight.
/// Throws PostselectionError when the branch weight is below 1e-12.
inline std::pair<Statevector, double> postselect_ancillas(const Statevector& state,
                                                          const std::set<int>& ancillas,
                                                          int required_value) {
  if (ancillas.empty()) throw std::invalid_argument("ancilla set must not be empty");
  if (required_value != 0 && required_value != 1)
    throw std::invalid_argument("required ancilla value must be 0 or 1");
  for (int a : ancillas) detail::check_qubit(a, state.num_qubits);
  const int num_kept = state.num_qubits - static_cast<int>(ancillas.size());
  if (num_kept < 1) throw std::invalid_argument("post-selection must keep at least one qubit");

  std::size_t anc_mask = 0;
  for (int a : ancillas) anc_mask |= detail::qubit_mask(state.num_qubits, a);
  const std::size_t want = required_value ? anc_mask : 0;

  std::vector<int> kept;
  for (int q = 0; q < state.num_qubits; ++q) {
    if (!ancillas.count(q)) kept.push_back(q);
  }

  Statevector out;
  out.num_qubits = num_kept;
  out.amplitudes.assign(std::size_t{1} << num_kept, Complex{0.0, 0.0});

  double weight = 0.0;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if ((i & anc_mask) != want) continue;
    weight += std::norm(state.amplitudes[i]);
    std::size_t j = 0;
    for (int q : kept) j = (j << 1) | static_cast<std::size_t>(state.bit(i, q));
    out.amplitudes[j] = state.amplitudes[i];
  }
  if (weight < kBranchEps) throw PostselectionError("post-selection impossible: branch weight below 1e-12");

  const double scale = 1.0 / std::sqrt(weight);
  for (Complex& a : out.amplitudes) a *= scale;
  return {std::move(out), weight};
}

/// |amplitude|^2 for every basis string, zeros included.
inline std::map<std::string, double> probabilities(const Statevector& state) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    out[detail::index_to_bits(i, state.num_qubits)] = std::norm(state.amplitudes[i]);
  }
  return out;
}

/// Multinomial draw of `shots` outcomes. Deterministic: identical
/// (probabilities, shots, seed) triples give bit-identical histograms.
/// Every input key appears in the result, drawn or not.
inline Histogram sample_histogram(const std::map<std::string, double>& probs, std::uint64_t shots,
                                  std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be at least 1");
  if (probs.empty()) throw std::invalid_argument("empty probability map");

  std::vector<const std::string*> keys;
  std::vector<double> cumulative;
  keys.reserve(probs.size());
  cumulative.reserve(probs.size());
  double total = 0.0;
  for (const auto& [key, p] : probs) {
    if (p < 0.0) throw std::invalid_argument("negative probability");
    total += p;
    keys.push_back(&key);
    cumulative.push_back(total);
  }
  if (total <= 0.0) throw std::invalid_argument("probabilities sum to zero");

  Histogram hist;
  hist.shots = shots;
  for (const auto& [key, p] : probs) hist.counts[key] = 0;

  std::mt19937_64 rng(seed);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = detail::canonical_uniform(rng) * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t idx =
        it == cumulative.end() ? cumulative.size() - 1
                               : static_cast<std::size_t>(it - cumulative.begin());
    ++hist.counts[*keys[idx]];
  }
  return hist;
}

}  // namespace hardyq
