#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hardyq/entangler.hpp"
#include "hardyq/statevector.hpp"

namespace hardyq {

/// Per-particle basis-change coefficients A_k = sin(theta_k/2),
/// B_k = cos(theta_k/2); the {u,v} and {c,d} bases overlap through them.
struct BasisCoeffs {
  std::vector<double> A;
  std::vector<double> B;

  int n() const { return static_cast<int>(A.size()); }
};

inline BasisCoeffs coeffs_from_theta(const std::vector<double>& thetas) {
  BasisCoeffs c;
  for (double t : thetas) {
    if (!(t >= 0.0 && t <= std::numbers::pi + 1e-12))
      throw std::invalid_argument("theta must lie in [0, pi]");
    c.A.push_back(std::sin(t / 2.0));
    c.B.push_back(std::cos(t / 2.0));
  }
  return c;
}

inline BasisCoeffs uniform_coeffs(double theta, int n) {
  return coeffs_from_theta(std::vector<double>(static_cast<std::size_t>(n), theta));
}

/// C = -sum over vanished states of prod_k (A_k^2 if bit k set, else
/// B_k^2); N = 1/sqrt(1+C). 1+C is also the post-selection success weight.
struct NormalizationResult {
  double C = 0.0;
  double N = 1.0;
};

namespace detail {

inline double vanished_coefficient(const std::string& bits, const BasisCoeffs& coeffs) {
  double w = 1.0;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    w *= bits[k] == '1' ? coeffs.A[k] : coeffs.B[k];
  }
  return w;
}

inline void check_coeffs(const EntanglerSpec& spec, const BasisCoeffs& coeffs) {
  if (coeffs.n() != spec.n) throw std::invalid_argument("coefficient count must match particle count");
}

}  // namespace detail

inline NormalizationResult normalization_constant(const EntanglerSpec& spec,
                                                  const BasisCoeffs& coeffs) {
  detail::check_coeffs(spec, coeffs);
  double C = 0.0;
  for (const std::string& s : vanished_states(spec)) {
    const double w = detail::vanished_coefficient(s, coeffs);
    C -= w * w;
  }
  if (1.0 + C <= kBranchEps) throw PostselectionError("degenerate post-selection: 1+C vanishes");
  return {C, 1.0 / std::sqrt(1.0 + C)};
}

/// Real amplitude of every outcome string under one measurement setting.
/// Reversed particles are read in {c,d}, the rest in {u,v}; '1' means u/d.
struct AmplitudeMap {
  MeasurementSetting setting;
  std::map<std::string, double> entries;

  /// Outcomes whose probability exceeds eps.
  std::set<std::string> support(double eps = kSupportEps) const {
    std::set<std::string> out;
    for (const auto& [bits, amp] : entries) {
      if (amp * amp > eps) out.insert(bits);
    }
    return out;
  }
};

/// Builds the post-selected state as the product state minus the vanished
/// terms, re-expressed in the setting's bases. Basis overlaps per particle:
/// out of the reversed set <u|c>=A, <v|c>=B; inside it <c|u>=A, <d|u>=-B,
/// <c|v>=B, <d|v>=A.
inline AmplitudeMap amplitudes_for_setting(const EntanglerSpec& spec, const BasisCoeffs& coeffs,
                                           const MeasurementSetting& setting) {
  detail::check_coeffs(spec, coeffs);
  const NormalizationResult norm = normalization_constant(spec, coeffs);

  const std::set<std::string> vanished_set = vanished_states(spec);
  const std::vector<std::string> vanished(vanished_set.begin(), vanished_set.end());
  std::vector<double> vcoeff;
  vcoeff.reserve(vanished.size());
  for (const std::string& s : vanished) vcoeff.push_back(detail::vanished_coefficient(s, coeffs));

  AmplitudeMap map;
  map.setting = setting;
  const std::size_t dim = std::size_t{1} << spec.n;
  for (std::size_t o = 0; o < dim; ++o) {
    const std::string out = detail::index_to_bits(o, spec.n);
    // product-state term |c...c> in the mixed basis
    double first = 1.0;
    for (int k = 1; k <= spec.n; ++k) {
      const char b = out[static_cast<std::size_t>(k - 1)];
      if (setting.is_reversed(k)) {
        first *= b == '0' ? 1.0 : 0.0;
      } else {
        first *= b == '1' ? coeffs.A[static_cast<std::size_t>(k - 1)]
                          : coeffs.B[static_cast<std::size_t>(k - 1)];
      }
    }
    double amp = first;
    for (std::size_t v = 0; v < vanished.size(); ++v) {
      double w = vcoeff[v];
      for (int k = 1; k <= spec.n && w != 0.0; ++k) {
        const std::size_t i = static_cast<std::size_t>(k - 1);
        const char ob = out[i];
        const char sb = vanished[v][i];
        if (setting.is_reversed(k)) {
          if (sb == '1') {
            w *= ob == '0' ? coeffs.A[i] : -coeffs.B[i];
          } else {
            w *= ob == '0' ? coeffs.B[i] : coeffs.A[i];
          }
        } else {
          w *= ob == sb ? 1.0 : 0.0;
        }
      }
      amp -= w;
    }
    map.entries[out] = norm.N * amp;
  }
  return map;
}

/// Sum of squared setting-all amplitudes over the given states.
inline double p_success_analytic(const EntanglerSpec& spec, const BasisCoeffs& coeffs,
                                 const std::set<std::string>& interest) {
  for (const std::string& s : interest) {
    if (static_cast<int>(s.size()) != spec.n ||
        s.find_first_not_of("01") != std::string::npos)
      throw std::invalid_argument("interest state outside the outcome space");
  }
  const AmplitudeMap map = amplitudes_for_setting(spec, coeffs, MeasurementSetting::all(spec.n));
  double p = 0.0;
  for (const std::string& s : interest) {
    const double a = map.entries.at(s);
    p += a * a;
  }
  return p;
}

struct SweepPoint {
  double theta = 0.0;
  double p_success = 0.0;
  bool degenerate = false;  // post-selection impossible; p reported as 0
};

struct SweepResult {
  std::vector<SweepPoint> grid;
  double argmax_theta = 0.0;
  double max_p = 0.0;
};

namespace detail {

inline SweepPoint eval_sweep_point(const EntanglerSpec& spec, const std::set<std::string>& interest,
                                   double theta) {
  try {
    return {theta, p_success_analytic(spec, uniform_coeffs(theta, spec.n), interest), false};
  } catch (const PostselectionError&) {
    return {theta, 0.0, true};
  }
}

}  // namespace detail

/// Evaluates p_success on the inclusive grid start, start+step, ..., end.
/// Degenerate grid points (post-selection impossible) are flagged and
/// scored 0 instead of raising.
inline SweepResult sweep_theta(const EntanglerSpec& spec, const std::set<std::string>& interest,
                               double start, double end, double step) {
  if (!(start >= 0.0 && start < end && end <= std::numbers::pi + 1e-12 && step > 0.0))
    throw std::invalid_argument("sweep range must satisfy 0 <= start < end <= pi, step > 0");
  SweepResult result;
  for (int i = 0;; ++i) {
    const double theta = start + step * i;
    if (theta > end + step * 1e-9) break;
    result.grid.push_back(detail::eval_sweep_point(spec, interest, std::min(theta, end)));
  }
  result.argmax_theta = result.grid.front().theta;
  result.max_p = result.grid.front().p_success;
  for (const SweepPoint& pt : result.grid) {
    if (pt.p_success > result.max_p) {
      result.max_p = pt.p_success;
      result.argmax_theta = pt.theta;
    }
  }
  return result;
}

/// Fine-grid maximization over [0, pi]: `grid_points` uniform samples
/// followed by one parabolic refinement of the best interior triple.
/// Returns (argmax theta, max p).
inline std::pair<double, double> max_p_success(const EntanglerSpec& spec,
                                               const std::set<std::string>& interest,
                                               int grid_points = 10000) {
  if (grid_points < 3) throw std::invalid_argument("need at least 3 grid points");
  const double h = std::numbers::pi / grid_points;
  std::vector<double> p(static_cast<std::size_t>(grid_points) + 1);
  std::size_t best = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = detail::eval_sweep_point(spec, interest, h * static_cast<double>(i)).p_success;
    if (p[i] > p[best]) best = i;
  }
  double theta_star = h * static_cast<double>(best);
  double p_star = p[best];
  if (best > 0 && best + 1 < p.size()) {
    const double denom = p[best - 1] - 2.0 * p[best] + p[best + 1];
    if (denom < 0.0) {
      const double shift = 0.5 * h * (p[best - 1] - p[best + 1]) / denom;
      const double refined = theta_star + shift;
      const double pr = detail::eval_sweep_point(spec, interest, refined).p_success;
      if (pr > p_star) {
        theta_star = refined;
        p_star = pr;
      }
    }
  }
  return {theta_star, p_star};
}

}  // namespace hardyq
