#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hardyq/analytic.hpp"
#include "hardyq/entangler.hpp"
#include "hardyq/lhv.hpp"
#include "hardyq/noise.hpp"
#include "hardyq/statevector.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitInvalidInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitCapacity = 4;

/// Accepts raw radians ("1.3"), multiples of pi ("0.423pi", "pi") and
/// fractions of pi ("pi/18").
double parse_angle(const std::string& text) {
  try {
    std::size_t pos = 0;
    if (text == "pi") return std::numbers::pi;
    if (text.rfind("pi/", 0) == 0) {
      const double d = std::stod(text.substr(3), &pos);
      if (pos != text.size() - 3 || d == 0.0) throw std::invalid_argument(text);
      return std::numbers::pi / d;
    }
    if (text.size() > 2 && text.compare(text.size() - 2, 2, "pi") == 0) {
      const double f = std::stod(text.substr(0, text.size() - 2), &pos);
      if (pos != text.size() - 2) throw std::invalid_argument(text);
      return f * std::numbers::pi;
    }
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse angle '" + text + "' (use radians, '0.423pi' or 'pi/18')");
  }
}

/// Builtin names cycle<N> / complete<N>, otherwise a JSON spec file path.
hardyq::EntanglerSpec resolve_spec(const std::string& name) {
  auto builtin = [&](const std::string& prefix) -> std::optional<int> {
    if (name.rfind(prefix, 0) != 0) return std::nullopt;
    const std::string tail = name.substr(prefix.size());
    if (tail.empty() || tail.find_first_not_of("0123456789") != std::string::npos)
      return std::nullopt;
    return std::stoi(tail);
  };
  if (auto n = builtin("cycle")) return hardyq::cycle_spec(*n);
  if (auto n = builtin("complete")) return hardyq::complete_spec(*n);

  std::ifstream in(name);
  if (!in) throw std::invalid_argument("unknown spec '" + name + "' (builtin cycleN/completeN or JSON file)");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("cannot parse spec file '" + name + "': " + e.what());
  }
  return hardyq::spec_from_json(j);
}

/// Writes the report to the output path, or to stdout when none is given.
/// The summary, when present, goes to whichever stream the report does not
/// occupy, so stdout stays machine-readable.
void emit(const std::string& content, const std::string& out_path,
          const std::string& summary = {}) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
    if (!summary.empty()) std::cerr << summary << '\n';
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output file '" + out_path + "'");
    out << content;
    if (!summary.empty()) std::cout << summary << '\n';
  }
}

std::string format_fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

struct SetReport {
  std::string setting_label;
  double theta = 0.0;
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  double post_selection_rate = 0.0;
  hardyq::Histogram hist;
  std::map<std::string, double> analytic;
  std::optional<double> p_success;
  std::vector<std::string> notes;
};

json set_report_to_json(const SetReport& r) {
  json counts = json::object();
  for (const auto& [k, c] : r.hist.counts) counts[k] = c;
  json analytic = json::object();
  for (const auto& [k, p] : r.analytic) analytic[k] = p;
  json out{{"setting", r.setting_label},
           {"theta", r.theta},
           {"shots", r.shots},
           {"seed", r.seed},
           {"post_selection_rate", r.post_selection_rate},
           {"counts", counts},
           {"analytic", analytic},
           {"notes", r.notes}};
  out["p_success"] = r.p_success ? json(*r.p_success) : json(nullptr);
  return out;
}

std::string set_report_to_table(const SetReport& r) {
  std::ostringstream os;
  os << "setting " << r.setting_label << "  theta=" << format_fixed(r.theta, 9)
     << " rad  shots=" << r.shots << "  seed=" << r.seed
     << "  post_selection_rate=" << format_fixed(r.post_selection_rate, 6) << "\n";
  os << "state      counts   sampled    analytic\n";
  for (const auto& [state, count] : r.hist.counts) {
    const double freq = static_cast<double>(count) / static_cast<double>(r.shots);
    os << state << "  " << std::setw(9) << count << "  " << format_fixed(freq, 6) << "  "
       << format_fixed(r.analytic.at(state), 6) << "\n";
  }
  if (r.p_success) os << "p_success (sampled) = " << format_fixed(*r.p_success, 6) << "\n";
  for (const auto& n : r.notes) os << "note: " << n << "\n";
  return os.str();
}

std::string join(const std::set<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

SetReport run_set_command(const hardyq::EntanglerSpec& spec, const hardyq::MeasurementSetting& setting,
                          const std::string& label, double theta, std::uint64_t shots,
                          std::uint64_t seed) {
  const hardyq::Circuit circuit = hardyq::build_circuit(spec, theta, setting);
  const hardyq::Statevector full = hardyq::run_circuit(circuit);
  std::set<int> ancillas;
  for (int a = circuit.num_data; a < circuit.num_qubits(); ++a) ancillas.insert(a);
  auto [data_state, weight] = hardyq::postselect_ancillas(full, ancillas, 0);

  SetReport r;
  r.setting_label = label;
  r.theta = theta;
  r.shots = shots;
  r.seed = seed;
  r.post_selection_rate = weight;
  r.hist = hardyq::sample_histogram(hardyq::probabilities(data_state), shots, seed);
  r.hist.post_selection_rate = weight;

  const hardyq::BasisCoeffs coeffs = hardyq::uniform_coeffs(theta, spec.n);
  const hardyq::AmplitudeMap amap = hardyq::amplitudes_for_setting(spec, coeffs, setting);
  for (const auto& [state, amp] : amap.entries) r.analytic[state] = amp * amp;
  return r;
}

int cmd_set(const hardyq::EntanglerSpec& spec, int set_index, int particle, double theta,
            std::uint64_t shots, std::uint64_t seed, const std::string& format,
            const std::string& out_path) {
  hardyq::MeasurementSetting setting;
  std::string label;
  if (set_index == 1) {
    setting = hardyq::MeasurementSetting::none();
    label = "set1";
  } else if (set_index == 2) {
    if (particle < 1 || particle > spec.n) throw std::invalid_argument("unknown particle index");
    setting = hardyq::MeasurementSetting::single(particle);
    label = "set2:" + std::to_string(particle);
  } else {
    setting = hardyq::MeasurementSetting::all(spec.n);
    label = "set3";
  }

  SetReport r = run_set_command(spec, setting, label, theta, shots, seed);

  if (set_index == 1) {
    r.notes.push_back("vanished states (exact zeros): " + join(hardyq::vanished_states(spec)));
  } else if (set_index == 2) {
    const auto imp = hardyq::correlation_implications(spec, theta, particle);
    std::set<std::string> interest(imp.options.begin(), imp.options.end());
    r.notes.push_back("states of interest: " + join(interest));
  } else {
    const std::set<std::string> interest = hardyq::interest_states_rule(spec);
    r.notes.push_back("states of interest: " + join(interest));
    std::uint64_t hits = 0;
    for (const std::string& s : interest) {
      auto it = r.hist.counts.find(s);
      if (it != r.hist.counts.end()) hits += it->second;
    }
    r.p_success = static_cast<double>(hits) / static_cast<double>(shots);
    const double exact =
        hardyq::p_success_analytic(spec, hardyq::uniform_coeffs(theta, spec.n), interest);
    r.notes.push_back("p_success closed form: " + format_fixed(exact, 6));
    r.notes.push_back(
        "truncating the closed form to two to three significant digits per factor "
        "understates it (0.0868 instead of " +
        format_fixed(exact, 4) + " at theta=0.423pi); full precision is authoritative");
  }

  if (format == "json") {
    emit(set_report_to_json(r).dump(2) + "\n", out_path);
  } else if (format == "table") {
    emit(set_report_to_table(r), out_path);
  } else {
    throw std::invalid_argument("set reports support --format json|table");
  }
  return 0;
}

int cmd_sweep(const hardyq::EntanglerSpec& spec, double start, double end, double step,
              const std::string& mode, bool fine, std::uint64_t shots, std::uint64_t seed,
              const std::string& out_path) {
  if (mode != "analytic" && mode != "sampled")
    throw std::invalid_argument("sweep mode must be analytic or sampled");
  const std::set<std::string> interest = hardyq::interest_states_rule(spec);

  hardyq::SweepResult sweep;
  if (mode == "analytic") {
    sweep = hardyq::sweep_theta(spec, interest, start, end, step);
  } else {
    if (!(start >= 0.0 && start < end && end <= std::numbers::pi + 1e-12 && step > 0.0))
      throw std::invalid_argument("sweep range must satisfy 0 <= start < end <= pi, step > 0");
    for (int i = 0;; ++i) {
      const double theta = start + step * i;
      if (theta > end + step * 1e-9) break;
      hardyq::SweepPoint pt{std::min(theta, end), 0.0, false};
      try {
        SetReport r = run_set_command(spec, hardyq::MeasurementSetting::all(spec.n), "set3",
                                      pt.theta, shots, seed + static_cast<std::uint64_t>(i));
        std::uint64_t hits = 0;
        for (const std::string& s : interest) {
          auto it = r.hist.counts.find(s);
          if (it != r.hist.counts.end()) hits += it->second;
        }
        pt.p_success = static_cast<double>(hits) / static_cast<double>(shots);
      } catch (const hardyq::PostselectionError&) {
        pt.degenerate = true;
      }
      sweep.grid.push_back(pt);
      if (pt.p_success > sweep.max_p) {
        sweep.max_p = pt.p_success;
        sweep.argmax_theta = pt.theta;
      }
    }
  }

  std::ostringstream csv;
  csv << "theta_rad,theta_pi_units,p_success\n";
  for (const hardyq::SweepPoint& pt : sweep.grid) {
    csv << format_fixed(pt.theta, 12) << "," << format_fixed(pt.theta / std::numbers::pi, 12)
        << "," << format_fixed(pt.p_success, 12) << "\n";
  }

  std::ostringstream summary;
  summary << "argmax theta = " << format_fixed(sweep.argmax_theta, 9) << " rad ("
          << format_fixed(sweep.argmax_theta / std::numbers::pi, 6)
          << " pi), max p_success = " << format_fixed(sweep.max_p, 9);
  if (fine && mode == "analytic") {
    const auto [theta_star, p_star] = hardyq::max_p_success(spec, interest);
    summary << "\nfine grid: argmax theta = " << format_fixed(theta_star, 9) << " rad ("
            << format_fixed(theta_star / std::numbers::pi, 6)
            << " pi), max p_success = " << format_fixed(p_star, 9);
  }
  emit(csv.str(), out_path, summary.str());
  return 0;
}

int cmd_lhv(const hardyq::EntanglerSpec& spec, double theta, const std::string& out_path) {
  const hardyq::ParadoxReport report = hardyq::verify_paradox(spec, theta);
  std::ostringstream summary;
  summary << "paradox states: " << report.paradox_states.size()
          << ", p_success = " << format_fixed(report.p_success, 9)
          << ", consistent strategies: " << report.consistent_count
          << ", chains: " << report.chains.size();
  emit(hardyq::paradox_report_to_json(report).dump(2) + "\n", out_path, summary.str());
  return 0;
}

int cmd_compare(const hardyq::EntanglerSpec& a, const std::string& name_a,
                const hardyq::EntanglerSpec& b, const std::string& name_b,
                const std::string& format, const std::string& out_path) {
  if (a.n != b.n) throw std::invalid_argument("compared configurations must share the particle count");

  struct Row {
    std::size_t vanished;
    std::size_t paradox;
    double max_p;
    double argmax_theta;
  };
  auto evaluate = [](const hardyq::EntanglerSpec& spec) {
    const auto [theta_star, p_star] =
        hardyq::max_p_success(spec, hardyq::interest_states_rule(spec));
    const hardyq::ParadoxReport rep = hardyq::verify_paradox(spec, theta_star);
    return Row{hardyq::vanished_states(spec).size(), rep.paradox_states.size(), p_star,
               theta_star};
  };
  const Row ra = evaluate(a);
  const Row rb = evaluate(b);

  if (format == "json") {
    auto row = [](const std::string& name, const Row& r) {
      return json{{"name", name},
                  {"vanished_states", r.vanished},
                  {"paradox_states", r.paradox},
                  {"max_p_success", r.max_p},
                  {"argmax_theta_rad", r.argmax_theta},
                  {"argmax_theta_pi", r.argmax_theta / std::numbers::pi}};
    };
    emit(json{{"configs", {row(name_a, ra), row(name_b, rb)}}}.dump(2) + "\n", out_path);
    return 0;
  }
  if (format != "table") throw std::invalid_argument("compare supports --format table|json");

  std::ostringstream os;
  const int w = static_cast<int>(std::max<std::size_t>({name_a.size(), name_b.size(), 12})) + 2;
  os << std::left << std::setw(22) << "" << std::setw(w) << name_a << std::setw(w) << name_b
     << "\n";
  auto line = [&](const std::string& label, const std::string& va, const std::string& vb) {
    os << std::left << std::setw(22) << label << std::setw(w) << va << std::setw(w) << vb << "\n";
  };
  line("vanished states", std::to_string(ra.vanished), std::to_string(rb.vanished));
  line("paradox states", std::to_string(ra.paradox), std::to_string(rb.paradox));
  line("max p_success", format_fixed(ra.max_p, 6), format_fixed(rb.max_p, 6));
  line("argmax theta (pi)", format_fixed(ra.argmax_theta / std::numbers::pi, 6),
       format_fixed(rb.argmax_theta / std::numbers::pi, 6));
  emit(os.str(), out_path);
  return 0;
}

int cmd_diagnose(double p1, double p_mc, double p_ro, std::uint64_t shots, std::uint64_t seed,
                 const std::string& out_path) {
  const hardyq::DiagnosticReport report =
      hardyq::diagnostic_suite(hardyq::NoiseModel{p1, p_mc, p_ro}, shots, seed);
  std::ostringstream summary;
  summary << "families: " << report.families.size();
  emit(hardyq::diagnostic_report_to_json(report).dump(2) + "\n", out_path, summary.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hardy-type nonlocality engine for graph-entangled particles"};
  app.require_subcommand(1);

  std::string spec_name = "cycle4";
  std::string theta_text = "0.423pi";
  std::uint64_t shots = 409600;
  std::uint64_t seed = 1;
  std::string format;
  std::string out_path;
  int particle = 1;

  auto add_common = [&](CLI::App* cmd, const std::string& default_format) {
    cmd->add_option("--spec", spec_name, "builtin cycleN/completeN or a JSON spec file");
    cmd->add_option("--theta", theta_text, "rotation angle (radians, '0.423pi', 'pi/18')");
    cmd->add_option("--shots", shots, "shot count");
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--format", format, "output format (default: " + default_format + ")");
    cmd->add_option("--out", out_path, "write the report to this path");
  };

  CLI::App* set1 = app.add_subcommand("set1", "no reversed particles: vanished-state check");
  add_common(set1, "json");
  CLI::App* set2 = app.add_subcommand("set2", "one particle reversed: correlation check");
  set2->add_option("--particle", particle, "1-based particle to reverse");
  add_common(set2, "json");
  CLI::App* set3 = app.add_subcommand("set3", "all particles reversed: p_success check");
  add_common(set3, "json");

  CLI::App* sweep = app.add_subcommand("sweep", "p_success over a theta grid (CSV)");
  std::string start_text = "0";
  std::string end_text = "pi";
  std::string step_text = "pi/18";
  std::string mode = "analytic";
  bool fine = false;
  sweep->add_option("--start", start_text, "grid start");
  sweep->add_option("--end", end_text, "grid end");
  sweep->add_option("--step", step_text, "grid step");
  sweep->add_option("--mode", mode, "analytic or sampled");
  sweep->add_flag("--fine", fine, "also refine the argmax on a 10^4-point grid");
  add_common(sweep, "csv");

  CLI::App* lhv = app.add_subcommand("lhv", "exhaustive local-hidden-variable certificate");
  add_common(lhv, "json");

  CLI::App* compare = app.add_subcommand("compare", "side-by-side configuration comparison");
  std::string spec_b = "complete4";
  compare->add_option("--spec-b", spec_b, "second configuration");
  add_common(compare, "table");

  CLI::App* diagnose = app.add_subcommand("diagnose", "noise-sensitivity diagnostic suite");
  double p1 = 0.01, p_mc = 0.02, p_ro = 0.01;
  std::uint64_t diag_shots = 100000;
  diagnose->add_option("--p1", p1, "depolarizing probability after 1-qubit gates");
  diagnose->add_option("--pmc", p_mc, "depolarizing probability per qubit after multi-controlled gates");
  diagnose->add_option("--pro", p_ro, "readout flip probability");
  diagnose->add_option("--shots", diag_shots, "shots per family (default 100000)");
  diagnose->add_option("--seed", seed, "RNG seed");
  diagnose->add_option("--out", out_path, "write the report to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalidInput;
  }

  if (format.empty()) {
    format = sweep->parsed() ? "csv" : compare->parsed() ? "table" : "json";
  }

  try {
    if (set1->parsed() || set2->parsed() || set3->parsed()) {
      const int idx = set1->parsed() ? 1 : set2->parsed() ? 2 : 3;
      return cmd_set(resolve_spec(spec_name), idx, particle, parse_angle(theta_text), shots, seed,
                     format, out_path);
    }
    if (sweep->parsed()) {
      return cmd_sweep(resolve_spec(spec_name), parse_angle(start_text), parse_angle(end_text),
                       parse_angle(step_text), mode, fine, shots, seed, out_path);
    }
    if (lhv->parsed()) {
      return cmd_lhv(resolve_spec(spec_name), parse_angle(theta_text), out_path);
    }
    if (compare->parsed()) {
      return cmd_compare(resolve_spec(spec_name), spec_name, resolve_spec(spec_b), spec_b, format,
                         out_path);
    }
    if (diagnose->parsed()) {
      return cmd_diagnose(p1, p_mc, p_ro, diag_shots, seed, out_path);
    }
  } catch (const hardyq::PostselectionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const hardyq::CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return 0;
}
