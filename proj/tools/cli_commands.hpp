#pragma once
// Command implementations for the qjunction front end. Exit codes: 0 success,
// 2 usage or configuration error, 3 numerical failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qjunction/qjunction.hpp"
#include "svg_plot.hpp"

namespace qjunction::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

/// Thrown for bad flag values detected after parsing.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string num17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CommonOptions {
  std::string config;
  bool json = false;
  int threads = 1;
  bool timing = false;
};

inline JunctionSpec load_spec(const std::string& path) {
  if (path.empty()) return builtin_example();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot read configuration file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_junction(buf.str());
}

/// Structured result of one command; rendered as text or JSON.
struct RunReport {
  std::string command;
  JunctionSpec spec;
  std::vector<std::string> warnings;
  nlohmann::ordered_json result = nlohmann::ordered_json::object();
  std::optional<double> elapsed_ms;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["spec"] = qjunction::to_json(spec);
    if (elapsed_ms) j["timing_ms"] = *elapsed_ms;
    j["warnings"] = warnings;
    j["result"] = result;
    return j;
  }
};

namespace detail {

inline void render_text(const nlohmann::ordered_json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      render_text(*it, prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else if (j.is_array()) {
    bool scalars = true;
    for (const auto& e : j) scalars = scalars && !e.is_object() && !e.is_array();
    if (scalars) {
      out << prefix << ":";
      for (const auto& e : j) {
        out << " ";
        if (e.is_number_float())
          out << num17(e.get<double>());
        else if (e.is_string())
          out << e.get<std::string>();
        else
          out << e.dump();
      }
      out << "\n";
    } else {
      for (std::size_t i = 0; i < j.size(); ++i) render_text(j[i], prefix + "[" + std::to_string(i) + "]", out);
    }
  } else if (j.is_number_float()) {
    out << prefix << ": " << num17(j.get<double>()) << "\n";
  } else if (j.is_string()) {
    out << prefix << ": " << j.get<std::string>() << "\n";
  } else {
    out << prefix << ": " << j.dump() << "\n";
  }
}

inline nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

inline nlohmann::ordered_json complex_matrix_json(const Eigen::MatrixXcd& m) {
  return {{"re", matrix_json(m.real())}, {"im", matrix_json(m.imag())}};
}

inline nlohmann::ordered_json vector_json(const Eigen::VectorXd& v) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

struct ResonanceSelection {
  bool paper_mode = false;
  int member = 1;  // 1-based member of the degenerate group used in paper mode
};

inline SinglePoleModel fit_model(const SpectralData& data, const ResonanceSelection& sel) {
  auto group = first_group_in_band(data);
  if (!group) throw NumericalError("no interior eigenvalue inside the open band");
  if (sel.paper_mode) {
    if (sel.member < 1 || sel.member > static_cast<int>(group->size()))
      throw UsageError("--member must be between 1 and " + std::to_string(group->size()));
    group = std::vector<int>{(*group)[sel.member - 1]};
  }
  return single_pole_fit(data, *group);
}

inline nlohmann::ordered_json validity_json(const ValidityReport& v) {
  nlohmann::ordered_json j;
  j["rho0"] = v.rho0;
  j["rho0_selection"] = v.rho0_selection;
  j["delta_over_d"] = v.delta_over_d;
  j["k0_norm"] = v.k0_norm;
  j["pole_dominance"] = v.dominance;
  j["pass"] = v.pass;
  return j;
}

inline std::optional<double> try_beta(const Eigen::VectorXd& e0) {
  if (e0.size() != 3) return std::nullopt;
  try {
    return beta_from_vector(e0, 1e-6);
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline RunReport cmd_spectrum(const CommonOptions& opt) {
  RunReport rep{"spectrum", load_spec(opt.config)};
  const SpectralData data = spectral_data(rep.spec);
  const auto [lo, hi] = data.basis.band();
  rep.result["band"] = {lo, hi};
  nlohmann::ordered_json thresholds = nlohmann::ordered_json::array();
  for (int s = 0; s < data.basis.wire_count(); ++s) {
    nlohmann::ordered_json t = nlohmann::ordered_json::array();
    for (int l = 1; l <= std::min(3, data.basis.l_max()); ++l) t.push_back(data.basis.mode(s, l).threshold);
    thresholds.push_back(t);
  }
  rep.result["thresholds"] = thresholds;
  nlohmann::ordered_json eig = nlohmann::ordered_json::array();
  for (int s = 0; s < data.size(); ++s) {
    if (!data.basis.inside_band(data.eigenvalues[s])) continue;
    if (!eig.empty() && eig.back()["group"] == data.pairs[s].group) {
      eig.back()["multiplicity"] = eig.back()["multiplicity"].get<int>() + 1;
      continue;
    }
    nlohmann::ordered_json e;
    e["lambda"] = data.eigenvalues[s];
    e["multiplicity"] = 1;
    e["group"] = data.pairs[s].group;
    eig.push_back(e);
  }
  for (auto& e : eig) e.erase("group");
  rep.result["eigenvalues_in_band"] = eig;
  if (eig.empty()) {
    rep.warnings.push_back("no interior eigenvalue inside the open band");
    return rep;
  }
  try {
    const SinglePoleModel model = detail::fit_model(data, {});
    rep.result["validity"] = detail::validity_json(validity_report(rep.spec, data, model, {lo, hi}));
  } catch (const NumericalError& e) {
    rep.warnings.push_back(std::string("validity report unavailable: ") + e.what());
  }
  return rep;
}

struct ResonanceOptions {
  detail::ResonanceSelection selection;
  std::optional<double> paper_constant;
};

inline RunReport cmd_resonance(const CommonOptions& opt, const ResonanceOptions& ro) {
  RunReport rep{"resonance", load_spec(opt.config)};
  const SpectralData data = spectral_data(rep.spec);
  const SinglePoleModel model = detail::fit_model(data, ro.selection);
  auto& r = rep.result;
  r["lambda0"] = model.lambda0;
  r["selection"] = ro.selection.paper_mode ? "single member" : "degenerate group";
  r["group_size"] = static_cast<int>(model.group.size());
  r["lambda0F"] = model.lambda0F;
  r["fixed_point_residual"] = model.residual;
  r["lambda0F_linearized"] = model.lambda0F_linearized;
  if (ro.paper_constant) r["lambda0F_paper_constant"] = linearized_shift(model.lambda0, *ro.paper_constant);
  r["residue_rank"] = model.rank;
  r["alpha2"] = model.alpha * model.alpha;
  r["e0"] = detail::vector_json(model.e0());
  r["P0"] = detail::matrix_json(model.P0);
  if (auto beta = detail::try_beta(model.e0())) {
    r["beta"] = *beta;
  } else if (model.e0().size() == 3) {
    rep.warnings.push_back("e0 does not have the symmetric (beta, 1, 1) form");
  }
  const auto band = data.basis.band();
  const auto v = validity_report(rep.spec, data, model, band);
  r["validity"] = detail::validity_json(v);
  if (!v.pass) rep.warnings.push_back("single-pole dominance ratio below 1");
  return rep;
}

struct SweepOptions {
  std::optional<double> lambda_min, lambda_max;
  int steps = 400;
  std::string method = "exact";
  std::string svg;
  std::string output;  // CSV path; empty = the report stream
  detail::ResonanceSelection selection;
};

inline std::vector<double> sweep_grid(double lo, double hi, int steps) {
  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) grid[i] = steps == 1 ? lo : lo + (hi - lo) * i / (steps - 1);
  return grid;
}

inline std::string sweep_csv(const SweepResult& res) {
  std::ostringstream out;
  if (res.rows.empty()) return "lambda,p,unitarity_defect,flag\n";
  const int n = static_cast<int>(res.rows.front().s.matrix.rows());
  out << "lambda,p";
  for (const char* part : {"Re_S_", "Im_S_", "T_"})
    for (int i = 1; i <= n; ++i)
      for (int j = 1; j <= n; ++j) out << ',' << part << i << j;
  out << ",unitarity_defect,flag\n";
  for (const auto& row : res.rows) {
    out << num17(row.lambda) << ',' << num17(row.s.p.size() ? row.s.p[0] : std::nan(""));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out << ',' << num17(row.s.matrix(i, j).real());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out << ',' << num17(row.s.matrix(i, j).imag());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out << ',' << num17(row.t(i, j));
    out << ',' << num17(row.unitarity) << ',' << (row.flagged ? 1 : 0) << '\n';
  }
  return out.str();
}

struct SweepOutput {
  RunReport report;
  std::string csv;
};

inline SweepOutput cmd_sweep(const CommonOptions& opt, const SweepOptions& so) {
  if (so.steps <= 0) throw UsageError("--steps must be positive");
  if (so.method != "exact" && so.method != "pole") throw UsageError("--method must be exact or pole");
  if (opt.threads < 1) throw UsageError("--threads must be positive");
  SweepOutput out{RunReport{"sweep", load_spec(opt.config)}, {}};
  const SpectralData data = spectral_data(out.report.spec);
  const auto [band_lo, band_hi] = data.basis.band();
  const double lo = so.lambda_min.value_or(band_lo + 0.01);
  const double hi = so.lambda_max.value_or(band_hi - 0.01);
  if (!(lo <= hi)) throw UsageError("--min must not exceed --max");
  if (!(lo > band_lo && hi < band_hi))
    throw UsageError("sweep grid must lie inside the open band (" + num17(band_lo) + ", " + num17(band_hi) + ")");
  const auto grid = sweep_grid(lo, hi, so.steps);
  std::optional<SinglePoleModel> model;
  SweepMethod method = SweepMethod::exact;
  if (so.method == "pole") {
    model = detail::fit_model(data, so.selection);
    method = SweepMethod::pole;
  }
  const SweepResult res = sweep(data, grid, method, model ? &*model : nullptr, opt.threads);
  out.csv = sweep_csv(res);
  int flagged = 0;
  double worst = 0.0;
  for (const auto& row : res.rows) {
    if (row.flagged) {
      ++flagged;
      out.report.warnings.push_back("flagged lambda " + num17(row.lambda) + ": " + row.note);
    } else {
      worst = std::max(worst, row.unitarity);
    }
  }
  auto& r = out.report.result;
  r["method"] = so.method;
  r["points"] = so.steps;
  r["flagged"] = flagged;
  r["max_unitarity_defect"] = worst;
  if (model) r["lambda0F"] = model->lambda0F;

  if (!so.svg.empty()) {
    const int n = data.basis.open_count();
    std::vector<Series> series;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Series s{"T_" + std::to_string(i + 1) + std::to_string(j + 1), {}};
        for (const auto& row : res.rows) s.y.push_back(row.t(i, j));
        series.push_back(std::move(s));
      }
    std::ofstream svg(so.svg, std::ios::binary);
    if (!svg) throw ConfigError("--svg", "cannot write '" + so.svg + "'");
    svg << svg_line_plot(grid, series, "lambda", "T", 0.0, 1.0);
    r["svg"] = so.svg;
  }
  return out;
}

struct BcOptions {
  double halfwidth = 0.0;
  double tol = 0.1;
  std::optional<double> lambda_f;  // window centre; defaults to lambda0F
  bool paper_labels = false;
  detail::ResonanceSelection selection;
};

inline RunReport cmd_bc(const CommonOptions& opt, const BcOptions& bo) {
  if (bo.halfwidth < 0.0) throw UsageError("--halfwidth must be non-negative");
  if (!(bo.tol > 0.0)) throw UsageError("--tol must be positive");
  RunReport rep{"bc", load_spec(opt.config)};
  const SpectralData data = spectral_data(rep.spec);
  const SinglePoleModel model = detail::fit_model(data, bo.selection);
  auto& r = rep.result;
  r["lambda0F"] = model.lambda0F;
  r["alpha2"] = model.alpha * model.alpha;
  const SMatrix s = s_approx(model, data.basis, model.lambda0F);
  const VertexBC bc = bc_from_smatrix(s);
  r["energy_dependent"] = {{"lambda", bc.lambda},
                           {"A", detail::complex_matrix_json(bc.A)},
                           {"B", detail::complex_matrix_json(bc.B)}};
  FermiWindow window{bo.lambda_f.value_or(model.lambda0F), bo.halfwidth};
  {
    // A window reaching past the band edges is cut back to the band.
    const auto [lo, hi] = data.basis.band();
    const double room = std::min(window.lambdaF - lo, hi - window.lambdaF) * (1.0 - 1e-9);
    if (!(room > 0.0)) throw NumericalError("Fermi level " + num17(window.lambdaF) + " is outside the open band");
    if (window.halfwidth > room) {
      rep.warnings.push_back("Fermi window clipped to half-width " + num17(room) + " to stay inside the band");
      window.halfwidth = room;
    }
  }
  const auto lt = low_temp_limit(model, data.basis, window, bo.tol,
                                 bo.paper_labels ? ProjectorAssignment::paper_labeled : ProjectorAssignment::derived);
  r["low_temperature"] = {{"valid", lt.valid},
                          {"max_theta_defect", lt.max_theta_defect},
                          {"tolerance", bo.tol},
                          {"margin", lt.margin}};
  if (lt.valid) {
    r["projectors"] = {{"assignment", bo.paper_labels ? "paper_labeled" : "derived"},
                       {"Q_psi", detail::matrix_json(lt.projectors.Qpsi)},
                       {"Q_dpsi", detail::matrix_json(lt.projectors.Qd)}};
    r["P0"] = detail::matrix_json(model.P0);
    if (auto beta = detail::try_beta(model.e0())) r["beta"] = *beta;
  } else {
    rep.warnings.push_back("low-temperature criterion fails; keep the energy-dependent condition");
  }
  return rep;
}

// ---------------------------------------------------------------------------

inline void emit(const RunReport& rep, bool json, std::ostream& out) {
  if (json) {
    out << rep.to_json().dump(2) << "\n";
    return;
  }
  out << "command: " << rep.command << "\n";
  if (rep.elapsed_ms) out << "timing_ms: " << num17(*rep.elapsed_ms) << "\n";
  detail::render_text(rep.result, "", out);
  for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scattering on star-shaped quantum junctions"};
  app.require_subcommand(1);
  CommonOptions common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "configuration file (default: built-in T-junction)");
    sub->add_flag("--json", common.json, "machine-readable report");
    sub->add_option("--threads", common.threads, "worker threads for sweeps");
    sub->add_flag("--timing", common.timing, "include wall-clock timing in the report");
  };
  auto add_selection = [](CLI::App* sub, detail::ResonanceSelection& sel) {
    sub->add_flag("--paper-mode", sel.paper_mode, "use one member of a degenerate resonance group");
    sub->add_option("--member", sel.member, "group member used with --paper-mode (1-based)");
  };

  auto* spectrum = app.add_subcommand("spectrum", "interior eigenvalues, thresholds and validity data");
  add_common(spectrum);

  ResonanceOptions ro;
  auto* resonance = app.add_subcommand("resonance", "single-pole resonance model");
  add_common(resonance);
  add_selection(resonance, ro.selection);
  resonance->add_option("--paper-constant", ro.paper_constant, "report lambda0 - C for a supplied shift constant C");

  SweepOptions so;
  auto* sweep_cmd = app.add_subcommand("sweep", "S-matrix over an energy grid as CSV");
  add_common(sweep_cmd);
  add_selection(sweep_cmd, so.selection);
  sweep_cmd->add_option("--min", so.lambda_min, "first energy");
  sweep_cmd->add_option("--max", so.lambda_max, "last energy");
  sweep_cmd->add_option("--steps", so.steps, "number of grid points");
  sweep_cmd->add_option("--method", so.method, "exact | pole");
  sweep_cmd->add_option("--svg", so.svg, "write a transmission plot");
  sweep_cmd->add_option("--output,-o", so.output, "write CSV to this file instead of stdout");

  BcOptions bo;
  auto* bc = app.add_subcommand("bc", "vertex boundary conditions");
  add_common(bc);
  add_selection(bc, bo.selection);
  bc->add_option("--halfwidth", bo.halfwidth, "Fermi window half-width (scaled temperature)");
  bc->add_option("--tol", bo.tol, "allowed |Theta + 1| on the window");
  bc->add_option("--lambda-f", bo.lambda_f, "Fermi level (default: lambda0F)");
  bc->add_flag("--paper-labels", bo.paper_labels, "swap the projector labels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto stamp = [&](RunReport& rep) {
    if (common.timing)
      rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };
  try {
    if (spectrum->parsed()) {
      auto rep = cmd_spectrum(common);
      stamp(rep);
      emit(rep, common.json, out);
    } else if (resonance->parsed()) {
      auto rep = cmd_resonance(common, ro);
      stamp(rep);
      emit(rep, common.json, out);
    } else if (sweep_cmd->parsed()) {
      auto res = cmd_sweep(common, so);
      stamp(res.report);
      if (so.output.empty()) {
        out << res.csv;
        for (const auto& w : res.report.warnings) err << "warning: " << w << "\n";
      } else {
        std::ofstream csv(so.output, std::ios::binary);
        if (!csv) throw ConfigError("--output", "cannot write '" + so.output + "'");
        csv << res.csv;
        emit(res.report, common.json, out);
      }
    } else if (bc->parsed()) {
      auto rep = cmd_bc(common, bo);
      stamp(rep);
      emit(rep, common.json, out);
    }
  } catch (const ConfigError& e) {
    err << "config error (" << e.key() << "): " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace qjunction::cli
