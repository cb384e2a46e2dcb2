#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hyperscat/cli.hpp"
#include "hyperscat/coulombfn.hpp"
#include "hyperscat/errors.hpp"
#include "hyperscat/matrix_io.hpp"
#include "hyperscat/radial_solver.hpp"

#ifndef HYPERSCAT_VERSION
#define HYPERSCAT_VERSION "unknown"
#endif

namespace hyperscat::cli {

using nlohmann::json;
namespace fs = std::filesystem;

const char* tool_version() { return HYPERSCAT_VERSION; }

namespace {

// Files are written through a temporary name and renamed. Everything written
// in this run is removed again if the command fails.
class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    std::error_code ec;
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_, ec);
      if (ec) throw IoError(dir_.string(), "cannot create output directory: " + ec.message());
      created_dir_ = true;
    }
    const fs::path target = dir_ / name, tmp = dir_ / (name + ".part");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError(tmp.string(), "cannot open for writing");
      written_.push_back(tmp);
      out << content;
      out.flush();
      if (!out) throw IoError(tmp.string(), "write failed");
    }
    fs::rename(tmp, target, ec);
    if (ec) throw IoError(target.string(), "cannot rename into place: " + ec.message());
    written_.back() = target;
  }

  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void rollback() noexcept {
    std::error_code ec;
    for (const auto& p : written_) fs::remove(p, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
    written_.clear();
  }

  const std::vector<fs::path>& written() const { return written_; }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
  bool created_dir_ = false;
};

json provenance(const RunConfig& cfg, const std::string& command) {
  return {{"tool", kToolName}, {"version", tool_version()}, {"command", command}, {"config_sha256", cfg.sha256},
          {"config", cfg.document}};
}

json vec_json(const std::vector<double>& v) { return json(v); }

// Pipeline stages shared by the subcommands.
struct Pipeline {
  const RunConfig& cfg;
  BasisSpec basis;
  RealMatrix C;
  json charge_info;

  explicit Pipeline(const RunConfig& c) : cfg(c), basis(enumerate_basis(c.k_max, c.l_max)) {}

  void charge() {
    if (cfg.charge_matrix_path) {
      C = load_charge_matrix(*cfg.charge_matrix_path);
      if (static_cast<std::size_t>(C.rows()) != basis.size())
        throw ConfigError(fmt::format("charge.matrix: {} is {}x{} but the basis has {} channels",
                                      cfg.charge_matrix_path->string(), C.rows(), C.cols(), basis.size()));
      charge_info = {{"source", "file"}, {"path", cfg.charge_matrix_path->string()}};
      return;
    }
    const auto r = compute_charge_matrix(basis, cfg.system, cfg.charge_quad_order);
    C = r.C;
    charge_info = {{"source", "computed"}, {"quad_order", r.quad_order}, {"doubling_drift", r.drift},
                   {"asymmetry", r.asymmetry}};
  }

  SpectralData spectral() {
    charge();
    return build_spectral(C, basis, cfg.P, cfg.z0);
  }

  RadialProblem problem(const SpectralData& s, double Rmax) const {
    return make_problem(s.C, s.ell, cfg.P, Rmax, cfg.Rmin, cfg.step);
  }
};

json system_json(const SystemSpec& s) { return {{"masses", s.masses}, {"charges", s.charges}}; }

void cmd_basis(const RunConfig& cfg, Outputs& out) {
  Pipeline pl(cfg);
  const int order = std::max(kDefaultGramOrder, min_quad_order(cfg.k_max));
  const RealMatrix G = gram_matrix(pl.basis, order);
  const double defect = (G - RealMatrix::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
  json j = {{"provenance", provenance(cfg, "basis")}, {"basis", basis_to_json(pl.basis)},
            {"gram_quad_order", order}, {"gram_defect", defect}};
  out.write_json("basis.json", j);
}

void cmd_charge(const RunConfig& cfg, Outputs& out) {
  Pipeline pl(cfg);
  pl.charge();
  json j = matrix_to_json(pl.C, true);
  j["provenance"] = provenance(cfg, "charge compute");
  j["system"] = system_json(cfg.system);
  j["basis"] = basis_to_json(pl.basis);
  j["charge"] = pl.charge_info;
  j["single_channel_check"] = 16.0 / (3.0 * std::numbers::pi) *
                              (cfg.system.charges[0] + cfg.system.charges[1] + cfg.system.charges[2]);
  out.write_json("charge_matrix.json", j);
}

void cmd_asym_spectral(const RunConfig& cfg, Outputs& out) {
  Pipeline pl(cfg);
  const auto s = pl.spectral();
  json j = spectral_to_json(s);
  j["provenance"] = provenance(cfg, "asym spectral");
  j["charge"] = pl.charge_info;
  out.write_json("spectral.json", j);
}

void cmd_asym_eval(const RunConfig& cfg, Outputs& out) {
  Pipeline pl(cfg);
  const auto s = pl.spectral();
  std::ostringstream csv;
  csv << "R,wave,row,col,re_U,im_U,re_dU,im_dU\n";
  for (double R : cfg.asym_grid.values) {
    for (Wave w : {Wave::incoming, Wave::outgoing}) {
      const auto e = eval_physical(s, R, w, cfg.bc_variant);
      for (Eigen::Index i = 0; i < e.U.rows(); ++i)
        for (Eigen::Index k = 0; k < e.U.cols(); ++k)
          csv << fmt_double(R) << ',' << to_string(w) << ',' << i << ',' << k << ',' << fmt_double(e.U(i, k).real())
              << ',' << fmt_double(e.U(i, k).imag()) << ',' << fmt_double(e.dU(i, k).real()) << ','
              << fmt_double(e.dU(i, k).imag()) << '\n';
    }
  }
  out.write("asym_eval.csv", csv.str());
  json j = {{"provenance", provenance(cfg, "asym eval")}, {"variant", to_string(cfg.bc_variant)},
            {"grid", vec_json(cfg.asym_grid.values)}, {"csv", "asym_eval.csv"}};
  out.write_json("asym_eval.json", j);
}

void cmd_solve(const RunConfig& cfg, Outputs& out) {
  Pipeline pl(cfg);
  const auto s = pl.spectral();
  const auto p = pl.problem(s, cfg.Rmax);
  const auto Y = propagate(p);
  const auto r = extract_S(Y, eval_asymptotic(s, cfg.Rmax, cfg.bc_variant));
  json j = smatrix_to_json(r);
  j["provenance"] = provenance(cfg, "solve");
  j["variant"] = to_string(cfg.bc_variant);
  j["solver"] = {{"Rmin", p.Rmin}, {"Rmax", p.Rmax}, {"step", p.step}, {"P", p.P}};
  j["frame"] = "channel basis, R -> infinity limit of the transformation";
  out.write_json("smatrix.json", j);
}

void cmd_verify(const RunConfig& cfg, Outputs& out) {
  Pipeline pl(cfg);
  const auto s = pl.spectral();
  const auto& grid = cfg.verify_grid.values;
  json reports = json::object();
  std::vector<std::pair<std::string, ResidualReport>> all;
  for (BcVariant v : {BcVariant::leading, BcVariant::full}) {
    for (Wave w : {Wave::outgoing, Wave::incoming}) {
      auto rep = operator_residual(physical_builder(s, w, v), s.C, s.Lmat, s.P, grid, cfg.verify_mode, cfg.window_lo,
                                   cfg.window_hi);
      const std::string key = fmt::format("{}{}", to_string(v), to_string(w));
      reports[key] = residual_to_json(rep);
      all.emplace_back(key, std::move(rep));
    }
  }
  const auto cons = consistency_suite(s, grid, cfg.slope_tolerance);

  std::ostringstream csv;
  csv << "R";
  for (const auto& [k, r] : all) csv << ",residual_" << k << ",floor_" << k;
  csv << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv << fmt_double(grid[i]);
    for (const auto& [k, r] : all) csv << ',' << fmt_double(r.norms[i]) << ',' << fmt_double(r.floor[i]);
    csv << '\n';
  }
  out.write("residual.csv", csv.str());

  json j = {{"provenance", provenance(cfg, "verify")},
            {"window", {cfg.window_lo, cfg.window_hi}},
            {"residuals", reports},
            {"consistency", consistency_to_json(cons)},
            {"csv", "residual.csv"}};
  out.write_json("verify.json", j);
}

json study_json(const ConvergenceStudy& st) {
  json j;
  j["variant"] = to_string(st.variant);
  j["Rmax"] = st.Rmax;
  j["drift"] = st.drift;
  auto& rs = j["results"] = json::array();
  for (const auto& r : st.results) rs.push_back(smatrix_to_json(r));
  j["fit_valid"] = st.fit_valid;
  if (st.fit_valid) {
    j["slope"] = st.fit.slope;
    j["slope_std_error"] = st.fit.std_error;
  } else {
    j["slope"] = nullptr;
  }
  return j;
}

void cmd_converge(const RunConfig& cfg, Outputs& out) {
  Pipeline pl(cfg);
  const auto s = pl.spectral();
  const auto& grid = cfg.converge_grid.values;
  const auto p = pl.problem(s, grid.back());
  const auto [lead, full] = convergence_study_both(p, s, grid);

  std::ostringstream csv;
  csv << "R,R_next,drift_leading,drift_full\n";
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    csv << fmt_double(grid[i]) << ',' << fmt_double(grid[i + 1]) << ',' << fmt_double(lead.drift[i]) << ','
        << fmt_double(full.drift[i]) << '\n';
  out.write("drift.csv", csv.str());

  json j = {{"provenance", provenance(cfg, "converge")}, {"leading", study_json(lead)}, {"full", study_json(full)},
            {"csv", "drift.csv"}};
  j["slope_gap"] = (lead.fit_valid && full.fit_valid) ? json(lead.fit.slope - full.fit.slope) : json(nullptr);
  out.write_json("converge.json", j);
}

void cmd_coulomb(double eta, double L, const std::vector<double>& rhos) {
  std::ostringstream csv;
  csv << "eta,L,rho,F,dF,G,dG,sigma,region_F,region_G\n";
  for (double rho : rhos) {
    const auto e = coulomb_FG(eta, L, rho);
    csv << fmt_double(eta) << ',' << fmt_double(L) << ',' << fmt_double(rho) << ',' << fmt_double(e.F) << ','
        << fmt_double(e.dF) << ',' << fmt_double(e.G) << ',' << fmt_double(e.dG) << ',' << fmt_double(e.sigma) << ','
        << to_string(e.region_F) << ',' << to_string(e.region_G) << '\n';
  }
  std::cout << csv.str();
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "error: " << kind << ": " << e.what() << "\n";
  return code;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Coupled-channel hyperspherical three-body Coulomb scattering toolkit", kToolName};
  app.set_version_flag("--version", std::string(kToolName) + " " + tool_version());
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  app.add_option("--config", config_path, "run configuration (JSON)");
  app.add_option("--override", overrides, "KEY=VALUE with a dotted key; repeatable")->take_all();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  auto* basis = app.add_subcommand("basis", "enumerate the hyperspherical basis");
  auto* charge = app.add_subcommand("charge", "charge matrix");
  auto* charge_compute = charge->add_subcommand("compute", "compute the charge matrix");
  charge->require_subcommand(1);
  auto* asym = app.add_subcommand("asym", "asymptotic solutions");
  auto* asym_spectral = asym->add_subcommand("spectral", "diagonalization and first-order data");
  auto* asym_eval = asym->add_subcommand("eval", "channel-frame solutions on a radius grid (CSV)");
  asym->require_subcommand(1);
  auto* solve = app.add_subcommand("solve", "propagate and extract the S-matrix");
  auto* verify = app.add_subcommand("verify", "operator residuals and consistency checks");
  auto* converge = app.add_subcommand("converge", "S-matrix drift against Rmax for both variants");
  auto* coulomb = app.add_subcommand("coulomb", "Coulomb wave functions");
  auto* coulomb_eval = coulomb->add_subcommand("eval", "F, G and derivatives as CSV on stdout");
  coulomb->require_subcommand(1);
  double eta = 0.0, L = 0.0;
  std::vector<double> rhos;
  coulomb_eval->add_option("--eta", eta, "Sommerfeld parameter")->required();
  coulomb_eval->add_option("--L", L, "order, L >= 0")->required();
  coulomb_eval->add_option("--rho", rhos, "arguments; repeatable")->required()->take_all();

  for (auto* sc : {basis, charge, asym, solve, verify, converge, coulomb}) sc->fallthrough();
  for (auto* sc : {charge_compute, asym_spectral, asym_eval, coulomb_eval}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (coulomb_eval->parsed()) {
    try {
      cmd_coulomb(eta, L, rhos);
      return 0;
    } catch (const std::invalid_argument& e) {
      return report("config", e, 2);
    } catch (const std::domain_error& e) {
      return report("config", e, 2);
    } catch (const NumericalError& e) {
      return report("numerical", e, 3);
    }
  }

  if (config_path.empty()) {
    std::cerr << "error: config: --config is required for this subcommand\n";
    return 2;
  }

  Outputs out{fs::path(out_dir)};
  try {
    const RunConfig cfg = load_config(config_path, overrides);
    if (basis->parsed()) cmd_basis(cfg, out);
    else if (charge_compute->parsed()) cmd_charge(cfg, out);
    else if (asym_spectral->parsed()) cmd_asym_spectral(cfg, out);
    else if (asym_eval->parsed()) cmd_asym_eval(cfg, out);
    else if (solve->parsed()) cmd_solve(cfg, out);
    else if (verify->parsed()) cmd_verify(cfg, out);
    else if (converge->parsed()) cmd_converge(cfg, out);
    for (const auto& p : out.written()) std::cerr << "wrote " << p.string() << "\n";
    return 0;
  } catch (const ConfigError& e) {
    out.rollback();
    return report("config", e, 2);
  } catch (const IoError& e) {
    out.rollback();
    return report("io", e, 4);
  } catch (const NumericalError& e) {
    out.rollback();
    return report("numerical", e, 3);
  } catch (const std::invalid_argument& e) {
    out.rollback();
    return report("config", e, 2);
  } catch (const std::domain_error& e) {
    out.rollback();
    return report("config", e, 2);
  } catch (const std::exception& e) {
    out.rollback();
    return report("numerical", e, 3);
  }
}

}  // namespace hyperscat::cli
