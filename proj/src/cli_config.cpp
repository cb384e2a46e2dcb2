#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "hyperscat/cli.hpp"
#include "hyperscat/errors.hpp"
#include "hyperscat/radial_solver.hpp"

namespace hyperscat::cli {

using nlohmann::json;

namespace {

// Collects every violation so the user sees them all at once.
class Problems {
 public:
  void add(std::string msg) { list_.push_back(std::move(msg)); }
  bool empty() const { return list_.empty(); }
  [[noreturn]] void raise() const {
    std::string all = "invalid configuration:";
    for (const auto& m : list_) all += "\n  - " + m;
    throw ConfigError(all);
  }

 private:
  std::vector<std::string> list_;
};

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known, Problems& pr) {
  if (!obj.is_object()) return;
  std::set<std::string> ok(known.begin(), known.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) pr.add(fmt::format("{}{}: unknown key", where, it.key()));
}

const json* section(const json& doc, const char* key, Problems& pr) {
  if (!doc.contains(key)) return nullptr;
  const json& s = doc[key];
  if (!s.is_object()) {
    pr.add(fmt::format("{}: must be an object", key));
    return nullptr;
  }
  return &s;
}

std::optional<double> number(const json* obj, const std::string& path, const char* key, Problems& pr, bool required) {
  if (!obj || !obj->contains(key) || (*obj)[key].is_null()) {
    if (required) pr.add(fmt::format("{}: required field missing", path));
    return std::nullopt;
  }
  const json& v = (*obj)[key];
  if (!v.is_number() || !std::isfinite(v.get<double>())) {
    pr.add(fmt::format("{}: must be a finite number", path));
    return std::nullopt;
  }
  return v.get<double>();
}

std::optional<int> integer(const json* obj, const std::string& path, const char* key, Problems& pr, bool required) {
  if (!obj || !obj->contains(key) || (*obj)[key].is_null()) {
    if (required) pr.add(fmt::format("{}: required field missing", path));
    return std::nullopt;
  }
  const json& v = (*obj)[key];
  if (!v.is_number_integer()) {
    pr.add(fmt::format("{}: must be an integer", path));
    return std::nullopt;
  }
  return v.get<int>();
}

std::optional<std::string> text(const json* obj, const std::string& path, const char* key, Problems& pr) {
  if (!obj || !obj->contains(key) || (*obj)[key].is_null()) return std::nullopt;
  if (!(*obj)[key].is_string()) {
    pr.add(fmt::format("{}: must be a string", path));
    return std::nullopt;
  }
  return (*obj)[key].get<std::string>();
}

std::optional<std::array<double, 3>> triple(const json* obj, const std::string& path, const char* key, Problems& pr) {
  if (!obj || !obj->contains(key)) {
    pr.add(fmt::format("{}: required field missing", path));
    return std::nullopt;
  }
  const json& v = (*obj)[key];
  if (!v.is_array() || v.size() != 3) {
    pr.add(fmt::format("{}: must be an array of 3 numbers", path));
    return std::nullopt;
  }
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
      pr.add(fmt::format("{}[{}]: must be a finite number", path, i));
      return std::nullopt;
    }
    out[i] = v[i].get<double>();
  }
  return out;
}

Grid grid(const json* obj, const std::string& path, Grid fallback, Problems& pr) {
  if (!obj || !obj->contains("grid")) return fallback;
  const json& g = (*obj)["grid"];
  Grid out;
  if (g.is_array()) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g[i].is_number() || !(g[i].get<double>() > 0.0)) {
        pr.add(fmt::format("{}[{}]: must be a positive number", path, i));
        return fallback;
      }
      out.values.push_back(g[i].get<double>());
    }
    for (std::size_t i = 1; i < out.values.size(); ++i)
      if (!(out.values[i] > out.values[i - 1])) {
        pr.add(fmt::format("{}: values must be strictly ascending", path));
        return fallback;
      }
    if (out.values.size() < 2) pr.add(fmt::format("{}: need at least 2 radii", path));
    return out;
  }
  if (!g.is_object()) {
    pr.add(fmt::format("{}: must be an array or {{lo, hi, points}}", path));
    return fallback;
  }
  reject_unknown(g, path + ".", {"lo", "hi", "points"}, pr);
  const auto lo = number(&g, path + ".lo", "lo", pr, true);
  const auto hi = number(&g, path + ".hi", "hi", pr, true);
  const auto n = integer(&g, path + ".points", "points", pr, true);
  if (!lo || !hi || !n) return fallback;
  if (!(*lo > 0.0) || !(*hi > *lo) || *n < 2) {
    pr.add(fmt::format("{}: need 0 < lo < hi and points >= 2", path));
    return fallback;
  }
  out.values = geometric_grid(*lo, *hi, *n);
  return out;
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--override expects KEY=VALUE, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("--override: empty path component in '" + key + "'");
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError("--override: '" + key + "' descends into a non-object");
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

RunConfig parse_config(const json& doc) {
  Problems pr;
  RunConfig cfg;
  if (!doc.is_object()) throw ConfigError("invalid configuration: top level must be a JSON object");
  reject_unknown(doc, "", {"system", "basis", "P", "charge", "asymptotics", "solver", "verify", "converge"}, pr);

  const json* sys = section(doc, "system", pr);
  if (!sys) pr.add("system: required field missing");
  if (sys) {
    reject_unknown(*sys, "system.", {"masses", "charges"}, pr);
    if (auto m = triple(sys, "system.masses", "masses", pr)) {
      for (int i = 0; i < 3; ++i)
        if (!((*m)[i] > 0.0)) pr.add(fmt::format("system.masses[{}]: must be > 0", i));
      cfg.system.masses = *m;
    }
    if (auto c = triple(sys, "system.charges", "charges", pr)) cfg.system.charges = *c;
  }

  const json* basis = section(doc, "basis", pr);
  if (!basis) pr.add("basis: required field missing");
  if (basis) reject_unknown(*basis, "basis.", {"k_max", "l_max"}, pr);
  bool basis_ok = false;
  if (auto k = integer(basis, "basis.k_max", "k_max", pr, basis != nullptr)) {
    if (*k < 0 || *k > 80) pr.add("basis.k_max: must be in [0, 80]");
    else {
      cfg.k_max = *k;
      basis_ok = true;
    }
  }
  if (auto l = integer(basis, "basis.l_max", "l_max", pr, false)) {
    if (*l < 0) {
      pr.add("basis.l_max: must be >= 0");
      basis_ok = false;
    } else {
      cfg.l_max = *l;
    }
  }

  if (auto P = number(&doc, "P", "P", pr, true)) {
    if (!(*P > 0.0)) pr.add("P: must be > 0");
    else cfg.P = *P;
  }

  const json* charge = section(doc, "charge", pr);
  if (charge) reject_unknown(*charge, "charge.", {"quad_order", "matrix"}, pr);
  if (auto q = integer(charge, "charge.quad_order", "quad_order", pr, false)) {
    if (basis_ok && *q < min_quad_order(cfg.k_max))
      pr.add(fmt::format("charge.quad_order: {} is below the minimum {} for k_max={}", *q,
                         min_quad_order(cfg.k_max), cfg.k_max));
    cfg.charge_quad_order = *q;
  } else if (basis_ok) {
    cfg.charge_quad_order = std::max(kDefaultChargeOrder, min_quad_order(cfg.k_max));
  }
  if (auto m = text(charge, "charge.matrix", "matrix", pr)) cfg.charge_matrix_path = *m;

  const json* asym = section(doc, "asymptotics", pr);
  if (asym) reject_unknown(*asym, "asymptotics.", {"z0", "grid"}, pr);
  if (auto z = text(asym, "asymptotics.z0", "z0", pr)) {
    try {
      cfg.z0 = z0_from_string(*z);
    } catch (const std::exception& e) {
      pr.add(std::string("asymptotics.z0: ") + e.what());
    }
  }
  cfg.asym_grid = grid(asym, "asymptotics.grid", Grid{geometric_grid(1e2, 1e3, 10)}, pr);

  const json* solver = section(doc, "solver", pr);
  if (solver) reject_unknown(*solver, "solver.", {"Rmin", "Rmax", "step", "bc_variant"}, pr);
  if (auto v = number(solver, "solver.Rmax", "Rmax", pr, false)) cfg.Rmax = *v;
  if (!(cfg.Rmax > 0.0)) pr.add("solver.Rmax: must be > 0");
  if (auto v = number(solver, "solver.Rmin", "Rmin", pr, false)) {
    if (!(*v > 0.0) || !(*v < cfg.Rmax)) pr.add("solver.Rmin: need 0 < Rmin < Rmax");
    cfg.Rmin = *v;
  }
  if (auto v = number(solver, "solver.step", "step", pr, false)) {
    if (!(*v > 0.0) || !(*v < cfg.Rmax)) pr.add("solver.step: need 0 < step < Rmax");
    cfg.step = *v;
  }
  if (auto v = text(solver, "solver.bc_variant", "bc_variant", pr)) {
    try {
      cfg.bc_variant = variant_from_string(*v);
    } catch (const std::exception& e) {
      pr.add(std::string("solver.bc_variant: ") + e.what());
    }
  }

  const json* ver = section(doc, "verify", pr);
  if (ver) reject_unknown(*ver, "verify.", {"grid", "window", "mode", "slope_tolerance"}, pr);
  cfg.verify_grid = grid(ver, "verify.grid", Grid{geometric_grid(1e2, 1e4, 25)}, pr);
  cfg.window_lo = cfg.verify_grid.values.front();
  cfg.window_hi = cfg.verify_grid.values.back();
  if (ver && ver->contains("window")) {
    const json& w = (*ver)["window"];
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
      pr.add("verify.window: must be [lo, hi]");
    } else {
      cfg.window_lo = w[0].get<double>();
      cfg.window_hi = w[1].get<double>();
      if (!(cfg.window_hi > cfg.window_lo) || cfg.window_lo < cfg.verify_grid.values.front() ||
          cfg.window_hi > cfg.verify_grid.values.back())
        pr.add("verify.window: must be an ascending range inside verify.grid");
    }
  }
  {
    int inside = 0;
    for (double r : cfg.verify_grid.values) inside += (r >= cfg.window_lo && r <= cfg.window_hi);
    if (inside < kMinFitPoints)
      pr.add(fmt::format("verify.grid: {} radii inside the fit window, need at least {}", inside, kMinFitPoints));
  }
  if (auto m = text(ver, "verify.mode", "mode", pr)) {
    if (*m == "analytic") cfg.verify_mode = DerivativeMode::analytic;
    else if (*m == "finite_difference") cfg.verify_mode = DerivativeMode::finite_difference;
    else pr.add("verify.mode: expected analytic | finite_difference");
  }
  if (auto t = number(ver, "verify.slope_tolerance", "slope_tolerance", pr, false)) {
    if (!(*t > 0.0) || *t >= 1.0) pr.add("verify.slope_tolerance: must be in (0, 1)");
    cfg.slope_tolerance = *t;
  }

  const json* conv = section(doc, "converge", pr);
  if (conv) reject_unknown(*conv, "converge.", {"grid"}, pr);
  cfg.converge_grid = grid(conv, "converge.grid", Grid{geometric_grid(50.0, 800.0, 17)}, pr);
  if (static_cast<int>(cfg.converge_grid.values.size()) < kMinFitPoints + 1)
    pr.add(fmt::format("converge.grid: need at least {} radii for a drift fit", kMinFitPoints + 1));

  // Domain checks that need the basis and P.
  if (basis_ok && cfg.P > 0.0) {
    const auto b = enumerate_basis(cfg.k_max, cfg.l_max);
    if (b.size() == 0) pr.add("basis: no channels for the given k_max / l_max");
    double ell_max = 0.0;
    for (const auto& ch : b.channels) ell_max = std::max(ell_max, ch.ell());
    // leading solutions need P R - ell pi / 2 > rho_min in every channel
    const double r_lead = (ell_max * std::numbers::pi / 2 + kRhoMin) / cfg.P;
    auto need = [&](const char* what, double R) {
      if (!(R > r_lead))
        pr.add(fmt::format("{}: R={} is inside the leading-solution exclusion zone; need R > {:.6g}", what, R,
                           r_lead));
    };
    need("verify.grid", cfg.verify_grid.values.front());
    need("converge.grid", cfg.converge_grid.values.front());
    if (cfg.bc_variant == BcVariant::leading) {
      need("solver.Rmax", cfg.Rmax);
      need("asymptotics.grid", cfg.asym_grid.values.front());
    } else if (!(cfg.P * cfg.asym_grid.values.front() > kRhoMin)) {
      pr.add("asymptotics.grid: P R must exceed the minimum Coulomb argument");
    }
    RealVector ell(static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i) ell(static_cast<Eigen::Index>(i)) = b.channels[i].ell();
    const double rmin = cfg.Rmin.value_or(b.size() ? default_Rmin(ell, cfg.P) : 0.0);
    if (!(cfg.converge_grid.values.front() > rmin)) pr.add("converge.grid: radii must exceed solver.Rmin");
  }

  if (!pr.empty()) pr.raise();
  cfg.document = doc;
  cfg.sha256 = sha256_hex(doc.dump());
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open configuration");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path.string() + ": configuration is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  RunConfig cfg = parse_config(doc);
  if (cfg.charge_matrix_path && cfg.charge_matrix_path->is_relative())
    cfg.charge_matrix_path = path.parent_path() / *cfg.charge_matrix_path;
  return cfg;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
  return out;
}

std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

}  // namespace hyperscat::cli
