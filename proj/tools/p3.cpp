#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "p3/json_io.hpp"

namespace {

using namespace p3;

struct Common {
  std::vector<std::string> params;
  std::string domain_str;
  double tol = -1.0;  // -1 = subcommand default
  int samples = 1000;
  std::uint64_t seed = 42;
  std::string format = "json";
  std::vector<std::string> catalog_ids;
  std::vector<std::string> spec_files;
  std::string u_str, v_str, w_str;
};

void add_common(CLI::App* cmd, Common& c, bool with_source = true) {
  cmd->add_option("--params", c.params, "parameter bindings k=v (repeatable)");
  cmd->add_option("--domain", c.domain_str,
                  "open box: \"lo,hi\" for all axes or \"lo,hi,lo,hi,lo,hi\"");
  cmd->add_option("--tol", c.tol, "tolerance (subcommand-specific default)");
  cmd->add_option("--samples", c.samples, "sample count (default 1000)");
  cmd->add_option("--seed", c.seed, "sampling seed (default 42)");
  cmd->add_option("--format", c.format, "json | csv | text")
      ->check(CLI::IsMember({"json", "csv", "text"}));
  if (with_source) {
    cmd->add_option("--catalog", c.catalog_ids, "catalog entry id");
    cmd->add_option("--spec", c.spec_files, "JSON spec file (structure or family)");
    cmd->add_option("-u", c.u_str, "inline expression for u = J12");
    cmd->add_option("-v", c.v_str, "inline expression for v = J31");
    cmd->add_option("-w", c.w_str, "inline expression for w = J23");
  }
}

Params parse_params(const std::vector<std::string>& kvs) {
  Params p;
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw CLI::ValidationError("--params", "expected k=v, got '" + kv + "'");
    p[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  return p;
}

std::optional<Domain> parse_domain(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  if (vals.size() == 2) return Domain(vals[0], vals[1]);
  if (vals.size() == 6)
    return Domain({vals[0], vals[2], vals[4]}, {vals[1], vals[3], vals[5]});
  throw CLI::ValidationError("--domain", "expected 2 or 6 comma-separated numbers");
}

json config_json(const Common& c, double tol_used) {
  json j;
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  j["tol"] = tol_used;
  j["format"] = c.format;
  j["params"] = params_to_json(parse_params(c.params));
  if (!c.domain_str.empty()) j["domain"] = domain_to_json(*parse_domain(c.domain_str));
  return j;
}

int source_count(const Common& c) {
  int n = static_cast<int>(c.catalog_ids.size() + c.spec_files.size());
  if (!c.u_str.empty() || !c.v_str.empty() || !c.w_str.empty()) ++n;
  return n;
}

// Family spec, when the source carries one (catalog entries and family
// spec files do; inline u,v,w and plain structure files do not).
std::optional<FamilySpec> load_family(const Common& c) {
  Params overrides = parse_params(c.params);
  auto dom = parse_domain(c.domain_str);
  if (!c.catalog_ids.empty()) {
    const CatalogEntry& e = catalog_get(c.catalog_ids.front());
    FamilySpec s = [&]() -> FamilySpec {
      if (e.family == "delta") return catalog_delta_spec(e, overrides);
      if (e.family == "gamma_pair") return catalog_gamma_pair_spec(e, overrides);
      return catalog_gamma_singleton_spec(e, overrides);
    }();
    if (dom) std::visit([&](auto& spec) { spec.domain = *dom; }, s);
    return s;
  }
  if (!c.spec_files.empty()) {
    std::ifstream in(c.spec_files.front());
    if (!in) throw CLI::ValidationError("--spec", "cannot open " + c.spec_files.front());
    json j = json::parse(in);
    if (!j.contains("family")) return std::nullopt;
    FamilySpec s = family_from_json(j);
    std::visit(
        [&](auto& spec) {
          for (const auto& [k, vv] : overrides) spec.params[k] = vv;
          if (dom) spec.domain = *dom;
        },
        s);
    return s;
  }
  return std::nullopt;
}

StructureMatrix load_structure(const Common& c) {
  if (source_count(c) != 1)
    throw CLI::ValidationError("input", "exactly one of --catalog, --spec, or -u/-v/-w");
  if (auto fam = load_family(c)) return build_family(*fam);
  Params overrides = parse_params(c.params);
  auto dom = parse_domain(c.domain_str);
  if (!c.spec_files.empty()) {
    std::ifstream in(c.spec_files.front());
    json j = json::parse(in);
    StructureMatrix m = structure_from_json(j);
    for (const auto& [k, vv] : overrides) m.params[k] = vv;
    if (dom) m.domain = *dom;
    return m;
  }
  if (c.u_str.empty() || c.v_str.empty() || c.w_str.empty())
    throw CLI::ValidationError("input", "inline source needs all of -u, -v, -w");
  StructureMatrix m;
  m.u = parse(c.u_str);
  m.v = parse(c.v_str);
  m.w = parse(c.w_str);
  m.params = overrides;
  m.domain = dom.value_or(Domain(0.5, 2.0));
  return m;
}

void emit(const json& j, const std::string& format) {
  if (format == "text") {
    std::cout << j.dump(2) << "\n";  // same content, indented
  } else {
    std::cout << j.dump(2) << "\n";
  }
}

int cmd_verify(const Common& c) {
  double tol = c.tol > 0 ? c.tol : 1e-9;
  StructureMatrix m = load_structure(c);
  JacobiReport rep = check_jacobi(m, c.samples, tol, c.seed);
  json out;
  out["config"] = config_json(c, tol);
  out["structure"] = to_json(m);
  out["jacobi"] = to_json(rep);
  emit(out, c.format);
  return rep.pass ? 0 : 1;
}

int cmd_classify(const Common& c) {
  double tol = c.tol > 0 ? c.tol : 1e-9;
  StructureMatrix m = load_structure(c);
  Classification cl = classify(m);
  json out;
  out["config"] = config_json(c, tol);
  out["structure"] = to_json(m);
  out["classification"] = to_json(cl);
  emit(out, c.format);
  return 0;
}

CasimirFn family_casimir(const FamilySpec& s) {
  return std::visit(
      [](const auto& spec) -> CasimirFn {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, DeltaSpec>) return casimir_delta(spec);
        else if constexpr (std::is_same_v<T, GammaPairSpec>) return casimir_gamma_pair(spec);
        else return casimir_gamma_singleton(spec);
      },
      s);
}

DarbouxChart family_chart(const FamilySpec& s) {
  return std::visit(
      [](const auto& spec) -> DarbouxChart {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, DeltaSpec>) return darboux_delta(spec);
        else if constexpr (std::is_same_v<T, GammaPairSpec>) return darboux_gamma_pair(spec);
        else return darboux_gamma_singleton(spec);
      },
      s);
}

int cmd_casimir(const Common& c) {
  double tol = c.tol > 0 ? c.tol : 1e-9;
  auto fam = load_family(c);
  if (!fam)
    throw CLI::ValidationError("input", "casimir needs a family source (--catalog or family --spec)");
  StructureMatrix m = build_family(*fam);
  CasimirFn C = family_casimir(*fam);
  Sampler sampler(m.domain, c.seed);
  double max_res = 0.0;
  for (int k = 0; k < c.samples; ++k) {
    Point p = sampler.next();
    Point g = C.grad(p);
    Mat3 J = m.matrix_at(p);
    double gn = std::max({std::fabs(g[0]), std::fabs(g[1]), std::fabs(g[2])});
    for (std::size_t i = 0; i < 3; ++i) {
      double r = J[i][0] * g[0] + J[i][1] * g[1] + J[i][2] * g[2];
      max_res = std::max(max_res, std::fabs(r) / (1.0 + gn));
    }
  }
  bool pass = max_res <= tol;
  json out;
  out["config"] = config_json(c, tol);
  out["structure"] = to_json(m);
  out["casimir"] = {{"provenance", C.provenance},
                    {"value_at_center", C.value(m.domain.center())},
                    {"max_annihilation_residual", max_res},
                    {"pass", pass}};
  emit(out, c.format);
  return pass ? 0 : 1;
}

int cmd_darboux(const Common& c, const std::string& out_file) {
  double tol = c.tol > 0 ? c.tol : 1e-8;
  auto fam = load_family(c);
  if (!fam)
    throw CLI::ValidationError("input", "darboux needs a family source (--catalog or family --spec)");
  StructureMatrix m = build_family(*fam);
  DarbouxChart chart = family_chart(*fam);
  ChartReport rep = verify_chart(m, chart, c.samples, tol, c.seed);
  json chart_json = chart_to_json(chart);
  chart_json["report"] = to_json(rep);
  json out;
  out["config"] = config_json(c, tol);
  out["structure"] = to_json(m);
  out["chart"] = chart_json;
  emit(out, c.format);
  if (!out_file.empty()) {
    std::ofstream f(out_file);
    f << chart_json.dump(2) << "\n";
  }
  return rep.pass ? 0 : 1;
}

int cmd_superpose(const Common& c, const std::string& op, double scalar) {
  double tol = c.tol > 0 ? c.tol : 1e-9;
  // collect sources in order: catalog ids first, then spec files
  std::vector<StructureMatrix> mats;
  Params overrides = parse_params(c.params);
  auto dom = parse_domain(c.domain_str);
  for (const auto& id : c.catalog_ids) mats.push_back(instantiate(id, overrides));
  for (const auto& file : c.spec_files) {
    std::ifstream in(file);
    if (!in) throw CLI::ValidationError("--spec", "cannot open " + file);
    json j = json::parse(in);
    StructureMatrix m =
        j.contains("family") ? build_family(family_from_json(j)) : structure_from_json(j);
    mats.push_back(std::move(m));
  }
  if (dom)
    for (auto& m : mats) m.domain = *dom;
  StructureMatrix result;
  if (op == "oplus") {
    if (mats.size() != 2)
      throw CLI::ValidationError("superpose", "--op oplus needs exactly two sources");
    result = oplus(mats[0], mats[1]);
  } else {
    if (mats.size() != 1)
      throw CLI::ValidationError("superpose", "--op otimes needs exactly one source");
    result = otimes(scalar, mats[0]);
  }
  JacobiReport rep = check_jacobi(result, c.samples, tol, c.seed);
  json out;
  out["config"] = config_json(c, tol);
  out["op"] = op;
  if (op == "otimes") out["scalar"] = scalar;
  out["result"] = to_json(result);
  out["jacobi"] = to_json(rep);
  emit(out, c.format);
  return rep.pass ? 0 : 1;
}

void print_csv(const Trajectory& tr, bool with_c, bool with_tau) {
  std::printf("t,x1,x2,x3,H%s%s\n", with_c ? ",C" : "", with_tau ? ",tau" : "");
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    std::printf("%.17g,%.17g,%.17g,%.17g,%.17g", tr.t[i], tr.x[i][0], tr.x[i][1],
                tr.x[i][2], tr.H[i]);
    if (with_c) std::printf(",%.17g", tr.C[i]);
    if (with_tau) std::printf(",%.17g", tr.tau[i]);
    std::printf("\n");
  }
}

int cmd_integrate(const Common& c, const std::string& h_str, const std::string& x0_str,
                  double t0, double t1, double step, int stride, bool adaptive,
                  bool reparam) {
  if (h_str.empty()) throw CLI::ValidationError("--hamiltonian", "required");
  std::vector<double> x0v;
  {
    std::stringstream ss(x0_str);
    std::string tok;
    while (std::getline(ss, tok, ',')) x0v.push_back(std::stod(tok));
  }
  if (x0v.size() != 3) throw CLI::ValidationError("--x0", "expected three components a,b,c");
  Point x0{x0v[0], x0v[1], x0v[2]};

  auto fam = load_family(c);
  StructureMatrix m = fam ? build_family(*fam) : load_structure(c);
  PoissonSystem sys{m, parse(h_str)};
  StepControl ctl;
  ctl.h = step;
  ctl.stride = stride;
  ctl.adaptive = adaptive;
  if (c.tol > 0) ctl.tol = c.tol;

  Trajectory tr;
  bool with_c = false, with_tau = false;
  if (reparam) {
    if (!fam)
      throw CLI::ValidationError("--reparam", "needs a family source (--catalog or family --spec)");
    DarbouxChart chart = family_chart(*fam);
    Point z0 = chart.forward.forward(x0);
    tr = integrate_reparam(sys, chart, z0, t0, t1, ctl);
    with_tau = true;
  } else {
    std::optional<CasimirFn> C;
    if (fam) C = family_casimir(*fam);
    tr = integrate(sys, x0, t0, t1, ctl, C ? &*C : nullptr);
    with_c = C.has_value();
  }
  print_csv(tr, with_c, with_tau);
  std::fprintf(stderr, "status: %s\n", to_string(tr.status));
  return tr.status == HaltStatus::NumericalFailure ? 1 : 0;
}

int cmd_catalog(const Common& c, const std::string& action, const std::string& id) {
  if (action == "list") {
    json a = json::array();
    for (const auto& e : catalog())
      a.push_back({{"id", e.id}, {"family", e.family}, {"citation", e.citation}});
    emit(a, c.format);
    return 0;
  }
  if (action == "show") {
    if (id.empty()) throw CLI::ValidationError("catalog show", "needs an entry id");
    emit(to_json(catalog_get(id)), c.format);
    return 0;
  }
  if (action == "export") {
    json full = json::parse(catalog_json());
    emit(full, c.format);
    return 0;
  }
  throw CLI::ValidationError("catalog", "action must be list, show, or export");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"three-dimensional Poisson structures: verification, reduction, dynamics"};
  app.require_subcommand(1);

  Common c_verify, c_classify, c_casimir, c_darboux, c_superpose, c_integrate, c_catalog;

  auto* sub_verify = app.add_subcommand("verify", "check the Jacobi identity");
  add_common(sub_verify, c_verify);

  auto* sub_classify = app.add_subcommand("classify", "zero-pattern family classification");
  add_common(sub_classify, c_classify);

  auto* sub_casimir = app.add_subcommand("casimir", "construct and check the Casimir invariant");
  add_common(sub_casimir, c_casimir);

  std::string darboux_out;
  auto* sub_darboux = app.add_subcommand("darboux", "build and verify a global Darboux chart");
  add_common(sub_darboux, c_darboux);
  sub_darboux->add_option("--out", darboux_out, "write the chart JSON to a file");

  std::string sup_op = "oplus";
  double sup_scalar = 1.0;
  auto* sub_superpose = app.add_subcommand("superpose", "combine structures (oplus/otimes)");
  add_common(sub_superpose, c_superpose);
  sub_superpose->add_option("--op", sup_op, "oplus | otimes")
      ->check(CLI::IsMember({"oplus", "otimes"}));
  sub_superpose->add_option("--scalar", sup_scalar, "exponent for otimes");

  std::string h_str, x0_str = "1,1,1";
  double t0 = 0.0, t1 = 1.0, step = 1e-3;
  int stride = 1;
  bool adaptive = false, reparam = false;
  auto* sub_integrate = app.add_subcommand("integrate", "RK4 trajectory with conservation columns");
  add_common(sub_integrate, c_integrate);
  sub_integrate->add_option("--hamiltonian,-H", h_str, "Hamiltonian expression");
  sub_integrate->add_option("--x0", x0_str, "initial point a,b,c");
  sub_integrate->add_option("--t0", t0, "start time");
  sub_integrate->add_option("--t1", t1, "end time");
  sub_integrate->add_option("--step", step, "RK4 step size");
  sub_integrate->add_option("--stride", stride, "record every Nth step");
  sub_integrate->add_flag("--adaptive", adaptive, "step-doubling error control");
  sub_integrate->add_flag("--reparam", reparam,
                          "integrate in canonical coordinates with reparametrized time");

  std::string cat_action, cat_id;
  auto* sub_catalog = app.add_subcommand("catalog", "list | show | export");
  add_common(sub_catalog, c_catalog, /*with_source=*/false);
  sub_catalog->add_option("action", cat_action, "list | show | export")->required();
  sub_catalog->add_option("id", cat_id, "entry id (for show)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (sub_verify->parsed()) return cmd_verify(c_verify);
    if (sub_classify->parsed()) return cmd_classify(c_classify);
    if (sub_casimir->parsed()) return cmd_casimir(c_casimir);
    if (sub_darboux->parsed()) return cmd_darboux(c_darboux, darboux_out);
    if (sub_superpose->parsed()) return cmd_superpose(c_superpose, sup_op, sup_scalar);
    if (sub_integrate->parsed())
      return cmd_integrate(c_integrate, h_str, x0_str, t0, t1, step, stride, adaptive,
                           reparam);
    if (sub_catalog->parsed()) return cmd_catalog(c_catalog, cat_action, cat_id);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "expression error: " << e.what() << "\n";
    return 2;
  } catch (const CatalogError& e) {
    std::cerr << "catalog error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "json error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
