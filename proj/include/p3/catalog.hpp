#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "p3/families.hpp"
#include "p3/parser.hpp"

namespace p3 {

struct CatalogError : std::runtime_error {
  explicit CatalogError(const std::string& what) : std::runtime_error(what) {}
};

struct CatalogEntry {
  std::string id;
  std::string family;  // "delta" | "gamma_pair" | "gamma_singleton"
  std::string eta;
  std::array<std::string, 3> psi{"1", "1", "1"};
  std::array<std::string, 3> phi{"1", "1", "1"};
  std::string zero;       // gamma_pair: zero slot; gamma_singleton: nonzero slot
  std::string shape;      // gamma_pair only
  std::string shape_num;  // separable parts, shape = num(first axis)/den(second axis)
  std::string shape_den;
  Params defaults;
  Domain domain{0.5, 2.0};
  std::string citation;
  std::string hamiltonian;  // reference only, provenance external
  std::string notes;
};

// Every row of the paper's four solution tables, on a positive-orthant
// default box where all entries are nonvanishing. Time-dependent rows
// carry t as an ordinary parameter fixed to 0 by default.
inline const char* catalog_json() {
  return R"JSON({
  "version": 1,
  "entries": [
    {"id": "euler-top", "family": "delta", "eta": "1",
     "psi": ["1","1","1"], "phi": ["x1","x2","x3"],
     "citation": "Table I, Euler top",
     "hamiltonian": "x1^2/2 + x2^2/4 + x3^2/6",
     "notes": "so(3) Lie-Poisson matrix; reference Hamiltonian uses inertia 1,2,3"},
    {"id": "kermack-mckendrick-t1", "family": "delta", "eta": "r*x1*x2",
     "psi": ["1","1","1"], "phi": ["1","1","1"],
     "params": {"r": 1.0, "a": 1.0},
     "citation": "Table I, Kermack-McKendrick",
     "hamiltonian": "x3 + (a/r)*ln(x1)",
     "notes": "separable matrix with a common factor; H is the standard SIR invariant"},
    {"id": "lorenz-1", "family": "delta", "eta": "1/2",
     "psi": ["1","1","1"],
     "phi": ["(r/sigma)*x1*exp((1-sigma)*t)", "-(x2*exp((sigma-1)*t))", "x3*exp((1-3*sigma)*t)"],
     "params": {"r": 28.0, "sigma": 10.0, "t": 0.0},
     "citation": "Table I, Lorenz (1)",
     "notes": "t enters as parameter; integration flagged experimental"},
    {"id": "lotka-volterra-t1", "family": "delta", "eta": "1",
     "psi": ["x1","x2","x3"], "phi": ["-1","-(b*c)","c"],
     "params": {"b": 1.0, "c": 1.0},
     "citation": "Table I, Lotka-Volterra",
     "notes": ""},
    {"id": "lotka-volterra-2", "family": "delta", "eta": "1",
     "psi": ["c*x1","x2","x3"], "phi": ["x1","-(x2+nu)","a*x3+mu"],
     "params": {"c": 1.0, "nu": 1.0, "a": 1.0, "mu": 1.0},
     "citation": "Table I, Lotka-Volterra (second row)",
     "notes": ""},
    {"id": "lotka-volterra-general", "family": "delta", "eta": "1",
     "psi": ["x1","x2","x3"], "phi": ["k23","k31","k12"],
     "params": {"k23": 1.0, "k31": 1.0, "k12": 1.0},
     "citation": "Table I, Lotka-Volterra and Generalized Lotka-Volterra",
     "notes": ""},
    {"id": "maxwell-bloch-c3", "family": "delta", "eta": "1",
     "psi": ["1","1","1"], "phi": ["nu*x1","mu*x2","nu+mu*x3"],
     "params": {"nu": 1.0, "mu": 1.0},
     "citation": "Table I, Maxwell-Bloch",
     "notes": ""},
    {"id": "rabinovich-1", "family": "delta", "eta": "1",
     "psi": ["1","1","1"], "phi": ["-(x1/4)","x2/4","(x3/2)*exp(-(2*nu*t))"],
     "params": {"nu": 1.0, "t": 0.0},
     "citation": "Table I, Ravinovich (1)",
     "notes": "t enters as parameter"},
    {"id": "rabinovich-2", "family": "delta", "eta": "1",
     "psi": ["1","1","1"], "phi": ["(x1/4)*exp(-(nu*t))","(x2/4)*exp(-(nu*t))","-(h/2)"],
     "params": {"nu": 1.0, "h": 1.0, "t": 0.0},
     "citation": "Table I, Ravinovich (2)",
     "notes": "t enters as parameter"},
    {"id": "rabinovich-4", "family": "delta", "eta": "1",
     "psi": ["1","1","1"],
     "phi": ["-((x1/2)*exp(-(nu*t)))","-((x2/2)*exp(nu1*t))","h*exp(nu1*t)"],
     "params": {"nu": 1.0, "nu1": 1.0, "h": 1.0, "t": 0.0},
     "citation": "Table I, Ravinovich (4)",
     "notes": "t enters as parameter"},
    {"id": "rabinovich-5", "family": "delta", "eta": "1",
     "psi": ["1","1","1"],
     "phi": ["(x1/2)*exp(nu2*t)","(x2/2)*exp(-(nu2*t))","-(h*exp(nu2*t))"],
     "params": {"nu2": 1.0, "h": 1.0, "t": 0.0},
     "citation": "Table I, Ravinovich (5)",
     "notes": "t enters as parameter"},
    {"id": "rtw-1", "family": "delta", "eta": "1",
     "psi": ["1","1","1"], "phi": ["x1","x2","(1/2)*exp(-(2*t))"],
     "params": {"t": 0.0},
     "citation": "Table I, RTW interaction (1)",
     "notes": "t enters as parameter"},
    {"id": "rtw-3", "family": "delta", "eta": "1",
     "psi": ["1","1","1"], "phi": ["2*x1*exp(-t)","2*x2*exp(-t)","exp(-t)"],
     "params": {"t": 0.0},
     "citation": "Table I, RTW interaction (3)",
     "notes": "t enters as parameter"},
    {"id": "rtw-4", "family": "delta", "eta": "1",
     "psi": ["1","1","1"],
     "phi": ["2*x1*exp(gamma*t)","2*x2*exp(gamma*t)","exp(-((2+gamma)*t))"],
     "params": {"gamma": 1.0, "t": 0.0},
     "citation": "Table I, RTW interaction (4)",
     "notes": "t enters as parameter"},
    {"id": "rtw-5", "family": "delta", "eta": "1",
     "psi": ["1","1","1"], "phi": ["delta*x1*exp(-(2*t))","delta*x2*exp(-(2*t))","delta/2"],
     "params": {"delta": 1.0, "t": 0.0},
     "citation": "Table I, RTW interaction (5)",
     "notes": "t enters as parameter"},
    {"id": "spin-system", "family": "delta", "eta": "1",
     "psi": ["1","1","1"], "phi": ["x1","x2","x3"],
     "citation": "Table I, Spin system",
     "hamiltonian": "x1^2/2 + x2^2/4 + x3^2/6",
     "notes": "same matrix as the Euler top"},

    {"id": "circle-maps-g2", "family": "gamma_pair", "zero": "u",
     "eta": "(x1*x3)^2", "shape": "-((x2/x1)^2)",
     "shape_num": "-(1/x1^2)", "shape_den": "1/x2^2",
     "citation": "Table II, Circle maps",
     "notes": ""},
    {"id": "may-leonard-g2", "family": "gamma_pair", "zero": "u",
     "eta": "1/((alpha-1)*x2^alpha)", "shape": "(x2/x1)^alpha",
     "shape_num": "x1^(-alpha)", "shape_den": "x2^(-alpha)",
     "params": {"alpha": 3.0},
     "citation": "Table II, May-Leonard",
     "notes": "alpha=1 would hit the log case; default 3 avoids it"},
    {"id": "rabinovich-6", "family": "gamma_pair", "zero": "u",
     "eta": "-((x2/2)*exp((nu1-2*nu2)*t))", "shape": "(x1/x2)*exp(2*(nu2-nu1)*t)",
     "shape_num": "x1*exp(2*(nu2-nu1)*t)", "shape_den": "x2",
     "params": {"nu1": 1.0, "nu2": 2.0, "t": 0.0},
     "citation": "Table II, Ravinovich (6)",
     "notes": "t enters as parameter"},
    {"id": "rabinovich-7", "family": "gamma_pair", "zero": "u",
     "eta": "(x2/2)*exp(-(nu2*t))", "shape": "(x1/x2)*exp(2*(nu2-nu3)*t)",
     "shape_num": "x1*exp(2*(nu2-nu3)*t)", "shape_den": "x2",
     "params": {"nu2": 1.0, "nu3": 2.0, "t": 0.0},
     "citation": "Table II, Ravinovich (7)",
     "notes": "t enters as parameter"},

    {"id": "kermack-mckendrick-t3", "family": "gamma_pair", "zero": "v",
     "eta": "-(a*x2)", "shape": "r*x1/a",
     "shape_num": "r*x1/a", "shape_den": "1",
     "params": {"r": 1.0, "a": 1.0},
     "citation": "Table III, Kermack-McKendrick",
     "notes": ""},
    {"id": "lorenz-t3", "family": "gamma_pair", "zero": "v",
     "eta": "-(x1/2)", "shape": "-(1/(2*x1))",
     "shape_num": "-(1/(2*x1))", "shape_den": "1",
     "citation": "Table III, Lorenz",
     "notes": ""},
    {"id": "lorenz-3", "family": "gamma_pair", "zero": "v",
     "eta": "-((x1/2)*exp(-(sigma*t)))", "shape": "-((sigma/x1)*exp((2*sigma-1)*t))",
     "shape_num": "-((sigma/x1)*exp((2*sigma-1)*t))", "shape_den": "1",
     "params": {"sigma": 10.0, "t": 0.0},
     "citation": "Table III, Lorenz (3)",
     "notes": "t enters as parameter"},
    {"id": "lorenz-5", "family": "gamma_pair", "zero": "v",
     "eta": "-((x1/2)*exp(-t))", "shape": "-(exp(t)/x1)",
     "shape_num": "-(exp(t)/x1)", "shape_den": "1",
     "params": {"t": 0.0},
     "citation": "Table III, Lorenz (5)",
     "notes": "t enters as parameter"},
    {"id": "maxwell-bloch-c1", "family": "gamma_pair", "zero": "v",
     "eta": "nu*x1", "shape": "1/x1",
     "shape_num": "1/x1", "shape_den": "1",
     "params": {"nu": 1.0},
     "citation": "Table III, Maxwell-Bloch (case 1)",
     "notes": ""},
    {"id": "maxwell-bloch-j2", "family": "gamma_pair", "zero": "v",
     "eta": "(1/k)*x1^g*x2^(1-g)*x3^(1-2*k)", "shape": "(k/(2*g))*x1^(1-2*g)*x3^(2*k-1)",
     "shape_num": "(k/(2*g))*x1^(1-2*g)", "shape_den": "x3^(1-2*k)",
     "params": {"k": 1.0, "g": 2.0},
     "citation": "Table III, Maxwell-Bloch (J2)",
     "notes": "eta depends on x2, which the family permits; the shape does not"},
    {"id": "two-level", "family": "gamma_pair", "zero": "v",
     "eta": "x3/(2*x1)", "shape": "x1/x3",
     "shape_num": "x1", "shape_den": "x3",
     "citation": "Table III, Two-level",
     "notes": ""},

    {"id": "circle-maps-j2", "family": "gamma_pair", "zero": "w",
     "eta": "(x1*x2)^2", "shape": "-((x3/x2)^2)",
     "shape_num": "-(1/x2^2)", "shape_den": "1/x3^2",
     "citation": "Table IV, Circle maps",
     "notes": ""},
    {"id": "lorenz-j2", "family": "gamma_pair", "zero": "w",
     "eta": "-(x3/2)", "shape": "x2/x3",
     "shape_num": "x2", "shape_den": "x3",
     "citation": "Table IV, Lorenz",
     "notes": ""},
    {"id": "maxwell-bloch-c2", "family": "gamma_pair", "zero": "w",
     "eta": "mu*x3", "shape": "x2/x3",
     "shape_num": "x2", "shape_den": "x3",
     "params": {"mu": 1.0},
     "citation": "Table IV, Maxwell-Bloch (case 2)",
     "notes": ""},
    {"id": "may-leonard-j2", "family": "gamma_pair", "zero": "w",
     "eta": "1/((alpha-1)*x3^alpha)", "shape": "(x3/x2)^alpha",
     "shape_num": "x2^(-alpha)", "shape_den": "x3^(-alpha)",
     "params": {"alpha": 3.0},
     "citation": "Table IV, May-Leonard",
     "notes": ""},
    {"id": "rabinovich-3", "family": "gamma_pair", "zero": "w",
     "eta": "(x3/2)*exp(-(nu3*t))", "shape": "(x2/x3)*exp(2*(nu3-nu)*t)",
     "shape_num": "x2*exp(2*(nu3-nu)*t)", "shape_den": "x3",
     "params": {"nu": 2.0, "nu3": 1.0, "t": 0.0},
     "citation": "Table IV, Ravinovich (3)",
     "notes": "t enters as parameter"},

    {"id": "so3-spherical", "family": "gamma_singleton", "zero": "w",
     "eta": "-(1/(x1*sin(x3)))",
     "citation": "so(3) in spherical coordinates (rho, theta, phi) = (x1, x2, x3)",
     "notes": "valid on rho > 0, 0 < phi < pi; default box lies inside"},
    {"id": "canonical-u", "family": "gamma_singleton", "zero": "u",
     "eta": "1",
     "citation": "constant canonical block in the (1,2) slot",
     "notes": ""}
  ]
})JSON";
}

namespace detail {

inline std::vector<CatalogEntry> load_catalog() {
  auto j = nlohmann::json::parse(catalog_json());
  std::vector<CatalogEntry> out;
  for (const auto& e : j.at("entries")) {
    CatalogEntry c;
    c.id = e.at("id").get<std::string>();
    c.family = e.at("family").get<std::string>();
    c.eta = e.at("eta").get<std::string>();
    if (e.contains("psi"))
      for (std::size_t i = 0; i < 3; ++i) c.psi[i] = e.at("psi")[i].get<std::string>();
    if (e.contains("phi"))
      for (std::size_t i = 0; i < 3; ++i) c.phi[i] = e.at("phi")[i].get<std::string>();
    if (e.contains("zero")) c.zero = e.at("zero").get<std::string>();
    if (e.contains("shape")) c.shape = e.at("shape").get<std::string>();
    if (e.contains("shape_num")) c.shape_num = e.at("shape_num").get<std::string>();
    if (e.contains("shape_den")) c.shape_den = e.at("shape_den").get<std::string>();
    if (e.contains("params"))
      for (auto it = e.at("params").begin(); it != e.at("params").end(); ++it)
        c.defaults[it.key()] = it.value().get<double>();
    if (e.contains("citation")) c.citation = e.at("citation").get<std::string>();
    if (e.contains("hamiltonian")) c.hamiltonian = e.at("hamiltonian").get<std::string>();
    if (e.contains("notes")) c.notes = e.at("notes").get<std::string>();
    out.push_back(std::move(c));
  }
  return out;
}

inline ZeroSlot slot_from_string(const std::string& s) {
  if (s == "u") return ZeroSlot::U;
  if (s == "v") return ZeroSlot::V;
  if (s == "w") return ZeroSlot::W;
  throw CatalogError("bad slot name: " + s);
}

}  // namespace detail

inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = detail::load_catalog();
  return entries;
}

inline const CatalogEntry& catalog_get(const std::string& id) {
  for (const auto& e : catalog())
    if (e.id == id) return e;
  throw CatalogError("unknown catalog id: " + id);
}

inline Params merged_params(const CatalogEntry& e, const Params& overrides) {
  Params p = e.defaults;
  for (const auto& [k, v] : overrides) p[k] = v;
  return p;
}

inline DeltaSpec catalog_delta_spec(const CatalogEntry& e, const Params& overrides = {}) {
  if (e.family != "delta") throw CatalogError(e.id + " is not a delta entry");
  DeltaSpec s;
  s.eta = parse(e.eta);
  for (std::size_t i = 0; i < 3; ++i) {
    s.psi[i] = parse(e.psi[i]);
    s.phi[i] = parse(e.phi[i]);
  }
  s.params = merged_params(e, overrides);
  s.domain = e.domain;
  return s;
}

inline GammaPairSpec catalog_gamma_pair_spec(const CatalogEntry& e,
                                             const Params& overrides = {}) {
  if (e.family != "gamma_pair") throw CatalogError(e.id + " is not a gamma_pair entry");
  GammaPairSpec s;
  s.zero = detail::slot_from_string(e.zero);
  s.eta = parse(e.eta);
  s.shape = parse(e.shape);
  if (!e.shape_num.empty()) s.shape_num = parse(e.shape_num);
  if (!e.shape_den.empty()) s.shape_den = parse(e.shape_den);
  s.params = merged_params(e, overrides);
  s.domain = e.domain;
  return s;
}

inline GammaSingletonSpec catalog_gamma_singleton_spec(const CatalogEntry& e,
                                                       const Params& overrides = {}) {
  if (e.family != "gamma_singleton")
    throw CatalogError(e.id + " is not a gamma_singleton entry");
  GammaSingletonSpec s;
  s.nonzero = detail::slot_from_string(e.zero);
  s.eta = parse(e.eta);
  s.params = merged_params(e, overrides);
  s.domain = e.domain;
  return s;
}

inline StructureMatrix instantiate(const std::string& id, const Params& overrides = {}) {
  const CatalogEntry& e = catalog_get(id);
  if (e.family == "delta") return build_delta(catalog_delta_spec(e, overrides));
  if (e.family == "gamma_pair")
    return build_gamma_pair(catalog_gamma_pair_spec(e, overrides));
  return build_gamma_singleton(catalog_gamma_singleton_spec(e, overrides));
}

}  // namespace p3
