#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "p3/catalog.hpp"
#include "p3/dynamics.hpp"
#include "p3/families.hpp"
#include "p3/parser.hpp"
#include "p3/reduction.hpp"
#include "p3/structure.hpp"

namespace p3 {

using json = nlohmann::ordered_json;

inline json domain_to_json(const Domain& d) {
  json a = json::array();
  for (std::size_t i = 0; i < 3; ++i) a.push_back({d.lo[i], d.hi[i]});
  return a;
}

inline Domain domain_from_json(const json& a) {
  if (!a.is_array() || a.size() != 3)
    throw std::invalid_argument("domain must be an array of three [lo,hi] pairs");
  std::array<double, 3> lo{}, hi{};
  for (std::size_t i = 0; i < 3; ++i) {
    lo[i] = a[i].at(0).get<double>();
    hi[i] = a[i].at(1).get<double>();
  }
  return Domain(lo, hi);
}

inline json params_to_json(const Params& p) {
  json j = json::object();
  for (const auto& [k, v] : p) j[k] = v;
  return j;
}

inline Params params_from_json(const json& j) {
  Params p;
  for (auto it = j.begin(); it != j.end(); ++it) p[it.key()] = it.value().get<double>();
  return p;
}

inline json to_json(const StructureMatrix& m) {
  return json{{"u", m.u.str()},
              {"v", m.v.str()},
              {"w", m.w.str()},
              {"params", params_to_json(m.params)},
              {"domain", domain_to_json(m.domain)}};
}

inline StructureMatrix structure_from_json(const json& j) {
  StructureMatrix m;
  m.u = parse(j.at("u").get<std::string>());
  m.v = parse(j.at("v").get<std::string>());
  m.w = parse(j.at("w").get<std::string>());
  if (j.contains("params")) m.params = params_from_json(j.at("params"));
  if (j.contains("domain")) m.domain = domain_from_json(j.at("domain"));
  return m;
}

using FamilySpec = std::variant<DeltaSpec, GammaPairSpec, GammaSingletonSpec>;

inline FamilySpec family_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  Params params = j.contains("params") ? params_from_json(j.at("params")) : Params{};
  Domain domain = j.contains("domain") ? domain_from_json(j.at("domain")) : Domain(0.5, 2.0);
  if (family == "delta") {
    DeltaSpec s;
    s.eta = parse(j.at("eta").get<std::string>());
    for (std::size_t i = 0; i < 3; ++i) {
      s.psi[i] = parse(j.at("psi")[i].get<std::string>());
      s.phi[i] = parse(j.at("phi")[i].get<std::string>());
    }
    s.params = std::move(params);
    s.domain = domain;
    return s;
  }
  if (family == "gamma_pair") {
    GammaPairSpec s;
    s.zero = detail::slot_from_string(j.at("zero").get<std::string>());
    s.eta = parse(j.at("eta").get<std::string>());
    s.shape = parse(j.at("shape").get<std::string>());
    if (j.contains("shape_num")) s.shape_num = parse(j.at("shape_num").get<std::string>());
    if (j.contains("shape_den")) s.shape_den = parse(j.at("shape_den").get<std::string>());
    s.params = std::move(params);
    s.domain = domain;
    return s;
  }
  if (family == "gamma_singleton") {
    GammaSingletonSpec s;
    s.nonzero = detail::slot_from_string(j.at("zero").get<std::string>());
    s.eta = parse(j.at("eta").get<std::string>());
    s.params = std::move(params);
    s.domain = domain;
    return s;
  }
  throw std::invalid_argument("unknown family: " + family);
}

inline StructureMatrix build_family(const FamilySpec& s) {
  return std::visit(
      [](const auto& spec) -> StructureMatrix {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, DeltaSpec>) return build_delta(spec);
        else if constexpr (std::is_same_v<T, GammaPairSpec>) return build_gamma_pair(spec);
        else return build_gamma_singleton(spec);
      },
      s);
}

inline json to_json(const JacobiReport& r) {
  return json{{"max_absolute_residual", r.max_absolute_residual},
              {"max_relative_residual", r.max_relative_residual},
              {"argmax_point", {r.argmax_point[0], r.argmax_point[1], r.argmax_point[2]}},
              {"sample_count", r.sample_count},
              {"pass", r.pass},
              {"reliable", r.reliable}};
}

inline json to_json(const Classification& c) {
  json j;
  std::string tag = to_string(c.tag);
  if (c.slot) {
    if (c.tag == FamilyTag::GammaPair)
      tag += std::string("(") + to_string(*c.slot) + " zero)";
    else if (c.tag == FamilyTag::GammaSingleton)
      tag += std::string("(") + to_string(*c.slot) + " nonzero)";
  }
  j["tag"] = tag;
  j["zero_pattern"] = {to_string(c.zero_pattern[0]), to_string(c.zero_pattern[1]),
                       to_string(c.zero_pattern[2])};
  j["notes"] = c.notes;
  return j;
}

inline json to_json(const ChartReport& r) {
  return json{{"max_deviation", r.max_deviation},
              {"max_roundtrip_error", r.max_roundtrip_error},
              {"sample_count", r.sample_count},
              {"pass", r.pass}};
}

inline json chart_to_json(const DarbouxChart& c) {
  json target = json::array();
  for (const auto& row : c.target) target.push_back({row[0], row[1], row[2]});
  return json{{"kind", c.kind},
              {"mu_hat", c.mu_description},
              {"target", target},
              {"casimir_slot", c.casimir_slot + 1}};
}

inline json to_json(const CatalogEntry& e) {
  json j;
  j["id"] = e.id;
  j["family"] = e.family;
  j["eta"] = e.eta;
  if (e.family == "delta") {
    j["psi"] = {e.psi[0], e.psi[1], e.psi[2]};
    j["phi"] = {e.phi[0], e.phi[1], e.phi[2]};
  }
  if (!e.zero.empty()) j["zero"] = e.zero;
  if (!e.shape.empty()) j["shape"] = e.shape;
  if (!e.shape_num.empty()) j["shape_num"] = e.shape_num;
  if (!e.shape_den.empty()) j["shape_den"] = e.shape_den;
  j["params"] = params_to_json(e.defaults);
  j["domain"] = domain_to_json(e.domain);
  j["citation"] = e.citation;
  if (!e.hamiltonian.empty()) j["hamiltonian"] = e.hamiltonian;
  if (!e.notes.empty()) j["notes"] = e.notes;
  return j;
}

inline json to_json(const std::vector<Drift>& drifts) {
  json a = json::array();
  for (const auto& d : drifts)
    a.push_back({{"name", d.name},
                 {"max_drift", d.max_drift},
                 {"relative_drift", d.relative_drift}});
  return a;
}

}  // namespace p3
