#ifndef KOOPGAL_CONFIG_HPP
#define KOOPGAL_CONFIG_HPP

#include <cmath>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "basis.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "koopman.hpp"
#include "polynomial.hpp"

namespace koopgal {

/// A polynomial ODE problem as read from a config document. The vector
/// field, observables and initial state are in the original coordinates;
/// the domain box is mapped onto [-1,1]^m before projection.
struct SystemSpec {
  std::string name;
  std::vector<std::string> states;
  VectorField vf;
  std::vector<double> domain_center;
  std::vector<double> domain_half_width;
  std::vector<double> initial_state;
  int order = 0;
  double t_final = 0.0;
  int num_steps = 100;
  bool identity_observables = true;
  ObservableSet observables;

  int dimension() const noexcept { return static_cast<int>(states.size()); }

  friend bool operator==(const SystemSpec &, const SystemSpec &) = default;
};

namespace detail {

using nlohmann::json;

inline const json &require_field(const json &obj, const std::string &key, const std::string &path) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw SchemaError(path + "/" + key, "missing required field");
  return *it;
}

inline void reject_unknown(const json &obj, const std::set<std::string> &allowed,
                           const std::string &path) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw SchemaError(path + "/" + it.key(), "unknown field");
}

inline const json &as_object(const json &v, const std::string &path) {
  if (!v.is_object())
    throw SchemaError(path, "expected an object");
  return v;
}

inline const json &as_array(const json &v, const std::string &path) {
  if (!v.is_array())
    throw SchemaError(path, "expected an array");
  return v;
}

inline double as_number(const json &v, const std::string &path) {
  if (!v.is_number())
    throw SchemaError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d))
    throw SchemaError(path, "expected a finite number");
  return d;
}

inline int as_int(const json &v, const std::string &path) {
  if (v.is_number_integer())
    return v.get<int>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 1e9)
      return static_cast<int>(d);
  }
  throw SchemaError(path, "expected an integer");
}

inline std::string as_string(const json &v, const std::string &path) {
  if (!v.is_string())
    throw SchemaError(path, "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> as_vector(const json &v, const std::string &path, int m) {
  as_array(v, path);
  if (static_cast<int>(v.size()) != m)
    throw SchemaError(path, "expected " + std::to_string(m) + " entries, got " +
                                std::to_string(v.size()));
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k)
    out.push_back(as_number(v[k], path + "/" + std::to_string(k)));
  return out;
}

/// {"terms": [{"coef": c, "exp": [...]}, ...]} plus any extra allowed keys.
inline Polynomial parse_terms(const json &obj, const std::string &path, int m) {
  const json &terms = as_array(require_field(obj, "terms", path), path + "/terms");
  std::vector<Monomial> out;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string tp = path + "/terms/" + std::to_string(t);
    as_object(terms[t], tp);
    reject_unknown(terms[t], {"coef", "exp"}, tp);
    const double coef = as_number(require_field(terms[t], "coef", tp), tp + "/coef");
    const json &exp = as_array(require_field(terms[t], "exp", tp), tp + "/exp");
    if (static_cast<int>(exp.size()) != m)
      throw SchemaError(tp + "/exp", "expected " + std::to_string(m) + " exponents, got " +
                                         std::to_string(exp.size()));
    Exponent e;
    for (std::size_t k = 0; k < exp.size(); ++k) {
      const std::string ep = tp + "/exp/" + std::to_string(k);
      const int v = as_int(exp[k], ep);
      if (v < 0 || v > kMaxExponent)
        throw ValidationError(ep + ": exponent must lie in [0, " + std::to_string(kMaxExponent) +
                              "]");
      e.push_back(v);
    }
    out.push_back({coef, std::move(e)});
  }
  return Polynomial::canonical(std::move(out), m);
}

inline json terms_to_json(const Polynomial &p) {
  json terms = json::array();
  for (const auto &t : p.terms())
    terms.push_back({{"coef", t.coef}, {"exp", t.exp}});
  return terms;
}

inline void check_name(const std::string &name, const std::string &path) {
  if (name.empty())
    throw ValidationError(path + ": name must be non-empty");
  for (char ch : name) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '_' || ch == '-' || ch == '.';
    if (!ok)
      throw ValidationError(path + ": name '" + name + "' may only contain [A-Za-z0-9_.-]");
  }
}

} // namespace detail

/// Parses and validates a JSON system config. Throws SchemaError for
/// structural problems and ValidationError for violated invariants.
inline SystemSpec parse_system_config(std::string_view text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw SchemaError("", std::string("malformed JSON: ") + e.what());
  }
  detail::as_object(doc, "");
  detail::reject_unknown(doc,
                         {"name", "states", "dynamics", "domain", "initial_state", "order",
                          "t_final", "num_steps", "observables"},
                         "");

  SystemSpec spec;
  spec.name = detail::as_string(detail::require_field(doc, "name", ""), "/name");
  detail::check_name(spec.name, "/name");

  const json &states = detail::as_array(detail::require_field(doc, "states", ""), "/states");
  std::set<std::string> seen;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const std::string sp = "/states/" + std::to_string(k);
    auto s = detail::as_string(states[k], sp);
    detail::check_name(s, sp);
    if (!seen.insert(s).second)
      throw ValidationError(sp + ": duplicate state name '" + s + "'");
    spec.states.push_back(std::move(s));
  }
  const int m = spec.dimension();
  if (m < 1 || m > kMaxDimension)
    throw ValidationError("/states: state count must lie in [1, " +
                          std::to_string(kMaxDimension) + "]");

  const json &dyn = detail::as_array(detail::require_field(doc, "dynamics", ""), "/dynamics");
  if (static_cast<int>(dyn.size()) != m)
    throw SchemaError("/dynamics", "expected one entry per state (" + std::to_string(m) + ")");
  std::vector<Polynomial> comps;
  for (std::size_t j = 0; j < dyn.size(); ++j) {
    const std::string dp = "/dynamics/" + std::to_string(j);
    detail::as_object(dyn[j], dp);
    detail::reject_unknown(dyn[j], {"terms"}, dp);
    comps.push_back(detail::parse_terms(dyn[j], dp, m));
  }
  spec.vf = VectorField(std::move(comps));

  spec.domain_center.assign(m, 0.0);
  spec.domain_half_width.assign(m, 1.0);
  if (auto it = doc.find("domain"); it != doc.end()) {
    detail::as_object(*it, "/domain");
    detail::reject_unknown(*it, {"center", "half_width"}, "/domain");
    if (it->contains("center"))
      spec.domain_center = detail::as_vector((*it)["center"], "/domain/center", m);
    if (it->contains("half_width"))
      spec.domain_half_width = detail::as_vector((*it)["half_width"], "/domain/half_width", m);
    for (int k = 0; k < m; ++k)
      if (!(spec.domain_half_width[k] > 0.0))
        throw ValidationError("/domain/half_width/" + std::to_string(k) + ": must be positive");
  }

  spec.initial_state =
      detail::as_vector(detail::require_field(doc, "initial_state", ""), "/initial_state", m);
  for (int k = 0; k < m; ++k) {
    if (std::abs(spec.initial_state[k] - spec.domain_center[k]) > spec.domain_half_width[k])
      throw ValidationError("/initial_state/" + std::to_string(k) +
                            ": initial state lies outside the domain box");
  }

  spec.order = detail::as_int(detail::require_field(doc, "order", ""), "/order");
  try {
    check_basis_range(spec.order, m);
  } catch (const ValidationError &e) {
    throw ValidationError(std::string("/order: ") + e.what());
  }

  spec.t_final = detail::as_number(detail::require_field(doc, "t_final", ""), "/t_final");
  if (!(spec.t_final > 0.0))
    throw ValidationError("/t_final: must be positive");

  if (auto it = doc.find("num_steps"); it != doc.end())
    spec.num_steps = detail::as_int(*it, "/num_steps");
  if (spec.num_steps < 2)
    throw ValidationError("/num_steps: must be at least 2");

  spec.identity_observables = true;
  if (auto it = doc.find("observables"); it != doc.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "identity")
        throw SchemaError("/observables", "expected \"identity\" or a list of observables");
    } else {
      detail::as_array(*it, "/observables");
      spec.identity_observables = false;
      std::set<std::string> names;
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string op = "/observables/" + std::to_string(i);
        const json &o = detail::as_object((*it)[i], op);
        detail::reject_unknown(o, {"name", "terms"}, op);
        auto name = detail::as_string(detail::require_field(o, "name", op), op + "/name");
        detail::check_name(name, op + "/name");
        if (!names.insert(name).second)
          throw ValidationError(op + "/name: duplicate observable name '" + name + "'");
        spec.observables.push_back({std::move(name), detail::parse_terms(o, op, m)});
      }
      if (spec.observables.empty())
        throw ValidationError("/observables: list must not be empty");
    }
  }
  if (spec.identity_observables)
    spec.observables = identity_observables(spec.states);
  for (std::size_t i = 0; i < spec.observables.size(); ++i) {
    const auto &g = spec.observables[i];
    if (g.poly.degree() > spec.order)
      throw ValidationError("/observables" +
                            (spec.identity_observables ? std::string() : "/" + std::to_string(i)) +
                            ": observable '" + g.name + "' has degree " +
                            std::to_string(g.poly.degree()) + " > order " +
                            std::to_string(spec.order));
  }
  return spec;
}

/// Canonical JSON form; parse_system_config(serialize_system_config(s)) == s.
inline std::string serialize_system_config(const SystemSpec &spec) {
  using detail::json;
  json doc;
  doc["name"] = spec.name;
  doc["states"] = spec.states;
  json dyn = json::array();
  for (const auto &f : spec.vf.components())
    dyn.push_back({{"terms", detail::terms_to_json(f)}});
  doc["dynamics"] = dyn;
  doc["domain"] = {{"center", spec.domain_center}, {"half_width", spec.domain_half_width}};
  doc["initial_state"] = spec.initial_state;
  doc["order"] = spec.order;
  doc["t_final"] = spec.t_final;
  doc["num_steps"] = spec.num_steps;
  if (spec.identity_observables) {
    doc["observables"] = "identity";
  } else {
    json obs = json::array();
    for (const auto &g : spec.observables)
      obs.push_back({{"name", g.name}, {"terms", detail::terms_to_json(g.poly)}});
    doc["observables"] = obs;
  }
  return doc.dump(2) + "\n";
}

} // namespace koopgal

#endif // KOOPGAL_CONFIG_HPP
