#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "extphase/numkit/ode.hpp"

namespace xps::cli {

using json = nlohmann::json;

// Appends an error for `v` or stays silent.
using Check = std::function<void(const std::string& name, const json& v, std::vector<std::string>& errs)>;

struct ParamSpec {
  std::string name;
  std::string kind;  // for `list`
  json fallback;     // null: required
  std::string doc;
  Check check;
};

struct ScenarioSchema {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;
  std::vector<std::string> metrics;
  // cross-parameter checks on the filled parameter object
  std::function<void(const json&, std::vector<std::string>&)> cross;
};

namespace checks {

inline bool is_number(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

inline Check number(std::optional<double> lo = {}, bool lo_open = false) {
  return [=](const std::string& n, const json& v, std::vector<std::string>& e) {
    if (!is_number(v)) {
      e.push_back(n + " must be a finite number");
      return;
    }
    const double x = v.get<double>();
    if (lo && (lo_open ? !(x > *lo) : !(x >= *lo)))
      e.push_back(n + " must be " + (lo_open ? "> " : ">= ") + json(*lo).dump());
  };
}

inline Check integer(std::int64_t lo, std::int64_t hi) {
  return [=](const std::string& n, const json& v, std::vector<std::string>& e) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < lo || v.get<std::int64_t>() > hi)
      e.push_back(n + " must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  };
}

inline Check vector(std::size_t len = 0) {
  return [=](const std::string& n, const json& v, std::vector<std::string>& e) {
    if (!v.is_array() || v.empty()) {
      e.push_back(n + " must be a non-empty array of numbers");
      return;
    }
    for (const auto& x : v)
      if (!is_number(x)) {
        e.push_back(n + " must contain only finite numbers");
        return;
      }
    if (len && v.size() != len) e.push_back(n + " must have " + std::to_string(len) + " entries");
  };
}

inline Check span() {
  return [](const std::string& n, const json& v, std::vector<std::string>& e) {
    std::vector<std::string> sub;
    vector(2)(n, v, sub);
    if (!sub.empty()) {
      e.insert(e.end(), sub.begin(), sub.end());
      return;
    }
    if (v[0].get<double>() == v[1].get<double>()) e.push_back(n + " must have distinct endpoints");
  };
}

inline Check boolean() {
  return [](const std::string& n, const json& v, std::vector<std::string>& e) {
    if (!v.is_boolean()) e.push_back(n + " must be true or false");
  };
}

}  // namespace checks

inline const std::vector<ScenarioSchema>& schemas() {
  using namespace checks;
  static const std::vector<ScenarioSchema> all = [] {
    std::vector<ScenarioSchema> s;

    Check beta = [](const std::string& n, const json& v, std::vector<std::string>& e) {
      double b2 = 0.0;
      if (is_number(v)) {
        b2 = v.get<double>() * v.get<double>();
      } else if (v.is_array() && v.size() == 3 && is_number(v[0]) && is_number(v[1]) && is_number(v[2])) {
        for (const auto& x : v) b2 += x.get<double>() * x.get<double>();
      } else {
        e.push_back(n + " must be a number or a 3-vector");
        return;
      }
      if (!(b2 < 1.0)) e.push_back(n + " must satisfy |beta| < 1");
    };
    s.push_back({"lorentz",
                 "Lorentz boost as an extended F2 transformation and the invariant charged-particle Hamiltonian",
                 {{"beta", "number|vec3", 0.6, "boost velocity / c (number: along x)", beta},
                  {"c", "number", 1.0, "speed of light", number(0.0, true)},
                  {"m", "number", 1.0, "particle mass", number(0.0, true)},
                  {"zeta", "number", 0.0, "charge", number()},
                  {"probes", "integer", 100, "random probe points", integer(1, 100000)}},
                 {"gamma", "symplectic_residual_max", "h1_invariance_max", "implicit_residual_max",
                  "velocity_addition_error", "time_global", "hessian_det_min"},
                 {}});

    auto kepler_common = [&](std::vector<ParamSpec> extra) {
      std::vector<ParamSpec> p{{"K2", "number", 1.0, "coupling K^2", number(0.0, true)},
                               {"x0", "number", 2.0, "initial distance", number(0.0, true)},
                               {"p0", "number", 0.0, "initial momentum", number()}};
      p.insert(p.end(), extra.begin(), extra.end());
      return p;
    };
    s.push_back({"kepler-direct", "radial Kepler motion integrated in physical time",
                 kepler_common({{"t_span", "[t0, t1]", json::array({0.0, 3.0}), "time interval", span()}}),
                 {"energy_drift_max", "t_final", "stalled", "samples"},
                 {}});
    s.push_back({"kepler-regularized", "radial Kepler motion in the regularized time t' (xi = x)",
                 kepler_common({{"tprime_span", "[t0', t1']", json::array({0.0, 2.0 * std::numbers::pi}), "t' interval", span()},
                                {"compare_direct", "bool", true, "resample a direct run and compare", boolean()}}),
                 {"closed_form_error_max", "energy_identity_max", "x_min", "x_min_tprime", "collision_t",
                  "direct_agreement_max", "direct_compared", "direct_stalled", "collision", "energy"},
                 {}});
    s.push_back({"ks", "Kustaanheimo-Stiefel map at random points on the constraint surface",
                 {{"probes", "integer", 100, "random probe points", integer(1, 100000)}},
                 {"radial_identity_max", "symplectic_residual_max", "full_residual_min"},
                 {}});

    auto dims = [](const char* a, const char* b) {
      return [a, b](const json& p, std::vector<std::string>& e) {
        if (!p["n"].is_number_integer()) return;
        const auto n = p["n"].get<std::size_t>();
        for (const char* k : {a, b})
          if (p[k].is_array() && p[k].size() != n)
            e.push_back(std::string(k) + " must have n = " + std::to_string(n) + " entries");
      };
    };
    s.push_back({"oscillator", "damped time-dependent oscillator: Leach invariant, I tensor, map to constant frequency",
                 {{"n", "integer", 2, "dimension", integer(1, 16)},
                  {"omega2_mean", "number", 1.0, "omega^2(t) = mean + amp sin(freq t)", number()},
                  {"omega2_amp", "number", 0.1, "", number()},
                  {"omega2_freq", "number", 1.0, "", number()},
                  {"damping", "number", 0.0, "constant f; F(t) = f t", number()},
                  {"q0", "vector", json::array({1.0, 0.0}), "initial q", vector()},
                  {"p0", "vector", json::array({0.0, 1.0}), "initial p", vector()},
                  {"xi0", "[xi, xi', xi'']", json::array({1.0, 0.0, 0.0}), "initial xi state (xi > 0)", vector(3)},
                  {"t_span", "[t0, t1]", json::array({0.0, 50.0}), "time interval", span()}},
                 {"leach_drift_max", "angular_drift_max", "positivity_identity_max", "omega0_squared",
                  "omega0_drift_max", "xi_min", "map_energy_error_max", "energy_rule_gap_max"},
                 [dims](const json& p, std::vector<std::string>& e) {
                   dims("q0", "p0")(p, e);
                   if (p["xi0"].is_array() && p["xi0"].size() == 3 && is_number(p["xi0"][0]) &&
                       !(p["xi0"][0].get<double>() > 0.0))
                     e.push_back("xi0[0] must be > 0");
                 }});
    s.push_back({"potential", "general time-dependent potential: unit-Wronskian transfer matrix and initial-value invariants",
                 {{"n", "integer", 2, "dimension", integer(1, 16)},
                  {"a", "number", 1.0, "V = (a + b sin(nu t)) q^2/2 + quartic (q^2)^2", number()},
                  {"b", "number", 0.1, "", number()},
                  {"nu", "number", 1.0, "", number()},
                  {"quartic", "number", 0.0, "", number()},
                  {"q0", "vector", json::array({1.0, 0.0}), "initial q (q != 0)", vector()},
                  {"p0", "vector", json::array({0.0, 1.0}), "initial p", vector()},
                  {"t_span", "[t0, t1]", json::array({0.0, 30.0}), "time interval", span()}},
                 {"det_xi_error", "invariant_error_max", "xi1_deviation_max", "q2_min"},
                 dims("q0", "p0")});
    s.push_back({"lagrangian-check", "extended Lagrangian: homogeneity, Legendre transform, extended Euler-Lagrange equations",
                 {{"eps", "number", 0.1, "L = qdot^2/2 - (1 + eps sin t) q^2/2", number()},
                  {"probes", "integer", 100, "random probe points", integer(1, 100000)}},
                 {"homogeneity_max", "euler_identity_max", "legendre_roundtrip_max", "el_residual_max",
                  "el_nonsolution_min"},
                 {}});
    s.push_back({"bracket-suite", "fundamental extended Poisson brackets for every scenario Hamiltonian",
                 {{"probes", "integer", 100, "random points per Hamiltonian", integer(1, 100000)}},
                 {"bracket_max_error", "flow_bracket_max_error", "hamiltonians"},
                 {}});
    return s;
  }();
  return all;
}

inline const ScenarioSchema* find_schema(const std::string& name) {
  for (const auto& s : schemas())
    if (s.name == name) return &s;
  return nullptr;
}

struct ScenarioConfig {
  std::string scenario;
  json params = json::object();
  std::string output_dir = "out";
  numkit::IntegratorOptions tolerances;
  std::uint64_t seed = 42;

  json to_json() const {
    return {{"scenario", scenario},
            {"params", params},
            {"output_dir", output_dir},
            {"tolerances",
             {{"rel_tol", tolerances.rel_tol},
              {"abs_tol", tolerances.abs_tol},
              {"max_step", tolerances.max_step},
              {"min_step", tolerances.min_step},
              {"max_steps", tolerances.max_steps}}},
            {"seed", seed}};
  }
};

struct Validation {
  std::optional<ScenarioConfig> config;
  std::vector<std::string> errors;
  bool unknown_scenario = false;

  bool ok() const { return config.has_value(); }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace detail

// Parses and schema-checks a JSON config. Reports every violation found.
inline Validation validate(const std::string& text) {
  Validation out;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    auto [line, col] = detail::line_column(text, e.byte);
    std::string msg = e.what();
    // keep only the reason; the position is reported once, in front
    if (auto k = msg.find("column"); k != std::string::npos)
      if (auto c = msg.find(": ", k); c != std::string::npos) msg = msg.substr(c + 2);
    out.errors.push_back("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
    return out;
  }
  auto& errs = out.errors;
  if (!doc.is_object()) {
    errs.push_back("config must be a JSON object");
    return out;
  }
  static const std::set<std::string> top{"scenario", "params", "output_dir", "tolerances", "seed"};
  for (const auto& [k, v] : doc.items())
    if (!top.count(k)) errs.push_back("unknown key '" + k + "'");

  ScenarioConfig cfg;
  const ScenarioSchema* schema = nullptr;
  if (!doc.contains("scenario")) {
    errs.push_back("missing required key 'scenario'");
  } else if (!doc["scenario"].is_string()) {
    errs.push_back("scenario must be a string");
  } else {
    cfg.scenario = doc["scenario"].get<std::string>();
    schema = find_schema(cfg.scenario);
    if (!schema) {
      errs.push_back("unknown scenario '" + cfg.scenario + "'");
      out.unknown_scenario = true;
    }
  }

  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string() || doc["output_dir"].get<std::string>().empty())
      errs.push_back("output_dir must be a non-empty string");
    else
      cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !(doc["seed"].is_number_integer() && doc["seed"].get<std::int64_t>() >= 0))
      errs.push_back("seed must be a non-negative integer");
    else
      cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc["tolerances"];
    if (!t.is_object()) {
      errs.push_back("tolerances must be an object");
    } else {
      auto& o = cfg.tolerances;
      for (const auto& [k, v] : t.items()) {
        double* slot = k == "rel_tol" ? &o.rel_tol : k == "abs_tol" ? &o.abs_tol
                     : k == "max_step" ? &o.max_step : k == "min_step" ? &o.min_step : nullptr;
        if (k == "max_steps") {
          if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
            errs.push_back("tolerances.max_steps must be a positive integer");
          else
            o.max_steps = v.get<std::size_t>();
        } else if (!slot) {
          errs.push_back("unknown key 'tolerances." + k + "'");
        } else if (!checks::is_number(v) || !(v.get<double>() >= 0.0)) {
          errs.push_back("tolerances." + k + " must be a non-negative number");
        } else {
          *slot = v.get<double>();
        }
      }
      try {
        o.validate();
      } catch (const std::exception& e) {
        errs.push_back(std::string("tolerances: ") + e.what());
      }
    }
  }

  json params = doc.contains("params") ? doc["params"] : json::object();
  if (!params.is_object()) {
    errs.push_back("params must be an object");
    params = json::object();
  }
  if (schema) {
    for (const auto& [k, v] : params.items()) {
      bool known = false;
      for (const auto& p : schema->params) known = known || p.name == k;
      if (!known) errs.push_back("unknown parameter '" + k + "' for scenario '" + schema->name + "'");
    }
    json filled = json::object();
    for (const auto& p : schema->params) {
      if (params.contains(p.name)) {
        filled[p.name] = params[p.name];
        p.check(p.name, params[p.name], errs);
      } else if (p.fallback.is_null()) {
        errs.push_back("missing required parameter '" + p.name + "'");
      } else {
        filled[p.name] = p.fallback;
      }
    }
    if (schema->cross) schema->cross(filled, errs);
    cfg.params = std::move(filled);
  }
  if (errs.empty()) out.config = std::move(cfg);
  return out;
}

// Human-readable schema listing.
inline std::string describe_schemas() {
  std::string s;
  for (const auto& sc : schemas()) {
    s += sc.name + ": " + sc.description + "\n  params:\n";
    for (const auto& p : sc.params) {
      s += "    " + p.name + " (" + p.kind + ", default " + (p.fallback.is_null() ? "required" : p.fallback.dump()) + ")";
      if (!p.doc.empty()) s += "  " + p.doc;
      s += "\n";
    }
    s += "  metrics:";
    for (const auto& m : sc.metrics) s += " " + m;
    s += "\n";
  }
  return s;
}

}  // namespace xps::cli
