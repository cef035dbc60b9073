#include "blab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "blab/errors.hpp"

namespace blab {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError("config: " + where + ": " + what);
}

void expect_keys(const Json& j, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& item : j.items()) {
    if (allowed.count(item.key()) == 0) bad(where, "unknown key \"" + item.key() + "\"");
  }
}

double get_number(const Json& j, const std::string& where, const std::string& key) {
  if (!j.contains(key)) bad(where, "missing \"" + key + "\"");
  const Json& v = j.at(key);
  if (!v.is_number()) bad(where, "\"" + key + "\" must be a number");
  return v.get<double>();
}

double get_number_or(const Json& j, const std::string& where, const std::string& key,
                     double fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number()) bad(where, "\"" + key + "\" must be a number");
  return v.get<double>();
}

int get_int(const Json& j, const std::string& where, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) bad(where, "\"" + key + "\" must be an integer");
  return v.get<int>();
}

std::string get_kind(const Json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "entry must be an object");
  if (!j.contains("kind")) bad(where, "missing \"kind\"");
  if (!j.at("kind").is_string()) bad(where, "\"kind\" must be a string");
  return j.at("kind").get<std::string>();
}

// A complex parameter is either a plain number or a [re, im] pair.
Point get_complex(const Json& v, const std::string& where) {
  if (v.is_number()) return Point(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return Point(v[0].get<double>(), v[1].get<double>());
  bad(where, "expected a number or a [re, im] pair");
}

std::vector<Point> get_coeffs(const Json& j, const std::string& where) {
  if (!j.contains("coeffs")) bad(where, "missing \"coeffs\"");
  const Json& arr = j.at("coeffs");
  if (!arr.is_array() || arr.empty()) bad(where, "\"coeffs\" must be a nonempty array");
  std::vector<Point> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(get_complex(arr[i], where + ".coeffs[" + std::to_string(i) + "]"));
  return out;
}

WeightSpec parse_weight(const Json& j) {
  const std::string where = "weight";
  const std::string kind = get_kind(j, where);
  try {
    if (kind == "exp") {
      expect_keys(j, where, {"kind", "alpha", "c", "beta"});
      return WeightSpec::exponential(get_number(j, where, "alpha"), get_number(j, where, "c"),
                                     get_number_or(j, where, "beta", 0.0));
    }
    if (kind == "unweighted") {
      expect_keys(j, where, {"kind"});
      return WeightSpec::unweighted();
    }
    if (kind == "standard") {
      expect_keys(j, where, {"kind", "gamma"});
      return WeightSpec::standard(get_number(j, where, "gamma"));
    }
  } catch (const DomainError& e) {
    bad(where, e.what());
  }
  bad(where, "unknown kind \"" + kind + "\"");
}

MapSpec build_map(const Json& j, const std::string& where) {
  const std::string kind = get_kind(j, where);
  if (kind == "identity") {
    expect_keys(j, where, {"kind"});
    return MapSpec::identity();
  }
  if (kind == "dilation") {
    expect_keys(j, where, {"kind", "r"});
    return MapSpec::dilation(get_number(j, where, "r"));
  }
  if (kind == "polynomial") {
    expect_keys(j, where, {"kind", "coeffs"});
    return MapSpec::polynomial(get_coeffs(j, where));
  }
  if (kind == "hyperbolic") {
    expect_keys(j, where, {"kind", "a"});
    return MapSpec::hyperbolic(get_number(j, where, "a"));
  }
  if (kind == "moebius") {
    expect_keys(j, where, {"kind", "mu"});
    if (!j.contains("mu")) bad(where, "missing \"mu\"");
    return MapSpec::moebius(get_complex(j.at("mu"), where + ".mu"));
  }
  if (kind == "composite") {
    expect_keys(j, where, {"kind", "parts"});
    if (!j.contains("parts") || !j.at("parts").is_array() || j.at("parts").empty())
      bad(where, "\"parts\" must be a nonempty array");
    std::vector<MapSpec> parts;
    int i = 0;
    for (const Json& p : j.at("parts"))
      parts.push_back(build_map(p, where + ".parts[" + std::to_string(i++) + "]"));
    return MapSpec::composite(std::move(parts));
  }
  bad(where, "unknown kind \"" + kind + "\"");
}

MapEntry parse_map_entry(const Json& j, std::size_t index) {
  const std::string where = "maps[" + std::to_string(index) + "]";
  MapEntry entry;
  entry.source = j.dump();
  entry.label = get_kind(j, where);
  try {
    entry.map = build_map(j, where);
    entry.valid = true;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    // A structurally sound entry whose values fail the self-map certificate;
    // recorded so classify can report it per map.
    entry.error = e.what();
  }
  return entry;
}

MultiplierEntry parse_multiplier_entry(const Json& j, std::size_t index) {
  const std::string where = "multipliers[" + std::to_string(index) + "]";
  MultiplierEntry entry;
  entry.source = j.dump();
  const std::string kind = get_kind(j, where);
  entry.label = kind;
  try {
    if (kind == "one") {
      expect_keys(j, where, {"kind"});
      entry.multiplier = MultiplierSpec::one();
    } else if (kind == "polynomial") {
      expect_keys(j, where, {"kind", "coeffs"});
      entry.multiplier = MultiplierSpec::polynomial(get_coeffs(j, where));
    } else if (kind == "kernel_power") {
      expect_keys(j, where, {"kind", "w", "exponent"});
      if (!j.contains("w")) bad(where, "missing \"w\"");
      entry.multiplier = MultiplierSpec::kernel_power(get_complex(j.at("w"), where + ".w"),
                                                      get_number_or(j, where, "exponent", 1.0));
    } else {
      bad(where, "unknown kind \"" + kind + "\"");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    bad(where, e.what());
  }
  return entry;
}

QuadratureConfig parse_quadrature(const Json& j) {
  const std::string where = "quadrature";
  if (!j.is_object()) bad(where, "must be an object");
  expect_keys(j, where, {"n_radial", "n_angular"});
  QuadratureConfig q;
  q.n_radial = get_int(j, where, "n_radial", q.n_radial);
  q.n_angular = get_int(j, where, "n_angular", q.n_angular);
  if (q.n_radial < 16 || q.n_radial > 4096) bad(where, "\"n_radial\" must be in [16, 4096]");
  if (q.n_angular < 16 || q.n_angular > 4096) bad(where, "\"n_angular\" must be in [16, 4096]");
  return q;
}

RingConfig parse_rings(const Json& j) {
  const std::string where = "rings";
  if (!j.is_object()) bad(where, "must be an object");
  expect_keys(j, where, {"epsilons", "delta"});
  RingConfig r;
  if (j.contains("epsilons")) {
    const Json& arr = j.at("epsilons");
    if (!arr.is_array() || arr.size() < 2 || arr.size() > 8)
      bad(where, "\"epsilons\" must be an array of 2 to 8 values");
    r.epsilons.clear();
    for (const Json& v : arr) {
      if (!v.is_number()) bad(where, "\"epsilons\" entries must be numbers");
      r.epsilons.push_back(v.get<double>());
    }
    for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
      if (!(r.epsilons[i] > 0.0 && r.epsilons[i] < 1.0))
        bad(where, "\"epsilons\" entries must lie in (0, 1)");
      if (i > 0 && !(r.epsilons[i] < r.epsilons[i - 1]))
        bad(where, "\"epsilons\" must be strictly decreasing");
    }
  }
  r.delta = get_number_or(j, where, "delta", 0.0);
  if (j.contains("delta") && !(r.delta > 0.0 && r.delta < 1.0))
    bad(where, "\"delta\" must lie in (0, 1)");
  return r;
}

KernelConfig parse_kernel(const Json& j) {
  const std::string where = "kernel";
  if (!j.is_object()) bad(where, "must be an object");
  expect_keys(j, where, {"target_radius", "tolerance"});
  KernelConfig k;
  k.target_radius = get_number_or(j, where, "target_radius", 0.0);
  if (k.target_radius != 0.0 && !(k.target_radius >= 0.5 && k.target_radius <= 0.9995))
    bad(where, "\"target_radius\" must be 0 or in [0.5, 0.9995]");
  k.tolerance = get_number_or(j, where, "tolerance", k.tolerance);
  if (!(k.tolerance >= 1e-14 && k.tolerance <= 1e-2))
    bad(where, "\"tolerance\" must lie in [1e-14, 1e-2]");
  return k;
}

Json complex_json(Point z) { return Json::array({z.real(), z.imag()}); }

Json weight_json(const WeightSpec& w) {
  Json j;
  switch (w.kind) {
    case WeightKind::ExponentialType:
      j["kind"] = "exp";
      j["alpha"] = w.alpha;
      j["c"] = w.c;
      j["beta"] = w.beta;
      break;
    case WeightKind::TestUnweighted:
      j["kind"] = "unweighted";
      break;
    case WeightKind::TestStandard:
      j["kind"] = "standard";
      j["gamma"] = w.gamma;
      break;
  }
  return j;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) bad("top level", "must be an object");
  expect_keys(root, "top level",
              {"weight", "maps", "multipliers", "quadrature", "rings", "kernel", "schatten_p",
               "output"});
  if (!root.contains("weight")) bad("top level", "missing \"weight\"");

  RunConfig cfg;
  cfg.weight = parse_weight(root.at("weight"));

  if (root.contains("maps")) {
    if (!root.at("maps").is_array()) bad("maps", "must be an array");
    std::size_t i = 0;
    for (const Json& m : root.at("maps")) cfg.maps.push_back(parse_map_entry(m, i++));
    if (cfg.maps.empty()) bad("maps", "must not be empty");
  } else {
    cfg.maps.push_back(parse_map_entry(Json{{"kind", "identity"}}, 0));
  }

  if (root.contains("multipliers")) {
    if (!root.at("multipliers").is_array()) bad("multipliers", "must be an array");
    std::size_t i = 0;
    for (const Json& m : root.at("multipliers"))
      cfg.multipliers.push_back(parse_multiplier_entry(m, i++));
    if (cfg.multipliers.empty()) bad("multipliers", "must not be empty");
  } else {
    cfg.multipliers.push_back(parse_multiplier_entry(Json{{"kind", "one"}}, 0));
  }

  if (root.contains("quadrature")) cfg.quadrature = parse_quadrature(root.at("quadrature"));
  if (root.contains("rings")) cfg.rings = parse_rings(root.at("rings"));
  if (root.contains("kernel")) cfg.kernel = parse_kernel(root.at("kernel"));

  if (root.contains("schatten_p")) {
    const Json& arr = root.at("schatten_p");
    if (!arr.is_array() || arr.empty() || arr.size() > 8)
      bad("schatten_p", "must be an array of 1 to 8 values");
    cfg.schatten_p.clear();
    for (const Json& v : arr) {
      if (!v.is_number()) bad("schatten_p", "entries must be numbers");
      cfg.schatten_p.push_back(v.get<double>());
    }
    for (std::size_t i = 0; i < cfg.schatten_p.size(); ++i) {
      if (!(cfg.schatten_p[i] > 0.0)) bad("schatten_p", "entries must be positive");
      if (i > 0 && !(cfg.schatten_p[i] > cfg.schatten_p[i - 1]))
        bad("schatten_p", "entries must be strictly increasing");
    }
  }

  if (root.contains("output")) {
    if (!root.at("output").is_string()) bad("output", "must be a string");
    cfg.output = root.at("output").get<std::string>();
    if (cfg.output.empty()) bad("output", "must not be empty");
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string serialize_run_config(const RunConfig& cfg) {
  Json root;
  root["weight"] = weight_json(cfg.weight);
  root["maps"] = Json::array();
  for (const MapEntry& m : cfg.maps) root["maps"].push_back(Json::parse(m.source));
  root["multipliers"] = Json::array();
  for (const MultiplierEntry& m : cfg.multipliers)
    root["multipliers"].push_back(Json::parse(m.source));
  root["quadrature"] =
      Json{{"n_radial", cfg.quadrature.n_radial}, {"n_angular", cfg.quadrature.n_angular}};
  root["rings"] = Json{{"epsilons", cfg.rings.epsilons}};
  if (cfg.rings.delta != 0.0) root["rings"]["delta"] = cfg.rings.delta;
  root["kernel"] = Json::object();
  if (cfg.kernel.target_radius != 0.0) root["kernel"]["target_radius"] = cfg.kernel.target_radius;
  root["kernel"]["tolerance"] = cfg.kernel.tolerance;
  root["schatten_p"] = cfg.schatten_p;
  root["output"] = cfg.output;
  return root.dump(2) + "\n";
}

}  // namespace blab
