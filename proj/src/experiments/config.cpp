#include "glab/experiments/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace glab::experiments {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& msg) {
  throw ConfigError("config: field '" + field + "': " + msg);
}

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) field_error(where.empty() ? "<root>" : where, "expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) field_error(where.empty() ? key : where + "." + key, "unknown field");
}

template <class T>
T get(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    field_error(path, "wrong type");
  }
}

Complex parse_entry(const json& e, const std::string& path) {
  if (e.is_number()) return e.get<double>();
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  field_error(path, "matrix entry must be a number or [re, im]");
}

CMatrix parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) field_error(path, "expected a square array of rows");
  const auto n = j.size();
  CMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    if (!j[r].is_array() || j[r].size() != n) field_error(path, "expected a square array of rows");
    for (std::size_t c = 0; c < n; ++c)
      m(r, c) = parse_entry(j[r][c], path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
  }
  return m;
}

json matrix_json(const CMatrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) {
      if (m(r, c).imag() == 0.0)
        row.push_back(m(r, c).real());
      else
        row.push_back({m(r, c).real(), m(r, c).imag()});
    }
    rows.push_back(row);
  }
  return rows;
}

const std::vector<std::pair<std::string, metrics::BaseFactor>> kBase = {
    {"one", metrics::BaseFactor::one}, {"s", metrics::BaseFactor::s}, {"ssbar", metrics::BaseFactor::ssbar}};
const std::vector<std::pair<std::string, metrics::FiberShape>> kShape = {
    {"eigen", metrics::FiberShape::eigen},
    {"z_over_q_sq", metrics::FiberShape::z_over_q_sq},
    {"z2_over_q2", metrics::FiberShape::z2_over_q2}};

template <class E>
E lookup(const std::vector<std::pair<std::string, E>>& table, const std::string& name, const std::string& path) {
  for (const auto& [n, v] : table)
    if (n == name) return v;
  std::string opts;
  for (const auto& [n, _] : table) opts += (opts.empty() ? "" : ", ") + n;
  field_error(path, "unknown value '" + name + "' (expected " + opts + ")");
}

template <class E>
std::string name_of(const std::vector<std::pair<std::string, E>>& table, E v) {
  for (const auto& [n, e] : table)
    if (e == v) return n;
  return "?";
}

}  // namespace

metrics::HermitianFamily FamilySpec::build() const {
  if (type == "constant") return metrics::HermitianFamily::constant(H);
  if (type == "diagonal") return metrics::HermitianFamily::diagonal(d);
  if (type == "exp_quadratic") return metrics::HermitianFamily::exp_quadratic(B, M);
  throw ConfigError("config: field 'family.type': unknown family '" + type + "'");
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"verify-identities", "l2metric", "check-theorem1", "flow",
                                                 "evolve-monitor"};
  return names;
}

void validate(const ExperimentConfig& c) {
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), c.scenario) == names.end()) {
    std::string opts;
    for (const auto& n : names) opts += (opts.empty() ? "" : ", ") + n;
    field_error("scenario", "unknown scenario '" + c.scenario + "' (expected one of " + opts + ")");
  }
  if (c.rank != 2) field_error("rank", "only rank 2 (fiber P^1) is supported");
  if (c.resolution.n_theta < 4 || c.resolution.n_phi < 4) field_error("resolution", "need at least 4 nodes");
  if (!(c.stencil_h > 0.0)) field_error("stencil_h", "must be positive");
  if (!(c.flow.dt > 0.0)) field_error("flow.dt", "must be positive");
  if (!(c.flow.tol > 0.0)) field_error("flow.tol", "must be positive");
  if (!(c.flow.t_max > 0.0)) field_error("flow.t_max", "must be positive");
  if (c.flow.sample_every < 1) field_error("flow.sample_every", "must be positive");
  if (c.random_amplitude < 0.0) field_error("random_perturbation.amplitude", "must be non-negative");
  if (c.threads < 0) field_error("threads", "must be non-negative");
  const auto check_dim = [&](const CMatrix& m, const char* f) {
    if (m.rows() != c.rank) field_error(f, "matrix size must equal the rank");
  };
  check_dim(c.family.B, "family.B");
  check_dim(c.family.M, "family.M");
  check_dim(c.family.H, "family.H");
  if (static_cast<int>(c.family.d.size()) != c.rank) field_error("family.d", "length must equal the rank");
  for (std::size_t i = 0; i < c.perturbations.size(); ++i) {
    const auto& p = c.perturbations[i];
    if (p.a < 0 || p.a >= c.rank || p.b < 0 || p.b >= c.rank)
      field_error("perturbations[" + std::to_string(i) + "]", "eigenfunction index out of range");
  }
  try {
    c.family.build();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    field_error("family", e.what());
  }
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  check_keys(j, "", {"scenario", "rank", "resolution", "stencil_h", "family", "perturbations",
                     "random_perturbation", "flow", "out", "seed", "threads"});
  c.scenario = get<std::string>(j, "scenario", "scenario", c.scenario);
  c.rank = get<int>(j, "rank", "rank", c.rank);
  if (j.contains("resolution")) {
    const auto& r = j["resolution"];
    check_keys(r, "resolution", {"n_theta", "n_phi"});
    c.resolution.n_theta = get<int>(r, "n_theta", "resolution.n_theta", c.resolution.n_theta);
    c.resolution.n_phi = get<int>(r, "n_phi", "resolution.n_phi", c.resolution.n_phi);
  }
  c.stencil_h = get<double>(j, "stencil_h", "stencil_h", c.stencil_h);
  if (j.contains("family")) {
    const auto& f = j["family"];
    check_keys(f, "family", {"type", "B", "M", "H", "d"});
    c.family.type = get<std::string>(f, "type", "family.type", c.family.type);
    if (f.contains("B")) c.family.B = parse_matrix(f["B"], "family.B");
    if (f.contains("M")) c.family.M = parse_matrix(f["M"], "family.M");
    if (f.contains("H")) c.family.H = parse_matrix(f["H"], "family.H");
    c.family.d = get<std::vector<double>>(f, "d", "family.d", c.family.d);
  }
  if (j.contains("perturbations")) {
    const auto& arr = j["perturbations"];
    if (!arr.is_array()) field_error("perturbations", "expected an array");
    c.perturbations.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "perturbations[" + std::to_string(i) + "]";
      const auto& t = arr[i];
      check_keys(t, path, {"amplitude", "phase", "base", "shape", "a", "b"});
      metrics::Perturbation p;
      p.amplitude = get<double>(t, "amplitude", path + ".amplitude", 0.0);
      p.phase = get<double>(t, "phase", path + ".phase", 0.0);
      p.base = lookup(kBase, get<std::string>(t, "base", path + ".base", "one"), path + ".base");
      p.shape = lookup(kShape, get<std::string>(t, "shape", path + ".shape", "eigen"), path + ".shape");
      p.a = get<int>(t, "a", path + ".a", 0);
      p.b = get<int>(t, "b", path + ".b", 0);
      c.perturbations.push_back(p);
    }
  }
  if (j.contains("random_perturbation")) {
    const auto& r = j["random_perturbation"];
    check_keys(r, "random_perturbation", {"amplitude"});
    c.random_amplitude = get<double>(r, "amplitude", "random_perturbation.amplitude", 0.0);
  }
  if (j.contains("flow")) {
    const auto& f = j["flow"];
    check_keys(f, "flow", {"dt", "tol", "t_max", "scheme", "sample_every"});
    c.flow.dt = get<double>(f, "dt", "flow.dt", c.flow.dt);
    c.flow.tol = get<double>(f, "tol", "flow.tol", c.flow.tol);
    c.flow.t_max = get<double>(f, "t_max", "flow.t_max", c.flow.t_max);
    c.flow.sample_every = get<int>(f, "sample_every", "flow.sample_every", c.flow.sample_every);
    if (f.contains("scheme")) {
      try {
        c.flow.scheme = flow::parse_scheme(get<std::string>(f, "scheme", "flow.scheme", "imex"));
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        field_error("flow.scheme", e.what());
      }
    }
  }
  c.out = get<std::string>(j, "out", "out", c.out);
  c.seed = get<unsigned long>(j, "seed", "seed", c.seed);
  c.threads = get<int>(j, "threads", "threads", c.threads);
  validate(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["scenario"] = c.scenario;
  j["rank"] = c.rank;
  j["resolution"] = {{"n_theta", c.resolution.n_theta}, {"n_phi", c.resolution.n_phi}};
  j["stencil_h"] = c.stencil_h;
  j["family"] = {{"type", c.family.type},
                 {"B", matrix_json(c.family.B)},
                 {"M", matrix_json(c.family.M)},
                 {"H", matrix_json(c.family.H)},
                 {"d", c.family.d}};
  j["perturbations"] = json::array();
  for (const auto& p : c.perturbations)
    j["perturbations"].push_back({{"amplitude", p.amplitude},
                                  {"phase", p.phase},
                                  {"base", name_of(kBase, p.base)},
                                  {"shape", name_of(kShape, p.shape)},
                                  {"a", p.a},
                                  {"b", p.b}});
  j["random_perturbation"] = {{"amplitude", c.random_amplitude}};
  j["flow"] = {{"dt", c.flow.dt},
               {"tol", c.flow.tol},
               {"t_max", c.flow.t_max},
               {"scheme", flow::to_string(c.flow.scheme)},
               {"sample_every", c.flow.sample_every}};
  j["out"] = c.out;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // Byte offset -> line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("config " + path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": parse error: " + e.what());
  }
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

projgeom::Resolution parse_resolution(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument("missing x");
    std::size_t used = 0;
    const int a = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("trailing");
    const std::string rest = text.substr(x + 1);
    const int b = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("trailing");
    return {a, b};
  } catch (const std::exception&) {
    throw ConfigError("resolution '" + text + "': expected N_THETAxN_PHI, e.g. 64x128");
  }
}

}  // namespace glab::experiments
