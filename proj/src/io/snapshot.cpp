#include "glab/io/snapshot.hpp"

#include <fstream>

namespace glab::io {

using nlohmann::json;

json weight_to_json(const metrics::WeightField& W, double t) {
  const auto res = W.grid->resolution();
  json j;
  j["format"] = "glab-weight";
  j["version"] = 1;
  j["t"] = t;
  j["k"] = W.k;
  j["dim"] = W.grid->dim();
  j["n_theta"] = res.n_theta;
  j["n_phi"] = res.n_phi;
  j["stencil_h"] = W.stencil.h;
  j["smooth_part"] = W.values;
  return j;
}

Snapshot weight_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "glab-weight") throw Error("not a glab weight snapshot");
    Snapshot s;
    s.t = j.at("t").get<double>();
    s.W.k = j.at("k").get<int>();
    s.W.grid = projgeom::build_fiber_grid(j.at("dim").get<int>(),
                                          {j.at("n_theta").get<int>(), j.at("n_phi").get<int>()});
    s.W.stencil.h = j.at("stencil_h").get<double>();
    s.W.values = j.at("smooth_part").get<std::vector<RealField>>();
    if (s.W.values.size() != metrics::BaseStencil::kPoints) throw Error("expected 9 stencil fibers");
    for (const auto& v : s.W.values)
      if (v.size() != s.W.grid->size()) throw Error("fiber field size does not match the grid");
    return s;
  } catch (const json::exception& e) {
    throw Error(std::string("snapshot: ") + e.what());
  } catch (const Error& e) {
    throw Error(std::string("snapshot: ") + e.what());
  }
}

void save_snapshot(const std::string& path, const metrics::WeightField& W, double t) {
  std::ofstream out(path);
  if (!out) throw Error("snapshot: cannot write " + path);
  out << weight_to_json(W, t).dump() << '\n';
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("snapshot: cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("snapshot: " + path + ": " + e.what());
  }
  return weight_from_json(j);
}

}  // namespace glab::io
