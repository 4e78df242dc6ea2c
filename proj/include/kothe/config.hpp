#pragma once

/// Experiment configuration: JSON schema parsing and validation for the
/// batch front end. Schema violations throw ConfigError with a field path.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kothe/matrix.hpp"
#include "kothe/schedule.hpp"
#include "kothe/sequence.hpp"
#include "kothe/shift.hpp"
#include "kothe/space.hpp"

namespace kothe {

using Json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config error at '" + field + "': " + what) {}
};

struct ExperimentConfig {
  int schema_version = 1;
  std::uint64_t seed = 0;

  KotheMatrix matrix = KotheMatrix::geometric(0.5);
  std::string matrix_spec;
  SpaceParams params;
  std::optional<WeightSequence> weights;  // optional weighted-shift reduction

  SequenceRep x = SequenceRep::zero();
  SequenceRep y = SequenceRep::all_ones();
  std::string x_spec, y_spec;
  Real delta = 0.5;

  std::string mode = "scaled";  // "faithful" | "scaled"
  GrowthFunction gap = GrowthFunction::affine(1.0, 8.0);
  GrowthFunction h = GrowthFunction::affine(0.5, 0.0);
  std::vector<Real> eta_seq = {0.5, 0.25, 0.125};
  Index horizon_cap = 100000;
  Index k_max = 14;
  Index n_max = 2;
  Index l_max = 3;
  Index index_cap = 100000;
  int retries = 8;
  std::size_t samples_per_window = 64;

  std::vector<Real> alphas = {0.2, 0.35, 0.5, 0.65, 0.8, 0.95};
  Index max_offset = 1;
  Real separation_floor = 0.1;

  std::vector<Real> t_grid = {0.4, 0.5, 0.7};
  Real epsilon = 0.4;
  std::vector<Index> horizons = {64, 1528, 3064, 12280, 131072};
  Real eta = 0.1;
  std::size_t pair_budget = 12;

  std::string out_dir = "out";
  Real metric_tol = 1e-12;

  SpaceContext context() const {
    SpaceContext ctx;
    ctx.A = matrix;
    ctx.params = params;
    ctx.metric_tol = metric_tol;
    return ctx;
  }
  Json echo;  // normalized config as parsed, for the report
};

namespace detail_config {

inline std::vector<std::vector<Real>> read_csv_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("matrix.path", "cannot open '" + path + "'");
  std::vector<std::vector<Real>> grid;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<Real> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    grid.push_back(std::move(row));
  }
  return grid;
}

inline KotheMatrix parse_matrix(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("name"))
    throw ConfigError(path, "expected object with a 'name'");
  std::string name = j.at("name");
  if (name == "constant") return KotheMatrix::constant(j.value("c", 1.0));
  if (name == "geometric") {
    Real r = j.value("r", 0.5);
    if (r <= 0) throw ConfigError(path + ".r", "ratio must be positive");
    return KotheMatrix::geometric(r);
  }
  if (name == "power") return KotheMatrix::power();
  if (name == "tabulated") {
    if (!j.contains("path")) throw ConfigError(path, "tabulated matrix needs 'path'");
    return KotheMatrix::tabulated(read_csv_grid(j.at("path")));
  }
  throw ConfigError(path + ".name", "unknown matrix generator '" + name + "'");
}

inline SequenceRep parse_sequence(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("name"))
    throw ConfigError(path, "expected object with a 'name'");
  std::string name = j.at("name");
  if (name == "zero") return SequenceRep::zero();
  if (name == "all_ones") return SequenceRep::all_ones();
  if (name == "constant") return SequenceRep::constant(j.value("c", 1.0));
  if (name == "geometric") return SequenceRep::geometric(j.value("r", 0.5));
  if (name == "unit")
    return SequenceRep::unit(j.value("j", Index{1}), j.value("v", 1.0));
  if (name == "finite_support") {
    std::vector<std::pair<Index, Real>> entries;
    for (const auto& e : j.value("entries", Json::array()))
      entries.emplace_back(e.at(0).get<Index>(), e.at(1).get<Real>());
    return SequenceRep::finite_support(std::move(entries));
  }
  if (name == "indicator") {
    std::vector<std::pair<Index, Index>> ivs;
    for (const auto& e : j.value("intervals", Json::array()))
      ivs.emplace_back(e.at(0).get<Index>(), e.at(1).get<Index>());
    return SequenceRep::indicator(std::move(ivs), j.value("v", 1.0));
  }
  throw ConfigError(path + ".name", "unknown sequence rule '" + name + "'");
}

inline WeightSequence parse_weights(const Json& j, const std::string& path) {
  if (!j.is_object() || !j.contains("name"))
    throw ConfigError(path, "expected object with a 'name'");
  std::string name = j.at("name");
  if (name == "constant") return WeightSequence::constant(j.value("c", 1.0));
  if (name == "tabulated") {
    std::vector<Real> w;
    for (const auto& e : j.value("w", Json::array())) w.push_back(e.get<Real>());
    return WeightSequence::tabulated(std::move(w));
  }
  throw ConfigError(path + ".name", "unknown weight rule '" + name + "'");
}

inline GrowthFunction parse_growth(const Json& j, const std::string& path, bool is_gap) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "faithful") return is_gap ? GrowthFunction::pow4() : GrowthFunction::pow2();
    throw ConfigError(path, "unknown growth rule '" + s + "'");
  }
  if (!j.is_object()) throw ConfigError(path, "expected 'faithful' or {scale, add}");
  return GrowthFunction::affine(j.value("scale", 1.0), j.value("add", 8.0));
}

}  // namespace detail_config

inline ExperimentConfig parse_config(const Json& j) {
  using detail_config::parse_growth;
  using detail_config::parse_matrix;
  using detail_config::parse_sequence;
  using detail_config::parse_weights;

  ExperimentConfig c;
  c.echo = j;
  if (!j.is_object()) throw ConfigError("", "top level must be an object");
  c.schema_version = j.value("schema_version", 1);
  if (c.schema_version != 1)
    throw ConfigError("schema_version", "unsupported version");
  c.seed = j.value("seed", std::uint64_t{0});

  const Json& space = j.value("space", Json::object());
  if (space.contains("matrix")) c.matrix = parse_matrix(space.at("matrix"), "space.matrix");
  c.matrix_spec = space.value("matrix", Json::object()).dump();
  c.params.p = space.value("p", 1.0);
  if (!(c.params.p == 0.0 || c.params.p >= 1.0))
    throw ConfigError("space.p", "p must be 0 or >= 1");
  if (space.contains("weights")) {
    c.weights = parse_weights(space.at("weights"), "space.weights");
    c.matrix = weighted_to_unweighted(*c.weights, c.matrix).conjugated_matrix;
  }

  const Json& witness = j.value("witness", Json::object());
  if (witness.contains("x")) c.x = parse_sequence(witness.at("x"), "witness.x");
  if (witness.contains("y")) c.y = parse_sequence(witness.at("y"), "witness.y");
  c.x_spec = witness.value("x", Json::object()).dump();
  c.y_spec = witness.value("y", Json::object()).dump();
  c.delta = witness.value("delta", 0.5);
  if (!(c.delta > 0)) throw ConfigError("witness.delta", "delta must be positive");

  const Json& sched = j.value("schedule", Json::object());
  c.mode = sched.value("mode", std::string("scaled"));
  if (c.mode != "scaled" && c.mode != "faithful")
    throw ConfigError("schedule.mode", "must be 'scaled' or 'faithful'");
  if (c.mode == "faithful") {
    c.gap = GrowthFunction::pow4();
    c.h = GrowthFunction::pow2();
  } else {
    if (sched.contains("gap")) c.gap = parse_growth(sched.at("gap"), "schedule.gap", true);
    if (sched.contains("h")) c.h = parse_growth(sched.at("h"), "schedule.h", false);
  }
  if (sched.contains("eta_seq")) {
    c.eta_seq.clear();
    for (const auto& e : sched.at("eta_seq")) c.eta_seq.push_back(e.get<Real>());
    if (c.eta_seq.empty()) throw ConfigError("schedule.eta_seq", "must be nonempty");
    for (Real e : c.eta_seq)
      if (!(e > 0 && e < 1)) throw ConfigError("schedule.eta_seq", "entries must lie in (0,1)");
  }
  c.horizon_cap = sched.value("horizon_cap", Index{100000});
  c.k_max = sched.value("k_max", Index{14});
  c.n_max = sched.value("n_max", Index{2});
  c.l_max = sched.value("l_max", Index{3});
  c.index_cap = sched.value("index_cap", Index{100000});
  c.retries = sched.value("retries", 8);
  c.samples_per_window = sched.value("samples_per_window", std::size_t{64});

  const Json& fam = j.value("family", Json::object());
  if (fam.contains("alphas")) {
    c.alphas.clear();
    for (const auto& e : fam.at("alphas")) c.alphas.push_back(e.get<Real>());
  }
  c.max_offset = fam.value("max_offset", Index{1});
  c.separation_floor = fam.value("separation_floor", 0.1);

  const Json& stats = j.value("stats", Json::object());
  if (stats.contains("t_grid")) {
    c.t_grid.clear();
    for (const auto& e : stats.at("t_grid")) c.t_grid.push_back(e.get<Real>());
  }
  c.epsilon = stats.value("epsilon", 0.4);
  if (std::find(c.t_grid.begin(), c.t_grid.end(), c.epsilon) == c.t_grid.end())
    throw ConfigError("stats.epsilon", "epsilon must be a t_grid entry");
  if (stats.contains("horizons")) {
    c.horizons.clear();
    for (const auto& e : stats.at("horizons")) c.horizons.push_back(e.get<Index>());
  }
  c.eta = stats.value("eta", 0.1);
  if (!(c.eta > 0 && c.eta < 1)) throw ConfigError("stats.eta", "eta must lie in (0,1)");
  c.pair_budget = stats.value("pair_budget", std::size_t{12});

  const Json& out = j.value("output", Json::object());
  c.out_dir = out.value("directory", std::string("out"));
  c.metric_tol = j.value("metric_tol", 1e-12);
  if (!(c.metric_tol > 0)) throw ConfigError("metric_tol", "must be positive");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace kothe
