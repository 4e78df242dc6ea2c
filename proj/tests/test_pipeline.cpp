#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "kothe/config.hpp"
#include "kothe/pipeline.hpp"

using namespace kothe;

namespace {

Json base_config() {
  return Json::parse(R"({
    "schema_version": 1,
    "space": { "matrix": {"name": "geometric", "r": 0.5}, "p": 1 },
    "witness": { "x": {"name": "zero"}, "y": {"name": "all_ones"}, "delta": 0.5 },
    "schedule": {
      "mode": "scaled",
      "gap": {"scale": 1.0, "add": 8.0},
      "h": {"scale": 0.5, "add": 0.0},
      "horizon_cap": 13000,
      "k_max": 11,
      "n_max": 2, "l_max": 3,
      "index_cap": 100000,
      "samples_per_window": 16
    },
    "family": { "alphas": [0.2, 0.5, 0.8, 0.95], "max_offset": 1 },
    "stats": {
      "t_grid": [0.4, 0.7],
      "epsilon": 0.4,
      "horizons": [64, 1528, 3064],
      "eta": 0.1,
      "pair_budget": 4
    }
  })");
}

}  // namespace

TEST_CASE("config parsing fills defaults and echoes input") {
  ExperimentConfig c = parse_config(base_config());
  CHECK(c.mode == "scaled");
  CHECK(c.k_max == 11);
  CHECK(c.delta == 0.5);
  CHECK(c.seed == 0);
  CHECK(c.alphas.size() == 4);
  CHECK(c.echo["schedule"]["k_max"] == 11);
}

TEST_CASE("schema violations raise ConfigError") {
  auto bad_delta = base_config();
  bad_delta["witness"]["delta"] = 0;
  CHECK_THROWS_WITH_AS(parse_config(bad_delta), doctest::Contains("delta must be positive"),
                       ConfigError);

  auto bad_eps = base_config();
  bad_eps["stats"]["epsilon"] = 0.33;
  CHECK_THROWS_WITH_AS(parse_config(bad_eps), doctest::Contains("t_grid"), ConfigError);

  auto bad_matrix = base_config();
  bad_matrix["space"]["matrix"]["name"] = "fractal";
  CHECK_THROWS_AS(parse_config(bad_matrix), ConfigError);

  auto bad_p = base_config();
  bad_p["space"]["p"] = 0.5;
  CHECK_THROWS_AS(parse_config(bad_p), ConfigError);

  auto bad_mode = base_config();
  bad_mode["schedule"]["mode"] = "hybrid";
  CHECK_THROWS_AS(parse_config(bad_mode), ConfigError);

  auto bad_ver = base_config();
  bad_ver["schema_version"] = 2;
  CHECK_THROWS_AS(parse_config(bad_ver), ConfigError);

  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("faithful mode forces the exponential growth rules") {
  auto j = base_config();
  j["schedule"]["mode"] = "faithful";
  ExperimentConfig c = parse_config(j);
  CHECK(c.gap.kind == GrowthFunction::Kind::Pow4);
  CHECK(c.h.kind == GrowthFunction::Kind::Pow2);
}

TEST_CASE("pipeline runs the reduced instance to a green report") {
  ExperimentConfig c = parse_config(base_config());
  PipelineResult res = run_pipeline(c);
  CHECK(res.exit_code == 0);
  CHECK(res.failures.empty());
  CHECK(res.report["summary"]["ok"] == true);
  CHECK(res.report["schema_version"] == 1);
  // k_max=11 materializes exactly through M_11 = 12280, the close of the
  // second amplification window
  CHECK(res.report["schedule"]["M"].size() == 11);
  CHECK(res.report["layout"]["k_seq"] == Json::array({1, 4, 7, 8, 11}));
  CHECK(res.report["witness_metric"]["value"].get<double>() ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-9));
  CHECK(res.profiles_csv.rfind("n,t,count,ratio,ambiguous\n", 0) == 0);
}

TEST_CASE("pipeline reports faithful-mode truncation as a failure with artifacts") {
  auto j = base_config();
  j["schedule"]["mode"] = "faithful";
  j["schedule"]["k_max"] = 5;
  ExperimentConfig c = parse_config(j);
  PipelineResult res = run_pipeline(c);
  CHECK(res.exit_code == 1);
  CHECK(res.report["summary"]["ok"] == false);
  bool cap_note = false;
  for (const auto& chk : res.report["schedule"]["gap_checks"])
    if (chk.contains("note") &&
        chk["note"].get<std::string>().find("index cap exceeded at k=3") != std::string::npos)
      cap_note = true;
  CHECK(cap_note);
  CHECK(!res.profiles_csv.empty());  // artifacts exist despite the failure
}

TEST_CASE("pipeline output is byte-deterministic") {
  ExperimentConfig c = parse_config(base_config());
  PipelineResult a = run_pipeline(c);
  PipelineResult b = run_pipeline(c);
  CHECK(a.report.dump() == b.report.dump());
  CHECK(a.profiles_csv == b.profiles_csv);
  CHECK(a.layout_json.dump() == b.layout_json.dump());
}

TEST_CASE("write_outputs materializes the three artifacts") {
  ExperimentConfig c = parse_config(base_config());
  PipelineResult res = run_pipeline(c);
  auto dir = std::filesystem::temp_directory_path() / "kothe-pipeline-test";
  std::filesystem::remove_all(dir);
  write_outputs(res, dir.string());
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "profiles.csv"));
  CHECK(std::filesystem::exists(dir / "layout.json"));
  std::ifstream f(dir / "report.json");
  Json back;
  f >> back;
  CHECK(back["summary"]["ok"] == true);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bundled config file parses") {
  ExperimentConfig c = load_config(std::string(REPO_ROOT) + "/configs/all_ones_geometric.json");
  CHECK(c.mode == "scaled");
  CHECK(c.k_max == 14);
  CHECK(c.epsilon == 0.4);
  ExperimentConfig f = load_config(std::string(REPO_ROOT) + "/configs/faithful_mode.json");
  CHECK(f.mode == "faithful");
}
