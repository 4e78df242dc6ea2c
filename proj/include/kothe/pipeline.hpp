#pragma once

/// End-to-end pipeline: matrix validation, continuity, membership, density
/// schedule, gap refinement, amplified witness, sign layout, family
/// emission, construction verification, and pairwise verdicts — with JSON
/// report / CSV profile / JSON layout artifacts.
///
/// Exit contract: 0 when every exit-relevant check passed, 1 when the
/// pipeline ran but a check failed (the report is still written), 2 for
/// configuration/schema violations (raised as ConfigError by the caller).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "kothe/config.hpp"
#include "kothe/construction.hpp"
#include "kothe/dc_stats.hpp"
#include "kothe/matrix.hpp"
#include "kothe/schedule.hpp"
#include "kothe/space.hpp"

namespace kothe {

inline Json check_to_json(const CheckRecord& c) {
  Json j;
  j["name"] = c.name;
  j["indices"] = c.indices;
  j["lhs"] = c.lhs;
  j["rhs"] = c.rhs;
  j["pass"] = c.pass;
  j["certified"] = c.certified;
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline Json checks_to_json(const std::vector<CheckRecord>& v) {
  Json arr = Json::array();
  for (const auto& c : v) arr.push_back(check_to_json(c));
  return arr;
}

inline std::size_t count_failed(const std::vector<CheckRecord>& v) {
  std::size_t n = 0;
  for (const auto& c : v)
    if (!c.pass) ++n;
  return n;
}

struct PipelineResult {
  Json report;
  Json layout_json;
  std::string profiles_csv;
  int exit_code = 0;
  std::vector<std::string> failures;  // exit-relevant check groups that failed
};

namespace detail_pipeline {

inline void log_stage(bool log, const std::string& msg) {
  if (log) std::cerr << "[kothe-chaos] " << msg << "\n";
}

inline Json verdict_to_json(const PairVerdict& v) {
  Json j;
  j["verdict"] = to_string(v.verdict);
  j["epsilon"] = v.epsilon;
  j["eta"] = v.eta;
  j["proximality_ok"] = v.proximality_ok;
  j["separation_ok"] = v.separation_ok;
  j["worst_upper_est"] = v.worst_upper_est;
  j["lower_est_at_epsilon"] = v.lower_est_at_epsilon;
  return j;
}

}  // namespace detail_pipeline

/// Runs the full pipeline on a parsed configuration. Never throws for
/// mathematical check failures; those surface as exit_code 1 with the
/// failure recorded in the report. Configuration errors are the caller's
/// concern (ConfigError before this point).
inline PipelineResult run_pipeline(const ExperimentConfig& cfg, bool log = false) {
  using detail_pipeline::log_stage;
  PipelineResult res;
  SpaceContext ctx = cfg.context();

  Json& rep = res.report;
  rep["schema_version"] = 1;
  rep["mode"] = cfg.mode;
  rep["seed"] = cfg.seed;
  rep["config"] = cfg.echo;
  Json stages = Json::object();
  auto fail = [&](const std::string& group) { res.failures.push_back(group); };

  // ---- stage 1: matrix axioms on a finite window -----------------------
  log_stage(log, "validate: matrix axioms");
  {
    Index j_max = std::min<Index>(cfg.index_cap, 512);
    Index k_max = std::min<Index>(cfg.k_max, 16);
    ValidationReport vr = validate_kothe(cfg.matrix, j_max, k_max);
    Json vj;
    vj["matrix"] = cfg.matrix.describe();
    vj["window"] = {{"j_max", vr.j_max}, {"k_max", vr.k_max}};
    Json viol = Json::array();
    for (const auto& v : vr.violations)
      viol.push_back({{"code", v.code}, {"j", v.j}, {"k", v.k}, {"message", v.message}});
    vj["violations"] = viol;
    vj["valid_on_window"] = vr.valid_on_window();
    rep["matrix_validation"] = vj;
    stages["matrix_validation"] = vr.valid_on_window() ? "ok" : "failed";
    if (!vr.valid_on_window()) fail("matrix_validation");
  }

  // ---- stage 2: shift-continuity condition -----------------------------
  log_stage(log, "validate: shift continuity");
  {
    Json cj = Json::array();
    bool all_ok = true;
    Index n_max_cont = std::min<Index>(cfg.k_max, 4);
    for (Index n = 1; n <= n_max_cont; ++n) {
      ContinuityReport cr = check_continuity(cfg.matrix, n, n + 8, 256);
      Json e;
      e["n"] = n;
      e["satisfied"] = cr.satisfied();
      if (cr.witness_m) e["witness_m"] = *cr.witness_m;
      e["window_evidence_only"] = cr.window_evidence_only;
      cj.push_back(e);
      all_ok = all_ok && cr.satisfied();
    }
    rep["continuity"] = cj;
    stages["continuity"] = all_ok ? "ok" : "failed";
    if (!all_ok) fail("continuity");
  }

  // ---- stage 3: witness membership -------------------------------------
  log_stage(log, "validate: witness membership");
  bool members_ok = true;
  {
    Json mj = Json::object();
    for (const auto& [tag, seq] : {std::pair<const char*, const SequenceRep*>{"x", &cfg.x},
                                   {"y", &cfg.y}}) {
      MembershipReport mr = membership(*seq, ctx.params, ctx.A, std::min<Index>(cfg.k_max, 8),
                                       ctx.budget);
      Json e;
      e["verdict"] = mr.verdict;
      Json per_k = Json::array();
      for (const auto& pk : mr.per_k)
        per_k.push_back({{"k", pk.k},
                         {"value", pk.value},
                         {"tail_bound", pk.tail_bound},
                         {"certified", pk.certified}});
      e["per_k"] = per_k;
      mj[tag] = e;
      if (mr.verdict == "not a member (evidence)") members_ok = false;
    }
    rep["membership"] = mj;
    stages["membership"] = members_ok ? "ok" : "failed";
    if (!members_ok) fail("membership");
  }

  // ---- stage 4: witness metric + profile -------------------------------
  log_stage(log, "metric: witness distance and profile");
  {
    MetricValue d = ctx.distance(cfg.x, cfg.y);
    rep["witness_metric"] = {{"value", d.value}, {"error_bound", d.truncation_error_bound}};
    DistributionalProfile prof =
        profile(cfg.x, cfg.y, cfg.t_grid, cfg.horizons, ctx);
    res.profiles_csv = profile_to_csv(prof);
    Json pj = Json::object();
    pj["t_grid"] = prof.t_grid;
    pj["horizons"] = prof.horizons;
    Json lower = Json::array(), upper = Json::array();
    for (std::size_t ti = 0; ti < prof.t_grid.size(); ++ti) {
      lower.push_back(prof.lower_est(ti));
      upper.push_back(prof.upper_est(ti));
    }
    pj["lower_est"] = lower;
    pj["upper_est"] = upper;
    rep["witness_profile"] = pj;
    stages["witness_profile"] = "ok";
  }

  // ---- stage 5: density schedule ---------------------------------------
  log_stage(log, "build: density schedule");
  DensitySchedule ds;
  bool density_ok = true;
  {
    Json dj = Json::object();
    try {
      ds = find_density_schedule(cfg.x, cfg.y, cfg.delta, cfg.eta_seq, cfg.horizon_cap, ctx);
      dj["delta"] = ds.delta;
      dj["eta_targets_met"] = ds.eta_targets_met;
      dj["count"] = ds.N.size();
      dj["first"] = ds.N.empty() ? Json() : Json(ds.N.front());
      dj["last"] = ds.N.empty() ? Json() : Json(ds.N.back());
      dj["final_density"] = ds.densities.empty() ? Json() : Json(ds.densities.back());
    } catch (const EvaluationError& e) {
      density_ok = false;
      dj["error"] = e.what();
    }
    rep["density_schedule"] = dj;
    stages["density_schedule"] = density_ok ? "ok" : "failed";
    if (!density_ok) fail("density_schedule");
  }

  // ---- stage 6: gap-refined schedule -----------------------------------
  ConstructionSchedule cs;
  bool schedule_ok = density_ok;
  if (density_ok) {
    log_stage(log, "build: gap-refined schedule");
    cs = refine_gap_schedule(ds, cfg.gap, cfg.h, cfg.y, ctx, cfg.k_max, cfg.index_cap,
                             cfg.mode, cfg.retries, cfg.samples_per_window);
    Json sj;
    sj["mode"] = cs.mode;
    sj["gap"] = cfg.gap.describe();
    sj["h"] = cfg.h.describe();
    sj["M"] = cs.M;
    sj["gap_checks"] = checks_to_json(cs.gap_checks);
    sj["tail_checks"] = checks_to_json(cs.tail_checks);
    sj["window_checks"] = checks_to_json(cs.window_checks);
    schedule_ok = cs.all_gap_and_tail_checks_pass() && count_failed(cs.window_checks) == 0 &&
                  cs.M.size() == cfg.k_max;
    rep["schedule"] = sj;
    stages["schedule"] = schedule_ok ? "ok" : "failed";
    if (!schedule_ok) fail("schedule");
  } else {
    stages["schedule"] = "skipped: no density schedule";
  }

  // ---- stage 7: amplified witness nu -----------------------------------
  bool nu_ok = false;
  NuBuildResult nu_res;
  if (!cs.M.empty()) {
    log_stage(log, "build: amplified witness");
    try {
      nu_res = build_nu(cfg.y, cs, ctx);
      nu_ok = count_failed(nu_res.membership_chain) == 0;
      Json nj;
      nj["blocks"] = nu_res.blocks;
      nj["membership_chain"] = checks_to_json(nu_res.membership_chain);
      rep["nu"] = nj;
      stages["nu"] = nu_ok ? "ok" : "failed";
      if (!nu_ok) fail("nu_membership");
    } catch (const EvaluationError& e) {
      rep["nu"] = {{"error", e.what()}};
      stages["nu"] = "failed";
      fail("nu_build");
    }
  } else {
    stages["nu"] = "skipped: empty schedule";
  }

  // ---- stage 8: k-subsequence + sign layout + nu_bar -------------------
  SignBlockLayout layout;
  SequenceRep nu_bar = SequenceRep::zero();
  bool layout_ok = false;
  if (nu_ok) {
    log_stage(log, "build: subsequence and sign layout");
    select_k_subsequence(cs, nu_res.nu, ctx, cfg.n_max, cfg.retries, cfg.samples_per_window);
    layout = build_sign_layout(cs, cfg.n_max, cfg.l_max, cfg.index_cap);
    nu_bar = build_nu_bar(nu_res.nu, layout);
    bool tail10_ok = count_failed(cs.tail10_checks) == 0;
    bool inv_ok = count_failed(layout.invariant_checks) == 0;
    layout_ok = tail10_ok && inv_ok && !layout.blocks.empty();

    Json lj;
    lj["k_seq"] = cs.k_seq;
    lj["tail10_checks"] = checks_to_json(cs.tail10_checks);
    Json blocks = Json::array();
    for (const auto& b : layout.blocks)
      blocks.push_back({{"n", b.n},
                        {"l", b.l},
                        {"prime_power", b.prime_power},
                        {"window", {b.base, b.end}},
                        {"q_limit", b.q_limit}});
    lj["sign_blocks"] = blocks;
    lj["skipped"] = layout.skipped;
    lj["invariant_checks"] = checks_to_json(layout.invariant_checks);
    rep["layout"] = lj;
    stages["layout"] = layout_ok ? "ok" : "failed";
    if (!tail10_ok) fail("tail10");
    if (!inv_ok) fail("layout_invariants");
    if (layout.blocks.empty()) fail("layout_empty");

    // standalone layout artifact
    Json& out = res.layout_json;
    out["schema_version"] = 1;
    Json amp = Json::array();
    for (Index k = 1; 4 * k + 3 <= cs.M.size(); ++k)
      amp.push_back({{"coeff", k}, {"interval", {cs.M_at(4 * k), cs.M_at(4 * k + 3)}}});
    out["amplification_blocks"] = amp;
    out["sign_blocks"] = blocks;
    out["skipped"] = layout.skipped;
  } else {
    stages["layout"] = "skipped: no amplified witness";
  }

  // ---- stage 9: family + construction verification ---------------------
  if (layout_ok) {
    log_stage(log, "verify: construction inequalities");
    try {
      ScrambledFamily fam = emit_family(nu_res.nu, nu_bar, cfg.alphas, cfg.max_offset,
                                        cfg.separation_floor);
      ConstructionReport cr =
          verify_construction(fam, cs, layout, cfg.y, ctx, cfg.samples_per_window);
      Json vj;
      vj["mode"] = cr.mode;
      vj["proximality"] = checks_to_json(cr.proximality);
      vj["case1"] = checks_to_json(cr.case1);
      vj["case2"] = checks_to_json(cr.case2);
      vj["notices"] = cr.notices;
      vj["case2_range_note"] = cr.case2_range_note;
      bool prox_ok = count_failed(cr.proximality) == 0;
      bool bc_ok = cr.sections_bc_pass();
      rep["construction"] = vj;
      stages["construction"] = (prox_ok && bc_ok) ? "ok" : "failed";
      if (!prox_ok) fail("construction_proximality");
      if (!bc_ok) fail("construction_separation");

      log_stage(log, "verify: pairwise verdicts");
      FamilyReport fr =
          verify_scrambled_family(fam.members(), cfg.pair_budget, cfg.epsilon, cfg.t_grid,
                                  cfg.horizons, cfg.eta, ctx, cfg.seed);
      Json fj;
      fj["members"] = fam.members().size();
      fj["pairs_checked"] = fr.pairs.size();
      fj["refuted"] = fr.refuted;
      fj["consistent"] = fr.consistent;
      fj["inconclusive"] = fr.inconclusive;
      if (!fr.note.empty()) fj["note"] = fr.note;
      Json pairs = Json::array();
      auto mem = fam.members();
      for (const auto& p : fr.pairs) {
        Json e;
        e["i"] = mem[p.i].label();
        e["j"] = mem[p.j].label();
        e["result"] = detail_pipeline::verdict_to_json(p.verdict);
        pairs.push_back(e);
      }
      fj["pairs"] = pairs;
      if (fr.worst_pair)
        fj["worst_pair"] = {{"i", mem[fr.pairs[*fr.worst_pair].i].label()},
                            {"j", mem[fr.pairs[*fr.worst_pair].j].label()},
                            {"lower_est_at_epsilon",
                             fr.pairs[*fr.worst_pair].verdict.lower_est_at_epsilon}};
      rep["family"] = fj;
      stages["family"] = fr.refuted == 0 ? "ok" : "failed";
      if (fr.refuted != 0) fail("family_refuted");
    } catch (const EvaluationError& e) {
      rep["family"] = {{"error", e.what()}};
      stages["family"] = "failed";
      fail("family_build");
    }
  } else {
    stages["construction"] = "skipped: no sign layout";
    stages["family"] = "skipped: no sign layout";
  }

  rep["stages"] = stages;
  Json summary;
  summary["failures"] = res.failures;
  summary["ok"] = res.failures.empty();
  rep["summary"] = summary;
  res.exit_code = res.failures.empty() ? 0 : 1;
  return res;
}

/// Writes report.json, profiles.csv and layout.json under out_dir.
inline void write_outputs(const PipelineResult& res, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream f(fs::path(out_dir) / "report.json");
    f << res.report.dump(2) << "\n";
  }
  {
    std::ofstream f(fs::path(out_dir) / "profiles.csv");
    f << res.profiles_csv;
  }
  if (!res.layout_json.is_null()) {
    std::ofstream f(fs::path(out_dir) / "layout.json");
    f << res.layout_json.dump(2) << "\n";
  }
}

}  // namespace kothe
