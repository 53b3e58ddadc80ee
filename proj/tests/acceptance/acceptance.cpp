// Acceptance suite: one PASS/FAIL line per criterion. Criterion 8 is reported, never gated.
//
//   acceptance [--skip-trend] [--only N]...

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "gitsr/harness/runner.hpp"
#include "nn_oracle.hpp"
#include "run_support.hpp"

using namespace gitsr;
using namespace gitsr::harness;
using nn::ModelVariant;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
  bool gated = true;
};

std::string fmt(double v, int digits = 4) { return csv::sig(v, digits); }

fs::path source_path(const std::string& rel) { return fs::path(GITSR_SOURCE_DIR) / rel; }

oracle::Mat random_mat(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  oracle::Mat m(r, std::vector<double>(c));
  for (auto& row : m)
    for (auto& v : row) v = u(rng);
  return m;
}

oracle::Mat random_graph(std::size_t n, std::mt19937_64& rng) {
  std::bernoulli_distribution edge(0.4);
  oracle::Mat a(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) a[i][j] = a[j][i] = edge(rng) ? 1.0 : 0.0;
  }
  return a;
}

double max_abs_diff(const oracle::Mat& ref, const Tensor<double>& got, std::size_t row0 = 0) {
  double m = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    for (std::size_t j = 0; j < ref[i].size(); ++j) m = std::max(m, std::abs(ref[i][j] - got(row0 + i, j)));
  return m;
}

// 1 -------------------------------------------------------------------------------------------
Verdict gradient_correctness() {
  const auto cfg = oracle::small_config(ModelVariant::Gitsr);  // d_model 8, 2 heads, 1 block, GCN 10 -> 8
  nn::QNetwork<double> net(cfg, 2024);
  std::mt19937_64 rng(7);
  double worst = 0.0;
  std::string worst_name;
  std::size_t entries = 0, kinks = 0, groups = 0;
  for (int k = 0; k < 20; ++k) {
    const std::size_t m = 1 + rng() % 3, n = m + rng() % 4;
    const auto in = oracle::make_input<double>({oracle::random_sample(cfg, m, n, rng)});
    const auto r = random_mat(m, 9, rng);
    const auto check = oracle::gradient_check(net, in, r);
    entries += check.entries;
    kinks += check.kinks;
    groups = check.rel_error.size();
    for (const auto& [name, err] : check.rel_error)
      if (err > worst) worst = err, worst_name = name;
  }
  Verdict v;
  v.pass = worst < 1e-4 && groups == net.params().size() && kinks * 100 < entries;
  v.detail = std::to_string(groups) + " parameter groups, 20 inputs, max rel error " + fmt(worst) + " (" + worst_name +
             "), " + std::to_string(kinks) + "/" + std::to_string(entries) + " entries at a ReLU kink skipped";
  return v;
}

// 2 -------------------------------------------------------------------------------------------
Verdict oracle_equivalence() {
  std::mt19937_64 rng(11);
  double worst_mha = 0.0, worst_gcn = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::size_t d = std::array<std::size_t, 3>{8, 16, 32}[rng() % 3];
    const std::size_t h = std::array<std::size_t, 3>{1, 2, 4}[rng() % 3];
    const std::size_t m = 1 + rng() % 5;
    nn::ParamStore<double> ps;
    nn::MultiHeadAttention<double> mha(ps, "a", d, h, rng);
    const auto x = random_mat(m, d, rng, 2.0);
    const auto y = mha.forward(oracle::to_tensor<double>(x), m);
    const auto ref = oracle::attention(x, oracle::param(ps, "a.q.W"), oracle::param(ps, "a.k.W"),
                                       oracle::param(ps, "a.v.W"), oracle::param(ps, "a.o.W"), h);
    worst_mha = std::max(worst_mha, max_abs_diff(ref, y));
  }
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 1 + rng() % 8, batch = 1 + (k % 2);
    nn::ParamStore<double> ps;
    nn::GcnConfig gc{{10, 4 + rng() % 29, 4 + rng() % 29}};
    nn::Gcn<double> g(ps, "gcn", gc, rng);
    std::vector<oracle::Mat> feats, adjs;
    oracle::Mat feat_stack, norm_stack;
    for (std::size_t b = 0; b < batch; ++b) {
      feats.push_back(random_mat(n, 10, rng));
      adjs.push_back(random_graph(n, rng));
      feat_stack.insert(feat_stack.end(), feats.back().begin(), feats.back().end());
      const auto a = nn::gcn_normalize<double>(oracle::to_tensor<double>(adjs.back()));
      for (std::size_t i = 0; i < n; ++i) norm_stack.emplace_back(a.row(i), a.row(i) + n);
    }
    const auto y = g.forward(oracle::to_tensor<double>(feat_stack), oracle::to_tensor<double>(norm_stack));
    for (std::size_t b = 0; b < batch; ++b) {
      const auto ref = oracle::gcn(ps, gc.n_layers(), feats[b], oracle::normalize(adjs[b]));
      worst_gcn = std::max(worst_gcn, max_abs_diff(ref, y, b * n));
    }
  }
  Verdict v;
  v.pass = worst_mha < 1e-5 && worst_gcn < 1e-5;
  v.detail = "100 attention instances max |diff| " + fmt(worst_mha) + ", 100 GCN instances max |diff| " + fmt(worst_gcn);
  return v;
}

// 3 -------------------------------------------------------------------------------------------
Verdict permutation_equivariance() {
  std::mt19937_64 rng(13);
  nn::ParamStore<double> ps_enc, ps_gcn;
  nn::TransformerConfig tc;  // full size
  nn::TransformerEncoder<double> enc(ps_enc, "encoder", tc, rng);
  nn::Gcn<double> gcn(ps_gcn, "gcn", nn::GcnConfig{}, rng);
  double worst_enc = 0.0, worst_gcn = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t m = 5, n = 8;
    std::vector<std::size_t> pm(m), pn(n);
    std::iota(pm.begin(), pm.end(), 0);
    std::iota(pn.begin(), pn.end(), 0);
    std::shuffle(pm.begin(), pm.end(), rng);
    std::shuffle(pn.begin(), pn.end(), rng);

    const auto x = random_mat(m, tc.input_width, rng);
    oracle::Mat xp(m);
    for (std::size_t i = 0; i < m; ++i) xp[i] = x[pm[i]];
    const auto y = enc.forward(oracle::to_tensor<double>(x), m);
    const auto yp = enc.forward(oracle::to_tensor<double>(xp), m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t c = 0; c < y.cols(); ++c) worst_enc = std::max(worst_enc, std::abs(yp(i, c) - y(pm[i], c)));

    const auto f = random_mat(n, 10, rng);
    const auto a = random_graph(n, rng);
    oracle::Mat fp(n), ap(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      fp[i] = f[pn[i]];
      for (std::size_t j = 0; j < n; ++j) ap[i][j] = a[pn[i]][pn[j]];
    }
    const auto g = gcn.forward(oracle::to_tensor<double>(f), nn::gcn_normalize<double>(oracle::to_tensor<double>(a)));
    const auto gp = gcn.forward(oracle::to_tensor<double>(fp), nn::gcn_normalize<double>(oracle::to_tensor<double>(ap)));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < g.cols(); ++c) worst_gcn = std::max(worst_gcn, std::abs(gp(i, c) - g(pn[i], c)));
  }
  Verdict v;
  v.pass = worst_enc < 1e-5 && worst_gcn < 1e-5;
  v.detail = "50 permutations, encoder max |diff| " + fmt(worst_enc) + ", GCN max |diff| " + fmt(worst_gcn);
  return v;
}

// 4 -------------------------------------------------------------------------------------------
Verdict idm_equilibrium_and_no_overlap() {
  const ScenarioConfig base;
  const auto& p = base.idm;
  double worst_rel = 0.0;
  for (double v_lead : {5.0, 10.0, 15.0, 20.0}) {
    // follower driven by the library IDM and Euler update, leader at constant speed
    double x_l = 60.0, x_f = 0.0, v_f = 5.0;
    for (int i = 0; i < 500; ++i) {
      const double a = idm_acceleration(v_f, x_l - x_f - base.vehicle_length, v_lead, p);
      v_f = advance_speed(v_f, a, base.dt, base.v_max);
      x_f += v_f * base.dt;
      x_l += v_lead * base.dt;
    }
    const double closed_form = (p.s0 + v_lead * p.T_headway) / std::sqrt(1.0 - std::pow(v_lead / p.v0, p.delta));
    worst_rel = std::max(worst_rel, std::abs(x_l - x_f - base.vehicle_length - closed_form) / closed_form);
  }

  auto c = base;
  c.n_cav = 0;
  c.n_hdv = 30;
  std::size_t overlaps = 0, steps = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto w = reset(c, seed);
    for (std::uint64_t i = 0; i < 10000; ++i, ++steps) {
      if (w.active_count() == 0) w = reset(c, seed * 100000 + i);
      step(w, {}, c);
      for (const auto& a : w.vehicles)
        for (const auto& b : w.vehicles)
          if (a.id < b.id && a.active && b.active && a.lane == b.lane && std::abs(a.x - b.x) < c.vehicle_length)
            ++overlaps;
    }
  }
  Verdict v;
  v.pass = worst_rel < 0.01 && overlaps == 0;
  v.detail = "equilibrium gap max rel error " + fmt(worst_rel) + " at v_lead 5..20; " + std::to_string(overlaps) +
             " overlaps in " + std::to_string(steps) + " HDV-only steps";
  return v;
}

// 5 -------------------------------------------------------------------------------------------
Verdict representation_invariants() {
  const ScenarioConfig c;
  std::size_t violations = 0, grids = 0, active_egos = 0;
  std::string first;
  auto fail = [&](const std::string& what) {
    if (violations++ == 0) first = what;
  };
  std::size_t worlds = 0;
  for (std::uint64_t seed = 0; worlds < 1000; ++seed) {
    auto w = reset(c, seed);
    std::mt19937_64 rng(seed * 7 + 3);
    const auto steps = rng() % 60;
    for (std::uint64_t i = 0; i < steps && !episode_done(w, c); ++i) {
      std::vector<ActionCommand> acts;
      for (std::size_t k = 0; k < c.n_cav; ++k)
        acts.push_back(rng() % 10 < 3 ? ActionCommand::decode(static_cast<int>(rng() % 9)) : kIdleAction);
      step(w, acts, c);
    }
    if (episode_done(w, c)) continue;  // keep worlds with at least one CAV on the road
    ++worlds;
    for (auto id : cav_ids(w)) {
      const auto& ego = w.vehicles[id];
      const auto g = build_local_grid(w, id, c).values;
      ++grids;
      if (g.rows() != c.n_lanes || g.cols() != 51) fail("grid shape");
      std::size_t nonzero = 0;
      for (double x : g.values()) {
        if (x < 0.0 || x > 1.0) fail("grid value outside [0,1]");
        nonzero += x != 0.0;
      }
      if (!ego.active) {
        if (nonzero) fail("inactive ego has a non-zero grid");
        continue;
      }
      ++active_egos;
      if (!(g(ego.lane - 1, 25) > 0.0)) fail("ego not at column 25");
      std::set<std::pair<std::uint32_t, long>> cells;
      for (const auto& o : w.vehicles)
        if (o.active && std::abs(o.x - ego.x) <= 50.0) cells.emplace(o.lane, std::lround((o.x - ego.x) / 2.0));
      if (nonzero != cells.size()) fail("occupancy count");
    }
    const auto sg = build_scene_centric_grid(w, c);
    std::set<std::pair<std::uint32_t, long>> scene_cells;
    for (const auto& o : w.vehicles)
      if (o.active) scene_cells.emplace(o.lane, std::lround(o.x / 2.0));
    std::size_t scene_nonzero = 0;
    for (double x : sg.values()) {
      if (x < -1.0 || x > 1.0) fail("scene grid value outside [-1,1]");
      scene_nonzero += x != 0.0;
    }
    if (scene_nonzero != scene_cells.size()) fail("scene occupancy count");

    const auto e = build_adjacency(w);
    for (std::size_t i = 0; i < e.rows(); ++i) {
      if (e(i, i) != 1.0) fail("adjacency diagonal");
      for (std::size_t j = 0; j < e.cols(); ++j)
        if (e(i, j) != e(j, i)) fail("adjacency symmetry");
    }
    const auto f = build_feature_matrix(w, c);
    for (const auto& veh : w.vehicles) {
      if (!veh.active) continue;
      for (std::size_t k = 0; k < f.cols(); ++k) {
        if (k == 2 || k == 3) continue;  // lane index and category code are raw
        if (f(veh.id, k) < 0.0 || f(veh.id, k) > 1.0) fail("feature column " + std::to_string(k) + " outside [0,1]");
      }
      if (std::abs(f(veh.id, 0) - veh.x / c.road_length) > 1e-12) fail("position feature");
      if (std::abs(f(veh.id, 1) - veh.v / c.v_max) > 1e-12) fail("speed feature");
    }
  }
  Verdict v;
  v.pass = violations == 0;
  v.detail = "1000 worlds, " + std::to_string(grids) + " agent-centric grids (" + std::to_string(active_egos) + " with an active ego), " + std::to_string(violations) +
             " violations" + (first.empty() ? "" : " (first: " + first + ")");
  return v;
}

// 6 -------------------------------------------------------------------------------------------
VehicleState make_cav(std::uint32_t id, VehicleKind k, std::uint32_t lane, double x, double v) {
  VehicleState s;
  s.id = id;
  s.kind = k;
  s.lane = lane;
  s.x = x;
  s.v = v;
  return s;
}

Verdict reward_arithmetic() {
  const ScenarioConfig c;
  const rl::RewardWeights wts;
  WorldState top;
  top.vehicles = {make_cav(0, VehicleKind::CavRamp1, 1, 10, 25), make_cav(1, VehicleKind::CavRamp2, 1, 30, 25),
                  make_cav(2, VehicleKind::CavRamp1, 2, 50, 25), make_cav(3, VehicleKind::CavRamp2, 2, 70, 25)};
  const double r_speed = rl::compute_reward(top, {}, wts, c).total;

  WorldState crash;
  crash.vehicles = {make_cav(0, VehicleKind::CavRamp1, 1, 10, 0), make_cav(1, VehicleKind::CavRamp2, 1, 12, 0),
                    make_cav(2, VehicleKind::CavRamp1, 2, 50, 0), make_cav(3, VehicleKind::CavRamp2, 2, 70, 0)};
  crash.vehicles[0].active = crash.vehicles[1].active = false;
  StepEvents ev;
  ev.collisions.emplace_back(0, 1);
  const double r_crash = rl::compute_reward(crash, ev, wts, c).total;

  WorldState zone;
  zone.vehicles = {make_cav(0, VehicleKind::CavRamp1, 3, 240, 0)};
  const double r_zone = rl::compute_reward(zone, {}, wts, c).total;
  const bool examples = r_speed == 3.0 && r_crash == -9.0 && r_zone == 12.0;

  // Episode return against the per-step rewards, in-process and through a CLI trace.
  double worst = 0.0;
  rl::TrainingConfig t;
  t.warmup_steps = 100;
  t.epsilon.decay_steps = 300;
  t.replay_capacity = 5000;
  rl::Trainer tr(c, ModelVariant::Gitsr, rl::Representation::AgentCentric, t, 3);
  for (int e = 0; e < 10; ++e) {
    double sum = 0.0;
    const auto m = tr.train_episode([&](const WorldState&, const rl::StepRecord& r) { sum += r.reward.total; });
    worst = std::max(worst, std::abs(sum - m.ret));
  }
  const auto dir = support::fresh_dir("acc_trace");
  const auto r = support::run_cli("trace --seed 4 --config " + source_path("configs/default.json").string() + " --out " +
                                      (dir / "t").string(), dir / "log.txt");
  bool trace_ok = r.exit_code == 0;
  std::size_t trace_steps = 0;
  if (trace_ok) {
    const auto table = support::read_csv(dir / "t" / "trace.csv");
    const auto meta = read_json_file(dir / "t" / "trace_meta.json", "trace_meta");
    double sum = 0.0;
    for (const auto& row : table.rows)
      if (!row[table.col("reward")].empty()) sum += std::stod(row[table.col("reward")]);
    worst = std::max(worst, std::abs(sum - meta["return"].get<double>()));
    trace_steps = meta["steps"].get<std::size_t>();
    trace_ok = table.rows.size() == trace_steps * c.n_vehicles();
  }
  fs::remove_all(dir);
  Verdict v;
  v.pass = examples && trace_ok && worst <= 1e-9;
  v.detail = "examples " + fmt(r_speed) + ", " + fmt(r_crash) + ", " + fmt(r_zone) +
             "; max |return - sum of step rewards| " + fmt(worst) + " over 10 episodes and a " +
             std::to_string(trace_steps) + "-step CLI trace" + (trace_ok ? "" : " (trace failed)");
  return v;
}

// 7 -------------------------------------------------------------------------------------------
double random_policy_return(const ExperimentConfig& cfg, std::size_t episodes) {
  std::mt19937_64 rng(987654321);
  double total = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    auto w = reset(cfg.scenario, rl::derive_seed(99, rl::SeedStream::EvalWorld, e));
    std::vector<ActionCommand> acts(cfg.scenario.n_cav);
    while (!episode_done(w, cfg.scenario)) {
      for (auto& a : acts) a = ActionCommand::decode(static_cast<int>(rng() % kNumActions));
      const auto ev = step(w, acts, cfg.scenario);
      total += rl::compute_reward(w, ev, cfg.training.weights, cfg.scenario).total;
    }
  }
  return total / static_cast<double>(episodes);
}

Verdict learning_smoke() {
  const auto cfg = load_experiment(source_path("configs/smoke.json"));
  const double baseline = random_policy_return(cfg, 500);
  std::ostringstream os;
  os << "random baseline " << fmt(baseline) << ", last-20 of " << cfg.training.episodes << ":";
  int passed = 0;
  for (auto seed : cfg.seeds) {
    rl::Trainer tr(cfg.scenario, cfg.variant, cfg.representation, cfg.training, seed);
    std::vector<double> rets;
    for (std::size_t e = 0; e < cfg.training.episodes; ++e) rets.push_back(tr.train_episode().ret);
    const double last = std::accumulate(rets.end() - 20, rets.end(), 0.0) / 20.0;
    const bool ok = last >= 1.5 * baseline;
    passed += ok;
    os << " seed " << seed << " " << fmt(last) << (ok ? "" : " (short)");
  }
  Verdict v;
  v.pass = baseline > 0 && passed == static_cast<int>(cfg.seeds.size()) && cfg.seeds.size() == 3;
  v.detail = os.str() + "; need >= " + fmt(1.5 * baseline) + " for 3/3 seeds";
  return v;
}

// 8 -------------------------------------------------------------------------------------------
Verdict trend_check() {
  auto cfg = load_experiment(source_path("configs/trend.json"));
  cfg.record_timing = false;
  const auto dir = support::fresh_dir("acc_trend");
  RunOptions opt;
  opt.jobs = cfg.seeds.size();
  opt.log_every = 100;
  std::map<ModelVariant, MeanStd> result;
  for (auto variant : {ModelVariant::Gitsr, ModelVariant::Madqn}) {
    cfg.variant = variant;
    const auto runs = run_training(cfg, dir / nn::to_string(variant), opt);
    std::vector<double> finals;
    for (const auto& r : runs) {
      const auto& e = r.episodes;
      const std::size_t w = std::min<std::size_t>(50, e.size());
      double s = 0.0;
      for (std::size_t i = e.size() - w; i < e.size(); ++i) s += e[i].ret;
      finals.push_back(s / static_cast<double>(w));
    }
    result[variant] = mean_std(finals);
  }
  fs::remove_all(dir);
  const auto& g = result[ModelVariant::Gitsr];
  const auto& m = result[ModelVariant::Madqn];
  Verdict v;
  v.gated = false;
  v.pass = g.mean >= m.mean;
  v.detail = "final-50 return over " + std::to_string(cfg.seeds.size()) + " seeds x " +
             std::to_string(cfg.training.episodes) + " episodes: gitsr " + fmt(g.mean) + " +- " + fmt(g.std) +
             ", madqn " + fmt(m.mean) + " +- " + fmt(m.std) + (v.pass ? "; ordering reproduced" : "; ordering NOT reproduced");
  return v;
}

// 9 -------------------------------------------------------------------------------------------
Verdict determinism_and_persistence() {
  ExperimentConfig cfg;
  cfg.scenario.max_steps = 60;
  cfg.training.episodes = 12;
  cfg.training.warmup_steps = 150;
  cfg.training.epsilon.decay_steps = 300;
  cfg.training.replay_capacity = 5000;
  cfg.training.checkpoint_every = 0;
  cfg.seeds = {21, 22};
  cfg.record_timing = false;
  RunOptions quiet;
  quiet.log = nullptr;
  const auto dir = support::fresh_dir("acc_det");
  run_training(cfg, dir / "a", quiet);
  run_training(cfg, dir / "b", quiet);
  const bool csv_identical =
      support::slurp(dir / "a" / "metrics.csv") == support::slurp(dir / "b" / "metrics.csv") &&
      support::slurp(dir / "a" / "checkpoints" / "seed22_final.bin") ==
          support::slurp(dir / "b" / "checkpoints" / "seed22_final.bin");

  bool round_trip = true, eval_match = true;
  for (auto variant : {ModelVariant::Gitsr, ModelVariant::MadqnTransformer, ModelVariant::Madqn}) {
    rl::Trainer a(cfg.scenario, variant, cfg.representation, cfg.training, 5);
    for (int e = 0; e < 6; ++e) a.train_episode();
    std::vector<std::string> before, after;
    for (std::size_t e = 0; e < 3; ++e) before.push_back(metrics_row(a.eval_episode(e), 5, variant, false));
    const auto manifest = nn::save_checkpoint(a.learner().online(), dir / ("ck_" + nn::to_string(variant)));

    rl::Trainer b(cfg.scenario, variant, cfg.representation, cfg.training, 5);
    load_into(b, manifest);
    const auto& pa = a.learner().online().params();
    const auto& pb = b.learner().online().params();
    for (std::size_t i = 0; i < pa.size(); ++i) round_trip = round_trip && pa[i].value == pb[i].value;
    const auto& pt = b.learner().target().params();
    for (std::size_t i = 0; i < pa.size(); ++i) round_trip = round_trip && pa[i].value == pt[i].value;
    for (std::size_t e = 0; e < 3; ++e) after.push_back(metrics_row(b.eval_episode(e), 5, variant, false));
    eval_match = eval_match && before == after;
  }
  fs::remove_all(dir);
  Verdict v;
  v.pass = csv_identical && round_trip && eval_match;
  v.detail = std::string("metrics CSV and final checkpoint ") + (csv_identical ? "identical" : "DIFFER") +
             " across reruns; checkpoint round trip " + (round_trip ? "bit-exact" : "NOT bit-exact") +
             " for 3 variants; evaluation after reload " + (eval_match ? "matches" : "DIFFERS");
  return v;
}

// 10 ------------------------------------------------------------------------------------------
Verdict ablation_plumbing() {
  const auto dir = support::fresh_dir("acc_ablate");
  const auto cfg = load_experiment(source_path("configs/ablation_smoke.json"));
  const auto r = support::run_cli("ablate --quiet --episodes 5 --config " +
                                      source_path("configs/ablation_smoke.json").string() + " --out " +
                                      (dir / "grid").string(), dir / "log.txt");
  std::vector<std::string> problems;
  if (r.exit_code != 0) problems.push_back("exit code " + std::to_string(r.exit_code));
  const auto out = dir / "grid";
  std::size_t ok_cells = 0, episode_rows = 0, aggregate_rows = 0;
  const std::size_t seeds = cfg.seeds.size();
  try {
    const auto j = read_json_file(out / "ablation.json", "ablation");
    if (j["cells"].size() != 6) problems.push_back("cells " + std::to_string(j["cells"].size()));
    std::set<std::string> seen;
    for (const auto& c : j["cells"]) {
      const std::string name = c["variant"].get<std::string>() + "_" + c["representation"].get<std::string>();
      seen.insert(name);
      if (c["status"] != "ok") {
        problems.push_back(name + " failed");
        continue;
      }
      ++ok_cells;
      if (c["seeds"] != seeds) problems.push_back(name + " seeds");
      for (const auto& m : summary_metrics())
        if (!c["metrics"].contains(m) || !c["metrics"][m]["mean"].is_number() || !c["metrics"][m]["std"].is_number())
          problems.push_back(name + " metric " + m);
      for (const char* f : {"config.json", "run_info.json", "metrics.csv", "summary.json"})
        if (!fs::exists(out / name / f)) problems.push_back(name + "/" + f + " missing");
      if (support::read_csv(out / name / "metrics.csv").rows.size() != 5 * seeds) problems.push_back(name + " rows");
    }
    if (seen.size() != 6) problems.push_back("duplicate cells");
    const auto t = support::read_csv(out / "ablation.csv");
    for (const auto& row : t.rows) {
      if (row.size() != t.header.size()) problems.push_back("ragged ablation.csv row");
      (row[0] == "episode" ? episode_rows : aggregate_rows)++;
    }
    if (episode_rows != 6 * seeds * 5) problems.push_back("episode rows " + std::to_string(episode_rows));
    if (aggregate_rows != 6) problems.push_back("aggregate rows " + std::to_string(aggregate_rows));
  } catch (const std::exception& e) {
    problems.push_back(e.what());
  }
  fs::remove_all(dir);
  Verdict v;
  v.pass = problems.empty();
  v.detail = "3x2 grid x " + std::to_string(seeds) + " seeds at 5 episodes: " + std::to_string(ok_cells) +
             " cells ok, " + std::to_string(episode_rows) + " episode rows, " + std::to_string(aggregate_rows) +
             " aggregate rows";
  if (!problems.empty()) v.detail += "; problems: " + problems.front() + (problems.size() > 1 ? " ..." : "");
  return v;
}

struct Criterion {
  int id;
  std::string name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  bool skip_trend = false;
  std::vector<int> only;
  app.add_flag("--skip-trend", skip_trend, "skip criterion 8 (long, report-only)");
  app.add_option("--only", only, "run just these criteria")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "gradient correctness", gradient_correctness},
      {2, "oracle equivalence", oracle_equivalence},
      {3, "permutation equivariance", permutation_equivariance},
      {4, "IDM equilibrium and HDV safety", idm_equilibrium_and_no_overlap},
      {5, "representation invariants", representation_invariants},
      {6, "reward arithmetic", reward_arithmetic},
      {7, "learning smoke test", learning_smoke},
      {8, "scaled trend check", trend_check},
      {9, "determinism and persistence", determinism_and_persistence},
      {10, "ablation plumbing", ablation_plumbing},
  };
  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    if (skip_trend && c.id == 8 && only.empty()) {
      std::cout << "criterion " << c.id << " [SKIP] " << c.name << ": run with --only 8\n";
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = v.gated ? (v.pass ? "PASS" : "FAIL") : "REPORT";
    std::cout << "criterion " << c.id << " [" << tag << "] " << c.name << ": " << v.detail << " (" << fmt(secs, 3)
              << " s)" << std::endl;
    if (v.gated && !v.pass) ++failures;
  }
  return failures ? 1 : 0;
}
