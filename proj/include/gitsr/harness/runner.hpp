#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "gitsr/csv.hpp"
#include "gitsr/harness/experiment.hpp"
#include "gitsr/nn/checkpoint.hpp"
#include "gitsr/sim/trace.hpp"

namespace gitsr::harness {

namespace fs = std::filesystem;

inline constexpr std::string_view kMetricsHeader =
    "episode,seed,variant,return,success_rate,collisions,mean_speed,epsilon,wall_ms";
inline constexpr std::string_view kAblationHeader =
    "row_type,variant,representation,seed,episode,return,success_rate,collisions,mean_speed,epsilon,wall_ms";
inline constexpr std::string_view kTraceRewardColumns = "action,r_speed,r_collision,r_intention,reward";
inline constexpr std::size_t kSummaryWindow = 100;

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<rl::EpisodeMetrics> episodes;
};

struct RunOptions {
  std::size_t jobs = 1;        // seeds trained concurrently
  std::size_t log_every = 50;  // episodes between progress lines; 0 silences
  std::ostream* log = &std::cerr;
  Json run_info{};  // extra fields for run_info.json (binary hash, command line)
};

// return,success_rate,collisions,mean_speed,epsilon,wall_ms
inline std::string metric_fields(const rl::EpisodeMetrics& m, bool timing) {
  std::ostringstream os;
  os << csv::num(m.ret) << ',' << csv::num(m.success_rate) << ',' << m.collisions << ',' << csv::num(m.mean_speed)
     << ',' << csv::num(m.epsilon) << ',' << csv::num(timing ? m.wall_ms : 0.0);
  return os.str();
}

inline std::string metrics_row(const rl::EpisodeMetrics& m, std::uint64_t seed, ModelVariant v, bool timing) {
  return std::to_string(m.episode) + ',' + std::to_string(seed) + ',' + nn::to_string(v) + ',' +
         metric_fields(m, timing);
}

inline void write_metrics_csv(const fs::path& p, const std::vector<SeedRun>& runs, ModelVariant v, bool timing) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << kMetricsHeader << '\n';
  for (const auto& r : runs)
    for (const auto& m : r.episodes) os << metrics_row(m, r.seed, v, timing) << '\n';
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation across seeds, 0 for a single seed
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd r;
  if (xs.empty()) return r;
  for (double x : xs) r.mean += x;
  r.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return r;
}

inline const std::array<std::string, 4>& summary_metrics() {
  static const std::array<std::string, 4> k{"return", "success_rate", "collisions", "mean_speed"};
  return k;
}

inline double metric_value(const rl::EpisodeMetrics& m, const std::string& name) {
  if (name == "return") return m.ret;
  if (name == "success_rate") return m.success_rate;
  if (name == "collisions") return static_cast<double>(m.collisions);
  return m.mean_speed;
}

/// Per seed, the mean of each metric over its final `window` episodes; then mean and sample std
/// of those per-seed means across seeds.
inline Json summarize(const std::vector<SeedRun>& runs, ModelVariant v, Representation rep,
                      std::size_t window = kSummaryWindow) {
  Json per_seed = Json::array();
  std::map<std::string, std::vector<double>> across;
  for (const auto& r : runs) {
    const std::size_t n = r.episodes.size(), w = std::min(window, n);
    Json s{{"seed", r.seed}, {"episodes", n}, {"window", w}};
    for (const auto& name : summary_metrics()) {
      double sum = 0.0;
      for (std::size_t i = n - w; i < n; ++i) sum += metric_value(r.episodes[i], name);
      const double mean = w ? sum / static_cast<double>(w) : 0.0;
      s[name] = mean;
      across[name].push_back(mean);
    }
    per_seed.push_back(s);
  }
  Json metrics = Json::object();
  for (const auto& name : summary_metrics()) {
    const auto ms = mean_std(across[name]);
    metrics[name] = {{"mean", ms.mean}, {"std", ms.std}};
  }
  return Json{{"variant", nn::to_string(v)}, {"representation", rl::to_string(rep)}, {"window", window},
              {"seeds", per_seed.size()}, {"per_seed", per_seed}, {"metrics", metrics}};
}

inline void write_json(const fs::path& p, const Json& j) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << j.dump(2) << '\n';
}

/// Loads a checkpoint into both networks of a trainer.
inline void load_into(rl::Trainer& tr, const fs::path& manifest) {
  nn::apply_checkpoint(tr.learner().online(), nn::load_checkpoint(manifest));
  tr.learner().update_target();
}

/// Trains every seed of `cfg` and writes config.json, run_info.json, metrics_seed{S}.csv (appended
/// per episode), metrics.csv and summary.json (after all seeds finish) and checkpoints/ under `out`.
inline std::vector<SeedRun> run_training(const ExperimentConfig& cfg, const fs::path& out,
                                         const RunOptions& opt = {}) {
  validate(cfg);
  fs::create_directories(out / "checkpoints");
  write_json(out / "config.json", to_json(cfg));
  Json info = opt.run_info.is_object() ? opt.run_info : Json::object();
  info["seeds"] = cfg.seeds;
  info["variant"] = nn::to_string(cfg.variant);
  info["representation"] = rl::to_string(cfg.representation);
  info["config"] = "config.json";
  info["metrics"] = "metrics.csv";
  write_json(out / "run_info.json", info);

  std::vector<SeedRun> runs(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  std::mutex log_mu;
  auto train_seed = [&](std::size_t k) {
    try {
      const auto seed = cfg.seeds[k];
      rl::Trainer tr(cfg.scenario, cfg.variant, cfg.representation, cfg.training, seed);
      runs[k].seed = seed;
      // streamed per seed so an interrupted run keeps its completed episodes
      const auto partial = out / ("metrics_seed" + std::to_string(seed) + ".csv");
      std::ofstream stream(partial);
      if (!stream) throw std::runtime_error("cannot write " + partial.string());
      stream << kMetricsHeader << '\n' << std::flush;
      auto save = [&](const std::string& tag) {
        nn::save_checkpoint(tr.learner().online(), out / "checkpoints" / ("seed" + std::to_string(seed) + "_" + tag),
                            Json{{"seed", seed},
                                 {"episode", tr.episodes_done()},
                                 {"global_step", tr.global_step()},
                                 {"representation", rl::to_string(cfg.representation)}});
      };
      for (std::size_t e = 0; e < cfg.training.episodes; ++e) {
        runs[k].episodes.push_back(tr.train_episode());
        const auto& m = runs[k].episodes.back();
        stream << metrics_row(m, seed, cfg.variant, cfg.record_timing) << '\n' << std::flush;
        if (cfg.training.checkpoint_every && m.episode % cfg.training.checkpoint_every == 0)
          save("ep" + std::to_string(m.episode));
        if (opt.log && opt.log_every && (m.episode % opt.log_every == 0 || m.episode == cfg.training.episodes)) {
          std::lock_guard lk(log_mu);
          *opt.log << nn::to_string(cfg.variant) << '/' << rl::to_string(cfg.representation) << " seed " << seed
                   << " episode " << m.episode << '/' << cfg.training.episodes << " return " << csv::sig(m.ret, 5)
                   << " success " << csv::sig(m.success_rate, 3) << " eps " << csv::sig(m.epsilon, 3) << '\n';
        }
      }
      save("final");
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(opt.jobs, cfg.seeds.size()));
  if (jobs == 1) {
    for (std::size_t k = 0; k < cfg.seeds.size(); ++k) train_seed(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t)
      pool.emplace_back([&] {
        for (std::size_t k; (k = next++) < cfg.seeds.size();) train_seed(k);
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  write_metrics_csv(out / "metrics.csv", runs, cfg.variant, cfg.record_timing);
  write_json(out / "summary.json", summarize(runs, cfg.variant, cfg.representation));
  return runs;
}

/// Greedy rollouts of a checkpoint (or of the freshly initialised network when none is given)
/// on the evaluation seed stream; writes evaluate.csv.
inline std::vector<rl::EpisodeMetrics> run_evaluation(const ExperimentConfig& cfg,
                                                      const std::optional<fs::path>& checkpoint,
                                                      std::uint64_t seed, std::size_t episodes, const fs::path& out) {
  validate(cfg);
  rl::Trainer tr(cfg.scenario, cfg.variant, cfg.representation, cfg.training, seed);
  if (checkpoint) load_into(tr, *checkpoint);
  SeedRun run{seed, {}};
  for (std::size_t e = 0; e < episodes; ++e) run.episodes.push_back(tr.eval_episode(e));
  fs::create_directories(out);
  write_metrics_csv(out / "evaluate.csv", {run}, cfg.variant, cfg.record_timing);
  return run.episodes;
}

struct TraceResult {
  std::uint64_t world_seed = 0;
  std::size_t steps = 0;
  double ret = 0.0;
};

/// One greedy episode dumped per (step, vehicle) in the simulator's trace format, followed by
/// the CAV's action index and the step's reward decomposition. Reward columns are filled on
/// the first row of each step only, so the `reward` column sums to the episode return.
inline TraceResult run_trace(const ExperimentConfig& cfg, const std::optional<fs::path>& checkpoint, std::uint64_t seed,
                             const fs::path& out) {
  validate(cfg);
  rl::Trainer tr(cfg.scenario, cfg.variant, cfg.representation, cfg.training, seed);
  if (checkpoint) load_into(tr, *checkpoint);
  fs::create_directories(out);
  std::ofstream os(out / "trace.csv");
  if (!os) throw std::runtime_error("cannot write " + (out / "trace.csv").string());
  os << kTraceHeader << ',' << kTraceRewardColumns << '\n';
  TraceResult res;
  res.world_seed = tr.eval_world_seed(0);
  const auto m = tr.eval_episode(0, [&](const WorldState& w, const rl::StepRecord& rec) {
    const auto cavs = cav_ids(w);
    bool first = true;
    for (const auto& v : w.vehicles) {
      os << trace_row(w, v) << ',';
      const auto it = std::find(cavs.begin(), cavs.end(), v.id);
      if (it != cavs.end()) os << rec.actions[static_cast<std::size_t>(it - cavs.begin())];
      if (first) {
        os << ',' << csv::num(rec.reward.speed) << ',' << csv::num(rec.reward.collision) << ','
           << csv::num(rec.reward.intention) << ',' << csv::num(rec.reward.total) << '\n';
        first = false;
      } else {
        os << ",,,,\n";
      }
    }
  });
  res.steps = m.steps;
  res.ret = m.ret;
  write_json(out / "trace_meta.json", Json{{"seed", seed},
                                           {"world_seed", res.world_seed},
                                           {"steps", res.steps},
                                           {"return", res.ret},
                                           {"variant", nn::to_string(cfg.variant)},
                                           {"representation", rl::to_string(cfg.representation)},
                                           {"checkpoint", checkpoint ? checkpoint->string() : ""},
                                           {"scenario", to_json(cfg.scenario)}});
  return res;
}

struct AblationCell {
  ModelVariant variant;
  Representation representation;
  bool ok = false;
  std::string error;
  std::vector<SeedRun> runs;
};

using CellRunner = std::function<std::vector<SeedRun>(const ExperimentConfig&, const fs::path&, const RunOptions&)>;

/// Runs the variant x representation x seed grid. A failing cell is recorded and the rest
/// continue. Writes one directory per cell plus ablation.csv and ablation.json at the top.
inline std::vector<AblationCell> run_ablation(const ExperimentConfig& base, const std::vector<ModelVariant>& variants,
                                              const std::vector<Representation>& reps, const fs::path& out,
                                              const RunOptions& opt = {}, CellRunner runner = run_training) {
  validate(base);
  fs::create_directories(out);
  std::vector<AblationCell> cells;
  for (auto v : variants)
    for (auto r : reps) {
      AblationCell cell;
      cell.variant = v;
      cell.representation = r;
      ExperimentConfig cfg = base;
      cfg.variant = v;
      cfg.representation = r;
      try {
        cell.runs = runner(cfg, out / (nn::to_string(v) + "_" + rl::to_string(r)), opt);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
        if (opt.log) *opt.log << "ablation cell " << nn::to_string(v) << '/' << rl::to_string(r) << " failed: " << e.what() << '\n';
      }
      cells.push_back(std::move(cell));
    }

  std::ofstream csvf(out / "ablation.csv");
  csvf << kAblationHeader << '\n';
  Json table = Json::array();
  for (const auto& c : cells) {
    const std::string prefix = nn::to_string(c.variant) + ',' + rl::to_string(c.representation) + ',';
    Json entry{{"variant", nn::to_string(c.variant)},
               {"representation", rl::to_string(c.representation)},
               {"status", c.ok ? "ok" : "failed"}};
    if (!c.ok) {
      entry["error"] = c.error;
      table.push_back(entry);
      continue;
    }
    for (const auto& r : c.runs)
      for (const auto& m : r.episodes)
        csvf << "episode," << prefix << r.seed << ',' << m.episode << ',' << metric_fields(m, base.record_timing)
             << '\n';
    const Json s = summarize(c.runs, c.variant, c.representation);
    csvf << "aggregate," << prefix << ",";
    for (const auto& name : summary_metrics()) csvf << ',' << csv::num(s["metrics"][name]["mean"].get<double>());
    csvf << ",,\n";
    entry["window"] = s["window"];
    entry["seeds"] = s["seeds"];
    entry["metrics"] = s["metrics"];
    table.push_back(entry);
  }
  write_json(out / "ablation.json", Json{{"window", kSummaryWindow}, {"episodes", base.training.episodes},
                                         {"seeds", base.seeds}, {"cells", table}});
  return cells;
}

}  // namespace gitsr::harness
