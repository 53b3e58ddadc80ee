// Command-line front end: train, evaluate, ablate, trace.

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>

#include "gitsr/harness/runner.hpp"

using namespace gitsr;
using namespace gitsr::harness;

namespace {

// git's blob id: SHA-1 over "blob <size>\0" followed by the bytes.
std::string git_blob_sha1(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return "unavailable";
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "blob " + std::to_string(data.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, data.data(), data.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

struct Args {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> episodes;
  std::vector<std::string> variants;
  std::vector<std::string> representations;
  std::string out;
  std::string checkpoint;
  std::size_t jobs = 1;
  bool no_timing = false;
  bool quiet = false;
};

ModelVariant variant_arg(const std::string& s) {
  const auto v = nn::parse_variant(s);
  if (!v) throw ConfigError("--variant: expected gitsr, madqn_transformer or madqn, got '" + s + "'");
  return *v;
}

Representation representation_arg(const std::string& s) {
  const auto r = rl::parse_representation(s);
  if (!r) throw ConfigError("--representation: expected agent_centric or scene_centric, got '" + s + "'");
  return *r;
}

// Loads the config and applies command-line overrides; nothing touches the disk before this
// has succeeded.
ExperimentConfig resolve(const Args& a, bool episodes_override) {
  ExperimentConfig cfg = load_experiment(a.config);
  if (a.seed) cfg.seeds = {*a.seed};
  if (episodes_override && a.episodes) cfg.training.episodes = *a.episodes;
  if (a.variants.size() == 1) cfg.variant = variant_arg(a.variants.front());
  if (a.representations.size() == 1) cfg.representation = representation_arg(a.representations.front());
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.no_timing) cfg.record_timing = false;
  validate(cfg);
  return cfg;
}

RunOptions run_options(const Args& a, int argc, char** argv) {
  RunOptions o;
  o.jobs = a.jobs;
  if (a.quiet) o.log_every = 0;
  std::string cmd;
  for (int i = 0; i < argc; ++i) cmd += (i ? " " : "") + std::string(argv[i]);
  o.run_info = Json{{"binary", fs::read_symlink("/proc/self/exe").string()},
                    {"binary_sha1", git_blob_sha1("/proc/self/exe")},
                    {"command", cmd}};
  return o;
}

std::optional<fs::path> checkpoint_arg(const Args& a) {
  if (a.checkpoint.empty()) return std::nullopt;
  fs::path p = a.checkpoint;
  if (p.extension() != ".json") p += ".json";
  return p;
}

void print_summary(const Json& s) {
  for (const auto& name : summary_metrics())
    std::cout << name << " " << csv::sig(s["metrics"][name]["mean"].get<double>(), 6) << " +- "
              << csv::sig(s["metrics"][name]["std"].get<double>(), 4) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent DQN highway off-ramp experiments"};
  app.require_subcommand(1);
  Args a;

  auto common = [&](CLI::App* sc) {
    sc->add_option("--config", a.config, "experiment JSON")->required()->check(CLI::ExistingFile);
    sc->add_option("--seed", a.seed, "use this single seed");
    sc->add_option("--out", a.out, "output directory (overrides output_dir)");
    sc->add_flag("--no-timing", a.no_timing, "write wall_ms = 0 for byte-identical reruns");
    sc->add_flag("--quiet", a.quiet, "no progress lines");
  };

  auto* train = app.add_subcommand("train", "train every seed of the config");
  common(train);
  train->add_option("--episodes", a.episodes, "episodes per seed");
  train->add_option("--variant", a.variants, "gitsr | madqn_transformer | madqn")->expected(1);
  train->add_option("--representation", a.representations, "agent_centric | scene_centric")->expected(1);
  train->add_option("--jobs", a.jobs, "seeds trained in parallel")->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "greedy rollouts of a checkpoint");
  common(evaluate);
  evaluate->add_option("--checkpoint", a.checkpoint, "checkpoint manifest (untrained network if omitted)");
  evaluate->add_option("--episodes", a.episodes, "number of evaluation episodes (default 10)");
  evaluate->add_option("--variant", a.variants)->expected(1);
  evaluate->add_option("--representation", a.representations)->expected(1);

  auto* ablate = app.add_subcommand("ablate", "variant x representation x seed grid");
  common(ablate);
  ablate->add_option("--episodes", a.episodes, "episodes per run");
  ablate->add_option("--variant", a.variants, "restrict the grid (repeat or comma-separate)")->delimiter(',');
  ablate->add_option("--representation", a.representations, "restrict the grid")->delimiter(',');
  ablate->add_option("--jobs", a.jobs, "seeds trained in parallel")->check(CLI::PositiveNumber);

  auto* trace = app.add_subcommand("trace", "dump one greedy episode");
  common(trace);
  trace->add_option("--checkpoint", a.checkpoint, "checkpoint manifest (untrained network if omitted)");
  trace->add_option("--variant", a.variants)->expected(1);
  trace->add_option("--representation", a.representations)->expected(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) {
      const auto cfg = resolve(a, true);
      run_training(cfg, cfg.output_dir, run_options(a, argc, argv));
      const auto s = read_json_file(fs::path(cfg.output_dir) / "summary.json", "summary");
      print_summary(s);
      std::cout << "wrote " << cfg.output_dir << '\n';
    } else if (evaluate->parsed()) {
      const auto cfg = resolve(a, false);
      const auto seed = cfg.seeds.front();
      const auto eps = run_evaluation(cfg, checkpoint_arg(a), seed, a.episodes.value_or(10), cfg.output_dir);
      std::cout << "evaluated " << eps.size() << " episodes -> " << (fs::path(cfg.output_dir) / "evaluate.csv").string()
                << '\n';
    } else if (ablate->parsed()) {
      auto cfg = resolve(a, true);
      std::vector<ModelVariant> vs{ModelVariant::Gitsr, ModelVariant::MadqnTransformer, ModelVariant::Madqn};
      std::vector<Representation> rs{Representation::AgentCentric, Representation::SceneCentric};
      if (!a.variants.empty()) {
        vs.clear();
        for (const auto& v : a.variants) vs.push_back(variant_arg(v));
      }
      if (!a.representations.empty()) {
        rs.clear();
        for (const auto& r : a.representations) rs.push_back(representation_arg(r));
      }
      const auto cells = run_ablation(cfg, vs, rs, cfg.output_dir, run_options(a, argc, argv));
      std::size_t failed = 0;
      for (const auto& c : cells) failed += !c.ok;
      std::cout << cells.size() << " cells, " << failed << " failed -> " << cfg.output_dir << '\n';
      return failed ? 1 : 0;
    } else if (trace->parsed()) {
      const auto cfg = resolve(a, false);
      const auto r = run_trace(cfg, checkpoint_arg(a), cfg.seeds.front(), cfg.output_dir);
      std::cout << r.steps << " steps, return " << csv::sig(r.ret, 6) << " -> "
                << (fs::path(cfg.output_dir) / "trace.csv").string() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
