#include "synevo/evolution.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "synevo/genome_io.hpp"
#include "synevo/metrics.hpp"
#include "synevo/rng.hpp"

namespace synevo {

void check_evolution_config(const EvolutionConfig& config) {
  if (config.max_generations == 0) throw ConfigError("max generations must be at least 1");
  if (!(config.accuracy_drop_stop > 0.0 && config.accuracy_drop_stop < 1.0)) {
    throw ConfigError("accuracy drop threshold must lie in (0, 1)");
  }
  check_environment(config.env);
  check_train_config(config.train);
  if (config.ancestor_train) check_train_config(*config.ancestor_train);
  check_tau_policy(config.tau);
}

std::uint64_t ancestor_init_seed(std::uint64_t run_seed) { return derive_seed(run_seed, "init"); }
std::uint64_t training_seed(std::uint64_t run_seed, std::uint32_t generation) {
  return derive_seed(run_seed, "train", generation);
}
std::uint64_t synthesis_seed(std::uint64_t run_seed, std::uint32_t generation) {
  return derive_seed(run_seed, "synthesis", generation);
}

namespace {

EvolutionHooks with_defaults(EvolutionHooks hooks) {
  if (!hooks.train) hooks.train = sgd_train;
  if (!hooks.evaluate) hooks.evaluate = evaluate;
  return hooks;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

GenerationRecord make_record(const NetworkGenome& ancestor, const NetworkGenome& genome, double accuracy,
                             double train_loss) {
  GenerationRecord r;
  r.generation = genome.generation;
  r.genome_id = genome.id;
  r.genome_file = "genomes/" + RunStore::genome_file_name(genome.generation);
  r.test_accuracy = accuracy;
  r.train_loss = train_loss;
  r.architectural_efficiency = architectural_efficiency(ancestor, genome);
  const ClusterEfficiency ce = cluster_efficiency(ancestor, genome);
  r.layer_cluster_efficiency = ce.per_layer;
  r.cluster_efficiency = ce.aggregate;
  r.live_synapses = count_live_synapses(genome);
  r.live_clusters = count_live_clusters(genome);
  return r;
}

void check_ancestor(const NetworkGenome& ancestor) {
  if (ancestor.generation != 1) throw InvalidInput("ancestor must be generation 1");
  if (count_live_synapses(ancestor) != count_total_synapses(ancestor)) {
    throw InvalidInput("ancestor must have every synapse live");
  }
  if (auto v = validate(ancestor); !v.empty()) throw InvalidInput("invalid ancestor: " + v.front().message);
}

EvolutionRun start(NetworkGenome ancestor, double train_loss, const Dataset& train, const Dataset& test,
                   const EvolutionConfig& config, const EvolutionHooks& hooks,
                   std::chrono::steady_clock::time_point t0) {
  check_ancestor(ancestor);
  EvolutionRun run;
  run.lineage.seed = config.seed;
  const double acc = hooks.evaluate(ancestor, test);
  GenerationRecord rec = make_record(ancestor, ancestor, acc, train_loss);
  rec.wall_seconds = seconds_since(t0);
  run.lineage.records.push_back(std::move(rec));
  run.genomes.push_back(std::move(ancestor));
  if (config.max_generations == 1) run.lineage.stop = StopReason::max_generations;
  if (hooks.on_generation) hooks.on_generation(run.lineage, run.genomes.back());
  return continue_evolution(std::move(run), train, test, config, hooks);
}

}  // namespace

EvolutionRun run_evolution(const InputShape& input, const std::vector<LayerSpec>& layers, const Dataset& train,
                           const Dataset& test, const EvolutionConfig& config, const EvolutionHooks& hooks_in) {
  check_evolution_config(config);
  const auto t0 = std::chrono::steady_clock::now();
  const EvolutionHooks hooks = with_defaults(hooks_in);
  NetworkGenome ancestor = make_ancestor(input, layers, ancestor_init_seed(config.seed));
  TrainConfig tc = config.ancestor_train.value_or(config.train);
  tc.seed = training_seed(config.seed, 1);
  TrainResult trained = hooks.train(std::move(ancestor), train, tc);
  return start(std::move(trained.genome), trained.final_loss, train, test, config, hooks, t0);
}

EvolutionRun evolve_from(NetworkGenome ancestor, const Dataset& train, const Dataset& test,
                         const EvolutionConfig& config, const EvolutionHooks& hooks_in) {
  check_evolution_config(config);
  const auto t0 = std::chrono::steady_clock::now();
  const EvolutionHooks hooks = with_defaults(hooks_in);
  check_ancestor(ancestor);
  // The loss of a pre-trained ancestor is measured over the whole training set.
  const double train_loss = dataset_loss(ancestor, train);
  return start(std::move(ancestor), train_loss, train, test, config, hooks, t0);
}

EvolutionRun continue_evolution(EvolutionRun run, const Dataset& train, const Dataset& test,
                                const EvolutionConfig& config, const EvolutionHooks& hooks_in) {
  check_evolution_config(config);
  const EvolutionHooks hooks = with_defaults(hooks_in);
  Lineage& lineage = run.lineage;
  if (run.genomes.empty() || run.genomes.size() != lineage.records.size()) {
    throw InvalidInput("run needs one genome per lineage record");
  }
  if (lineage.stop == StopReason::accuracy_drop || lineage.stop == StopReason::degenerate) return run;
  if (lineage.records.size() >= config.max_generations) {
    lineage.stop = StopReason::max_generations;
    return run;
  }
  lineage.stop = StopReason::running;

  const double ancestor_accuracy = lineage.records.front().test_accuracy;

  while (lineage.records.size() < config.max_generations) {
    const auto t0 = std::chrono::steady_clock::now();
    const NetworkGenome& parent = run.genomes.back();
    const std::uint32_t g = parent.generation + 1;

    const SynapticProbabilityField field = build_field(parent, config.tau);
    SynthesisOutcome outcome;
    try {
      outcome = sample_offspring(parent, field, config.env, synthesis_seed(config.seed, g));
    } catch (const DegenerateOffspring&) {
      lineage.stop = StopReason::degenerate;
      if (hooks.on_generation) hooks.on_generation(lineage, run.genomes.back());
      return run;
    }

    TrainConfig tc = config.train;
    tc.seed = training_seed(config.seed, g);
    TrainResult trained = hooks.train(std::move(outcome.offspring), train, tc);
    if (auto v = validate(trained.genome, parent); !v.empty()) {
      throw Error("retraining broke generation " + std::to_string(g) + ": " + v.front().message);
    }
    const double acc = hooks.evaluate(trained.genome, test);

    GenerationRecord rec = make_record(run.genomes.front(), trained.genome, acc, trained.final_loss);
    rec.synthesis_attempts = outcome.attempts;
    rec.realized_ratio = outcome.realized_ratio;
    rec.flagged = ancestor_accuracy - acc > config.accuracy_drop_stop;
    rec.wall_seconds = seconds_since(t0);
    lineage.records.push_back(std::move(rec));
    run.genomes.push_back(std::move(trained.genome));

    if (lineage.records.back().flagged) {
      lineage.stop = StopReason::accuracy_drop;
    } else if (lineage.records.size() >= config.max_generations) {
      lineage.stop = StopReason::max_generations;
    }
    if (hooks.on_generation) hooks.on_generation(lineage, run.genomes.back());
    if (lineage.stop != StopReason::running) break;
  }
  return run;
}

RunStore::RunStore(std::filesystem::path root) : root_(std::move(root)) {}

std::string RunStore::genome_file_name(std::uint32_t generation) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "gen-%04u.genome", generation);
  return buf;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void RunStore::record(const Lineage& lineage, const NetworkGenome& newest) const {
  std::filesystem::create_directories(root_ / "genomes");
  save_genome(newest, root_ / "genomes" / genome_file_name(newest.generation));
  save_lineage(lineage, lineage_path());
  const Report rep = render_report(lineage);
  write_text(root_ / "report.csv", rep.csv);
  write_text(root_ / "report.txt", rep.table);
  write_text(root_ / "plot.csv", rep.plot_csv);
}

void RunStore::log(const std::string& line) const {
  std::filesystem::create_directories(root_);
  std::ofstream out(root_ / "run.log", std::ios::app);
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  out << stamp << ' ' << line << '\n';
}

EvolutionRun RunStore::load() const {
  EvolutionRun run;
  if (!std::filesystem::exists(lineage_path())) throw ResumeError(0, "no lineage at " + lineage_path().string());
  try {
    run.lineage = load_lineage(lineage_path());
  } catch (const Error& e) {
    throw ResumeError(0, e.what());
  }
  for (const auto& rec : run.lineage.records) {
    const auto path = root_ / rec.genome_file;
    if (!std::filesystem::exists(path)) throw ResumeError(rec.generation, "missing genome file " + path.string());
    NetworkGenome g;
    try {
      g = load_genome(path);
    } catch (const Error& e) {
      throw ResumeError(rec.generation, path.string() + ": " + e.what());
    }
    if (g.id != rec.genome_id || g.generation != rec.generation) {
      throw ResumeError(rec.generation, "genome file " + path.string() + " does not match the lineage record");
    }
    run.genomes.push_back(std::move(g));
  }
  if (run.genomes.empty()) throw ResumeError(0, "lineage has no records");
  return run;
}

std::string progress_line(const GenerationRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "gen %u  live %zu  A-E %.2fX  C-E %.2fX  acc %.2f%%%s", r.generation,
                r.live_synapses, r.architectural_efficiency, r.cluster_efficiency, 100.0 * r.test_accuracy,
                r.flagged ? "  [stop: accuracy drop]" : "");
  return buf;
}

EvolutionHooks persisting_hooks(const RunStore& store, std::function<void(const std::string&)> progress) {
  EvolutionHooks hooks;
  hooks.on_generation = [store, progress = std::move(progress), last = std::uint32_t{0}](
                            const Lineage& lineage, const NetworkGenome& newest) mutable {
    store.record(lineage, newest);
    const GenerationRecord& r = lineage.records.back();
    if (r.generation == last) {
      store.log(std::string("stopped: ") + stop_reason_name(lineage.stop));
      return;
    }
    last = r.generation;
    char wall[48];
    std::snprintf(wall, sizeof wall, "  wall %.3fs", r.wall_seconds);
    store.log(progress_line(r) + wall);
    if (progress) progress(progress_line(r));
  };
  return hooks;
}

EvolutionRun resume(const std::filesystem::path& run_dir, const Dataset& train, const Dataset& test,
                    const EvolutionConfig& config, EvolutionHooks hooks) {
  const RunStore store(run_dir);
  EvolutionRun run = store.load();
  if (run.lineage.seed != config.seed) {
    throw ConfigError("run was started with seed " + std::to_string(run.lineage.seed) + ", config has " +
                      std::to_string(config.seed));
  }
  if (!hooks.on_generation) hooks.on_generation = persisting_hooks(store).on_generation;
  return continue_evolution(std::move(run), train, test, config, hooks);
}

}  // namespace synevo
