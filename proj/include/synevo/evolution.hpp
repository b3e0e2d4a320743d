#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "synevo/data.hpp"
#include "synevo/encoding.hpp"
#include "synevo/genome.hpp"
#include "synevo/lineage.hpp"
#include "synevo/numerics.hpp"
#include "synevo/synthesis.hpp"

namespace synevo {

struct EvolutionConfig {
  std::size_t max_generations = 5;
  // Stop once ancestor accuracy minus offspring accuracy exceeds this.
  double accuracy_drop_stop = 0.04;
  EnvironmentalFactor env = default_environment();
  TrainConfig train;                          // retraining of every offspring
  std::optional<TrainConfig> ancestor_train;  // defaults to train
  TauPolicy tau;
  std::uint64_t seed = 1;

  static EnvironmentalFactor default_environment() {
    EnvironmentalFactor env;
    env.enforcement = EnvironmentalFactor::Enforcement::strict;
    env.preserve_output_clusters = true;
    return env;
  }
};

void check_evolution_config(const EvolutionConfig& config);

// Per-generation seeds, all derived from the run seed.
std::uint64_t ancestor_init_seed(std::uint64_t run_seed);
std::uint64_t training_seed(std::uint64_t run_seed, std::uint32_t generation);
std::uint64_t synthesis_seed(std::uint64_t run_seed, std::uint32_t generation);

struct EvolutionHooks {
  std::function<TrainResult(NetworkGenome, const Dataset&, const TrainConfig&)> train;
  std::function<double(const NetworkGenome&, const Dataset&)> evaluate;
  // Called once per recorded generation, after the record is final.
  std::function<void(const Lineage&, const NetworkGenome&)> on_generation;
};

struct EvolutionRun {
  Lineage lineage;
  std::vector<NetworkGenome> genomes;  // parallel to lineage.records
};

// Trains the ancestor from the given topology, then iterates
// encode -> synthesize -> retrain -> evaluate -> record.
EvolutionRun run_evolution(const InputShape& input, const std::vector<LayerSpec>& layers, const Dataset& train,
                           const Dataset& test, const EvolutionConfig& config, const EvolutionHooks& hooks = {});

// Starts from an already trained ancestor (generation 1, all masks live).
EvolutionRun evolve_from(NetworkGenome ancestor, const Dataset& train, const Dataset& test,
                         const EvolutionConfig& config, const EvolutionHooks& hooks = {});

// Continues a run until config.max_generations or a stopping rule fires.
// The first genome must be the ancestor and the last genome the newest
// generation.
EvolutionRun continue_evolution(EvolutionRun run, const Dataset& train, const Dataset& test,
                                const EvolutionConfig& config, const EvolutionHooks& hooks = {});

// Run directory layout:
//   lineage.json                     lineage index
//   genomes/gen-0001.genome          one genome per generation
//   report.csv, report.txt, plot.csv rendered after every generation
//   run.log                          timestamps and wall times
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path lineage_path() const { return root_ / "lineage.json"; }
  static std::string genome_file_name(std::uint32_t generation);

  // Writes the newest genome, the lineage and the reports.
  void record(const Lineage& lineage, const NetworkGenome& newest) const;
  void log(const std::string& line) const;

  // Loads the lineage and every genome it references, checking ids.
  EvolutionRun load() const;

 private:
  std::filesystem::path root_;
};

// Resumes the run persisted under run_dir; persists new generations there.
EvolutionRun resume(const std::filesystem::path& run_dir, const Dataset& train, const Dataset& test,
                    const EvolutionConfig& config, EvolutionHooks hooks = {});

// Hooks that persist every generation to the store and log a progress line.
EvolutionHooks persisting_hooks(const RunStore& store, std::function<void(const std::string&)> progress = {});

std::string progress_line(const GenerationRecord& record);

}  // namespace synevo
