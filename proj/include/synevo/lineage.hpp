#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace synevo {

struct GenerationRecord {
  std::uint32_t generation = 1;
  std::string genome_id;
  std::string genome_file;  // relative to the run directory
  double test_accuracy = 0.0;
  double train_loss = 0.0;
  double architectural_efficiency = 1.0;
  std::vector<double> layer_cluster_efficiency;
  double cluster_efficiency = 1.0;  // aggregate over all layers
  std::size_t live_synapses = 0;
  std::size_t live_clusters = 0;
  std::size_t synthesis_attempts = 0;  // 0 for the ancestor
  double realized_ratio = 1.0;
  bool flagged = false;  // accuracy drop beyond the stopping threshold
  double wall_seconds = 0.0;  // kept in the run log, not in the lineage file

  // Equality ignores wall time.
  friend bool operator==(const GenerationRecord& a, const GenerationRecord& b);
};

enum class StopReason : std::uint8_t { running, max_generations, accuracy_drop, degenerate };

const char* stop_reason_name(StopReason reason) noexcept;

struct Lineage {
  std::uint64_t seed = 0;
  StopReason stop = StopReason::running;
  std::vector<GenerationRecord> records;

  friend bool operator==(const Lineage&, const Lineage&) = default;
};

// Empty when generations run 1, 2, 3, ... without gaps.
std::vector<std::string> check_lineage(const Lineage& lineage);

// JSON index referencing the genome files of a run.
std::string encode_lineage(const Lineage& lineage);
Lineage decode_lineage(const std::string& text);
void save_lineage(const Lineage& lineage, const std::filesystem::path& path);
Lineage load_lineage(const std::filesystem::path& path);

}  // namespace synevo
