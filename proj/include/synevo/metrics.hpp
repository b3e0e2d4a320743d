#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "synevo/genome.hpp"
#include "synevo/lineage.hpp"

namespace synevo {

// Live synapses of the ancestor over live synapses of the descendant.
double architectural_efficiency(const NetworkGenome& ancestor, const NetworkGenome& descendant);

struct ClusterEfficiency {
  std::vector<std::size_t> layers;  // weighted layer indices
  std::vector<double> per_layer;    // +inf where the descendant layer has no live kernel
  double aggregate = 1.0;           // total live kernels ratio
  bool nonfunctional = false;       // some layer has no live kernel
};

ClusterEfficiency cluster_efficiency(const NetworkGenome& ancestor, const NetworkGenome& descendant);

// Monotone sparsification along a lineage: architectural efficiency never
// decreases and the live-cluster count never increases. Returns the
// violations found.
std::vector<std::string> check_monotone_efficiency(const Lineage& lineage);

inline constexpr const char* kReportCsvHeader =
    "generation,live_synapses,live_clusters,arch_efficiency,cluster_efficiency,accuracy,flagged";

struct Report {
  std::string table;     // human-readable, "1.00X" style
  std::string csv;       // kReportCsvHeader then one row per generation
  std::string plot_csv;  // generation vs efficiencies, accuracy and per-layer C-E
};

Report render_report(const Lineage& lineage);

struct ReportRow {
  std::uint32_t generation = 0;
  std::size_t live_synapses = 0;
  std::size_t live_clusters = 0;
  double arch_efficiency = 0.0;
  double cluster_efficiency = 0.0;
  double accuracy = 0.0;
  bool flagged = false;
};

std::vector<ReportRow> parse_report_csv(const std::string& csv);

// Shortest text that parses back to the same double.
std::string format_exact(double value);

}  // namespace synevo
