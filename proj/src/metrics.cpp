#include "synevo/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "synevo/errors.hpp"

namespace synevo {

std::string format_exact(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

double architectural_efficiency(const NetworkGenome& ancestor, const NetworkGenome& descendant) {
  const std::size_t d = count_live_synapses(descendant);
  if (d == 0) throw UndefinedRatio("descendant has no live synapse");
  return static_cast<double>(count_live_synapses(ancestor)) / static_cast<double>(d);
}

ClusterEfficiency cluster_efficiency(const NetworkGenome& ancestor, const NetworkGenome& descendant) {
  if (ancestor.layers != descendant.layers) throw InvalidInput("ancestor and descendant topologies differ");
  ClusterEfficiency ce;
  std::size_t total_a = 0, total_d = 0;
  for (std::size_t li : weighted_layers(ancestor)) {
    const std::size_t a = count_live_clusters(ancestor.params[li]);
    const std::size_t d = count_live_clusters(descendant.params[li]);
    total_a += a;
    total_d += d;
    ce.layers.push_back(li);
    if (d == 0) {
      ce.per_layer.push_back(std::numeric_limits<double>::infinity());
      ce.nonfunctional = true;
    } else {
      ce.per_layer.push_back(static_cast<double>(a) / static_cast<double>(d));
    }
  }
  ce.aggregate = total_d == 0 ? std::numeric_limits<double>::infinity()
                              : static_cast<double>(total_a) / static_cast<double>(total_d);
  return ce;
}

std::vector<std::string> check_monotone_efficiency(const Lineage& lineage) {
  std::vector<std::string> out;
  const auto& r = lineage.records;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const std::string g = "generation " + std::to_string(r[i].generation);
    if (!(r[i].architectural_efficiency >= 1.0)) out.push_back(g + ": architectural efficiency below 1");
    if (i == 0) continue;
    if (r[i].architectural_efficiency < r[i - 1].architectural_efficiency) {
      out.push_back(g + ": architectural efficiency decreased");
    }
    if (r[i].live_synapses > r[i - 1].live_synapses) out.push_back(g + ": live synapses increased");
    if (r[i].live_clusters > r[i - 1].live_clusters) out.push_back(g + ": live clusters increased");
  }
  return out;
}

namespace {

std::string times(double v) {
  if (!std::isfinite(v)) return "infX";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2fX", v);
  return buf;
}

}  // namespace

Report render_report(const Lineage& lineage) {
  Report rep;
  std::ostringstream table, csv, plot;
  table << "Gen.  Live synapses  Live clusters      A-E      C-E    ACC.\n";
  csv << kReportCsvHeader << '\n';
  plot << "generation,arch_efficiency,cluster_efficiency,accuracy";
  const std::size_t layers = lineage.records.empty() ? 0 : lineage.records.front().layer_cluster_efficiency.size();
  for (std::size_t i = 0; i < layers; ++i) plot << ",cluster_efficiency_layer" << i;
  plot << '\n';

  for (const auto& r : lineage.records) {
    char line[160];
    std::snprintf(line, sizeof line, "%4u  %13zu  %13zu  %7s  %7s  %6.2f%s\n", r.generation, r.live_synapses,
                  r.live_clusters, times(r.architectural_efficiency).c_str(), times(r.cluster_efficiency).c_str(),
                  100.0 * r.test_accuracy, r.flagged ? "  *" : "");
    table << line;
    csv << r.generation << ',' << r.live_synapses << ',' << r.live_clusters << ','
        << format_exact(r.architectural_efficiency) << ',' << format_exact(r.cluster_efficiency) << ','
        << format_exact(r.test_accuracy) << ',' << (r.flagged ? 1 : 0) << '\n';
    plot << r.generation << ',' << format_exact(r.architectural_efficiency) << ','
         << format_exact(r.cluster_efficiency) << ',' << format_exact(r.test_accuracy);
    for (double v : r.layer_cluster_efficiency) plot << ',' << format_exact(v);
    plot << '\n';
  }
  if (!lineage.records.empty() && lineage.records.back().flagged) {
    table << "* accuracy drop beyond the stopping threshold\n";
  }
  rep.table = table.str();
  rep.csv = csv.str();
  rep.plot_csv = plot.str();
  return rep;
}

namespace {

template <typename T>
T parse_field(const std::string& text, std::size_t line) {
  T v{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw InvalidInput("report line " + std::to_string(line) + ": bad field '" + text + "'");
  }
  return v;
}

}  // namespace

std::vector<ReportRow> parse_report_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kReportCsvHeader) throw InvalidInput("report CSV header mismatch");
  std::vector<ReportRow> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw InvalidInput("report line " + std::to_string(n) + ": expected 7 fields");
    ReportRow r;
    r.generation = parse_field<std::uint32_t>(f[0], n);
    r.live_synapses = parse_field<std::size_t>(f[1], n);
    r.live_clusters = parse_field<std::size_t>(f[2], n);
    r.arch_efficiency = parse_field<double>(f[3], n);
    r.cluster_efficiency = parse_field<double>(f[4], n);
    r.accuracy = parse_field<double>(f[5], n);
    r.flagged = parse_field<int>(f[6], n) != 0;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace synevo
