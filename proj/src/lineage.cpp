#include "synevo/lineage.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "synevo/errors.hpp"

namespace synevo {

bool operator==(const GenerationRecord& a, const GenerationRecord& b) {
  auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  if (a.layer_cluster_efficiency.size() != b.layer_cluster_efficiency.size()) return false;
  for (std::size_t i = 0; i < a.layer_cluster_efficiency.size(); ++i) {
    if (!same(a.layer_cluster_efficiency[i], b.layer_cluster_efficiency[i])) return false;
  }
  return a.generation == b.generation && a.genome_id == b.genome_id && a.genome_file == b.genome_file &&
         same(a.test_accuracy, b.test_accuracy) && same(a.train_loss, b.train_loss) &&
         same(a.architectural_efficiency, b.architectural_efficiency) &&
         same(a.cluster_efficiency, b.cluster_efficiency) && a.live_synapses == b.live_synapses &&
         a.live_clusters == b.live_clusters && a.synthesis_attempts == b.synthesis_attempts &&
         same(a.realized_ratio, b.realized_ratio) && a.flagged == b.flagged;
}

const char* stop_reason_name(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::running: return "running";
    case StopReason::max_generations: return "max-generations";
    case StopReason::accuracy_drop: return "accuracy-drop";
    case StopReason::degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

StopReason parse_stop(const std::string& s) {
  for (auto r : {StopReason::running, StopReason::max_generations, StopReason::accuracy_drop, StopReason::degenerate}) {
    if (s == stop_reason_name(r)) return r;
  }
  throw InvalidInput("unknown stop reason '" + s + "'");
}

// JSON has no infinity; a layer without live kernels is stored as null.
nlohmann::json efficiency_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
double efficiency_value(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

std::vector<std::string> check_lineage(const Lineage& lineage) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < lineage.records.size(); ++i) {
    if (lineage.records[i].generation != i + 1) {
      out.push_back("record " + std::to_string(i) + " has generation " +
                    std::to_string(lineage.records[i].generation) + ", expected " + std::to_string(i + 1));
    }
  }
  return out;
}

std::string encode_lineage(const Lineage& lineage) {
  nlohmann::json j;
  j["format"] = "synevo-lineage";
  j["version"] = 1;
  j["seed"] = lineage.seed;
  j["stop"] = stop_reason_name(lineage.stop);
  j["records"] = nlohmann::json::array();
  for (const auto& r : lineage.records) {
    nlohmann::json per_layer = nlohmann::json::array();
    for (double v : r.layer_cluster_efficiency) per_layer.push_back(efficiency_json(v));
    j["records"].push_back({
        {"generation", r.generation},
        {"genome_id", r.genome_id},
        {"genome_file", r.genome_file},
        {"test_accuracy", r.test_accuracy},
        {"train_loss", r.train_loss},
        {"architectural_efficiency", r.architectural_efficiency},
        {"layer_cluster_efficiency", per_layer},
        {"cluster_efficiency", efficiency_json(r.cluster_efficiency)},
        {"live_synapses", r.live_synapses},
        {"live_clusters", r.live_clusters},
        {"synthesis_attempts", r.synthesis_attempts},
        {"realized_ratio", r.realized_ratio},
        {"flagged", r.flagged},
    });
  }
  return j.dump(2) + "\n";
}

Lineage decode_lineage(const std::string& text) {
  Lineage lineage;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "synevo-lineage" || j.at("version") != 1) throw InvalidInput("not a version 1 lineage file");
    lineage.seed = j.at("seed").get<std::uint64_t>();
    lineage.stop = parse_stop(j.at("stop").get<std::string>());
    for (const auto& r : j.at("records")) {
      GenerationRecord rec;
      rec.generation = r.at("generation").get<std::uint32_t>();
      rec.genome_id = r.at("genome_id").get<std::string>();
      rec.genome_file = r.at("genome_file").get<std::string>();
      rec.test_accuracy = r.at("test_accuracy").get<double>();
      rec.train_loss = r.at("train_loss").get<double>();
      rec.architectural_efficiency = r.at("architectural_efficiency").get<double>();
      for (const auto& v : r.at("layer_cluster_efficiency")) rec.layer_cluster_efficiency.push_back(efficiency_value(v));
      rec.cluster_efficiency = efficiency_value(r.at("cluster_efficiency"));
      rec.live_synapses = r.at("live_synapses").get<std::size_t>();
      rec.live_clusters = r.at("live_clusters").get<std::size_t>();
      rec.synthesis_attempts = r.at("synthesis_attempts").get<std::size_t>();
      rec.realized_ratio = r.at("realized_ratio").get<double>();
      rec.flagged = r.at("flagged").get<bool>();
      lineage.records.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed lineage file: ") + e.what());
  }
  if (auto problems = check_lineage(lineage); !problems.empty()) throw InvalidInput("lineage: " + problems.front());
  return lineage;
}

void save_lineage(const Lineage& lineage, const std::filesystem::path& path) {
  // Write then rename so an interrupted run never leaves a half-written index.
  const auto tmp = std::filesystem::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << encode_lineage(lineage);
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Lineage load_lineage(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open lineage " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_lineage(buf.str());
}

}  // namespace synevo
