#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "synevo/data.hpp"
#include "synevo/evolution.hpp"
#include "synevo/genome.hpp"

namespace synevo {

// Flat "section.key" -> value map. Later assignments override earlier ones.
class KeyValues {
 public:
  // Parses "[section]" headers and "key = value" lines; '#' and ';' start
  // comments. Appends a message per malformed line to errors.
  static KeyValues parse(const std::string& text, std::vector<std::string>& errors, const std::string& origin = "");
  static KeyValues load(const std::filesystem::path& path, std::vector<std::string>& errors);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  // Accepts "section.key=value".
  bool set_assignment(const std::string& assignment);
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct DataConfig {
  enum class Source { idx, blobs };
  Source source = Source::idx;
  std::filesystem::path train_images, train_labels, test_images, test_labels;
  std::size_t train_limit = 0;  // stratified subsample size, 0 keeps everything
  std::size_t test_limit = 0;
  std::size_t blobs_train = 400;
  std::size_t blobs_test = 200;
  std::size_t blobs_classes = 4;
  std::size_t blobs_size = 8;
  double blobs_spread = 0.05;
  std::uint64_t seed = 7;
};

struct RunConfig {
  DataConfig data;
  std::string layers_text;
  EvolutionConfig evolution;
  std::filesystem::path run_dir;
};

inline constexpr const char* kDefaultLayers = "conv:8:3, relu, maxpool:2, conv:16:3, relu, fc:10, softmax";
inline constexpr const char* kRunDirEnv = "SYNEVO_RUN_DIR";

// Applies defaults, then every key. All problems are collected; unknown
// keys are reported as well. Data sources are only checked when require_data is set.
RunConfig build_run_config(const KeyValues& kv, std::vector<std::string>& errors, bool require_data = true);

// Compact grammar: conv:OUT:K[:STRIDE[:PAD]], fc:OUT, relu, maxpool:K[:STRIDE], softmax.
// Input channels and fully-connected fan-in are inferred from the input shape.
std::vector<LayerSpec> parse_architecture(const std::string& text, const InputShape& input);

struct Datasets {
  Dataset train;
  Dataset test;
};

Datasets load_datasets(const DataConfig& config);

// Every key the configuration understands, with its default, as config-file text.
std::string default_config_text();

}  // namespace synevo
