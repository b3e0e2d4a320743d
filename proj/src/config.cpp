#include "synevo/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "synevo/errors.hpp"

namespace synevo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

}  // namespace

KeyValues KeyValues::parse(const std::string& text, std::vector<std::string>& errors, const std::string& origin) {
  KeyValues kv;
  std::istringstream in(text);
  std::string raw, section;
  std::size_t n = 0;
  const std::string where = origin.empty() ? "line " : origin + ":";
  while (std::getline(in, raw)) {
    ++n;
    std::string line = raw;
    if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(where + std::to_string(n) + ": unterminated section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(where + std::to_string(n) + ": expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      errors.push_back(where + std::to_string(n) + ": empty key");
      continue;
    }
    kv.values_[section.empty() ? key : section + "." + key] = value;
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path, std::vector<std::string>& errors) {
  std::ifstream in(path);
  if (!in) {
    errors.push_back("cannot read config file " + path.string());
    return {};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), errors, path.string());
}

bool KeyValues::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) return false;
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
  return true;
}

std::optional<std::string> KeyValues::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

namespace {

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

bool parse_bool(const std::string& text, bool& out) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0" || text == "no" || text == "off") {
    out = false;
    return true;
  }
  return false;
}

using Setter = std::function<std::string(RunConfig&, const std::string&)>;

// Builds a setter that parses a value into the field returned by `field`.
template <typename T, typename F>
Setter numeric(F field) {
  return [field](RunConfig& c, const std::string& v) -> std::string {
    T parsed{};
    if (!parse_number(v, parsed)) return "expected a number, got '" + v + "'";
    field(c) = parsed;
    return "";
  };
}

template <typename F>
Setter path_value(F field) {
  return [field](RunConfig& c, const std::string& v) -> std::string {
    field(c) = v;
    return "";
  };
}

template <typename F>
Setter boolean(F field) {
  return [field](RunConfig& c, const std::string& v) -> std::string {
    bool b = false;
    if (!parse_bool(v, b)) return "expected true or false, got '" + v + "'";
    field(c) = b;
    return "";
  };
}

TrainConfig& ancestor_train(RunConfig& c) {
  if (!c.evolution.ancestor_train) c.evolution.ancestor_train = c.evolution.train;
  return *c.evolution.ancestor_train;
}

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"data.source",
       [](RunConfig& c, const std::string& v) -> std::string {
         if (v == "idx") c.data.source = DataConfig::Source::idx;
         else if (v == "blobs") c.data.source = DataConfig::Source::blobs;
         else return "expected idx or blobs, got '" + v + "'";
         return "";
       }},
      {"data.train_images", path_value([](RunConfig& c) -> auto& { return c.data.train_images; })},
      {"data.train_labels", path_value([](RunConfig& c) -> auto& { return c.data.train_labels; })},
      {"data.test_images", path_value([](RunConfig& c) -> auto& { return c.data.test_images; })},
      {"data.test_labels", path_value([](RunConfig& c) -> auto& { return c.data.test_labels; })},
      {"data.train_limit", numeric<std::size_t>([](RunConfig& c) -> auto& { return c.data.train_limit; })},
      {"data.test_limit", numeric<std::size_t>([](RunConfig& c) -> auto& { return c.data.test_limit; })},
      {"data.blobs_train", numeric<std::size_t>([](RunConfig& c) -> auto& { return c.data.blobs_train; })},
      {"data.blobs_test", numeric<std::size_t>([](RunConfig& c) -> auto& { return c.data.blobs_test; })},
      {"data.blobs_classes", numeric<std::size_t>([](RunConfig& c) -> auto& { return c.data.blobs_classes; })},
      {"data.blobs_size", numeric<std::size_t>([](RunConfig& c) -> auto& { return c.data.blobs_size; })},
      {"data.blobs_spread", numeric<double>([](RunConfig& c) -> auto& { return c.data.blobs_spread; })},
      {"data.seed", numeric<std::uint64_t>([](RunConfig& c) -> auto& { return c.data.seed; })},
      {"model.layers",
       [](RunConfig& c, const std::string& v) -> std::string {
         c.layers_text = v;
         return "";
       }},
      {"train.learning_rate", numeric<double>([](RunConfig& c) -> auto& { return c.evolution.train.learning_rate; })},
      {"train.momentum", numeric<double>([](RunConfig& c) -> auto& { return c.evolution.train.momentum; })},
      {"train.batch_size", numeric<std::size_t>([](RunConfig& c) -> auto& { return c.evolution.train.batch_size; })},
      {"train.epochs", numeric<std::size_t>([](RunConfig& c) -> auto& { return c.evolution.train.epochs; })},
      {"ancestor.learning_rate", numeric<double>([](RunConfig& c) -> auto& { return ancestor_train(c).learning_rate; })},
      {"ancestor.momentum", numeric<double>([](RunConfig& c) -> auto& { return ancestor_train(c).momentum; })},
      {"ancestor.batch_size", numeric<std::size_t>([](RunConfig& c) -> auto& { return ancestor_train(c).batch_size; })},
      {"ancestor.epochs", numeric<std::size_t>([](RunConfig& c) -> auto& { return ancestor_train(c).epochs; })},
      {"evolution.max_generations",
       numeric<std::size_t>([](RunConfig& c) -> auto& { return c.evolution.max_generations; })},
      {"evolution.accuracy_drop_stop",
       numeric<double>([](RunConfig& c) -> auto& { return c.evolution.accuracy_drop_stop; })},
      {"evolution.seed", numeric<std::uint64_t>([](RunConfig& c) -> auto& { return c.evolution.seed; })},
      {"evolution.tau",
       [](RunConfig& c, const std::string& v) -> std::string {
         const auto colon = v.find(':');
         double x = 0.0;
         if (colon == std::string::npos || !parse_number(v.substr(colon + 1), x)) {
           return "expected percentile:P or fixed:T, got '" + v + "'";
         }
         const std::string kind = v.substr(0, colon);
         if (kind == "percentile") c.evolution.tau = TauPolicy::percentile(x);
         else if (kind == "fixed") c.evolution.tau = TauPolicy::fixed(x);
         else return "expected percentile:P or fixed:T, got '" + v + "'";
         return "";
       }},
      {"synthesis.budget_ratio", numeric<double>([](RunConfig& c) -> auto& { return c.evolution.env.budget_ratio; })},
      {"synthesis.cluster_multiplier",
       numeric<double>([](RunConfig& c) -> auto& { return c.evolution.env.cluster_multiplier; })},
      {"synthesis.synapse_multiplier",
       numeric<double>([](RunConfig& c) -> auto& { return c.evolution.env.synapse_multiplier; })},
      {"synthesis.max_attempts",
       numeric<std::size_t>([](RunConfig& c) -> auto& { return c.evolution.env.max_attempts; })},
      {"synthesis.enforcement",
       [](RunConfig& c, const std::string& v) -> std::string {
         if (v == "strict") c.evolution.env.enforcement = EnvironmentalFactor::Enforcement::strict;
         else if (v == "expected") c.evolution.env.enforcement = EnvironmentalFactor::Enforcement::expected;
         else return "expected strict or expected, got '" + v + "'";
         return "";
       }},
      {"synthesis.scope",
       [](RunConfig& c, const std::string& v) -> std::string {
         if (v == "global") c.evolution.env.scope = EnvironmentalFactor::Scope::global;
         else if (v == "per-layer") c.evolution.env.scope = EnvironmentalFactor::Scope::per_layer;
         else return "expected global or per-layer, got '" + v + "'";
         return "";
       }},
      {"synthesis.preserve_output_clusters",
       boolean([](RunConfig& c) -> auto& { return c.evolution.env.preserve_output_clusters; })},
      {"run.dir", path_value([](RunConfig& c) -> auto& { return c.run_dir; })},
  };
  return table;
}

void append(std::vector<std::string>& errors, const std::string& key, const std::string& msg) {
  errors.push_back(key + ": " + msg);
}

void check_exists(std::vector<std::string>& errors, const std::string& key, const std::filesystem::path& p) {
  if (p.empty()) append(errors, key, "required when data.source = idx");
  else if (!std::filesystem::exists(p)) append(errors, key, "file not found: " + p.string());
}

}  // namespace

RunConfig build_run_config(const KeyValues& kv, std::vector<std::string>& errors, bool require_data) {
  RunConfig c;
  c.layers_text = kDefaultLayers;
  c.evolution.train.epochs = 2;
  // Ancestor keys are applied after train keys so they can start from them.
  std::vector<std::pair<std::string, std::string>> ordered;
  for (const auto& [k, v] : kv.values()) {
    if (k.rfind("ancestor.", 0) != 0) ordered.emplace_back(k, v);
  }
  for (const auto& [k, v] : kv.values()) {
    if (k.rfind("ancestor.", 0) == 0) ordered.emplace_back(k, v);
  }
  for (const auto& [key, value] : ordered) {
    bool known = false;
    for (const auto& [name, setter] : setters()) {
      if (name != key) continue;
      known = true;
      if (auto msg = setter(c, value); !msg.empty()) append(errors, key, msg);
    }
    if (!known) append(errors, key, "unknown key");
  }

  if (require_data && c.data.source == DataConfig::Source::idx) {
    check_exists(errors, "data.train_images", c.data.train_images);
    check_exists(errors, "data.train_labels", c.data.train_labels);
    check_exists(errors, "data.test_images", c.data.test_images);
    check_exists(errors, "data.test_labels", c.data.test_labels);
  } else if (require_data) {
    if (c.data.blobs_classes < 2) append(errors, "data.blobs_classes", "need at least 2 classes");
    if (c.data.blobs_train < c.data.blobs_classes) append(errors, "data.blobs_train", "fewer samples than classes");
    if (c.data.blobs_test < c.data.blobs_classes) append(errors, "data.blobs_test", "fewer samples than classes");
    if (c.data.blobs_size == 0) append(errors, "data.blobs_size", "must be positive");
  }

  auto check = [&](const std::string& key, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      append(errors, key, e.what());
    }
  };
  check("train", [&] { check_train_config(c.evolution.train); });
  if (c.evolution.train.learning_rate == 0.0) append(errors, "train.learning_rate", "must be positive");
  if (c.evolution.ancestor_train) {
    check("ancestor", [&] { check_train_config(*c.evolution.ancestor_train); });
    if (c.evolution.ancestor_train->learning_rate == 0.0) append(errors, "ancestor.learning_rate", "must be positive");
  }
  check("synthesis", [&] { check_environment(c.evolution.env); });
  check("evolution.tau", [&] { check_tau_policy(c.evolution.tau); });
  if (c.evolution.max_generations == 0) append(errors, "evolution.max_generations", "must be at least 1");
  if (!(c.evolution.accuracy_drop_stop > 0.0 && c.evolution.accuracy_drop_stop < 1.0)) {
    append(errors, "evolution.accuracy_drop_stop", "must lie in (0, 1)");
  }
  // IDX image sizes are only known after loading; a large probe input checks the grammar.
  const InputShape probe = c.data.source == DataConfig::Source::blobs
                               ? InputShape{1, c.data.blobs_size, c.data.blobs_size}
                               : InputShape{1, 1024, 1024};
  try {
    parse_architecture(c.layers_text, probe);
  } catch (const InvalidInput& e) {
    append(errors, "model.layers", e.what());
  }
  return c;
}

namespace {

// Activation shape after one layer; mirrors infer_shapes for a single step.
InputShape step_shape(const InputShape& in, const LayerSpec& l, const std::string& token) {
  switch (l.kind) {
    case LayerKind::convolution: {
      const std::size_t h = in.height + 2 * l.padding, w = in.width + 2 * l.padding;
      if (h < l.kernel_shape[2] || w < l.kernel_shape[3]) {
        throw InvalidInput("layer token '" + token + "': kernel larger than input");
      }
      return {l.kernel_shape[0], (h - l.kernel_shape[2]) / l.stride + 1, (w - l.kernel_shape[3]) / l.stride + 1};
    }
    case LayerKind::fully_connected:
      return {l.kernel_shape[0], 1, 1};
    case LayerKind::max_pool: {
      const std::size_t k = l.kernel_shape[0];
      if (in.height < k || in.width < k) throw InvalidInput("layer token '" + token + "': window too large");
      return {in.channels, (in.height - k) / l.stride + 1, (in.width - k) / l.stride + 1};
    }
    default:
      return in;
  }
}

}  // namespace

std::vector<LayerSpec> parse_architecture(const std::string& text, const InputShape& input) {
  std::vector<LayerSpec> layers;
  InputShape cur = input;
  for (const std::string& token : split(text, ',')) {
    if (token.empty()) continue;
    const auto parts = split(token, ':');
    const std::string& kind = parts[0];
    std::vector<std::size_t> nums;
    for (std::size_t i = 1; i < parts.size(); ++i) {
      std::size_t v = 0;
      const bool may_be_zero = kind == "conv" && i == 4;  // padding
      if (!parse_number(parts[i], v) || (v == 0 && !may_be_zero)) {
        throw InvalidInput("layer token '" + token + "': bad number '" + parts[i] + "'");
      }
      nums.push_back(v);
    }
    auto need = [&](std::size_t lo, std::size_t hi) {
      if (nums.size() < lo || nums.size() > hi) throw InvalidInput("layer token '" + token + "': wrong arity");
    };
    if (kind == "conv") {
      need(2, 4);
      layers.push_back(LayerSpec::convolution(nums[0], cur.channels, nums[1], nums.size() > 2 ? nums[2] : 1,
                                              nums.size() > 3 ? nums[3] : 0));
    } else if (kind == "fc") {
      need(1, 1);
      layers.push_back(LayerSpec::fully_connected(nums[0], cur.volume()));
    } else if (kind == "relu") {
      need(0, 0);
      layers.push_back(LayerSpec::relu());
    } else if (kind == "maxpool") {
      need(1, 2);
      layers.push_back(LayerSpec::max_pool(nums[0], nums.size() > 1 ? nums[1] : 0));
    } else if (kind == "softmax") {
      need(0, 0);
      layers.push_back(LayerSpec::softmax_cross_entropy());
    } else {
      throw InvalidInput("layer token '" + token + "': unknown layer kind '" + kind + "'");
    }
    cur = step_shape(cur, layers.back(), token);
  }
  infer_shapes(input, layers);
  return layers;
}

Datasets load_datasets(const DataConfig& config) {
  Datasets d;
  if (config.source == DataConfig::Source::blobs) {
    // One draw split in two, so both halves share the class templates.
    Dataset all = synth_blobs(config.blobs_train + config.blobs_test, config.blobs_classes, config.blobs_size,
                              config.seed, config.blobs_spread);
    const std::size_t vol = all.sample_volume();
    auto take = [&](std::size_t first, std::size_t n, Split split) {
      Dataset part;
      part.class_count = all.class_count;
      part.split = split;
      part.images = Tensor({n, 1, config.blobs_size, config.blobs_size},
                           std::vector<double>(all.images.data() + first * vol, all.images.data() + (first + n) * vol));
      part.labels.assign(all.labels.begin() + static_cast<std::ptrdiff_t>(first),
                         all.labels.begin() + static_cast<std::ptrdiff_t>(first + n));
      return part;
    };
    d.train = take(0, config.blobs_train, Split::train);
    d.test = take(config.blobs_train, config.blobs_test, Split::test);
    return d;
  }
  d.train = load_idx(config.train_images, config.train_labels, Split::train);
  d.test = load_idx(config.test_images, config.test_labels, Split::test, d.train.class_count);
  if (config.train_limit > 0 && config.train_limit < d.train.size()) {
    d.train = subsample(d.train, config.train_limit, config.seed);
  }
  if (config.test_limit > 0 && config.test_limit < d.test.size()) {
    d.test = subsample(d.test, config.test_limit, config.seed + 1);
  }
  return d;
}

std::string default_config_text() {
  return R"([data]
source = idx               # idx | blobs
train_images =
train_labels =
test_images =
test_labels =
train_limit = 0            # stratified subsample, 0 keeps all
test_limit = 0
blobs_train = 400
blobs_test = 200
blobs_classes = 4
blobs_size = 8
blobs_spread = 0.05
seed = 7

[model]
layers = conv:8:3, relu, maxpool:2, conv:16:3, relu, fc:10, softmax

[train]                    # retraining of every offspring
learning_rate = 0.05
momentum = 0.9
batch_size = 32
epochs = 2

[ancestor]                 # optional; unset keys fall back to [train]
# epochs = 6

[evolution]
max_generations = 5
accuracy_drop_stop = 0.04
seed = 1
tau = percentile:25        # percentile:P | fixed:T

[synthesis]
budget_ratio = 0.8
cluster_multiplier = 1
synapse_multiplier = 1
enforcement = strict       # strict | expected
scope = global             # global | per-layer
max_attempts = 64
preserve_output_clusters = true

[run]
dir = runs/default
)";
}

}  // namespace synevo
