#include "synevo/cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "synevo/config.hpp"
#include "synevo/errors.hpp"
#include "synevo/evolution.hpp"
#include "synevo/genome_io.hpp"
#include "synevo/metrics.hpp"

namespace synevo {

namespace {

namespace fs = std::filesystem;

// Exclusive lock on a run directory for the lifetime of the object.
class RunLock {
 public:
  explicit RunLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
      throw ConfigError("run directory " + dir.string() + " is locked (remove " + path_.string() + " if stale)");
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

struct Options {
  std::string config_file;
  std::string run_dir;
  bool from_scratch = false;
  std::string genome_path;
  std::string report_format = "table";
};

// "--section.key=value" tokens are configuration overrides; everything
// else goes to the argument parser.
bool is_override(const std::string& arg) {
  if (arg.rfind("--", 0) != 0) return false;
  const auto eq = arg.find('=');
  const auto dot = arg.find('.');
  return eq != std::string::npos && dot != std::string::npos && dot < eq;
}

RunConfig resolve_config(const Options& opt, const std::vector<std::string>& overrides, bool require_data) {
  std::vector<std::string> errors;
  KeyValues kv;
  if (!opt.config_file.empty()) kv = KeyValues::load(opt.config_file, errors);
  if (const char* env = std::getenv(kRunDirEnv); env != nullptr && !kv.get("run.dir")) kv.set("run.dir", env);
  for (const auto& o : overrides) kv.set_assignment(o.substr(2));
  if (!opt.run_dir.empty()) kv.set("run.dir", opt.run_dir);
  RunConfig config = build_run_config(kv, errors, require_data);
  if (config.run_dir.empty()) errors.push_back("run.dir: required (use --run-dir, the config file or " +
                                               std::string(kRunDirEnv) + ")");
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return config;
}

InputShape input_of(const Dataset& d) {
  const Shape& s = d.images.shape();
  return {s[1], s[2], s[3]};
}

std::vector<LayerSpec> architecture(const RunConfig& config, const Dataset& train) {
  try {
    return parse_architecture(config.layers_text, input_of(train));
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("model.layers: ") + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

TrainConfig ancestor_train_config(const EvolutionConfig& ec) {
  TrainConfig tc = ec.ancestor_train.value_or(ec.train);
  tc.seed = training_seed(ec.seed, 1);
  return tc;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  const Datasets data = load_datasets(config.data);
  const auto layers = architecture(config, data.train);
  const RunLock lock(config.run_dir);
  NetworkGenome ancestor =
      make_ancestor(input_of(data.train), layers, ancestor_init_seed(config.evolution.seed));
  TrainResult trained = sgd_train(std::move(ancestor), data.train, ancestor_train_config(config.evolution));
  save_genome(trained.genome, config.run_dir / "ancestor.genome");
  std::string csv = "epoch,train_loss\n";
  for (std::size_t e = 0; e < trained.epoch_losses.size(); ++e) {
    csv += std::to_string(e + 1) + "," + format_exact(trained.epoch_losses[e]) + "\n";
  }
  write_text(config.run_dir / "train.csv", csv);
  const double acc = evaluate(trained.genome, data.test);
  char buf[160];
  std::snprintf(buf, sizeof buf, "ancestor %s  synapses %zu  clusters %zu  test accuracy %.2f%%\n",
                trained.genome.id.c_str(), count_live_synapses(trained.genome), count_live_clusters(trained.genome),
                100.0 * acc);
  out << buf;
  return kExitOk;
}

void clear_run_outputs(const fs::path& dir) {
  for (const char* name : {"lineage.json", "report.csv", "report.txt", "plot.csv"}) fs::remove(dir / name);
  fs::remove_all(dir / "genomes");
}

int cmd_evolve(const RunConfig& config, bool from_scratch, std::ostream& out) {
  const Datasets data = load_datasets(config.data);
  const auto layers = architecture(config, data.train);
  const RunLock lock(config.run_dir);
  NetworkGenome ancestor;
  if (!from_scratch) {
    const fs::path path = config.run_dir / "ancestor.genome";
    if (!fs::exists(path)) {
      throw ConfigError("no trained ancestor at " + path.string() + " (run 'train' first or pass --from-scratch)");
    }
    ancestor = load_genome(path);
    if (ancestor.layers != layers || ancestor.input != input_of(data.train)) {
      throw ConfigError("ancestor at " + path.string() + " does not match model.layers and the data");
    }
  }
  clear_run_outputs(config.run_dir);
  const RunStore store(config.run_dir);
  store.log(from_scratch ? "evolve from scratch" : "evolve from ancestor.genome");
  const EvolutionHooks hooks = persisting_hooks(store, [&out](const std::string& line) { out << line << '\n'; });
  const EvolutionRun run = from_scratch
                               ? run_evolution(input_of(data.train), layers, data.train, data.test, config.evolution, hooks)
                               : evolve_from(std::move(ancestor), data.train, data.test, config.evolution, hooks);
  out << "\n" << render_report(run.lineage).table;
  return kExitOk;
}

int cmd_resume(const RunConfig& config, std::ostream& out) {
  const Datasets data = load_datasets(config.data);
  const RunLock lock(config.run_dir);
  const RunStore store(config.run_dir);
  store.log("resume");
  const EvolutionRun run = resume(config.run_dir, data.train, data.test, config.evolution,
                                  persisting_hooks(store, [&out](const std::string& line) { out << line << '\n'; }));
  out << "\n" << render_report(run.lineage).table;
  return kExitOk;
}

int cmd_inspect(const std::string& path, std::ostream& out) {
  const NetworkGenome g = load_genome(path);
  out << "id          " << g.id << "\n";
  out << "parent      " << g.parent_id.value_or("-") << "\n";
  out << "generation  " << g.generation << "\n";
  out << "input       " << g.input.channels << "x" << g.input.height << "x" << g.input.width << "\n";
  out << "synapses    " << count_live_synapses(g) << " / " << count_total_synapses(g) << "\n";
  out << "clusters    " << count_live_clusters(g) << "\n";
  for (std::size_t i = 0; i < g.layers.size(); ++i) {
    out << "  [" << i << "] " << format_layer(g.layers[i]);
    if (g.layers[i].has_weights()) {
      out << "  live synapses " << count_live_synapses(g.params[i]) << "/" << g.layers[i].weight_count()
          << "  live clusters " << count_live_clusters(g.params[i]) << "/" << g.layers[i].kernel_count();
    }
    out << "\n";
  }
  const auto violations = validate(g);
  if (violations.empty()) {
    out << "valid\n";
    return kExitOk;
  }
  for (const auto& v : violations) out << "violation: " << v.message << "\n";
  return kExitConfig;
}

int cmd_report(const RunConfig& config, const std::string& format, std::ostream& out) {
  const Lineage lineage = load_lineage(config.run_dir / "lineage.json");
  const Report rep = render_report(lineage);
  if (format == "csv") out << rep.csv;
  else if (format == "plot") out << rep.plot_csv;
  else out << rep.table;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> passthrough, overrides;
  for (const auto& a : args) (is_override(a) ? overrides : passthrough).push_back(a);

  Options opt;
  CLI::App app{"Evolutionary synthesis of sparse neural networks", "synevo"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand
  app.add_option("-c,--config", opt.config_file, "configuration file")->check(CLI::ExistingFile);
  app.add_option("-r,--run-dir", opt.run_dir, "run directory (default: $" + std::string(kRunDirEnv) + ")");
  app.footer("Any key can be overridden as --section.key=value, for example --synthesis.budget_ratio=0.7.");

  auto* train = app.add_subcommand("train", "train the ancestor network");
  auto* evolve = app.add_subcommand("evolve", "run synthesis generations from the trained ancestor");
  evolve->add_flag("--from-scratch", opt.from_scratch, "initialise and train the ancestor first");
  auto* resume_cmd = app.add_subcommand("resume", "continue an interrupted run");
  auto* inspect = app.add_subcommand("inspect", "summarise a genome file");
  inspect->add_option("genome", opt.genome_path, "genome file")->required();
  auto* report = app.add_subcommand("report", "print the report of a run");
  report->add_option("--format", opt.report_format, "table, csv or plot")
      ->check(CLI::IsMember({"table", "csv", "plot"}));
  auto* defaults = app.add_subcommand("defaults", "print a configuration file with every default");

  std::vector<std::string> reversed(passthrough.rbegin(), passthrough.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*defaults) {
      out << default_config_text();
      return kExitOk;
    }
    if (*inspect) return cmd_inspect(opt.genome_path, out);
    const RunConfig config = resolve_config(opt, overrides, !*report);
    if (*train) return cmd_train(config, out);
    if (*evolve) return cmd_evolve(config, opt.from_scratch, out);
    if (*resume_cmd) return cmd_resume(config, out);
    if (*report) return cmd_report(config, opt.report_format, out);
  } catch (const SynthesisFailed& e) {
    err << "error: " << e.what() << "\n";
    return kExitSynthesis;
  } catch (const NumericOverflow& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const TrainingDiverged& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ResumeError& e) {
    err << "error: generation " << e.generation() << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace synevo
