#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "synevo/errors.hpp"
#include "synevo/evolution.hpp"
#include "synevo/genome_io.hpp"
#include "synevo/metrics.hpp"

using namespace synevo;
namespace fs = std::filesystem;

namespace {

const InputShape kInput{1, 8, 8};

std::vector<LayerSpec> small_net() {
  return {LayerSpec::fully_connected(48, 64), LayerSpec::relu(), LayerSpec::fully_connected(4, 48),
          LayerSpec::softmax_cross_entropy()};
}

struct Blobs {
  Dataset train = synth_blobs(200, 4, 8, 3);
  Dataset test;
  Blobs() {
    test = synth_blobs(100, 4, 8, 3);
    test.split = Split::test;
  }
};

const Blobs& blobs() {
  static const Blobs b;
  return b;
}

EvolutionConfig quick_config() {
  EvolutionConfig c;
  c.train.epochs = 3;
  c.train.batch_size = 20;
  c.train.learning_rate = 0.1;
  c.seed = 21;
  return c;
}

// Evaluator that replays a fixed accuracy sequence, one per generation.
EvolutionHooks scripted(std::vector<double> accuracies) {
  EvolutionHooks h;
  h.evaluate = [acc = std::move(accuracies)](const NetworkGenome& g, const Dataset&) {
    return acc.at(std::min<std::size_t>(g.generation - 1, acc.size() - 1));
  };
  return h;
}

void check_run(const EvolutionRun& run) {
  REQUIRE(run.genomes.size() == run.lineage.records.size());
  CHECK(check_lineage(run.lineage).empty());
  CHECK(check_monotone_efficiency(run.lineage).empty());
  for (std::size_t i = 0; i < run.genomes.size(); ++i) {
    const NetworkGenome& g = run.genomes[i];
    const GenerationRecord& r = run.lineage.records[i];
    CHECK(g.generation == i + 1);
    CHECK(r.genome_id == g.id);
    CHECK(r.live_synapses == oracle::recount_live(g));
    CHECK(r.live_clusters == oracle::recount_clusters(g));
    CHECK(r.architectural_efficiency ==
          static_cast<double>(oracle::recount_live(run.genomes[0])) / static_cast<double>(oracle::recount_live(g)));
    if (i == 0) {
      CHECK(validate(g).empty());
      CHECK_FALSE(g.parent_id.has_value());
    } else {
      CHECK(validate(g, run.genomes[i - 1]).empty());
      CHECK(g.parent_id == run.genomes[i - 1].id);
    }
  }
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("seed derivation separates generations and purposes") {
  CHECK(training_seed(1, 2) != training_seed(1, 3));
  CHECK(training_seed(1, 2) != synthesis_seed(1, 2));
  CHECK(training_seed(1, 2) == training_seed(1, 2));
  CHECK(ancestor_init_seed(1) != ancestor_init_seed(2));
}

TEST_CASE("evolution config is validated") {
  EvolutionConfig c = quick_config();
  c.max_generations = 0;
  CHECK_THROWS_AS(check_evolution_config(c), ConfigError);
  c = quick_config();
  c.accuracy_drop_stop = 0.0;
  CHECK_THROWS_AS(check_evolution_config(c), ConfigError);
  c = quick_config();
  c.env.budget_ratio = 1.5;
  CHECK_THROWS_AS(check_evolution_config(c), ConfigError);
}

TEST_CASE("a single generation is just the trained ancestor") {
  EvolutionConfig c = quick_config();
  c.max_generations = 1;
  const EvolutionRun run = run_evolution(kInput, small_net(), blobs().train, blobs().test, c);
  REQUIRE(run.lineage.records.size() == 1);
  const GenerationRecord& r = run.lineage.records[0];
  CHECK(r.architectural_efficiency == 1.0);
  CHECK(r.cluster_efficiency == 1.0);
  CHECK(r.live_synapses == count_total_synapses(run.genomes[0]));
  CHECK(r.test_accuracy >= 0.95);
  CHECK(run.lineage.stop == StopReason::max_generations);
  check_run(run);
}

TEST_CASE("five strict generations compound the synapse budget") {
  EvolutionConfig c = quick_config();
  c.accuracy_drop_stop = 0.99;
  const EvolutionRun run = run_evolution(kInput, small_net(), blobs().train, blobs().test, c);
  REQUIRE(run.lineage.records.size() == 5);
  CHECK(run.lineage.stop == StopReason::max_generations);
  check_run(run);
  for (std::size_t i = 1; i < 5; ++i) {
    CHECK(oracle::recount_live(run.genomes[i]) <= 0.8 * static_cast<double>(oracle::recount_live(run.genomes[i - 1])));
    CHECK(run.lineage.records[i].synthesis_attempts >= 1);
    CHECK(run.lineage.records[i].realized_ratio <= 0.8);
  }
  CHECK(run.lineage.records.back().architectural_efficiency >= 2.44);
  // The output layer keeps every class.
  for (const auto& g : run.genomes) CHECK(oracle::recount_clusters(g.params[2]) == 4);
}

TEST_CASE("an accuracy drop past the threshold stops the run and is flagged") {
  EvolutionConfig c = quick_config();
  c.max_generations = 6;
  const EvolutionRun run = run_evolution(kInput, small_net(), blobs().train, blobs().test, c, scripted({0.99, 0.99, 0.94, 0.99}));
  REQUIRE(run.lineage.records.size() == 3);
  CHECK_FALSE(run.lineage.records[1].flagged);
  CHECK(run.lineage.records[2].flagged);
  CHECK(run.lineage.stop == StopReason::accuracy_drop);
  CHECK(render_report(run.lineage).table.find("*") != std::string::npos);

  // A drop of exactly the threshold does not stop the run.
  c.accuracy_drop_stop = 0.0625;
  const EvolutionRun edge = run_evolution(kInput, small_net(), blobs().train, blobs().test, c, scripted({0.5, 0.4375}));
  CHECK(edge.lineage.records.size() == 6);
  CHECK_FALSE(edge.lineage.records.back().flagged);
}

TEST_CASE("continuing from generation 3 equals a straight run") {
  EvolutionConfig c = quick_config();
  c.accuracy_drop_stop = 0.99;
  const EvolutionRun straight = run_evolution(kInput, small_net(), blobs().train, blobs().test, c);
  c.max_generations = 3;
  EvolutionRun part = run_evolution(kInput, small_net(), blobs().train, blobs().test, c);
  REQUIRE(part.lineage.records.size() == 3);
  c.max_generations = 5;
  const EvolutionRun resumed = continue_evolution(part, blobs().train, blobs().test, c);
  CHECK(resumed.lineage == straight.lineage);
  CHECK(resumed.genomes == straight.genomes);

  // Further continuation of a finished run is a no-op.
  const EvolutionRun again = continue_evolution(resumed, blobs().train, blobs().test, c);
  CHECK(again.lineage == resumed.lineage);
}

TEST_CASE("evolve_from accepts only fully live first-generation ancestors") {
  EvolutionConfig c = quick_config();
  c.max_generations = 2;
  c.accuracy_drop_stop = 0.99;
  TrainConfig tc = c.train;
  NetworkGenome a = sgd_train(make_ancestor(kInput, small_net(), 4), blobs().train, tc).genome;
  const EvolutionRun run = evolve_from(a, blobs().train, blobs().test, c);
  CHECK(run.lineage.records.size() == 2);
  CHECK(run.genomes[0] == a);
  check_run(run);

  NetworkGenome sparse = oracle::random_masks(a, 2, 0.0, 0.3);
  CHECK_THROWS_AS(evolve_from(sparse, blobs().train, blobs().test, c), InvalidInput);
  NetworkGenome later = a;
  later.generation = 2;
  CHECK_THROWS_AS(evolve_from(later, blobs().train, blobs().test, c), InvalidInput);
}

TEST_CASE("persisted runs resume and detect corruption") {
  TempDir t("synevo_evolution_store");
  const RunStore store(t.path);
  EvolutionConfig c = quick_config();
  c.accuracy_drop_stop = 0.99;
  c.max_generations = 3;
  std::vector<std::string> lines;
  run_evolution(kInput, small_net(), blobs().train, blobs().test, c,
                persisting_hooks(store, [&](const std::string& s) { lines.push_back(s); }));
  CHECK(lines.size() == 3);
  CHECK(fs::exists(t.path / "genomes" / "gen-0003.genome"));
  CHECK(fs::exists(t.path / "report.csv"));
  CHECK(fs::exists(t.path / "run.log"));
  const EvolutionRun loaded = store.load();
  CHECK(loaded.lineage.records.size() == 3);
  check_run(loaded);

  // Resuming a completed run leaves the lineage untouched.
  const std::string before = encode_lineage(load_lineage(store.lineage_path()));
  resume(t.path, blobs().train, blobs().test, c);
  CHECK(encode_lineage(load_lineage(store.lineage_path())) == before);

  c.max_generations = 5;
  const EvolutionRun resumed = resume(t.path, blobs().train, blobs().test, c);
  CHECK(resumed.lineage.records.size() == 5);
  const EvolutionRun straight = run_evolution(kInput, small_net(), blobs().train, blobs().test, c);
  CHECK(resumed.lineage == straight.lineage);
  CHECK(store.load().lineage == straight.lineage);

  EvolutionConfig other = c;
  other.seed = 99;
  CHECK_THROWS_AS(resume(t.path, blobs().train, blobs().test, other), ConfigError);

  // Flip a byte in generation 2.
  const fs::path g2 = t.path / "genomes" / "gen-0002.genome";
  std::vector<char> bytes;
  {
    std::ifstream in(g2, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  bytes[bytes.size() / 2] ^= 0x5A;
  {
    std::ofstream out(g2, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  try {
    resume(t.path, blobs().train, blobs().test, c);
    FAIL("expected a resume error");
  } catch (const ResumeError& e) {
    CHECK(e.generation() == 2);
    CHECK(std::string(e.what()).find("gen-0002") != std::string::npos);
  }

  fs::remove(store.lineage_path());
  CHECK_THROWS_AS(store.load(), ResumeError);
}
