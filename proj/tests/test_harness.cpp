#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <functional>
#include <random>
#include <set>

#include "predlearn/harness.hpp"
#include "predlearn/io.hpp"

using namespace predlearn;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::IoError;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  FAIL("expected an Error");
  return {};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("predlearn_h_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

const char* kTwoObjects = R"({
  "objects": [
    {"id": "a", "features": {"red": 1, "big": 0.8}},
    {"id": "b", "features": {"red": 0.5, "small": 1}}
  ],
  "comparisons": [["a", "b"]],
  "eval_pairs": [{"pair": ["b", "a"], "label": "red"}]
})";

}  // namespace

TEST_CASE("ingest: well-formed file") {
  TempDir dir;
  write_text(dir.path / "d.json", kTwoObjects);
  const Dataset ds = ingest(dir.path / "d.json");
  REQUIRE(ds.objects.size() == 2);
  CHECK(ds.object("a").features.at("big") == 0.8);
  CHECK(ds.comparisons == std::vector<std::pair<std::string, std::string>>{{"a", "b"}});
  CHECK(ds.eval_pairs == std::vector<EvalPair>{{"b", "a", "red"}});
  CHECK(dataset_from_json(dataset_to_json(ds)) == ds);
}

TEST_CASE("ingest: dangling ids are named") {
  const char* text = R"({"objects":[{"id":"a","features":{}}],"comparisons":[["a","ghost"]]})";
  const auto msg = message_of([&] { dataset_from_json(text); });
  CHECK(msg.find("DanglingId") != std::string::npos);
  CHECK(msg.find("ghost") != std::string::npos);
  CHECK(msg.find("comparisons[0][1]") != std::string::npos);

  const char* eval = R"({"objects":[{"id":"a","features":{}}],"eval_pairs":[{"pair":["zz","a"],"label":"x"}]})";
  CHECK(code_of([&] { dataset_from_json(eval); }) == ErrorCode::DanglingId);
}

TEST_CASE("ingest: empty objects list is valid with a warning") {
  std::vector<std::string> warnings;
  const Dataset ds = dataset_from_json(R"({"objects": []})", &warnings);
  CHECK(ds.objects.empty());
  CHECK(warnings.size() == 1);
}

TEST_CASE("ingest: schema violations carry field paths") {
  auto msg = [](const char* text) { return message_of([&] { dataset_from_json(text); }); };
  CHECK(msg(R"({"objects":[{"id":"a","features":{"x":1.5}}]})").find("objects[0].features.x") != std::string::npos);
  CHECK(msg(R"({"objects":[{"features":{}}]})").find("objects[0].id") != std::string::npos);
  CHECK(msg(R"({"objects":[{"id":"a","features":{}},{"id":"a","features":{}}]})").find("duplicate") !=
        std::string::npos);
  CHECK(msg(R"({"objects":[],"extra":1})").find("$.extra") != std::string::npos);
  CHECK(code_of([] { dataset_from_json("[1,"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { dataset_from_json(R"({"objects":{}})"); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { ingest("/nonexistent/d.json"); }) == ErrorCode::IoError);
}

TEST_CASE("config: overrides, defaults and range checks") {
  const auto c = config_from_json(
      R"({"learner":{"refinement_rate":0.5},"codec":{"mode":"PHASE_LAG_0","slot_width":6},"seed":9,"out_dir":"x"})");
  CHECK(c.learner.refinement_rate == 0.5);
  CHECK(c.learner.apply_threshold == LearnerParams{}.apply_threshold);
  CHECK(c.codec.mode == BindingMode::PhaseLag0);
  CHECK(c.codec.slot_width == 6);
  CHECK(c.dynamics == DynamicsParams{});
  CHECK(c.seed == 9);
  CHECK(c.out_dir == "x");

  const auto back = config_from_json(config_to_json(c));
  CHECK(back.learner == c.learner);
  CHECK(back.codec == c.codec);
  CHECK(back.seed == c.seed);

  CHECK(code_of([] { config_from_json(R"({"learner":{"refinement_rate":0}})"); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { config_from_json(R"({"dynamics":{"leek":0.3}})"); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { config_from_json(R"({"seed":-1})"); }) == ErrorCode::SchemaError);
}

TEST_CASE("identical pairs sharing a feature set give purity 1") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> v(0.1, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Dataset ds;
    FeatureVector s;
    for (int k = 0; k < 4; ++k) s["f" + std::to_string(k)] = v(rng);
    ds.objects = {{"x", s}, {"y", s}, {"z", s}};
    ds.comparisons = {{"x", "y"}, {"y", "z"}};
    ExperimentConfig cfg;
    cfg.decode_trials = 0;
    const auto r = evaluate_experiment(cfg, ds);
    REQUIRE(r.report.predicates.size() == 1);
    CHECK(r.report.predicate_purity == doctest::Approx(1.0));
    // Intersection oracle: identical items give the shared values back.
    for (const auto& [label, w] : r.report.predicates[0].weights) CHECK(w == doctest::Approx(s.at(label)));
  }
}

TEST_CASE("purity counts only features common to every compared item") {
  Dataset ds;
  ds.objects = {{"p", {{"k", 1.0}, {"d", 1.0}}}, {"q", {{"k", 1.0}, {"d", 1.0}}}, {"r", {{"k", 1.0}, {"e", 1.0}}},
                {"s", {{"k", 1.0}, {"e", 1.0}}}};
  ds.comparisons = {{"p", "q"}, {"r", "s"}};
  ExperimentConfig cfg;
  cfg.decode_trials = 0;
  cfg.learner.apply_threshold = 0.5;
  const auto r = evaluate_experiment(cfg, ds);
  REQUIRE(r.report.predicates.size() == 1);
  // After one refinement: k = 1, d = 0.7, e = 0.3; invariant set {k}.
  const double eta = cfg.learner.refinement_rate;
  const double expected = 1.0 / (1.0 + (1.0 - eta) + eta);
  CHECK(*r.report.predicate_purity == doctest::Approx(expected));
  CHECK(r.report.refined == 1);
}

TEST_CASE("eval on a feature-disjoint family uses apply_predicate only") {
  Dataset ds;
  ds.objects = {{"a1", {{"more", 1.0}, {"mag", 0.9}, {"square", 1.0}}},
                {"a2", {{"more", 1.0}, {"mag", 0.8}, {"circle", 1.0}}},
                {"b1", {{"more", 1.0}, {"mag", 0.85}, {"rough", 1.0}}},
                {"b2", {{"less", 1.0}, {"mag", 0.1}, {"smooth", 1.0}}}};
  ds.comparisons = {{"a1", "a2"}};
  ds.eval_pairs = {{"b1", "b2", "more"}};
  ExperimentConfig cfg;
  cfg.decode_trials = 0;
  const auto r = evaluate_experiment(cfg, ds);
  REQUIRE(r.report.predicates.size() == 1);
  CHECK(r.report.predicates[0].label == "more");
  CHECK(r.report.checksum_before_eval == r.report.checksum_after_eval);
  CHECK(r.report.generalization_accuracy == 1.0);

  // Hand score: weights {more: 1, mag: 0.8}.
  const double w_more = 1.0, w_mag = 0.8;
  const double s1 = (w_more * 1.0 + w_mag * 0.85) / (w_more + w_mag);
  CHECK(apply_predicate(r.network, r.report.predicates[0].unit, ds.object("b1").features) == doctest::Approx(s1));
}

TEST_CASE("empty comparisons: no predicates, generalization skipped") {
  Dataset ds = dataset_from_json(kTwoObjects);
  ds.comparisons.clear();
  const auto r = evaluate_experiment(ExperimentConfig{}, ds);
  CHECK(r.report.predicates.empty());
  CHECK(!r.report.predicate_purity);
  CHECK(!r.report.generalization_accuracy);
  CHECK(!r.report.decode_accuracy);
  CHECK(report_to_json(r.report).find("\"generalization_accuracy\": null") != std::string::npos);
}

TEST_CASE("run_experiment writes artifacts deterministically") {
  TempDir dir;
  GeneratorParams g;
  g.seed = 5;
  const Dataset ds = generate_dataset(g);
  ExperimentConfig cfg;
  cfg.seed = 5;
  cfg.decode_trials = 5;
  cfg.out_dir = dir.path / "one";
  const auto r1 = run_experiment(cfg, ds);
  cfg.out_dir = dir.path / "two";
  run_experiment(cfg, ds);

  for (const char* f : {"network.json", "trace.csv", "report.json"})
    CHECK(read_text(dir.path / "one" / f) == read_text(dir.path / "two" / f));
  CHECK(fs::exists(dir.path / "one" / "timing.json"));
  CHECK(read_text(dir.path / "one" / "report.json").find("wall_time") == std::string::npos);
  CHECK(r1.wall_time > 0.0);

  const Network net = load_network(dir.path / "one" / "network.json");
  CHECK(network_to_json(net) == read_text(dir.path / "one" / "network.json"));
  CHECK(load_trace_csv(dir.path / "one" / "trace.csv").steps() > 0);
}

TEST_CASE("run_experiment removes partial outputs on failure") {
  TempDir dir;
  ExperimentConfig cfg;
  cfg.out_dir = dir.path;
  fs::create_directories(dir.path / "report.json");  // blocks the third write
  Dataset ds = dataset_from_json(kTwoObjects);
  CHECK(code_of([&] { run_experiment(cfg, ds); }) == ErrorCode::IoError);
  CHECK(!fs::exists(dir.path / "network.json"));
  CHECK(!fs::exists(dir.path / "trace.csv"));
}

TEST_CASE("generator: deterministic, disjoint domains, balanced labels") {
  GeneratorParams g;
  g.seed = 11;
  const Dataset a = generate_dataset(g), b = generate_dataset(g);
  CHECK(dataset_to_json(a) == dataset_to_json(b));
  g.seed = 12;
  CHECK(dataset_to_json(generate_dataset(g)) != dataset_to_json(a));

  std::set<std::string> features_a, features_b;
  for (const auto& o : a.objects)
    for (const auto& [label, v] : o.features) (o.id[0] == 'A' ? features_a : features_b).insert(label);
  for (const auto& f : features_a)
    if (features_b.count(f)) CHECK((f == "more" || f == "less" || f == "mag_high" || f == "mag_low"));

  for (const auto& [x, y] : a.comparisons) {
    CHECK(x[0] == 'A');
    CHECK(x.substr(0, 6) == y.substr(0, 6));
    CHECK(x != y);
  }
  int more = 0;
  for (const auto& e : a.eval_pairs) {
    CHECK(e.first[0] == 'B');
    CHECK(e.second[0] == 'B');
    more += e.label == "more";
  }
  CHECK(more * 2 == static_cast<int>(a.eval_pairs.size()));
}
