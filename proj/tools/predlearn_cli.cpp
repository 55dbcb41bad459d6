// predlearn: batch front end for dataset generation, learning, running,
// mapping, applying, decoding and tracing.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "predlearn/codec.hpp"
#include "predlearn/harness.hpp"
#include "predlearn/io.hpp"
#include "predlearn/learner.hpp"
#include "predlearn/mapping.hpp"
#include "predlearn/oscillation.hpp"

using namespace predlearn;
namespace fs = std::filesystem;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

ExperimentConfig load_config(const Globals& g) {
  ExperimentConfig c = g.config.empty() ? ExperimentConfig{} : config_from_json(read_text(g.config));
  if (g.seed) c.seed = *g.seed;
  if (g.out_dir) c.out_dir = *g.out_dir;
  return c;
}

/// `explicit_path` if given, else `name` inside the output directory.
fs::path output_path(const std::string& explicit_path, const ExperimentConfig& c, const char* name) {
  if (!explicit_path.empty()) return explicit_path;
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + c.out_dir.string() + "': " + ec.message());
  return c.out_dir / name;
}

FeatureVector load_item(const fs::path& path) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  const json& features = doc.is_object() && doc.contains("features") ? doc["features"] : doc;
  if (!features.is_object()) throw Error(ErrorCode::SchemaError, "features: expected an object of label: number");
  FeatureVector fv;
  for (const auto& [label, v] : features.items()) {
    if (!v.is_number()) throw Error(ErrorCode::SchemaError, "features." + label + ": expected a number");
    fv[label] = v.get<double>();
  }
  return fv;
}

Drive parse_drive(const std::vector<std::string>& specs) {
  Drive d;
  for (const auto& s : specs) {
    const auto eq = s.rfind('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(ErrorCode::InvalidValue, "drive '" + s + "' must look like unit=value");
    try {
      std::size_t used = 0;
      const double v = std::stod(s.substr(eq + 1), &used);
      if (used != s.size() - eq - 1) throw std::invalid_argument(s);
      d[s.substr(0, eq)] = v;
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidValue, "drive '" + s + "' has a bad value");
    }
  }
  return d;
}

void print_report_summary(const MetricsReport& r) {
  auto show = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string("skipped"); };
  std::cout << "predicates\t" << r.predicates.size() << "\n"
            << "predicate_purity\t" << show(r.predicate_purity) << "\n"
            << "decode_accuracy\t" << show(r.decode_accuracy) << "\n"
            << "generalization_accuracy\t" << show(r.generalization_accuracy) << "\n"
            << "weights_unchanged\t" << (r.checksum_before_eval == r.checksum_after_eval ? "true" : "false") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predicate learning with oscillatory binding"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Experiment config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed (overrides the config)");
  app.add_option("--out-dir", g.out_dir, "Output directory (overrides the config)");

  // gen
  auto* gen = app.add_subcommand("gen", "Write a synthetic relative-magnitude dataset");
  GeneratorParams gp;
  std::string gen_out;
  gen->add_option("--objects-per-class", gp.objects_per_class)->capture_default_str();
  gen->add_option("--comparisons", gp.comparisons)->capture_default_str();
  gen->add_option("--eval-pairs", gp.eval_pairs)->capture_default_str();
  gen->add_option("--distractors", gp.distractors)->capture_default_str();
  gen->add_option("--out", gen_out, "Dataset path (default <out-dir>/dataset.json)");

  // learn
  auto* learn = app.add_subcommand("learn", "Run the comparisons and save the learned network");
  std::string learn_dataset, learn_out;
  learn->add_option("--dataset", learn_dataset)->required()->check(CLI::ExistingFile);
  learn->add_option("--out", learn_out, "Network path (default <out-dir>/network.json)");

  // run
  auto* runc = app.add_subcommand("run", "Full experiment: learn, evaluate, decode, write artifacts");
  std::string run_dataset;
  runc->add_option("--dataset", run_dataset)->required()->check(CLI::ExistingFile);

  // map
  auto* map = app.add_subcommand("map", "Best driver-recipient mapping from a trace, as TSV");
  std::string map_trace, map_net, map_json;
  map->add_option("--trace", map_trace)->required()->check(CLI::ExistingFile);
  map->add_option("--network", map_net)->required()->check(CLI::ExistingFile);
  map->add_option("--json", map_json, "Also write the full table (h and w) as JSON");
  bool map_commit = false;
  std::string map_out;
  map->add_flag("--commit", map_commit, "Write MAPPING connections into the network");
  map->add_option("--out", map_out, "Network path for --commit (default: overwrite --network)");

  // apply
  auto* apply = app.add_subcommand("apply", "Score an item against learned predicates");
  std::string apply_net, apply_item, apply_pred;
  apply->add_option("--net,--network", apply_net)->required()->check(CLI::ExistingFile);
  apply->add_option("--item", apply_item, "JSON {\"features\": {label: value}}")->required()->check(CLI::ExistingFile);
  apply->add_option("--predicate", apply_pred, "Only this predicate unit");

  // decode
  auto* dec = app.add_subcommand("decode", "Recover propositions from a trace CSV");
  std::string dec_trace, dec_net, dec_mode, dec_out;
  long dec_width = 0, dec_gap = -1;
  dec->add_option("--trace", dec_trace)->required()->check(CLI::ExistingFile);
  dec->add_option("--network", dec_net)->required()->check(CLI::ExistingFile);
  dec->add_option("--mode", dec_mode, "PHASE_LAG_1 or PHASE_LAG_0 (default from config)");
  dec->add_option("--slot-width", dec_width);
  dec->add_option("--gap", dec_gap);
  dec->add_option("--out", dec_out, "Write propositions JSON here instead of stdout");

  // trace
  auto* tr = app.add_subcommand("trace", "Simulate a network and export the raster");
  std::string tr_net, tr_out, tr_json, tr_schedule, tr_mode;
  long tr_steps = 200;
  bool tr_encode = false, tr_sync = false;
  std::vector<std::string> tr_drive;
  tr->add_option("--network", tr_net)->required()->check(CLI::ExistingFile);
  tr->add_option("--steps", tr_steps, "Free-run length")->capture_default_str()->check(CLI::PositiveNumber);
  tr->add_option("--drive", tr_drive, "Constant input unit=value (repeatable)");
  tr->add_flag("--synchrony", tr_sync, "Yoke each role's PO units to one inhibitor");
  tr->add_flag("--encode", tr_encode, "Run the network's propositions through the binding codec");
  tr->add_option("--mode", tr_mode, "Codec mode for --encode");
  tr->add_option("--schedule", tr_schedule, "Also write the codec schedule JSON here");
  tr->add_option("--out", tr_out, "Trace CSV (default <out-dir>/trace.csv)");
  tr->add_option("--json", tr_json, "Also write the trace as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const ExperimentConfig cfg = load_config(g);
    cfg.validate();

    if (*gen) {
      gp.seed = cfg.seed;
      const auto path = output_path(gen_out, cfg, "dataset.json");
      write_text(path, dataset_to_json(generate_dataset(gp)));
      std::cout << path.string() << "\n";
    } else if (*learn) {
      ExperimentConfig c = cfg;
      c.decode_trials = 0;
      const auto result = evaluate_experiment(c, ingest(learn_dataset));
      const auto path = output_path(learn_out, cfg, "network.json");
      save_network(result.network, path);
      for (const auto& p : result.report.predicates)
        std::cout << p.unit << "\t" << (p.label.empty() ? "-" : p.label) << "\t" << p.purity << "\n";
    } else if (*runc) {
      print_report_summary(run_experiment(cfg, ingest(run_dataset)));
    } else if (*map) {
      Network net = load_network(map_net);
      const auto trace = load_trace_csv(map_trace, net.params().dt);
      auto table = MappingTable::for_network(net);
      accumulate_hypotheses(table, trace);
      update_mapping_weights(table);
      std::cout << "driver\trecipient\tweight\n";
      for (const auto& p : best_mapping(table)) std::cout << p.driver << "\t" << p.recipient << "\t" << p.weight << "\n";
      if (!map_json.empty()) write_text(map_json, mapping_to_json(table));
      if (map_commit) {
        commit_mapping(net, table);
        save_network(net, map_out.empty() ? fs::path(map_net) : fs::path(map_out));
      }
    } else if (*apply) {
      const Network net = load_network(apply_net);
      const FeatureVector item = load_item(apply_item);
      if (!apply_pred.empty()) {
        std::cout << apply_predicate(net, apply_pred, item) << "\n";
      } else {
        if (net.predicates().empty()) throw Error(ErrorCode::InvalidValue, "network has no learned predicates");
        for (const auto& rec : net.predicates())
          std::cout << rec.po_unit << "\t" << apply_predicate(net, rec.po_unit, item) << "\n";
      }
    } else if (*dec) {
      const Network net = load_network(dec_net);
      CodecParams cp = cfg.codec;
      if (!dec_mode.empty()) cp.mode = parse_binding_mode(dec_mode);
      if (dec_width > 0) cp.slot_width = dec_width;
      if (dec_gap >= 0) cp.gap = dec_gap;
      const auto props = decode(load_trace_csv(dec_trace, net.params().dt), net, cp);
      const std::string text = propositions_to_json(props);
      if (dec_out.empty())
        std::cout << text;
      else
        write_text(dec_out, text);
    } else if (*tr) {
      Network net = load_network(tr_net);
      FiringTrace trace;
      if (tr_encode) {
        CodecParams cp = cfg.codec;
        if (!tr_mode.empty()) cp.mode = parse_binding_mode(tr_mode);
        const auto schedule = encode(net, net.propositions(), cp);
        if (!tr_schedule.empty()) write_text(tr_schedule, schedule_to_json(schedule));
        trace = run_schedule(net, schedule, cp);
      } else {
        RunOptions opts;
        opts.synchrony = tr_sync;
        trace = run(net, DriveSchedule::constant(parse_drive(tr_drive)), tr_steps, opts);
      }
      const auto path = output_path(tr_out, cfg, "trace.csv");
      export_raster(trace, path);
      if (!tr_json.empty()) write_text(tr_json, trace_to_json(trace));
      std::cout << path.string() << "\n";
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_validation() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
