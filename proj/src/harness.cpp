#include "predlearn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "predlearn/io.hpp"

namespace predlearn {

namespace fs = std::filesystem;
using namespace json_util;

namespace {

std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

const char* const kSemanticPrefix = "sem:";

}  // namespace

std::string driver_unit(std::string_view object_id) { return "drv:" + std::string(object_id); }
std::string recipient_unit(std::string_view object_id) { return "rcp:" + std::string(object_id); }

// -- dataset ----------------------------------------------------------------

const DatasetObject& Dataset::object(std::string_view id) const {
  for (const auto& o : objects)
    if (o.id == id) return o;
  throw Error(ErrorCode::DanglingId, "unknown object '" + std::string(id) + "'");
}

std::vector<std::string> Dataset::feature_labels() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& o : objects)
    for (const auto& [label, v] : o.features)
      if (seen.insert(label).second) out.push_back(label);
  return out;
}

Dataset dataset_from_json(std::string_view text, std::vector<std::string>* warnings) {
  const json doc = parse(text);
  if (!doc.is_object()) schema("$", "expected an object");
  known_keys(doc, {"objects", "comparisons", "eval_pairs"}, "$");

  Dataset ds;
  std::set<std::string> ids;
  const auto& objects = array(field(doc, "objects", "$"), "objects");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string p = at_index("objects", i);
    DatasetObject o;
    o.id = str(field(objects[i], "id", p), p + ".id");
    if (o.id.empty()) schema(p + ".id", "empty id");
    if (!ids.insert(o.id).second) schema(p + ".id", "duplicate id '" + o.id + "'");
    const auto& features = field(objects[i], "features", p);
    if (!features.is_object()) schema(p + ".features", "expected an object");
    for (const auto& [label, v] : features.items()) {
      const double x = num(v, p + ".features." + label);
      if (!(x >= 0.0 && x <= 1.0)) schema(p + ".features." + label, "value must lie in [0,1]");
      o.features[label] = x;
    }
    ds.objects.push_back(std::move(o));
  }
  if (ds.objects.empty() && warnings) warnings->push_back("dataset has no objects");

  auto resolve = [&](const json& v, const std::string& p) {
    std::string id = str(v, p);
    if (!ids.count(id)) throw Error(ErrorCode::DanglingId, p + ": unknown object id '" + id + "'");
    return id;
  };
  if (doc.contains("comparisons")) {
    const auto& comps = array(doc["comparisons"], "comparisons");
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string p = at_index("comparisons", i);
      if (!comps[i].is_array() || comps[i].size() != 2) schema(p, "expected a pair of ids");
      ds.comparisons.emplace_back(resolve(comps[i][0], p + "[0]"), resolve(comps[i][1], p + "[1]"));
    }
  }
  if (doc.contains("eval_pairs")) {
    const auto& evals = array(doc["eval_pairs"], "eval_pairs");
    for (std::size_t i = 0; i < evals.size(); ++i) {
      const std::string p = at_index("eval_pairs", i);
      const auto& pair = field(evals[i], "pair", p);
      if (!pair.is_array() || pair.size() != 2) schema(p + ".pair", "expected a pair of ids");
      EvalPair e{resolve(pair[0], p + ".pair[0]"), resolve(pair[1], p + ".pair[1]"),
                 str(field(evals[i], "label", p), p + ".label")};
      if (e.label.empty()) schema(p + ".label", "empty label");
      ds.eval_pairs.push_back(std::move(e));
    }
  }
  return ds;
}

std::string dataset_to_json(const Dataset& dataset) {
  ordered j;
  j["objects"] = ordered::array();
  for (const auto& o : dataset.objects) {
    ordered f = ordered::object();
    for (const auto& [label, v] : o.features) f[label] = v;
    j["objects"].push_back({{"id", o.id}, {"features", std::move(f)}});
  }
  j["comparisons"] = ordered::array();
  for (const auto& [a, b] : dataset.comparisons) j["comparisons"].push_back(ordered::array({a, b}));
  j["eval_pairs"] = ordered::array();
  for (const auto& e : dataset.eval_pairs)
    j["eval_pairs"].push_back({{"pair", ordered::array({e.first, e.second})}, {"label", e.label}});
  return j.dump(2) + "\n";
}

Dataset ingest(const fs::path& path) {
  std::vector<std::string> warnings;
  Dataset ds = dataset_from_json(read_text(path), &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << path.string() << ": " << w << "\n";
  return ds;
}

// -- config -----------------------------------------------------------------

void ExperimentConfig::validate() const {
  dynamics.validate();
  learner.validate();
  codec.validate();
  if (decode_trials < 0) throw Error(ErrorCode::InvalidParams, "decode_trials must be >= 0");
}

ExperimentConfig config_from_json(std::string_view text) {
  const json doc = parse(text);
  known_keys(doc, {"dynamics", "learner", "codec", "seed", "out_dir", "decode_trials"}, "$");
  ExperimentConfig c;
  try {
    if (doc.contains("dynamics")) c.dynamics = dynamics_from_json(doc["dynamics"], "dynamics");
    if (doc.contains("learner")) c.learner = learner_from_json(doc["learner"], "learner");
    if (doc.contains("codec")) c.codec = codec_from_json(doc["codec"], "codec");
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidParams) throw;
    throw Error(ErrorCode::SchemaError, e.what());
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) schema("seed", "expected a non-negative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("out_dir")) c.out_dir = str(doc["out_dir"], "out_dir");
  if (doc.contains("decode_trials")) {
    c.decode_trials = static_cast<int>(integer(doc["decode_trials"], "decode_trials"));
    if (c.decode_trials < 0) schema("decode_trials", "must be >= 0");
  }
  return c;
}

std::string config_to_json(const ExperimentConfig& config) {
  ordered j;
  j["dynamics"] = to_json(config.dynamics);
  j["learner"] = to_json(config.learner);
  j["codec"] = to_json(config.codec);
  j["seed"] = config.seed;
  j["out_dir"] = config.out_dir.string();
  j["decode_trials"] = config.decode_trials;
  return j.dump(2) + "\n";
}

// -- experiment ---------------------------------------------------------------

double predicate_purity(const Network& network, std::string_view predicate) {
  const auto weights = network.semantic_weights(predicate);
  const auto* rec = network.find_predicate(predicate);
  std::optional<std::set<std::string>> invariant;
  if (rec) {
    for (const auto& e : rec->provenance)
      for (const auto& item : {e.item_a, e.item_b}) {
        std::set<std::string> carried;
        if (network.is_token(item))
          for (const auto& [label, w] : network.semantic_weights(item))
            if (w > 0.0) carried.insert(label);
        if (!invariant) {
          invariant = std::move(carried);
        } else {
          std::set<std::string> keep;
          std::set_intersection(invariant->begin(), invariant->end(), carried.begin(), carried.end(),
                                std::inserter(keep, keep.end()));
          invariant = std::move(keep);
        }
      }
  }
  double on = 0.0, total = 0.0;
  for (const auto& [label, w] : weights) {
    total += w;
    if (invariant && invariant->count(label)) on += w;
  }
  return total > 0.0 ? on / total : 0.0;
}

namespace {

Network blank_network(const ExperimentConfig& config, const Dataset& dataset) {
  NetworkSpec spec;
  spec.params = config.dynamics;
  for (const auto& label : dataset.feature_labels()) spec.semantics.push_back({kSemanticPrefix + label, label});
  return Network(spec);
}

/// Presents an object under its bank-specific unit id.
std::string present(Network& net, const DatasetObject& o, Bank bank) {
  const std::string id = bank == Bank::Driver ? driver_unit(o.id) : recipient_unit(o.id);
  present_item(net, id, o.features, bank);
  return id;
}

struct Trial {
  Network network;
  std::vector<Proposition> propositions;
};

/// A random relation set over the learned predicates with fresh MEMORY
/// arguments. Tokens outside the structure are removed so only scheduled
/// units can burst.
Trial make_trial(const Network& trained, const std::vector<std::string>& predicates, const Dataset& dataset,
                 const ExperimentConfig& config, std::mt19937_64& rng) {
  Trial t{trained, {}};
  const int max_arity = std::min(config.learner.max_arity, config.codec.k_max);
  std::uniform_int_distribution<int> n_roles_dist(1, config.codec.k_max);
  std::uniform_int_distribution<std::size_t> pick_pred(0, predicates.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_obj(0, dataset.objects.size() - 1);

  int remaining = n_roles_dist(rng);
  int probe = 0;
  while (remaining > 0) {
    std::uniform_int_distribution<int> arity_dist(1, std::min(max_arity, remaining));
    const int arity = arity_dist(rng);
    std::vector<std::string> rbs;
    for (int r = 0; r < arity; ++r) {
      const auto& obj = dataset.objects[pick_obj(rng)];
      const std::string arg = "probe" + std::to_string(probe++);
      present_item(t.network, arg, obj.features, Bank::Memory);
      rbs.push_back(bind_role(t.network, predicates[pick_pred(rng)], arg));
    }
    t.propositions.push_back(form_relation(t.network, rbs, config.learner));
    remaining -= arity;
  }

  std::set<std::string> keep;
  for (const auto& p : t.propositions) {
    keep.insert(p.p_unit);
    for (const auto& r : p.roles) keep.insert({r.rb, r.predicate, r.argument});
  }
  std::vector<std::string> drop;
  for (const auto& tok : t.network.tokens())
    if (!keep.count(tok.id)) drop.push_back(tok.id);
  for (const auto& id : drop) t.network.remove_unit(id);
  return t;
}

/// sum min(a, b) / min(sum a, sum b): 1 when one vector sits inside the other.
double overlap(const FeatureVector& a, const FeatureVector& b) {
  double common = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [label, v] : a) {
    sum_a += v;
    if (auto it = b.find(label); it != b.end()) common += std::min(v, it->second);
  }
  for (const auto& [label, v] : b) sum_b += v;
  const double denom = std::min(sum_a, sum_b);
  return denom > 0.0 ? common / denom : 0.0;
}

std::string eval_vocabulary_label(const FeatureVector& weights, const std::set<std::string>& vocabulary) {
  std::string best;
  double best_w = 0.0;
  for (const auto& [label, w] : weights)
    if (vocabulary.count(label) && w > best_w) {
      best = label;
      best_w = w;
    }
  return best;
}

ExperimentResult evaluate(const ExperimentConfig& config, const Dataset& dataset, FiringTrace* first_trace,
                          Network* first_network) {
  config.validate();
  ExperimentResult out{{}, blank_network(config, dataset)};
  Network& net = out.network;
  MetricsReport& report = out.report;
  report.seed = config.seed;
  report.comparisons = dataset.comparisons.size();

  // Training: comparisons in listed order.
  std::vector<std::string> predicates;
  for (const auto& [a, b] : dataset.comparisons) {
    const std::string ua = present(net, dataset.object(a), Bank::Driver);
    const std::string ub = present(net, dataset.object(b), Bank::Recipient);
    const FeatureVector shared = intersection(net, ua, ub);

    std::string best;
    double best_score = -1.0;
    for (const auto& p : predicates) {
      const double s = overlap(net.semantic_weights(p), shared);
      if (s > best_score) {
        best = p;
        best_score = s;
      }
    }
    if (!best.empty() && best_score >= config.learner.apply_threshold) {
      refine_predicate(net, best, ua, ub, config.learner);
      ++report.refined;
    } else {
      predicates.push_back(compare_and_learn(net, ua, ub, config.learner).po_unit);
      ++report.learned;
    }
  }

  std::set<std::string> vocabulary;
  for (const auto& e : dataset.eval_pairs) vocabulary.insert(e.label);
  double purity_sum = 0.0;
  for (const auto& p : predicates) {
    PredicateSummary s;
    s.unit = p;
    s.weights = net.semantic_weights(p);
    s.label = eval_vocabulary_label(s.weights, vocabulary);
    s.purity = predicate_purity(net, p);
    if (const auto* rec = net.find_predicate(p)) s.provenance = rec->provenance;
    purity_sum += s.purity;
    report.predicates.push_back(std::move(s));
  }
  if (!predicates.empty()) report.predicate_purity = purity_sum / static_cast<double>(predicates.size());

  // Generalization: read-only scoring, audited by checksum.
  report.checksum_before_eval = net.weight_checksum();
  if (!predicates.empty() && !dataset.eval_pairs.empty()) {
    std::size_t correct = 0;
    for (const auto& e : dataset.eval_pairs) {
      const auto& x = dataset.object(e.first).features;
      const auto& y = dataset.object(e.second).features;
      const PredicateSummary* best = nullptr;
      double best_margin = 0.0;
      for (const auto& s : report.predicates) {
        const double margin = apply_predicate(net, s.unit, x) - apply_predicate(net, s.unit, y);
        if (!best || margin > best_margin) {
          best = &s;
          best_margin = margin;
        }
      }
      if (best->label == e.label) ++correct;
    }
    report.generalization_accuracy = static_cast<double>(correct) / static_cast<double>(dataset.eval_pairs.size());
  }
  report.checksum_after_eval = net.weight_checksum();

  // Binding codec on throwaway copies.
  if (!predicates.empty() && !dataset.objects.empty() && config.decode_trials > 0) {
    std::mt19937_64 rng(config.seed);
    int exact = 0;
    for (int i = 0; i < config.decode_trials; ++i) {
      Trial t = make_trial(net, predicates, dataset, config, rng);
      t.network.set_params(config.dynamics);
      const auto schedule = encode(t.network, t.propositions, config.codec);
      const auto trace = run_schedule(t.network, schedule, config.codec);
      if (i == 0 && first_trace) *first_trace = trace;
      if (i == 0 && first_network) *first_network = t.network;
      try {
        if (decode(trace, t.network, config.codec) == t.propositions) ++exact;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AmbiguousTrace) throw;
      }
    }
    report.decode_accuracy = static_cast<double>(exact) / config.decode_trials;
  }
  return out;
}

}  // namespace

ExperimentResult evaluate_experiment(const ExperimentConfig& config, const Dataset& dataset) {
  return evaluate(config, dataset, nullptr, nullptr);
}

std::string report_to_json(const MetricsReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? ordered(*v) : ordered(nullptr); };
  ordered j;
  j["format_version"] = kFormatVersion;
  j["seed"] = r.seed;
  j["comparisons"] = r.comparisons;
  j["predicates_learned"] = r.learned;
  j["refinements"] = r.refined;
  j["predicate_purity"] = opt(r.predicate_purity);
  j["decode_accuracy"] = opt(r.decode_accuracy);
  j["generalization_accuracy"] = opt(r.generalization_accuracy);
  j["checksum_before_eval"] = hex(r.checksum_before_eval);
  j["checksum_after_eval"] = hex(r.checksum_after_eval);
  j["weights_unchanged"] = r.checksum_before_eval == r.checksum_after_eval;
  j["predicates"] = ordered::array();
  for (const auto& s : r.predicates) {
    ordered pj;
    pj["unit"] = s.unit;
    pj["label"] = s.label.empty() ? ordered(nullptr) : ordered(s.label);
    pj["purity"] = s.purity;
    pj["weights"] = ordered::object();
    for (const auto& [label, w] : s.weights) pj["weights"][label] = w;
    pj["provenance"] = ordered::array();
    for (const auto& e : s.provenance) pj["provenance"].push_back(ordered::array({e.item_a, e.item_b}));
    j["predicates"].push_back(std::move(pj));
  }
  return j.dump(2) + "\n";
}

MetricsReport run_experiment(const ExperimentConfig& config, const Dataset& dataset) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<fs::path> written;
  try {
    FiringTrace trace;
    Network trial_network;
    ExperimentResult result = evaluate(config, dataset, &trace, &trial_network);

    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create '" + config.out_dir.string() + "': " + ec.message());
    auto emit = [&](const char* name, const std::string& text) {
      const fs::path p = config.out_dir / name;
      written.push_back(p);
      write_text(p, text);
    };
    emit("network.json", network_to_json(result.network));
    std::ostringstream csv;
    write_trace_csv(trace, csv);
    emit("trace.csv", csv.str());
    emit("trial_network.json", network_to_json(trial_network));
    emit("report.json", report_to_json(result.report));

    result.report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ordered timing;
    timing["wall_time_s"] = result.report.wall_time;
    emit("timing.json", timing.dump(2) + "\n");
    std::cerr << "wall_time: " << result.report.wall_time << " s\n";
    return result.report;
  } catch (...) {
    for (const auto& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    throw;
  }
}

// -- synthetic task -------------------------------------------------------------

Dataset generate_dataset(const GeneratorParams& params) {
  if (params.objects_per_class < 2) throw Error(ErrorCode::InvalidParams, "objects_per_class must be >= 2");
  if (params.comparisons < 0 || params.eval_pairs < 0 || params.distractors < 0)
    throw Error(ErrorCode::InvalidParams, "counts must be >= 0");

  static const std::vector<std::string> domain_a = {
      "shape_circle", "shape_square", "shape_triangle", "shape_star", "shape_hexagon", "shape_oval",
      "color_red",    "color_green",  "color_blue",     "color_yellow", "color_purple", "color_orange"};
  static const std::vector<std::string> domain_b = {
      "texture_rough", "texture_smooth", "texture_striped", "texture_dotted", "texture_woven", "texture_ridged",
      "material_wood", "material_metal", "material_glass",  "material_cloth", "material_stone", "material_clay"};

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> grade(0.7, 1.0);
  std::uniform_real_distribution<double> strength(0.5, 1.0);

  Dataset ds;
  // ids[domain][magnitude] with magnitude 0 = more, 1 = less.
  std::vector<std::string> ids[2][2];
  for (int d = 0; d < 2; ++d) {
    const auto& pool = d == 0 ? domain_a : domain_b;
    const int n_distractors = std::min<int>(params.distractors, static_cast<int>(pool.size()));
    for (int m = 0; m < 2; ++m)
      for (int i = 0; i < params.objects_per_class; ++i) {
        DatasetObject o;
        o.id = std::string(d == 0 ? "A" : "B") + (m == 0 ? "_more_" : "_less_") + std::to_string(i);
        const double g = grade(rng);
        o.features[m == 0 ? "more" : "less"] = 1.0;
        o.features["mag_high"] = m == 0 ? g : 1.0 - g;
        o.features["mag_low"] = m == 0 ? 1.0 - g : g;
        std::vector<std::string> picks = pool;
        std::shuffle(picks.begin(), picks.end(), rng);
        for (int k = 0; k < n_distractors; ++k) o.features[picks[static_cast<std::size_t>(k)]] = strength(rng);
        ids[d][m].push_back(o.id);
        ds.objects.push_back(std::move(o));
      }
  }

  std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(params.objects_per_class) - 1);
  for (int c = 0; c < params.comparisons; ++c) {
    const auto& cls = ids[0][c % 2];
    const std::size_t i = pick(rng);
    std::size_t j = pick(rng);
    while (j == i) j = pick(rng);
    ds.comparisons.emplace_back(cls[i], cls[j]);
  }
  for (int e = 0; e < params.eval_pairs; ++e) {
    const int first = e % 2;
    ds.eval_pairs.push_back({ids[1][first][pick(rng)], ids[1][1 - first][pick(rng)], first == 0 ? "more" : "less"});
  }
  return ds;
}

}  // namespace predlearn
