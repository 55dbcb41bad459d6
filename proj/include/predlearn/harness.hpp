#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "predlearn/codec.hpp"
#include "predlearn/learner.hpp"
#include "predlearn/network.hpp"

namespace predlearn {

struct DatasetObject {
  std::string id;
  FeatureVector features;
  bool operator==(const DatasetObject&) const = default;
};

struct EvalPair {
  std::string first;
  std::string second;
  std::string label;
  bool operator==(const EvalPair&) const = default;
};

struct Dataset {
  std::vector<DatasetObject> objects;
  std::vector<std::pair<std::string, std::string>> comparisons;
  std::vector<EvalPair> eval_pairs;

  const DatasetObject& object(std::string_view id) const;
  /// Every feature label in first-use order.
  std::vector<std::string> feature_labels() const;
  bool operator==(const Dataset&) const = default;
};

/// Validates ids, references and feature values. Problems name the JSON
/// path. Throws ParseError, SchemaError, DanglingId, DuplicateId.
Dataset dataset_from_json(std::string_view text, std::vector<std::string>* warnings = nullptr);
std::string dataset_to_json(const Dataset& dataset);
/// Reads and validates a dataset file; warnings go to stderr.
Dataset ingest(const std::filesystem::path& path);

struct ExperimentConfig {
  DynamicsParams dynamics;
  LearnerParams learner;
  CodecParams codec;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  /// Randomized encode/run/decode roundtrips over the learned predicates.
  int decode_trials = 20;

  void validate() const;
};

/// Fields absent from the JSON keep their defaults.
ExperimentConfig config_from_json(std::string_view text);
std::string config_to_json(const ExperimentConfig& config);

struct PredicateSummary {
  std::string unit;
  /// Heaviest semantic from the eval vocabulary (empty if none carries weight).
  std::string label;
  double purity = 0.0;
  FeatureVector weights;
  std::vector<Episode> provenance;
};

struct MetricsReport {
  std::uint64_t seed = 0;
  std::size_t comparisons = 0;
  std::size_t learned = 0;
  std::size_t refined = 0;
  std::vector<PredicateSummary> predicates;
  /// Mean over predicates; nullopt when nothing was learned.
  std::optional<double> predicate_purity;
  std::optional<double> decode_accuracy;
  /// nullopt when there are no eval pairs or no predicates.
  std::optional<double> generalization_accuracy;
  std::uint64_t checksum_before_eval = 0;
  std::uint64_t checksum_after_eval = 0;
  /// Not part of report.json, which must be byte-stable.
  double wall_time = 0.0;
};

std::string report_to_json(const MetricsReport& report);

struct ExperimentResult {
  MetricsReport report;
  Network network;
};

/// Compares the listed pairs in order (DRIVER vs RECIPIENT). An intersection
/// that overlaps a predicate's weights (sum min / min of sums >= apply_threshold)
/// refines the best such predicate; otherwise a new one is learned. Eval pairs are then scored with
/// apply_predicate only; a pair's relation is the label of the predicate
/// maximizing score(first) - score(second). Decode accuracy is measured on
/// copies of the trained network. No outputs are written.
ExperimentResult evaluate_experiment(const ExperimentConfig& config, const Dataset& dataset);

/// evaluate_experiment, then writes into out_dir: network.json (trained),
/// trace.csv and trial_network.json (first decode trial, so the trace can be
/// decoded against it), report.json and timing.json. Partial outputs are
/// removed on failure.
MetricsReport run_experiment(const ExperimentConfig& config, const Dataset& dataset);

/// Fraction of a predicate's weight mass on features carried by every item
/// unit of every comparison that shaped it.
double predicate_purity(const Network& network, std::string_view predicate);

/// Unit ids an object takes when presented in the DRIVER and RECIPIENT banks.
std::string driver_unit(std::string_view object_id);
std::string recipient_unit(std::string_view object_id);

struct GeneratorParams {
  std::uint64_t seed = 0;
  int objects_per_class = 12;
  int comparisons = 12;
  int eval_pairs = 40;
  /// Distractor features per object.
  int distractors = 3;
};

/// Relative-magnitude task. Every object is "more" or "less" with graded
/// mag_high/mag_low semantics. Domain A (shapes, colors) supplies the
/// comparisons, alternating more-more and less-less pairs; domain B
/// (textures, materials) supplies eval pairs labeled by the first member.
Dataset generate_dataset(const GeneratorParams& params);

}  // namespace predlearn
