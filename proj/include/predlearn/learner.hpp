#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "predlearn/network.hpp"

namespace predlearn {

/// Semantic label -> value in [0,1].
using FeatureVector = std::map<std::string, double>;

struct LearnerParams {
  double prune_epsilon = 0.01;
  double refinement_rate = 0.3;
  double apply_threshold = 0.8;
  int max_arity = 3;

  void validate() const;
  bool operator==(const LearnerParams&) const = default;
};

struct PresentedItem {
  std::string unit;
  bool empty = false;
};

/// Snapshot of a learned predicate: its unit, its semantic weights by label,
/// and the comparisons that produced it.
struct Predicate {
  std::string po_unit;
  FeatureVector semantic_weights;
  std::vector<Episode> provenance;
};

/// Creates (or rewires) the PO_OBJ unit `item_id` in `bank` with one SEMANTIC
/// connection per nonzero feature, activates it, and raises the listed
/// semantics to the given values. Empty items are allowed but flagged.
PresentedItem present_item(Network& network, std::string_view item_id, const FeatureVector& item, Bank bank);

/// min(a_a w_a(s), a_b w_b(s)) for every semantic either item touches, using
/// the items' current activations. Entries may be zero; nothing is pruned.
FeatureVector intersection(const Network& network, std::string_view item_a, std::string_view item_b);

Predicate predicate_view(const Network& network, std::string_view po_unit);

/// Co-activates both items and recruits a new PO_PRED unit in MEMORY whose
/// semantic weights are the intersection, pruned below epsilon.
/// Throws EmptyIntersection when nothing survives pruning.
Predicate compare_and_learn(Network& network, std::string_view item_a, std::string_view item_b,
                            const LearnerParams& params = {});

/// w' = (1 - eta) w + eta i_new over the union of current and new features.
Predicate refine_predicate(Network& network, std::string_view predicate, std::string_view item_a,
                           std::string_view item_b, const LearnerParams& params = {});

/// New RB structurally linking `predicate` and `argument` (same bank).
/// Returns the RB id.
std::string bind_role(Network& network, std::string_view predicate, std::string_view argument);
/// Removes the RB unit and its connections. The bound units are untouched.
void unbind_role(Network& network, std::string_view rb);

/// sum_s w(s) a(s) / sum_s w(s). Throws ZeroWeightPredicate.
double apply_predicate(const Network& network, std::string_view predicate, const FeatureVector& item);
/// Same, with the item read from an existing unit's semantic weights.
double apply_predicate(const Network& network, std::string_view predicate, std::string_view item_unit);

/// Binds when the score reaches apply_threshold; returns the RB id if so.
std::optional<std::string> bind_if_applies(Network& network, std::string_view predicate, std::string_view item_unit,
                                           const LearnerParams& params = {});

/// New P unit over the given RBs in order. Throws ArityExceeded.
Proposition form_relation(Network& network, const std::vector<std::string>& rbs, const LearnerParams& params = {});

/// A PO unit's semantic weights as a dense vector in semantic-pool order.
Eigen::VectorXd semantic_vector(const Network& network, std::string_view po_unit);

}  // namespace predlearn
