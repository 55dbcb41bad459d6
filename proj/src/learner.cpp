#include "predlearn/learner.hpp"

#include <algorithm>
#include <iostream>

namespace predlearn {

void LearnerParams::validate() const {
  if (!(prune_epsilon >= 0.0 && prune_epsilon < 1.0))
    throw Error(ErrorCode::InvalidParams, "prune_epsilon must lie in [0,1)");
  if (!(refinement_rate > 0.0 && refinement_rate <= 1.0))
    throw Error(ErrorCode::InvalidParams, "refinement_rate must lie in (0,1]");
  if (!(apply_threshold >= 0.0 && apply_threshold <= 1.0))
    throw Error(ErrorCode::InvalidParams, "apply_threshold must lie in [0,1]");
  if (max_arity < 1) throw Error(ErrorCode::InvalidParams, "max_arity must be >= 1");
}

namespace {

const SemanticUnit& semantic_by_label(const Network& network, const std::string& label) {
  const auto* s = network.find_semantic_by_label(label);
  if (!s) throw Error(ErrorCode::UnknownLabel, "unknown semantic label '" + label + "'");
  return *s;
}

const TokenUnit& po_token(const Network& network, std::string_view id) {
  const auto& t = network.token(id);
  if (!is_po(t.layer)) throw Error(ErrorCode::LayerViolation, "'" + t.id + "' is not a PO unit");
  return t;
}

const TokenUnit& predicate_token(const Network& network, std::string_view id) {
  const auto& t = network.token(id);
  if (t.layer != Layer::PoPred) throw Error(ErrorCode::LayerViolation, "'" + t.id + "' is not a PO_PRED unit");
  return t;
}

void validate_values(const FeatureVector& item) {
  for (const auto& [label, v] : item)
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(ErrorCode::InvalidValue, "feature '" + label + "' must lie in [0,1]");
}

void set_semantic_weights(Network& network, const std::string& unit, const FeatureVector& weights) {
  for (const auto& [label, w] : network.semantic_weights(unit))
    if (!weights.count(label)) network.disconnect(unit, semantic_by_label(network, label).id, ConnectionKind::Semantic);
  for (const auto& [label, w] : weights) {
    const auto& s = semantic_by_label(network, label);
    if (w > 0.0)
      network.connect({unit, s.id, w, ConnectionKind::Semantic});
    else
      network.disconnect(unit, s.id, ConnectionKind::Semantic);
  }
}

}  // namespace

PresentedItem present_item(Network& network, std::string_view item_id, const FeatureVector& item, Bank bank) {
  validate_values(item);
  for (const auto& [label, v] : item) semantic_by_label(network, label);

  const std::string id(item_id);
  if (network.contains(id)) {
    const auto& t = network.token(id);
    if (t.layer != Layer::PoObj || t.bank != bank)
      throw Error(ErrorCode::DuplicateId, "'" + id + "' already exists with a different layer or bank");
  } else {
    network.add_token({id, Layer::PoObj, bank, 0.0});
  }

  FeatureVector nonzero;
  for (const auto& [label, v] : item)
    if (v > 0.0) nonzero[label] = v;
  set_semantic_weights(network, id, nonzero);

  network.set_activation(id, 1.0);
  for (const auto& [label, v] : nonzero) {
    const auto& s = semantic_by_label(network, label);
    network.set_activation(s.id, std::max(s.activation, v));
  }

  PresentedItem out{id, nonzero.empty()};
  if (out.empty) std::cerr << "warning: item '" << id << "' has no features\n";
  return out;
}

FeatureVector intersection(const Network& network, std::string_view item_a, std::string_view item_b) {
  const auto& a = po_token(network, item_a);
  const auto& b = po_token(network, item_b);
  const auto wa = network.semantic_weights(a.id);
  const auto wb = network.semantic_weights(b.id);
  FeatureVector out;
  for (const auto& [label, w] : wa) {
    auto it = wb.find(label);
    const double other = it == wb.end() ? 0.0 : b.activation * it->second;
    out[label] = std::min(a.activation * w, other);
  }
  for (const auto& [label, w] : wb)
    if (!out.count(label)) out[label] = 0.0;
  return out;
}

Predicate predicate_view(const Network& network, std::string_view po_unit) {
  const auto& t = predicate_token(network, po_unit);
  Predicate p{t.id, network.semantic_weights(t.id), {}};
  if (const auto* rec = network.find_predicate(t.id)) p.provenance = rec->provenance;
  return p;
}

Predicate compare_and_learn(Network& network, std::string_view item_a, std::string_view item_b,
                            const LearnerParams& params) {
  params.validate();
  po_token(network, item_a);
  po_token(network, item_b);
  network.set_activation(item_a, 1.0);
  network.set_activation(item_b, 1.0);

  FeatureVector weights;
  for (const auto& [label, i] : intersection(network, item_a, item_b))
    if (i >= params.prune_epsilon && i > 0.0) weights[label] = i;
  if (weights.empty())
    throw Error(ErrorCode::EmptyIntersection,
                "'" + std::string(item_a) + "' and '" + std::string(item_b) + "' share no features");

  const std::string id = network.next_id("pred");
  network.add_token({id, Layer::PoPred, Bank::Memory, 0.0});
  set_semantic_weights(network, id, weights);
  network.predicates().push_back({id, {{std::string(item_a), std::string(item_b)}}, {}});
  return predicate_view(network, id);
}

Predicate refine_predicate(Network& network, std::string_view predicate, std::string_view item_a,
                           std::string_view item_b, const LearnerParams& params) {
  params.validate();
  const std::string id = predicate_token(network, predicate).id;
  po_token(network, item_a);
  po_token(network, item_b);
  network.set_activation(item_a, 1.0);
  network.set_activation(item_b, 1.0);

  const auto fresh = intersection(network, item_a, item_b);
  auto survives = [&](const auto& kv) { return kv.second >= params.prune_epsilon && kv.second > 0.0; };
  if (std::none_of(fresh.begin(), fresh.end(), survives))
    throw Error(ErrorCode::EmptyIntersection,
                "'" + std::string(item_a) + "' and '" + std::string(item_b) + "' share no features");

  const double eta = params.refinement_rate;
  FeatureVector weights = network.semantic_weights(id);
  for (auto& [label, w] : weights) {
    auto it = fresh.find(label);
    w = (1.0 - eta) * w + eta * (it == fresh.end() ? 0.0 : it->second);
  }
  for (const auto& [label, i] : fresh)
    if (!weights.count(label)) weights[label] = eta * i;
  set_semantic_weights(network, id, weights);

  auto* rec = network.find_predicate(id);
  if (!rec) {
    network.predicates().push_back({id, {}, {}});
    rec = &network.predicates().back();
  }
  rec->provenance.push_back({std::string(item_a), std::string(item_b)});
  return predicate_view(network, id);
}

std::string bind_role(Network& network, std::string_view predicate, std::string_view argument) {
  const auto& p = predicate_token(network, predicate);
  const auto& a = po_token(network, argument);
  if (a.layer != Layer::PoObj) throw Error(ErrorCode::LayerViolation, "'" + a.id + "' is not a PO_OBJ unit");
  if (p.bank != a.bank)
    throw Error(ErrorCode::LayerViolation, "'" + p.id + "' and '" + a.id + "' are in different banks");
  const std::string pid = p.id, aid = a.id;
  const Bank bank = p.bank;
  const std::string rb = network.next_id("rb");
  network.add_token({rb, Layer::Rb, bank, 0.0});
  network.connect({rb, pid, 1.0, ConnectionKind::Structural});
  network.connect({rb, aid, 1.0, ConnectionKind::Structural});
  if (auto* rec = network.find_predicate(pid)) ++rec->binding_counts[aid];
  return rb;
}

void unbind_role(Network& network, std::string_view rb) {
  if (network.token(rb).layer != Layer::Rb)
    throw Error(ErrorCode::LayerViolation, "'" + std::string(rb) + "' is not an RB unit");
  network.remove_unit(rb);
}

double apply_predicate(const Network& network, std::string_view predicate, const FeatureVector& item) {
  validate_values(item);
  for (const auto& [label, v] : item) semantic_by_label(network, label);
  const auto weights = network.semantic_weights(predicate_token(network, predicate).id);
  double num = 0.0, den = 0.0;
  for (const auto& [label, w] : weights) {
    den += w;
    if (auto it = item.find(label); it != item.end()) num += w * it->second;
  }
  if (!(den > 0.0))
    throw Error(ErrorCode::ZeroWeightPredicate, "'" + std::string(predicate) + "' has no semantic weight");
  return num / den;
}

double apply_predicate(const Network& network, std::string_view predicate, std::string_view item_unit) {
  return apply_predicate(network, predicate, FeatureVector(network.semantic_weights(po_token(network, item_unit).id)));
}

std::optional<std::string> bind_if_applies(Network& network, std::string_view predicate, std::string_view item_unit,
                                           const LearnerParams& params) {
  if (apply_predicate(network, predicate, item_unit) < params.apply_threshold) return std::nullopt;
  return bind_role(network, predicate, item_unit);
}

Proposition form_relation(Network& network, const std::vector<std::string>& rbs, const LearnerParams& params) {
  if (rbs.empty()) throw Error(ErrorCode::InvalidValue, "a proposition needs at least one role binding");
  if (static_cast<int>(rbs.size()) > params.max_arity)
    throw Error(ErrorCode::ArityExceeded, "arity " + std::to_string(rbs.size()) + " exceeds the maximum of " +
                                              std::to_string(params.max_arity));
  Proposition prop;
  const Bank bank = network.token(rbs.front()).bank;
  for (const auto& rb : rbs) {
    const auto& t = network.token(rb);
    if (t.layer != Layer::Rb) throw Error(ErrorCode::LayerViolation, "'" + rb + "' is not an RB unit");
    if (t.bank != bank) throw Error(ErrorCode::LayerViolation, "role bindings span several banks");
    Role role{rb, {}, {}};
    for (const auto& n : network.structural_neighbours(rb)) {
      const auto layer = network.token(n).layer;
      if (layer == Layer::PoPred) role.predicate = n;
      if (layer == Layer::PoObj) role.argument = n;
    }
    prop.roles.push_back(role);
  }
  prop.p_unit = network.next_id("prop");
  network.add_token({prop.p_unit, Layer::P, bank, 0.0});
  for (const auto& rb : rbs) network.connect({prop.p_unit, rb, 1.0, ConnectionKind::Structural});
  network.propositions().push_back(prop);
  return prop;
}

Eigen::VectorXd semantic_vector(const Network& network, std::string_view po_unit) {
  const auto weights = network.semantic_weights(po_token(network, po_unit).id);
  const auto pool = network.semantics();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pool.size()));
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (auto it = weights.find(pool[i].label); it != weights.end()) v[static_cast<Eigen::Index>(i)] = it->second;
  return v;
}

}  // namespace predlearn
