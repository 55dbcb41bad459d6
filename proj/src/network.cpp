#include "predlearn/network.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace predlearn {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownUnit: return "UnknownUnit";
    case ErrorCode::LayerViolation: return "LayerViolation";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::InsufficientCycles: return "InsufficientCycles";
    case ErrorCode::NoBursts: return "NoBursts";
    case ErrorCode::AllZeroHypotheses: return "AllZeroHypotheses";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::ZeroWeightPredicate: return "ZeroWeightPredicate";
    case ErrorCode::ArityExceeded: return "ArityExceeded";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::AmbiguousTrace: return "AmbiguousTrace";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DanglingId: return "DanglingId";
    case ErrorCode::VersionError: return "VersionError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Error";
}

std::string_view to_string(Layer layer) {
  switch (layer) {
    case Layer::PoPred: return "PO_PRED";
    case Layer::PoObj: return "PO_OBJ";
    case Layer::Rb: return "RB";
    case Layer::P: return "P";
  }
  return "?";
}

std::string_view to_string(Bank bank) {
  switch (bank) {
    case Bank::Driver: return "DRIVER";
    case Bank::Recipient: return "RECIPIENT";
    case Bank::Memory: return "MEMORY";
  }
  return "?";
}

std::string_view to_string(ConnectionKind kind) {
  switch (kind) {
    case ConnectionKind::Structural: return "STRUCTURAL";
    case ConnectionKind::Semantic: return "SEMANTIC";
    case ConnectionKind::Mapping: return "MAPPING";
  }
  return "?";
}

Layer parse_layer(std::string_view text) {
  if (text == "PO_PRED") return Layer::PoPred;
  if (text == "PO_OBJ") return Layer::PoObj;
  if (text == "RB") return Layer::Rb;
  if (text == "P") return Layer::P;
  throw Error(ErrorCode::SchemaError, "unknown layer '" + std::string(text) + "'");
}

Bank parse_bank(std::string_view text) {
  if (text == "DRIVER") return Bank::Driver;
  if (text == "RECIPIENT") return Bank::Recipient;
  if (text == "MEMORY") return Bank::Memory;
  throw Error(ErrorCode::SchemaError, "unknown bank '" + std::string(text) + "'");
}

ConnectionKind parse_connection_kind(std::string_view text) {
  if (text == "STRUCTURAL") return ConnectionKind::Structural;
  if (text == "SEMANTIC") return ConnectionKind::Semantic;
  if (text == "MAPPING") return ConnectionKind::Mapping;
  throw Error(ErrorCode::SchemaError, "unknown connection kind '" + std::string(text) + "'");
}

void DynamicsParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::InvalidParams, std::string(name) + " must be strictly positive");
  };
  positive(dt, "dt");
  positive(leak, "leak");
  positive(lateral_gain, "lateral_gain");
  positive(inhibitor_gain, "inhibitor_gain");
  positive(inhibitor_threshold, "inhibitor_threshold");
  if (refractory_len <= 0) throw Error(ErrorCode::InvalidParams, "refractory_len must be strictly positive");
  if (!(activation_threshold > 0.0 && activation_threshold < 1.0))
    throw Error(ErrorCode::InvalidParams, "activation_threshold must lie in (0,1)");
}

namespace {
constexpr double kFireEpsilon = 1e-9;
}

int steps_to_fire(const DynamicsParams& params) {
  return static_cast<int>(std::ceil(params.inhibitor_threshold / params.inhibitor_gain - kFireEpsilon));
}

// ---------------------------------------------------------------------------

Network::Network(const NetworkSpec& spec) {
  spec.params.validate();
  params_ = spec.params;
  for (const auto& s : spec.semantics) add_semantic(s);
  for (const auto& t : spec.tokens) add_token(t);
  for (const auto& c : spec.connections) connect(c);
  for (const auto& p : spec.predicates) {
    if (!is_token(p.po_unit) || token(p.po_unit).layer != Layer::PoPred)
      throw Error(ErrorCode::UnknownUnit, "predicate record references '" + p.po_unit + "'");
    predicates_.push_back(p);
  }
  for (const auto& prop : spec.propositions) {
    auto require = [&](const std::string& id, LayerClass cls) {
      if (!is_token(id) || layer_class(token(id).layer) != cls)
        throw Error(ErrorCode::UnknownUnit, "proposition references '" + id + "'");
    };
    require(prop.p_unit, LayerClass::P);
    for (const auto& r : prop.roles) {
      require(r.rb, LayerClass::Rb);
      require(r.predicate, LayerClass::Po);
      require(r.argument, LayerClass::Po);
    }
    propositions_.push_back(prop);
  }
  synchrony_ = spec.synchrony;
}

Network build_network(const NetworkSpec& spec) { return Network(spec); }

NetworkSpec Network::spec() const {
  NetworkSpec out;
  out.params = params_;
  for (const auto& s : semantics_) out.semantics.push_back({s.id, s.label});
  for (const auto& t : tokens_) out.tokens.push_back({t.id, t.layer, t.bank, t.firing_bias});
  out.connections = connections_;
  out.predicates = predicates_;
  out.propositions = propositions_;
  out.synchrony = synchrony_;
  return out;
}

void Network::set_params(const DynamicsParams& params) {
  params.validate();
  params_ = params;
  cache_valid_ = false;
}

const Network::Ref& Network::ref(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error(ErrorCode::UnknownUnit, "no unit '" + std::string(id) + "'");
  return it->second;
}

bool Network::contains(std::string_view id) const { return index_.count(std::string(id)) != 0; }

bool Network::is_semantic(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it != index_.end() && it->second.semantic;
}

bool Network::is_token(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it != index_.end() && !it->second.semantic;
}

const TokenUnit& Network::token(std::string_view id) const {
  const auto& r = ref(id);
  if (r.semantic) throw Error(ErrorCode::UnknownUnit, "'" + std::string(id) + "' is not a token unit");
  return tokens_[r.index];
}

const SemanticUnit& Network::semantic(std::string_view id) const {
  const auto& r = ref(id);
  if (!r.semantic) throw Error(ErrorCode::UnknownUnit, "'" + std::string(id) + "' is not a semantic unit");
  return semantics_[r.index];
}

const SemanticUnit* Network::find_semantic_by_label(std::string_view label) const {
  for (const auto& s : semantics_)
    if (s.label == label) return &s;
  return nullptr;
}

std::vector<std::string> Network::unit_ids() const {
  std::vector<std::string> ids;
  ids.reserve(semantics_.size() + tokens_.size());
  for (const auto& s : semantics_) ids.push_back(s.id);
  for (const auto& t : tokens_) ids.push_back(t.id);
  return ids;
}

Eigen::VectorXd Network::activations() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(semantics_.size() + tokens_.size()));
  Eigen::Index i = 0;
  for (const auto& s : semantics_) out[i++] = s.activation;
  for (const auto& t : tokens_) out[i++] = t.activation;
  return out;
}

double Network::activation(std::string_view id) const {
  const auto& r = ref(id);
  return r.semantic ? semantics_[r.index].activation : tokens_[r.index].activation;
}

void Network::set_activation(std::string_view id, double value) {
  if (!(value >= 0.0 && value <= 1.0))
    throw Error(ErrorCode::InvalidValue, "activation must lie in [0,1]");
  const auto& r = ref(id);
  if (r.semantic)
    semantics_[r.index].activation = value;
  else
    tokens_[r.index].activation = value;
}

std::map<std::string, double> Network::semantic_weights(std::string_view po_unit) const {
  const auto& t = token(po_unit);
  std::map<std::string, double> out;
  for (const auto& c : connections_)
    if (c.kind == ConnectionKind::Semantic && c.source == t.id) out[semantic(c.target).label] = c.weight;
  return out;
}

std::vector<std::string> Network::structural_neighbours(std::string_view id) const {
  const auto& t = token(id);
  std::vector<std::string> higher, lower;
  for (const auto& c : connections_) {
    if (c.kind != ConnectionKind::Structural) continue;
    const std::string* other = nullptr;
    if (c.source == t.id) other = &c.target;
    else if (c.target == t.id) other = &c.source;
    if (!other) continue;
    if (layer_class(token(*other).layer) > layer_class(t.layer))
      higher.push_back(*other);
    else
      lower.push_back(*other);
  }
  higher.insert(higher.end(), lower.begin(), lower.end());
  return higher;
}

// -- mutation ---------------------------------------------------------------

const SemanticUnit& Network::add_semantic(const SemanticSpec& spec) {
  std::string id = spec.id.empty() ? spec.label : spec.id;
  if (spec.label.empty()) throw Error(ErrorCode::InvalidValue, "semantic label must not be empty");
  if (contains(id)) throw Error(ErrorCode::DuplicateId, "unit id '" + id + "' already exists");
  if (find_semantic_by_label(spec.label))
    throw Error(ErrorCode::DuplicateId, "semantic label '" + spec.label + "' already exists");
  semantics_.push_back({id, spec.label, 0.0});
  index_[id] = {true, semantics_.size() - 1};
  cache_valid_ = false;
  return semantics_.back();
}

const TokenUnit& Network::add_token(const TokenSpec& spec) {
  if (spec.id.empty()) throw Error(ErrorCode::InvalidValue, "token id must not be empty");
  if (contains(spec.id)) throw Error(ErrorCode::DuplicateId, "unit id '" + spec.id + "' already exists");
  if (!(spec.firing_bias >= 0.0)) throw Error(ErrorCode::InvalidValue, "firing_bias must be >= 0");
  tokens_.push_back({spec.id, spec.layer, spec.bank, 0.0, spec.firing_bias});
  index_[spec.id] = {false, tokens_.size() - 1};
  cache_valid_ = false;
  return tokens_.back();
}

void Network::validate_connection(Connection& c) const {
  if (!contains(c.source)) throw Error(ErrorCode::UnknownUnit, "connection source '" + c.source + "' is unknown");
  if (!contains(c.target)) throw Error(ErrorCode::UnknownUnit, "connection target '" + c.target + "' is unknown");
  if (!(c.weight >= 0.0 && c.weight <= 1.0))
    throw Error(ErrorCode::InvalidValue, "connection weight must lie in [0,1]");
  if (c.source == c.target) throw Error(ErrorCode::LayerViolation, "self connection on '" + c.source + "'");
  const std::string what = c.source + " -> " + c.target;
  switch (c.kind) {
    case ConnectionKind::Semantic: {
      // Stored as PO -> semantic.
      if (is_semantic(c.source)) std::swap(c.source, c.target);
      if (!is_token(c.source) || !is_semantic(c.target) || !is_po(token(c.source).layer))
        throw Error(ErrorCode::LayerViolation, "SEMANTIC connection must link a PO unit to a semantic unit: " + what);
      break;
    }
    case ConnectionKind::Structural: {
      if (!is_token(c.source) || !is_token(c.target))
        throw Error(ErrorCode::LayerViolation, "STRUCTURAL connection must link token units: " + what);
      const auto& a = token(c.source);
      const auto& b = token(c.target);
      if (a.bank != b.bank) throw Error(ErrorCode::LayerViolation, "STRUCTURAL connection crosses banks: " + what);
      int gap = std::abs(static_cast<int>(layer_class(a.layer)) - static_cast<int>(layer_class(b.layer)));
      if (gap != 1)
        throw Error(ErrorCode::LayerViolation, "STRUCTURAL connection must link adjacent layers: " + what);
      // Stored higher -> lower.
      if (layer_class(a.layer) < layer_class(b.layer)) std::swap(c.source, c.target);
      break;
    }
    case ConnectionKind::Mapping: {
      if (!is_token(c.source) || !is_token(c.target))
        throw Error(ErrorCode::LayerViolation, "MAPPING connection must link token units: " + what);
      const auto& a = token(c.source);
      const auto& b = token(c.target);
      if (a.layer != b.layer || a.bank == b.bank)
        throw Error(ErrorCode::LayerViolation, "MAPPING connection must link same-layer units in different banks: " + what);
      break;
    }
  }
}

void Network::connect(const Connection& connection) {
  Connection c = connection;
  validate_connection(c);
  for (auto& existing : connections_) {
    if (existing.kind == c.kind && existing.source == c.source && existing.target == c.target) {
      existing.weight = c.weight;
      cache_valid_ = false;
      return;
    }
  }
  connections_.push_back(std::move(c));
  cache_valid_ = false;
}

bool Network::disconnect(std::string_view a, std::string_view b, ConnectionKind kind) {
  auto before = connections_.size();
  std::erase_if(connections_, [&](const Connection& c) {
    return c.kind == kind && ((c.source == a && c.target == b) || (c.source == b && c.target == a));
  });
  cache_valid_ = false;
  return connections_.size() != before;
}

void Network::remove_unit(std::string_view id) {
  const Ref r = ref(id);
  const std::string key(id);
  std::erase_if(connections_, [&](const Connection& c) { return c.source == key || c.target == key; });
  if (r.semantic)
    semantics_.erase(semantics_.begin() + static_cast<std::ptrdiff_t>(r.index));
  else
    tokens_.erase(tokens_.begin() + static_cast<std::ptrdiff_t>(r.index));
  std::erase_if(predicates_, [&](const PredicateRecord& p) { return p.po_unit == key; });
  std::erase_if(propositions_, [&](const Proposition& p) {
    if (p.p_unit == key) return true;
    return std::any_of(p.roles.begin(), p.roles.end(), [&](const Role& role) {
      return role.rb == key || role.predicate == key || role.argument == key;
    });
  });
  reindex();
}

void Network::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < semantics_.size(); ++i) index_[semantics_[i].id] = {true, i};
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i].id] = {false, i};
  cache_valid_ = false;
}

std::string Network::next_id(std::string_view prefix) const {
  for (std::size_t n = 0;; ++n) {
    std::string id = std::string(prefix) + std::to_string(n);
    if (!contains(id)) return id;
  }
}

PredicateRecord* Network::find_predicate(std::string_view po_unit) {
  for (auto& p : predicates_)
    if (p.po_unit == po_unit) return &p;
  return nullptr;
}

const PredicateRecord* Network::find_predicate(std::string_view po_unit) const {
  for (const auto& p : predicates_)
    if (p.po_unit == po_unit) return &p;
  return nullptr;
}

// -- inhibitors -------------------------------------------------------------

void Network::set_synchrony(bool enabled) {
  if (synchrony_ == enabled) return;
  synchrony_ = enabled;
  cache_valid_ = false;
}

std::span<const Inhibitor> Network::inhibitors() const {
  ensure_cache();
  return inhibitors_;
}

const Inhibitor* Network::inhibitor_for(std::string_view id) const {
  ensure_cache();
  const auto& r = ref(id);
  if (r.semantic || !inhibitor_of_[r.index]) return nullptr;
  return &inhibitors_[*inhibitor_of_[r.index]];
}

void Network::ensure_cache() const {
  if (cache_valid_) return;
  adjacency_.assign(tokens_.size(), {});
  for (const auto& c : connections_) {
    if (c.kind == ConnectionKind::Structural) {
      auto hi = index_.at(c.source).index;
      auto lo = index_.at(c.target).index;
      adjacency_[lo].higher.push_back({hi, c.weight});
      adjacency_[hi].lower.push_back({lo, c.weight});
    } else if (c.kind == ConnectionKind::Semantic) {
      auto po = index_.at(c.source).index;
      auto sem = index_.at(c.target).index;
      adjacency_[po].semantic.push_back({sem, c.weight});
      adjacency_[po].semantic_weight_sum += c.weight;
    }
  }
  rebuild_inhibitors();
  cache_valid_ = true;
}

void Network::rebuild_inhibitors() const {
  // Union-find over PO and RB units; synchrony merges the PO pair of each RB.
  const std::size_t n = tokens_.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  if (synchrony_) {
    for (std::size_t i = 0; i < n; ++i) {
      if (tokens_[i].layer != Layer::Rb) continue;
      std::optional<std::size_t> first;
      for (const auto& link : adjacency_[i].lower) {
        if (!first) first = find(link.token);
        else parent[find(link.token)] = *first;
      }
    }
  }

  std::map<std::vector<std::string>, Inhibitor> previous;
  for (auto& inh : inhibitors_) previous.emplace(inh.yoked, inh);

  std::map<std::size_t, std::size_t> root_to_slot;
  std::vector<Inhibitor> fresh;
  inhibitor_of_.assign(n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    if (tokens_[i].layer == Layer::P) continue;
    auto root = find(i);
    auto [it, inserted] = root_to_slot.emplace(root, fresh.size());
    if (inserted) fresh.emplace_back();
    fresh[it->second].yoked.push_back(tokens_[i].id);
    inhibitor_of_[i] = it->second;
  }
  for (auto& inh : fresh) {
    auto old = previous.find(inh.yoked);
    if (old != previous.end()) inh = old->second;
    inh.threshold = params_.inhibitor_threshold;
  }
  inhibitors_ = std::move(fresh);
}

void Network::reset_state() {
  for (auto& s : semantics_) s.activation = 0.0;
  for (auto& t : tokens_) t.activation = 0.0;
  ensure_cache();
  for (auto& inh : inhibitors_) {
    inh.accumulator = 0.0;
    inh.refractory_remaining = 0;
    inh.last_fired.reset();
  }
  time_ = 0;
  driver_active_ = false;
}

// -- dynamics ---------------------------------------------------------------

void Network::check_drive(const Drive& drive) const {
  for (const auto& [id, value] : drive) {
    if (!contains(id)) throw Error(ErrorCode::UnknownUnit, "input references unknown unit '" + id + "'");
    if (!(value >= 0.0 && value <= 1.0))
      throw Error(ErrorCode::InvalidValue, "input for '" + id + "' must lie in [0,1]");
  }
}

void Network::step(const Drive& external_input, const Drive& clamp) {
  check_drive(external_input);
  check_drive(clamp);
  ensure_cache();

  const std::size_t n = tokens_.size();
  std::vector<double> ext(n, 0.0);
  std::vector<std::optional<double>> pinned(n);
  std::vector<double> sem_ext(semantics_.size(), 0.0);
  std::vector<std::optional<double>> sem_pinned(semantics_.size());
  std::array<bool, 3> bank_driven{true, false, false};
  auto mark = [&](const Drive& drive, bool is_clamp) {
    for (const auto& [id, value] : drive) {
      const auto& r = index_.at(id);
      if (r.semantic) {
        if (is_clamp) sem_pinned[r.index] = value;
        else sem_ext[r.index] += value;
        continue;
      }
      if (is_clamp) pinned[r.index] = value;
      else ext[r.index] += value;
      bank_driven[static_cast<std::size_t>(tokens_[r.index].bank)] = true;
    }
  };
  mark(external_input, false);
  mark(clamp, true);

  auto refractory = [&](std::size_t i) {
    return inhibitor_of_[i] && inhibitors_[*inhibitor_of_[i]].refractory_remaining > 0;
  };
  auto last_fired = [&](std::size_t i) -> long {
    if (!inhibitor_of_[i]) return std::numeric_limits<long>::min();
    const auto& lf = inhibitors_[*inhibitor_of_[i]].last_fired;
    return lf ? *lf : std::numeric_limits<long>::min();
  };

  auto net_input = [&](std::size_t i) {
    const auto& unit = tokens_[i];
    const auto& adj = adjacency_[i];
    double net = ext[i];
    for (const auto& l : adj.higher) net += l.weight * tokens_[l.token].activation;
    if (unit.bank != Bank::Driver) {
      for (const auto& l : adj.lower) net += l.weight * tokens_[l.token].activation;
      if (!adj.semantic.empty()) {
        double s = 0.0;
        for (const auto& l : adj.semantic) s += l.weight * semantics_[l.semantic].activation;
        net += s / std::max(1.0, adj.semantic_weight_sum);
      }
    }
    return net;
  };

  // One (bank, layer class) competition group at a time, Gauss-Seidel.
  auto update_group = [&](Bank bank, LayerClass cls) {
    struct Entry {
      std::size_t index;
      double net;
    };
    std::vector<Entry> group;
    for (std::size_t i = 0; i < n; ++i)
      if (tokens_[i].bank == bank && layer_class(tokens_[i].layer) == cls) group.push_back({i, net_input(i)});
    if (group.empty()) return;
    std::sort(group.begin(), group.end(), [&](const Entry& a, const Entry& b) {
      const auto& ua = tokens_[a.index];
      const auto& ub = tokens_[b.index];
      auto key = [&](const Entry& e, const TokenUnit& u) {
        return std::make_tuple(!pinned[e.index].has_value(), -e.net, -u.activation, -u.firing_bias,
                               u.layer != Layer::PoPred, last_fired(e.index));
      };
      auto ka = key(a, ua);
      auto kb = key(b, ub);
      if (ka != kb) return ka < kb;
      return ua.id < ub.id;
    });

    std::vector<std::size_t> done;
    done.reserve(group.size());
    for (const auto& e : group) {
      auto& unit = tokens_[e.index];
      double lateral = 0.0;
      for (auto j : done) {
        if (inhibitor_of_[e.index] && inhibitor_of_[j] == inhibitor_of_[e.index]) continue;
        lateral = std::max(lateral, tokens_[j].activation);
      }
      double a = unit.activation;
      if (pinned[e.index]) {
        a = *pinned[e.index];
      } else if (refractory(e.index)) {
        a = 0.0;
      } else {
        a += params_.dt * (e.net - params_.leak * a - params_.lateral_gain * lateral);
        a = std::clamp(a, 0.0, 1.0);
      }
      unit.activation = a;
      done.push_back(e.index);
    }
  };

  auto update_bank = [&](Bank bank) {
    if (bank_driven[static_cast<std::size_t>(bank)]) {
      update_group(bank, LayerClass::P);
      update_group(bank, LayerClass::Rb);
      update_group(bank, LayerClass::Po);
    } else {
      update_group(bank, LayerClass::Po);
      update_group(bank, LayerClass::Rb);
      update_group(bank, LayerClass::P);
    }
  };

  update_bank(Bank::Driver);

  // The semantic pool follows the driver's PO layer without memory.
  std::vector<double> raw(sem_ext);
  for (std::size_t i = 0; i < n; ++i) {
    if (tokens_[i].bank != Bank::Driver) continue;
    for (const auto& l : adjacency_[i].semantic) raw[l.semantic] += l.weight * tokens_[i].activation;
  }
  double peak = 1.0;
  for (double r : raw) peak = std::max(peak, r);
  for (std::size_t s = 0; s < semantics_.size(); ++s)
    semantics_[s].activation = sem_pinned[s] ? *sem_pinned[s] : std::clamp(raw[s] / peak, 0.0, 1.0);

  update_bank(Bank::Recipient);
  update_bank(Bank::Memory);
}

void Network::step_inhibitors() {
  ensure_cache();
  bool phase_boundary = false;
  for (auto& inh : inhibitors_) {
    std::vector<std::size_t> members;
    for (const auto& id : inh.yoked) members.push_back(index_.at(id).index);

    if (inh.refractory_remaining > 0) {
      --inh.refractory_remaining;
      for (auto i : members) tokens_[i].activation = 0.0;
      continue;
    }

    double input = 0.0;
    std::map<std::size_t, double> higher;
    for (auto i : members) {
      input = std::max(input, tokens_[i].activation);
      for (const auto& l : adjacency_[i].higher) {
        if (!inhibitor_of_[l.token]) continue;
        auto& w = higher[l.token];
        w = std::max(w, l.weight);
      }
    }
    for (const auto& [j, w] : higher) input += w * tokens_[j].activation;

    inh.accumulator += params_.inhibitor_gain * input;
    if (inh.accumulator >= inh.threshold - kFireEpsilon) {
      inh.accumulator = 0.0;
      inh.refractory_remaining = params_.refractory_len;
      inh.last_fired = time_;
      for (auto i : members) {
        tokens_[i].activation = 0.0;
        if (tokens_[i].bank == Bank::Driver && tokens_[i].layer == Layer::Rb) phase_boundary = true;
      }
    }
  }
  bool driver_active = false;
  for (const auto& t : tokens_)
    if (t.bank == Bank::Driver && t.activation >= params_.activation_threshold) driver_active = true;
  if (driver_active_ && !driver_active) phase_boundary = true;
  driver_active_ = driver_active;

  if (phase_boundary && params_.driver_phase_reset) {
    for (auto& t : tokens_)
      if (t.bank != Bank::Driver) t.activation = 0.0;
    for (auto& inh : inhibitors_) {
      if (tokens_[index_.at(inh.yoked.front()).index].bank == Bank::Driver) continue;
      inh.accumulator = 0.0;
      inh.refractory_remaining = 0;
    }
  }
  ++time_;
}

std::uint64_t Network::weight_checksum() const {
  std::vector<std::string> lines;
  lines.reserve(connections_.size());
  for (const auto& c : connections_) {
    std::ostringstream os;
    os << to_string(c.kind) << '|' << c.source << '|' << c.target << '|' << std::bit_cast<std::uint64_t>(c.weight);
    lines.push_back(os.str());
  }
  std::sort(lines.begin(), lines.end());
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& line : lines) {
    for (unsigned char ch : line) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  }
  return h;
}

Eigen::VectorXd step(Network& network, const Drive& external_input) {
  network.step(external_input);
  return network.activations();
}

Eigen::VectorXd step_inhibitors(Network& network) {
  network.step_inhibitors();
  return network.activations();
}

}  // namespace predlearn
