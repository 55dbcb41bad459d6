#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "predlearn/error.hpp"

namespace predlearn {

enum class Layer { PoPred, PoObj, Rb, P };
enum class Bank { Driver, Recipient, Memory };
enum class ConnectionKind { Structural, Semantic, Mapping };

/// PO_PRED and PO_OBJ share the PO class for competition and adjacency.
enum class LayerClass { Po = 0, Rb = 1, P = 2 };

constexpr LayerClass layer_class(Layer layer) {
  switch (layer) {
    case Layer::PoPred:
    case Layer::PoObj:
      return LayerClass::Po;
    case Layer::Rb:
      return LayerClass::Rb;
    case Layer::P:
      return LayerClass::P;
  }
  return LayerClass::Po;
}

constexpr bool is_po(Layer layer) { return layer_class(layer) == LayerClass::Po; }

std::string_view to_string(Layer layer);
std::string_view to_string(Bank bank);
std::string_view to_string(ConnectionKind kind);
Layer parse_layer(std::string_view text);
Bank parse_bank(std::string_view text);
ConnectionKind parse_connection_kind(std::string_view text);

struct SemanticUnit {
  std::string id;
  std::string label;
  double activation = 0.0;
};

struct TokenUnit {
  std::string id;
  Layer layer = Layer::PoObj;
  Bank bank = Bank::Driver;
  double activation = 0.0;
  double firing_bias = 0.0;
};

struct Connection {
  std::string source;
  std::string target;
  double weight = 1.0;
  ConnectionKind kind = ConnectionKind::Structural;

  bool operator==(const Connection&) const = default;
};

/// Yoked inhibitor. Normally yoked to one PO or RB unit; in synchrony mode
/// the PO_PRED/PO_OBJ pair of a role binding shares one.
struct Inhibitor {
  std::vector<std::string> yoked;
  double accumulator = 0.0;
  double threshold = 1.0;
  int refractory_remaining = 0;
  /// Step index of the last firing, nullopt if it never fired.
  std::optional<long> last_fired;
};

struct DynamicsParams {
  double dt = 1.0;
  double leak = 0.3;
  double lateral_gain = 2.0;
  double inhibitor_gain = 0.1;
  double inhibitor_threshold = 1.0;
  int refractory_len = 10;
  double activation_threshold = 0.5;
  /// At a driver phase boundary (a DRIVER RB inhibitor fires, or the DRIVER
  /// bank falls silent) clear activations and inhibitor state in the other
  /// banks so they follow the driver's rhythm.
  bool driver_phase_reset = true;

  void validate() const;
  bool operator==(const DynamicsParams&) const = default;
};

/// ceil(threshold / gain) with a guard against 0.1-style rounding.
int steps_to_fire(const DynamicsParams& params);

struct SemanticSpec {
  std::string id;
  std::string label;
};

struct TokenSpec {
  std::string id;
  Layer layer = Layer::PoObj;
  Bank bank = Bank::Driver;
  double firing_bias = 0.0;
};

struct Episode {
  std::string item_a;
  std::string item_b;
  bool operator==(const Episode&) const = default;
};

/// Bookkeeping for a learned predicate. Its content (semantic weights) lives
/// on the PO unit's own SEMANTIC connections.
struct PredicateRecord {
  std::string po_unit;
  std::vector<Episode> provenance;
  std::map<std::string, int> binding_counts;
  bool operator==(const PredicateRecord&) const = default;
};

struct Role {
  std::string rb;
  std::string predicate;
  std::string argument;
  bool operator==(const Role&) const = default;
};

struct Proposition {
  std::string p_unit;
  std::vector<Role> roles;

  std::size_t arity() const { return roles.size(); }
  bool operator==(const Proposition&) const = default;
};

struct NetworkSpec {
  DynamicsParams params;
  std::vector<SemanticSpec> semantics;
  std::vector<TokenSpec> tokens;
  std::vector<Connection> connections;
  std::vector<PredicateRecord> predicates;
  std::vector<Proposition> propositions;
  bool synchrony = false;
};

/// unit id -> input value in [0,1].
using Drive = std::map<std::string, double>;

class Network {
 public:
  Network() = default;
  explicit Network(const NetworkSpec& spec);

  NetworkSpec spec() const;

  const DynamicsParams& params() const { return params_; }
  void set_params(const DynamicsParams& params);

  // -- lookup -------------------------------------------------------------
  bool contains(std::string_view id) const;
  bool is_semantic(std::string_view id) const;
  bool is_token(std::string_view id) const;
  const TokenUnit& token(std::string_view id) const;
  const SemanticUnit& semantic(std::string_view id) const;
  const SemanticUnit* find_semantic_by_label(std::string_view label) const;

  std::span<const TokenUnit> tokens() const { return tokens_; }
  std::span<const SemanticUnit> semantics() const { return semantics_; }
  std::span<const Connection> connections() const { return connections_; }

  /// Semantic ids first, then tokens, in insertion order. This is the
  /// column order of recorded traces.
  std::vector<std::string> unit_ids() const;
  Eigen::VectorXd activations() const;

  double activation(std::string_view id) const;
  void set_activation(std::string_view id, double value);

  /// SEMANTIC weights of a PO unit keyed by semantic label.
  std::map<std::string, double> semantic_weights(std::string_view po_unit) const;
  /// STRUCTURAL neighbours of a token, higher layer first.
  std::vector<std::string> structural_neighbours(std::string_view id) const;

  // -- mutation -----------------------------------------------------------
  const SemanticUnit& add_semantic(const SemanticSpec& spec);
  const TokenUnit& add_token(const TokenSpec& spec);
  void connect(const Connection& connection);
  bool disconnect(std::string_view a, std::string_view b, ConnectionKind kind);
  void remove_unit(std::string_view id);
  /// First "<prefix><n>" not already in use, n counting from 0.
  std::string next_id(std::string_view prefix) const;

  std::vector<PredicateRecord>& predicates() { return predicates_; }
  const std::vector<PredicateRecord>& predicates() const { return predicates_; }
  PredicateRecord* find_predicate(std::string_view po_unit);
  const PredicateRecord* find_predicate(std::string_view po_unit) const;
  std::vector<Proposition>& propositions() { return propositions_; }
  const std::vector<Proposition>& propositions() const { return propositions_; }

  // -- dynamics -----------------------------------------------------------
  bool synchrony() const { return synchrony_; }
  void set_synchrony(bool enabled);

  std::span<const Inhibitor> inhibitors() const;
  const Inhibitor* inhibitor_for(std::string_view id) const;

  /// Zero all activations and inhibitor state, rewind the clock.
  void reset_state();
  long time() const { return time_; }

  /// One leaky-integrator update of every unit. `clamp` pins units to the
  /// given value for this step, overriding dynamics and refractory state.
  void step(const Drive& external_input, const Drive& clamp = {});
  void step_inhibitors();

  /// Order-independent hash of every connection weight.
  std::uint64_t weight_checksum() const;

 private:
  struct Ref {
    bool semantic = false;
    std::size_t index = 0;
  };
  struct Link {
    std::size_t token = 0;
    double weight = 0.0;
  };
  struct SemLink {
    std::size_t semantic = 0;
    double weight = 0.0;
  };
  struct Adjacency {
    std::vector<Link> higher;
    std::vector<Link> lower;
    std::vector<SemLink> semantic;
    double semantic_weight_sum = 0.0;
  };

  const Ref& ref(std::string_view id) const;
  void reindex();
  void ensure_cache() const;
  void rebuild_inhibitors() const;
  void validate_connection(Connection& connection) const;
  void check_drive(const Drive& drive) const;

  DynamicsParams params_;
  std::vector<SemanticUnit> semantics_;
  std::vector<TokenUnit> tokens_;
  std::vector<Connection> connections_;
  std::vector<PredicateRecord> predicates_;
  std::vector<Proposition> propositions_;
  std::unordered_map<std::string, Ref> index_;
  bool synchrony_ = false;
  long time_ = 0;
  bool driver_active_ = false;

  // Derived from the structure; rebuilt lazily after mutation.
  mutable bool cache_valid_ = false;
  mutable std::vector<Adjacency> adjacency_;
  mutable std::vector<Inhibitor> inhibitors_;
  mutable std::vector<std::optional<std::size_t>> inhibitor_of_;
};

/// Validates and builds; deterministic given the spec.
Network build_network(const NetworkSpec& spec);

/// Free-function forms of the per-timestep updates. Both return the
/// activations in `unit_ids()` order.
Eigen::VectorXd step(Network& network, const Drive& external_input);
Eigen::VectorXd step_inhibitors(Network& network);

}  // namespace predlearn
