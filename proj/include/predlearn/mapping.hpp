#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "predlearn/network.hpp"
#include "predlearn/oscillation.hpp"

namespace predlearn {

/// Hypotheses and weights for one layer: rows are DRIVER units, columns
/// RECIPIENT units.
struct MappingBlock {
  Layer layer = Layer::PoObj;
  std::vector<std::string> drivers;
  std::vector<std::string> recipients;
  Eigen::MatrixXd hypotheses;
  Eigen::MatrixXd weights;
};

struct MappingPair {
  std::string driver;
  std::string recipient;
  double weight = 0.0;
  bool operator==(const MappingPair&) const = default;
};

class MappingTable {
 public:
  MappingTable() = default;
  /// One block per layer holding every DRIVER x RECIPIENT pair of that layer.
  static MappingTable for_network(const Network& network);

  std::vector<MappingBlock>& blocks() { return blocks_; }
  const std::vector<MappingBlock>& blocks() const { return blocks_; }

  double hypothesis(std::string_view driver, std::string_view recipient) const;
  double weight(std::string_view driver, std::string_view recipient) const;

  /// Clears hypotheses and weights; accumulators otherwise persist.
  void reset();

 private:
  std::pair<const MappingBlock*, std::pair<Eigen::Index, Eigen::Index>> locate(std::string_view driver,
                                                                            std::string_view recipient) const;
  std::vector<MappingBlock> blocks_;
};

/// h(u,v) += sum_t a_u(t) a_v(t) dt for every pair in the table.
void accumulate_hypotheses(MappingTable& table, const FiringTrace& trace);

/// w(u,v) = h(u,v) / max(row max, column max). Throws AllZeroHypotheses.
void update_mapping_weights(MappingTable& table);

/// Greedy one-to-one readout by descending weight, ties by (driver, recipient)
/// id. Pairs with zero weight are left unmapped.
std::vector<MappingPair> best_mapping(const MappingTable& table);

/// Writes the learned weights as MAPPING connections (zero weights skipped).
void commit_mapping(Network& network, const MappingTable& table);

}  // namespace predlearn
