#include "predlearn/mapping.hpp"

#include <algorithm>
#include <set>

namespace predlearn {

MappingTable MappingTable::for_network(const Network& network) {
  MappingTable table;
  for (Layer layer : {Layer::P, Layer::Rb, Layer::PoPred, Layer::PoObj}) {
    MappingBlock block;
    block.layer = layer;
    for (const auto& t : network.tokens()) {
      if (t.layer != layer) continue;
      if (t.bank == Bank::Driver) block.drivers.push_back(t.id);
      if (t.bank == Bank::Recipient) block.recipients.push_back(t.id);
    }
    if (block.drivers.empty() || block.recipients.empty()) continue;
    const auto rows = static_cast<Eigen::Index>(block.drivers.size());
    const auto cols = static_cast<Eigen::Index>(block.recipients.size());
    block.hypotheses = Eigen::MatrixXd::Zero(rows, cols);
    block.weights = Eigen::MatrixXd::Zero(rows, cols);
    table.blocks_.push_back(std::move(block));
  }
  return table;
}

std::pair<const MappingBlock*, std::pair<Eigen::Index, Eigen::Index>> MappingTable::locate(
    std::string_view driver, std::string_view recipient) const {
  for (const auto& b : blocks_) {
    auto r = std::find(b.drivers.begin(), b.drivers.end(), driver);
    auto c = std::find(b.recipients.begin(), b.recipients.end(), recipient);
    if (r != b.drivers.end() && c != b.recipients.end())
      return {&b, {r - b.drivers.begin(), c - b.recipients.begin()}};
  }
  throw Error(ErrorCode::UnknownUnit,
              "no same-layer mapping pair (" + std::string(driver) + ", " + std::string(recipient) + ")");
}

double MappingTable::hypothesis(std::string_view driver, std::string_view recipient) const {
  auto [b, rc] = locate(driver, recipient);
  return b->hypotheses(rc.first, rc.second);
}

double MappingTable::weight(std::string_view driver, std::string_view recipient) const {
  auto [b, rc] = locate(driver, recipient);
  return b->weights(rc.first, rc.second);
}

void MappingTable::reset() {
  for (auto& b : blocks_) {
    b.hypotheses.setZero();
    b.weights.setZero();
  }
}

namespace {

Eigen::MatrixXd columns(const FiringTrace& trace, const std::vector<std::string>& ids) {
  Eigen::MatrixXd out(trace.steps(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = trace.row_of(ids[i]);
  return out;
}

}  // namespace

void accumulate_hypotheses(MappingTable& table, const FiringTrace& trace) {
  for (auto& b : table.blocks()) {
    const Eigen::MatrixXd d = columns(trace, b.drivers);
    const Eigen::MatrixXd r = columns(trace, b.recipients);
    b.hypotheses.noalias() += trace.dt * (d.transpose() * r);
  }
}

void update_mapping_weights(MappingTable& table) {
  bool any = false;
  for (const auto& b : table.blocks()) any = any || (b.hypotheses.array() > 0.0).any();
  if (!any) throw Error(ErrorCode::AllZeroHypotheses, "no coactivity has been accumulated");

  for (auto& b : table.blocks()) {
    const Eigen::VectorXd row_max = b.hypotheses.rowwise().maxCoeff();
    const Eigen::RowVectorXd col_max = b.hypotheses.colwise().maxCoeff();
    for (Eigen::Index i = 0; i < b.hypotheses.rows(); ++i) {
      for (Eigen::Index j = 0; j < b.hypotheses.cols(); ++j) {
        const double denom = std::max(row_max[i], col_max[j]);
        b.weights(i, j) = denom > 0.0 ? b.hypotheses(i, j) / denom : 0.0;
      }
    }
  }
}

std::vector<MappingPair> best_mapping(const MappingTable& table) {
  std::vector<MappingPair> candidates;
  for (const auto& b : table.blocks())
    for (Eigen::Index i = 0; i < b.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < b.weights.cols(); ++j)
        if (b.weights(i, j) > 0.0)
          candidates.push_back({b.drivers[static_cast<std::size_t>(i)], b.recipients[static_cast<std::size_t>(j)],
                                b.weights(i, j)});
  std::sort(candidates.begin(), candidates.end(), [](const MappingPair& a, const MappingPair& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.driver != b.driver) return a.driver < b.driver;
    return a.recipient < b.recipient;
  });

  std::set<std::string> used_driver, used_recipient;
  std::vector<MappingPair> out;
  for (const auto& c : candidates) {
    if (used_driver.count(c.driver) || used_recipient.count(c.recipient)) continue;
    used_driver.insert(c.driver);
    used_recipient.insert(c.recipient);
    out.push_back(c);
  }
  return out;
}

void commit_mapping(Network& network, const MappingTable& table) {
  for (const auto& b : table.blocks())
    for (Eigen::Index i = 0; i < b.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < b.weights.cols(); ++j)
        if (b.weights(i, j) > 0.0)
          network.connect({b.drivers[static_cast<std::size_t>(i)], b.recipients[static_cast<std::size_t>(j)],
                           b.weights(i, j), ConnectionKind::Mapping});
}

}  // namespace predlearn
