#include "predlearn/oscillation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace predlearn {

Eigen::Index FiringTrace::column(std::string_view id) const {
  for (std::size_t i = 0; i < unit_ids.size(); ++i)
    if (unit_ids[i] == id) return static_cast<Eigen::Index>(i);
  throw Error(ErrorCode::UnknownUnit, "trace has no unit '" + std::string(id) + "'");
}

bool FiringTrace::has_unit(std::string_view id) const {
  return std::find(unit_ids.begin(), unit_ids.end(), id) != unit_ids.end();
}

FiringTrace FiringTrace::slice(Eigen::Index from) const {
  from = std::clamp<Eigen::Index>(from, 0, steps());
  return {dt, unit_ids, activations.bottomRows(steps() - from)};
}

FiringTrace FiringTrace::scaled(double c) const {
  if (!(c >= 0.0 && c <= 1.0)) throw Error(ErrorCode::InvalidValue, "trace scale must lie in [0,1]");
  return {dt, unit_ids, activations * c};
}

void FiringTrace::validate() const {
  if (static_cast<std::size_t>(activations.cols()) != unit_ids.size())
    throw Error(ErrorCode::DimensionMismatch, "trace column count does not match unit_ids");
  if (activations.size() > 0 && (activations.minCoeff() < 0.0 || activations.maxCoeff() > 1.0))
    throw Error(ErrorCode::InvalidValue, "trace activations must lie in [0,1]");
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidValue, "trace dt must be positive");
}

DriveSchedule DriveSchedule::constant(const Drive& drive) {
  DriveSchedule out;
  for (const auto& [id, value] : drive) out.intervals.push_back({id, 0, std::numeric_limits<long>::max(), value});
  return out;
}

Drive DriveSchedule::at(long t) const {
  Drive out;
  for (const auto& iv : intervals)
    if (iv.start <= t && t < iv.end) out[iv.unit] = std::max(out[iv.unit], iv.value);
  return out;
}

FiringTrace run(Network& network, const DriveSchedule& drive, long n_steps, const RunOptions& options) {
  if (n_steps < 1) throw Error(ErrorCode::InvalidValue, "n_steps must be >= 1");
  network.set_synchrony(options.synchrony);

  FiringTrace trace;
  trace.dt = network.params().dt;
  trace.unit_ids = network.unit_ids();
  trace.activations.resize(n_steps, static_cast<Eigen::Index>(trace.unit_ids.size()));

  for (long t = 0; t < n_steps; ++t) {
    Drive d = drive.at(t);
    if (drive.clamp) {
      network.step({}, d);
      network.step_inhibitors();
      for (const auto& [id, value] : d) network.set_activation(id, value);
    } else {
      network.step(d);
      network.step_inhibitors();
    }
    trace.activations.row(t) = network.activations().transpose();
  }
  return trace;
}

namespace {

void bursts_in_column(const FiringTrace& trace, Eigen::Index col, double threshold, std::vector<BurstEvent>& out) {
  const auto& unit = trace.unit_ids[static_cast<std::size_t>(col)];
  const auto column = trace.activations.col(col);
  Eigen::Index t = 0;
  while (t < column.size()) {
    if (column[t] < threshold) {
      ++t;
      continue;
    }
    BurstEvent b{unit, static_cast<long>(t), static_cast<long>(t), static_cast<long>(t)};
    double best = column[t];
    while (t < column.size() && column[t] >= threshold) {
      if (column[t] > best) {
        best = column[t];
        b.peak = static_cast<long>(t);
      }
      b.end = static_cast<long>(t);
      ++t;
    }
    out.push_back(b);
  }
}

void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw Error(ErrorCode::InvalidValue, "threshold must lie in (0,1)");
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::vector<BurstEvent> extract_bursts(const FiringTrace& trace, double threshold) {
  check_threshold(threshold);
  std::vector<BurstEvent> out;
  for (Eigen::Index c = 0; c < trace.activations.cols(); ++c) bursts_in_column(trace, c, threshold, out);
  return out;
}

std::vector<BurstEvent> extract_bursts(const FiringTrace& trace, std::string_view unit, double threshold) {
  check_threshold(threshold);
  std::vector<BurstEvent> out;
  bursts_in_column(trace, trace.column(unit), threshold, out);
  return out;
}

long settling_horizon(const FiringTrace& trace, double threshold) {
  std::map<std::string, std::vector<long>> starts;
  for (const auto& b : extract_bursts(trace, threshold)) starts[b.unit].push_back(b.start);
  std::optional<long> horizon;
  for (const auto& [unit, s] : starts)
    if (s.size() >= 2) horizon = horizon ? std::min(*horizon, s[1]) : s[1];
  if (!horizon) throw Error(ErrorCode::InsufficientCycles, "no unit bursts twice in the trace");
  return *horizon;
}

std::vector<PhaseSet> detect_phase_sets(const FiringTrace& trace, const Network& network, double threshold,
                                        const PhaseSetOptions& options) {
  const long horizon = settling_horizon(trace, threshold);

  struct Candidate {
    RoleGroup group;
    std::vector<BurstEvent> bursts;
  };
  std::vector<Candidate> candidates;
  for (const auto& t : network.tokens()) {
    if (t.layer != Layer::Rb || !trace.has_unit(t.id)) continue;
    Candidate c;
    c.group.rbs.push_back(t.id);
    for (const auto& n : network.structural_neighbours(t.id))
      if (is_po(network.token(n).layer)) c.group.pos.push_back(n);
    for (const auto& b : extract_bursts(trace, t.id, threshold))
      if (b.start >= horizon) c.bursts.push_back(b);
    if (!c.bursts.empty()) candidates.push_back(std::move(c));
  }

  auto overlapping = [](const Candidate& a, const Candidate& b) {
    for (const auto& x : a.bursts)
      for (const auto& y : b.bursts)
        if (x.overlaps(y)) return true;
    return false;
  };
  auto synchronous = [](const Candidate& a, const Candidate& b) {
    if (a.bursts.size() != b.bursts.size()) return false;
    for (std::size_t i = 0; i < a.bursts.size(); ++i)
      if (std::abs(a.bursts[i].peak - b.bursts[i].peak) > 1) return false;
    return true;
  };

  if (options.merge_synchronous) {
    std::vector<Candidate> merged;
    for (auto& c : candidates) {
      auto it = std::find_if(merged.begin(), merged.end(), [&](const Candidate& m) { return synchronous(m, c); });
      if (it == merged.end()) {
        merged.push_back(std::move(c));
        continue;
      }
      it->group.rbs.insert(it->group.rbs.end(), c.group.rbs.begin(), c.group.rbs.end());
      it->group.pos.insert(it->group.pos.end(), c.group.pos.begin(), c.group.pos.end());
    }
    candidates = std::move(merged);
  }

  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.bursts.front().start != b.bursts.front().start) return a.bursts.front().start < b.bursts.front().start;
    return a.group.rbs.front() < b.group.rbs.front();
  });

  std::vector<std::vector<const Candidate*>> sets;
  for (const auto& c : candidates) {
    bool placed = false;
    for (auto& set : sets) {
      if (std::none_of(set.begin(), set.end(), [&](const Candidate* m) { return overlapping(*m, c); })) {
        set.push_back(&c);
        placed = true;
        break;
      }
    }
    if (!placed) sets.push_back({&c});
  }

  std::vector<PhaseSet> out;
  for (const auto& set : sets) {
    PhaseSet ps;
    for (const auto* c : set) ps.members.push_back(c->group);
    out.push_back(std::move(ps));
  }
  return out;
}

double pairwise_lag(const FiringTrace& trace, std::string_view unit_a, std::string_view unit_b, double threshold) {
  auto a = extract_bursts(trace, unit_a, threshold);
  auto b = extract_bursts(trace, unit_b, threshold);
  if (a.empty() || b.empty())
    throw Error(ErrorCode::NoBursts, "pairwise_lag needs bursts on both '" + std::string(unit_a) + "' and '" +
                                         std::string(unit_b) + "'");
  std::vector<double> lags;
  for (const auto& x : a) {
    long best = b.front().peak - x.peak;
    for (const auto& y : b) {
      long d = y.peak - x.peak;
      if (std::abs(d) < std::abs(best) || (std::abs(d) == std::abs(best) && d > best)) best = d;
    }
    lags.push_back(static_cast<double>(best));
  }
  return median(std::move(lags));
}

double burst_period(const FiringTrace& trace, std::string_view unit, double threshold) {
  auto bursts = extract_bursts(trace, unit, threshold);
  if (bursts.size() < 2)
    throw Error(ErrorCode::InsufficientCycles, "'" + std::string(unit) + "' bursts fewer than twice");
  std::vector<double> gaps;
  for (std::size_t i = 1; i < bursts.size(); ++i) gaps.push_back(static_cast<double>(bursts[i].start - bursts[i - 1].start));
  return median(std::move(gaps));
}

double duty_cycle(const FiringTrace& trace, std::string_view unit, double threshold, Eigen::Index from,
                  Eigen::Index to) {
  from = std::clamp<Eigen::Index>(from, 0, trace.steps());
  to = std::clamp<Eigen::Index>(to, from, trace.steps());
  if (to == from) return 0.0;
  auto col = trace.activations.col(trace.column(unit)).segment(from, to - from);
  return static_cast<double>((col.array() >= threshold).count()) / static_cast<double>(to - from);
}

}  // namespace predlearn
