#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "predlearn/network.hpp"

namespace predlearn {

/// Activations over time: one row per timestep, one column per unit.
struct FiringTrace {
  double dt = 1.0;
  std::vector<std::string> unit_ids;
  Eigen::MatrixXd activations;

  Eigen::Index steps() const { return activations.rows(); }
  /// Column of `id`; throws UnknownUnit.
  Eigen::Index column(std::string_view id) const;
  bool has_unit(std::string_view id) const;
  auto row_of(std::string_view id) const { return activations.col(column(id)); }

  /// Rows [from, steps()).
  FiringTrace slice(Eigen::Index from) const;
  /// Multiply every activation by c in [0,1].
  FiringTrace scaled(double c) const;
  void validate() const;
};

struct BurstEvent {
  std::string unit;
  long start = 0;
  long end = 0;  // inclusive
  long peak = 0;

  bool contains(long t) const { return start <= t && t <= end; }
  bool overlaps(const BurstEvent& other) const { return start <= other.end && other.start <= end; }
  bool operator==(const BurstEvent&) const = default;
};

/// One RB unit (or a synchronous cluster of RBs) together with its PO units.
struct RoleGroup {
  std::vector<std::string> rbs;
  std::vector<std::string> pos;
  bool operator==(const RoleGroup&) const = default;
};

struct PhaseSet {
  std::vector<RoleGroup> members;
};

struct DriveInterval {
  std::string unit;
  long start = 0;
  long end = std::numeric_limits<long>::max();  // exclusive
  double value = 1.0;
};

/// Time-varying external input. With `clamp` set, driven units are pinned to
/// the interval value instead of receiving it as excitation.
struct DriveSchedule {
  std::vector<DriveInterval> intervals;
  bool clamp = false;

  static DriveSchedule constant(const Drive& drive);
  Drive at(long t) const;
};

struct RunOptions {
  bool synchrony = false;
};

/// Alternates step and step_inhibitors for n_steps, recording every unit
/// after both. The network is left in its final state.
FiringTrace run(Network& network, const DriveSchedule& drive, long n_steps, const RunOptions& options = {});

/// Maximal runs of activation >= threshold, per unit in column order.
std::vector<BurstEvent> extract_bursts(const FiringTrace& trace, double threshold);
std::vector<BurstEvent> extract_bursts(const FiringTrace& trace, std::string_view unit, double threshold);

/// First timestep after the first full cycle: the earliest second-burst
/// start over all units. Throws InsufficientCycles if no unit bursts twice.
long settling_horizon(const FiringTrace& trace, double threshold);

struct PhaseSetOptions {
  /// Treat groups whose bursts coincide (peaks within one step) as one
  /// synchronous member instead of separate phase sets.
  bool merge_synchronous = false;
};

std::vector<PhaseSet> detect_phase_sets(const FiringTrace& trace, const Network& network, double threshold,
                                        const PhaseSetOptions& options = {});

/// Median over bursts of (peak_b - peak_a); positive when a fires first.
double pairwise_lag(const FiringTrace& trace, std::string_view unit_a, std::string_view unit_b, double threshold);

/// Median spacing between consecutive burst starts.
double burst_period(const FiringTrace& trace, std::string_view unit, double threshold);

/// Fraction of rows in [from, to) with activation >= threshold.
double duty_cycle(const FiringTrace& trace, std::string_view unit, double threshold, Eigen::Index from,
                  Eigen::Index to);

}  // namespace predlearn
