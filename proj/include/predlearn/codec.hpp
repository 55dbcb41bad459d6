#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "predlearn/network.hpp"
#include "predlearn/oscillation.hpp"

namespace predlearn {

enum class BindingMode { PhaseLag1, PhaseLag0 };

std::string_view to_string(BindingMode mode);
BindingMode parse_binding_mode(std::string_view text);

struct CodecParams {
  BindingMode mode = BindingMode::PhaseLag1;
  long slot_width = 10;
  /// Steps between the predicate slot and the argument slot (PHASE_LAG_1).
  long gap = 0;
  int k_max = 4;
  /// Steps recorded after the last slot when running a schedule.
  long tail = 2;

  void validate() const;
  bool operator==(const CodecParams&) const = default;
};

/// Half-open [start, end) drive interval.
using Interval = std::pair<long, long>;

struct FiringSchedule {
  BindingMode mode = BindingMode::PhaseLag1;
  std::map<std::string, std::vector<Interval>> intervals;
  /// First step after the last interval.
  long length = 0;

  /// Clamp-mode drive pinning every scheduled unit at 1 inside its intervals
  /// and at 0 outside them. Unscheduled units follow the dynamics.
  DriveSchedule drive() const;
  bool operator==(const FiringSchedule&) const = default;
};

/// Slot assignment in role order. PHASE_LAG_1: predicate [c, c+w), argument
/// [c+w+gap, c+2w+gap), the RB spans both. PHASE_LAG_0: predicate, argument
/// and RB share [c, c+w). Each P unit spans its roles.
/// Throws CapacityExceeded above k_max roles, UnknownUnit for missing units.
FiringSchedule encode(const Network& network, const std::vector<Proposition>& propositions,
                      const CodecParams& params = {});

/// Resets the network state and runs the schedule in clamp mode for
/// length + tail steps.
FiringTrace run_schedule(Network& network, const FiringSchedule& schedule, const CodecParams& params = {});

/// Recovers propositions from a trace. Every RB burst is one role window.
/// PHASE_LAG_1 reads roles from firing order (first PO = predicate);
/// PHASE_LAG_0 from the layers of the POs active at the RB peak. Roles are
/// grouped under the P unit whose burst contains the RB peak; repeats are
/// dropped. Throws AmbiguousTrace naming the offending timesteps.
std::vector<Proposition> decode(const FiringTrace& trace, const Network& network, const CodecParams& params = {});

}  // namespace predlearn
