#include "predlearn/codec.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace predlearn {

std::string_view to_string(BindingMode mode) {
  return mode == BindingMode::PhaseLag1 ? "PHASE_LAG_1" : "PHASE_LAG_0";
}

BindingMode parse_binding_mode(std::string_view text) {
  if (text == "PHASE_LAG_1") return BindingMode::PhaseLag1;
  if (text == "PHASE_LAG_0") return BindingMode::PhaseLag0;
  throw Error(ErrorCode::SchemaError, "unknown binding mode '" + std::string(text) + "'");
}

void CodecParams::validate() const {
  if (slot_width < 1) throw Error(ErrorCode::InvalidParams, "slot_width must be >= 1");
  if (gap < 0) throw Error(ErrorCode::InvalidParams, "gap must be >= 0");
  if (k_max < 1) throw Error(ErrorCode::InvalidParams, "k_max must be >= 1");
  if (tail < 0) throw Error(ErrorCode::InvalidParams, "tail must be >= 0");
}

DriveSchedule FiringSchedule::drive() const {
  DriveSchedule d;
  d.clamp = true;
  for (const auto& [unit, list] : intervals) {
    long free_from = 0;
    for (const auto& [start, end] : list) {
      if (start > free_from) d.intervals.push_back({unit, free_from, start, 0.0});
      d.intervals.push_back({unit, start, end, 1.0});
      free_from = std::max(free_from, end);
    }
    d.intervals.push_back({unit, free_from, std::numeric_limits<long>::max(), 0.0});
  }
  return d;
}

FiringSchedule encode(const Network& network, const std::vector<Proposition>& propositions,
                      const CodecParams& params) {
  params.validate();
  std::size_t roles = 0;
  for (const auto& p : propositions) roles += p.roles.size();
  if (roles > static_cast<std::size_t>(params.k_max))
    throw Error(ErrorCode::CapacityExceeded,
                std::to_string(roles) + " role-filler sets exceed k_max = " + std::to_string(params.k_max));

  FiringSchedule s;
  s.mode = params.mode;
  auto add = [&](const std::string& unit, long start, long end) {
    if (!network.is_token(unit)) throw Error(ErrorCode::UnknownUnit, "unknown unit '" + unit + "'");
    s.intervals[unit].push_back({start, end});
  };

  const long w = params.slot_width;
  const long role_len = params.mode == BindingMode::PhaseLag1 ? 2 * w + params.gap : w;
  long c = 0;
  for (const auto& p : propositions) {
    const long p_start = c;
    for (const auto& r : p.roles) {
      if (params.mode == BindingMode::PhaseLag1) {
        add(r.predicate, c, c + w);
        add(r.argument, c + w + params.gap, c + role_len);
      } else {
        add(r.predicate, c, c + w);
        add(r.argument, c, c + w);
      }
      add(r.rb, c, c + role_len);
      c += role_len;
    }
    if (c > p_start) add(p.p_unit, p_start, c);
  }
  for (auto& [unit, list] : s.intervals) std::sort(list.begin(), list.end());
  s.length = c;
  return s;
}

FiringTrace run_schedule(Network& network, const FiringSchedule& schedule, const CodecParams& params) {
  params.validate();
  network.reset_state();
  return run(network, schedule.drive(), std::max<long>(1, schedule.length + params.tail));
}

namespace {

[[noreturn]] void ambiguous(const std::string& what, std::initializer_list<long> steps) {
  std::ostringstream os;
  os << what << " at t=";
  bool first = true;
  for (long t : steps) {
    os << (first ? "" : ",") << t;
    first = false;
  }
  throw Error(ErrorCode::AmbiguousTrace, os.str());
}

}  // namespace

std::vector<Proposition> decode(const FiringTrace& trace, const Network& network, const CodecParams& params) {
  params.validate();
  const double theta = network.params().activation_threshold;

  std::vector<BurstEvent> rb_bursts, po_bursts, p_bursts;
  for (auto& b : extract_bursts(trace, theta)) {
    if (!network.is_token(b.unit)) continue;
    switch (layer_class(network.token(b.unit).layer)) {
      case LayerClass::Rb: rb_bursts.push_back(std::move(b)); break;
      case LayerClass::Po: po_bursts.push_back(std::move(b)); break;
      case LayerClass::P: p_bursts.push_back(std::move(b)); break;
    }
  }
  auto by_time = [](const BurstEvent& a, const BurstEvent& b) {
    return std::tie(a.peak, a.start, a.unit) < std::tie(b.peak, b.start, b.unit);
  };
  std::sort(rb_bursts.begin(), rb_bursts.end(), by_time);
  std::sort(po_bursts.begin(), po_bursts.end(), by_time);

  struct Group {
    const BurstEvent* p_burst;
    std::vector<Role> roles;
  };
  std::vector<Group> groups;

  for (const auto& rb : rb_bursts) {
    const Bank bank = network.token(rb.unit).bank;
    auto same_bank = [&](const std::string& id) { return network.token(id).bank == bank; };
    Role role{rb.unit, {}, {}};
    if (params.mode == BindingMode::PhaseLag1) {
      std::vector<const BurstEvent*> inside;
      for (const auto& po : po_bursts)
        if (rb.contains(po.peak) && same_bank(po.unit)) inside.push_back(&po);
      if (inside.size() != 2)
        ambiguous("role window of '" + rb.unit + "' holds " + std::to_string(inside.size()) + " PO bursts",
                  {rb.start, rb.end});
      const long lag = inside[1]->peak - inside[0]->peak;
      if (lag <= 0 || lag > params.slot_width + params.gap)
        ambiguous("PO bursts in '" + rb.unit + "' are not in direct sequence", {inside[0]->peak, inside[1]->peak});
      role.predicate = inside[0]->unit;
      role.argument = inside[1]->unit;
    } else {
      for (const auto& t : network.tokens()) {
        if (!is_po(t.layer) || t.bank != bank || !trace.has_unit(t.id)) continue;
        if (trace.activations(rb.peak, trace.column(t.id)) < theta) continue;
        auto& slot = t.layer == Layer::PoPred ? role.predicate : role.argument;
        if (!slot.empty())
          ambiguous("more than one " + std::string(to_string(t.layer)) + " fires with '" + rb.unit + "'", {rb.peak});
        slot = t.id;
      }
      if (role.predicate.empty() || role.argument.empty())
        ambiguous("incomplete role-filler set with '" + rb.unit + "'", {rb.peak});
    }

    const BurstEvent* owner = nullptr;
    for (const auto& p : p_bursts) {
      if (!p.contains(rb.peak) || !same_bank(p.unit)) continue;
      if (owner) ambiguous("two propositions are active with '" + rb.unit + "'", {rb.peak});
      owner = &p;
    }
    if (!owner) ambiguous("no proposition is active with '" + rb.unit + "'", {rb.peak});

    auto g = std::find_if(groups.begin(), groups.end(), [&](const Group& x) { return x.p_burst == owner; });
    if (g == groups.end()) {
      groups.push_back({owner, {}});
      g = std::prev(groups.end());
    }
    if (std::find(g->roles.begin(), g->roles.end(), role) == g->roles.end()) g->roles.push_back(role);
  }

  std::vector<Proposition> out;
  for (const auto& g : groups) {
    Proposition p{g.p_burst->unit, g.roles};
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace predlearn
