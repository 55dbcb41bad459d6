#pragma once

// Path-aware JSON access shared by the io and harness sources.

#include <string>

#include <json.hpp>

#include "predlearn/codec.hpp"
#include "predlearn/error.hpp"
#include "predlearn/learner.hpp"
#include "predlearn/network.hpp"

namespace predlearn::json_util {

using ordered = nlohmann::ordered_json;
using nlohmann::json;

inline json parse(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

[[noreturn]] inline void schema(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, path + ": " + what);
}

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) schema(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) schema(path + "." + key, "missing field");
  return *it;
}

inline std::string str(const json& v, const std::string& path) {
  if (!v.is_string()) schema(path, "expected a string");
  return v.get<std::string>();
}

inline double num(const json& v, const std::string& path) {
  if (!v.is_number()) schema(path, "expected a number");
  return v.get<double>();
}

inline long integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) schema(path, "expected an integer");
  return v.get<long>();
}

inline bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) schema(path, "expected a boolean");
  return v.get<bool>();
}

inline const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) schema(path, "expected an array");
  return v;
}

inline void check_version(const json& doc) {
  const auto& v = field(doc, "format_version", "$");
  if (!v.is_number_integer() || v.get<long>() != 1)
    throw Error(ErrorCode::VersionError, "unsupported format_version " + v.dump() + " (expected 1)");
}

/// Rejects keys outside `allowed` so typos in overrides do not pass silently.
inline void known_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  if (!obj.is_object()) schema(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) schema(path + "." + key, "unknown field");
  }
}

inline ordered to_json(const DynamicsParams& p) {
  ordered j;
  j["dt"] = p.dt;
  j["leak"] = p.leak;
  j["lateral_gain"] = p.lateral_gain;
  j["inhibitor_gain"] = p.inhibitor_gain;
  j["inhibitor_threshold"] = p.inhibitor_threshold;
  j["refractory_len"] = p.refractory_len;
  j["activation_threshold"] = p.activation_threshold;
  j["driver_phase_reset"] = p.driver_phase_reset;
  return j;
}

/// Overrides on top of `base`; absent fields keep their value.
inline DynamicsParams dynamics_from_json(const json& j, const std::string& path, DynamicsParams p = {}) {
  known_keys(j, {"dt", "leak", "lateral_gain", "inhibitor_gain", "inhibitor_threshold", "refractory_len",
                 "activation_threshold", "driver_phase_reset"},
             path);
  if (j.contains("dt")) p.dt = num(j["dt"], path + ".dt");
  if (j.contains("leak")) p.leak = num(j["leak"], path + ".leak");
  if (j.contains("lateral_gain")) p.lateral_gain = num(j["lateral_gain"], path + ".lateral_gain");
  if (j.contains("inhibitor_gain")) p.inhibitor_gain = num(j["inhibitor_gain"], path + ".inhibitor_gain");
  if (j.contains("inhibitor_threshold"))
    p.inhibitor_threshold = num(j["inhibitor_threshold"], path + ".inhibitor_threshold");
  if (j.contains("refractory_len"))
    p.refractory_len = static_cast<int>(integer(j["refractory_len"], path + ".refractory_len"));
  if (j.contains("activation_threshold"))
    p.activation_threshold = num(j["activation_threshold"], path + ".activation_threshold");
  if (j.contains("driver_phase_reset"))
    p.driver_phase_reset = boolean(j["driver_phase_reset"], path + ".driver_phase_reset");
  p.validate();
  return p;
}

inline ordered to_json(const LearnerParams& p) {
  ordered j;
  j["prune_epsilon"] = p.prune_epsilon;
  j["refinement_rate"] = p.refinement_rate;
  j["apply_threshold"] = p.apply_threshold;
  j["max_arity"] = p.max_arity;
  return j;
}

inline LearnerParams learner_from_json(const json& j, const std::string& path, LearnerParams p = {}) {
  known_keys(j, {"prune_epsilon", "refinement_rate", "apply_threshold", "max_arity"}, path);
  if (j.contains("prune_epsilon")) p.prune_epsilon = num(j["prune_epsilon"], path + ".prune_epsilon");
  if (j.contains("refinement_rate")) p.refinement_rate = num(j["refinement_rate"], path + ".refinement_rate");
  if (j.contains("apply_threshold")) p.apply_threshold = num(j["apply_threshold"], path + ".apply_threshold");
  if (j.contains("max_arity")) p.max_arity = static_cast<int>(integer(j["max_arity"], path + ".max_arity"));
  p.validate();
  return p;
}

inline ordered to_json(const CodecParams& p) {
  ordered j;
  j["mode"] = std::string(to_string(p.mode));
  j["slot_width"] = p.slot_width;
  j["gap"] = p.gap;
  j["k_max"] = p.k_max;
  j["tail"] = p.tail;
  return j;
}

inline CodecParams codec_from_json(const json& j, const std::string& path, CodecParams p = {}) {
  known_keys(j, {"mode", "slot_width", "gap", "k_max", "tail"}, path);
  if (j.contains("mode")) p.mode = parse_binding_mode(str(j["mode"], path + ".mode"));
  if (j.contains("slot_width")) p.slot_width = integer(j["slot_width"], path + ".slot_width");
  if (j.contains("gap")) p.gap = integer(j["gap"], path + ".gap");
  if (j.contains("k_max")) p.k_max = static_cast<int>(integer(j["k_max"], path + ".k_max"));
  if (j.contains("tail")) p.tail = integer(j["tail"], path + ".tail");
  p.validate();
  return p;
}

inline ordered to_json(const Proposition& p) {
  ordered j;
  j["p_unit"] = p.p_unit;
  j["roles"] = ordered::array();
  for (const auto& r : p.roles) j["roles"].push_back({{"rb", r.rb}, {"predicate", r.predicate}, {"argument", r.argument}});
  return j;
}

inline Proposition proposition_from_json(const json& j, const std::string& path) {
  Proposition p;
  p.p_unit = str(field(j, "p_unit", path), path + ".p_unit");
  const auto& roles = array(field(j, "roles", path), path + ".roles");
  for (std::size_t i = 0; i < roles.size(); ++i) {
    const std::string rp = path + ".roles[" + std::to_string(i) + "]";
    p.roles.push_back({str(field(roles[i], "rb", rp), rp + ".rb"), str(field(roles[i], "predicate", rp), rp + ".predicate"),
                       str(field(roles[i], "argument", rp), rp + ".argument")});
  }
  return p;
}

}  // namespace predlearn::json_util
