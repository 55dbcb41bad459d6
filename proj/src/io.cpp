#include "predlearn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "json_util.hpp"

namespace predlearn {

namespace fs = std::filesystem;
using namespace json_util;

namespace {

std::string dump(const ordered& j) { return j.dump(2) + "\n"; }

std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

template <class Parse>
auto parse_enum(Parse parse, const json& v, const std::string& path) {
  const std::string s = str(v, path);
  try {
    return parse(s);
  } catch (const Error&) {
    schema(path, "invalid value '" + s + "'");
  }
}

}  // namespace

// -- network ----------------------------------------------------------------

std::string network_to_json(const Network& network) {
  const NetworkSpec spec = network.spec();
  ordered j;
  j["format_version"] = kFormatVersion;
  j["params"] = to_json(spec.params);
  j["synchrony"] = spec.synchrony;
  j["semantics"] = ordered::array();
  for (const auto& s : spec.semantics) j["semantics"].push_back({{"id", s.id}, {"label", s.label}});
  j["tokens"] = ordered::array();
  for (const auto& t : spec.tokens)
    j["tokens"].push_back({{"id", t.id},
                           {"layer", std::string(to_string(t.layer))},
                           {"bank", std::string(to_string(t.bank))},
                           {"firing_bias", t.firing_bias}});
  j["connections"] = ordered::array();
  for (const auto& c : spec.connections)
    j["connections"].push_back({{"source", c.source},
                                {"target", c.target},
                                {"weight", c.weight},
                                {"kind", std::string(to_string(c.kind))}});
  j["predicates"] = ordered::array();
  for (const auto& p : spec.predicates) {
    ordered pj;
    pj["po_unit"] = p.po_unit;
    pj["provenance"] = ordered::array();
    for (const auto& e : p.provenance) pj["provenance"].push_back(ordered::array({e.item_a, e.item_b}));
    pj["binding_counts"] = ordered::object();
    for (const auto& [arg, n] : p.binding_counts) pj["binding_counts"][arg] = n;
    j["predicates"].push_back(std::move(pj));
  }
  j["propositions"] = ordered::array();
  for (const auto& p : spec.propositions) j["propositions"].push_back(to_json(p));
  return dump(j);
}

Network network_from_json(std::string_view text) {
  const json doc = parse(text);
  if (!doc.is_object()) schema("$", "expected an object");
  check_version(doc);

  NetworkSpec spec;
  if (doc.contains("params")) spec.params = dynamics_from_json(doc["params"], "params");
  if (doc.contains("synchrony")) spec.synchrony = boolean(doc["synchrony"], "synchrony");

  const auto& sems = array(field(doc, "semantics", "$"), "semantics");
  for (std::size_t i = 0; i < sems.size(); ++i) {
    const std::string p = at_index("semantics", i);
    spec.semantics.push_back({str(field(sems[i], "id", p), p + ".id"), str(field(sems[i], "label", p), p + ".label")});
  }
  const auto& toks = array(field(doc, "tokens", "$"), "tokens");
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const std::string p = at_index("tokens", i);
    TokenSpec t;
    t.id = str(field(toks[i], "id", p), p + ".id");
    t.layer = parse_enum(parse_layer, field(toks[i], "layer", p), p + ".layer");
    t.bank = parse_enum(parse_bank, field(toks[i], "bank", p), p + ".bank");
    if (toks[i].contains("firing_bias")) t.firing_bias = num(toks[i]["firing_bias"], p + ".firing_bias");
    spec.tokens.push_back(std::move(t));
  }
  const auto& conns = array(field(doc, "connections", "$"), "connections");
  for (std::size_t i = 0; i < conns.size(); ++i) {
    const std::string p = at_index("connections", i);
    Connection c;
    c.source = str(field(conns[i], "source", p), p + ".source");
    c.target = str(field(conns[i], "target", p), p + ".target");
    c.weight = num(field(conns[i], "weight", p), p + ".weight");
    c.kind = parse_enum(parse_connection_kind, field(conns[i], "kind", p), p + ".kind");
    spec.connections.push_back(std::move(c));
  }
  if (doc.contains("predicates")) {
    const auto& preds = array(doc["predicates"], "predicates");
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const std::string p = at_index("predicates", i);
      PredicateRecord r;
      r.po_unit = str(field(preds[i], "po_unit", p), p + ".po_unit");
      if (preds[i].contains("provenance")) {
        const auto& prov = array(preds[i]["provenance"], p + ".provenance");
        for (std::size_t k = 0; k < prov.size(); ++k) {
          const std::string pp = at_index(p + ".provenance", k);
          if (!prov[k].is_array() || prov[k].size() != 2) schema(pp, "expected a pair of ids");
          r.provenance.push_back({str(prov[k][0], pp + "[0]"), str(prov[k][1], pp + "[1]")});
        }
      }
      if (preds[i].contains("binding_counts")) {
        const auto& counts = preds[i]["binding_counts"];
        if (!counts.is_object()) schema(p + ".binding_counts", "expected an object");
        for (const auto& [arg, n] : counts.items())
          r.binding_counts[arg] = static_cast<int>(integer(n, p + ".binding_counts." + arg));
      }
      spec.predicates.push_back(std::move(r));
    }
  }
  if (doc.contains("propositions")) {
    const auto& props = array(doc["propositions"], "propositions");
    for (std::size_t i = 0; i < props.size(); ++i)
      spec.propositions.push_back(proposition_from_json(props[i], at_index("propositions", i)));
  }
  return build_network(spec);
}

void save_network(const Network& network, const fs::path& path) { write_text(path, network_to_json(network)); }

Network load_network(const fs::path& path) { return network_from_json(read_text(path)); }

// -- traces -----------------------------------------------------------------

void write_trace_csv(const FiringTrace& trace, std::ostream& out) {
  out << "t,unit_id,activation\n";
  for (Eigen::Index t = 0; t < trace.steps(); ++t)
    for (std::size_t c = 0; c < trace.unit_ids.size(); ++c)
      out << t << ',' << trace.unit_ids[c] << ',' << shortest(trace.activations(t, static_cast<Eigen::Index>(c)))
          << '\n';
}

FiringTrace read_trace_csv(std::istream& in, double dt) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "trace CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "t,unit_id,activation")
    throw Error(ErrorCode::SchemaError, "trace CSV: expected header 't,unit_id,activation', got '" + line + "'");

  struct Row {
    long t;
    std::size_t unit;
    double value;
  };
  std::vector<Row> rows;
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> column;
  long max_t = -1;
  for (long lineno = 2; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    auto bad = [&](const std::string& what) {
      throw Error(ErrorCode::ParseError, "trace CSV line " + std::to_string(lineno) + ": " + what);
    };
    if (c1 == std::string::npos || c1 == c2) bad("expected 3 fields");
    Row r{};
    const char* b = line.data();
    if (auto [p, ec] = std::from_chars(b, b + c1, r.t); ec != std::errc{} || p != b + c1 || r.t < 0) bad("bad t");
    if (auto [p, ec] = std::from_chars(b + c2 + 1, b + line.size(), r.value);
        ec != std::errc{} || p != b + line.size())
      bad("bad activation");
    const std::string id = line.substr(c1 + 1, c2 - c1 - 1);
    if (id.empty()) bad("empty unit_id");
    auto [it, inserted] = column.try_emplace(id, ids.size());
    if (inserted) ids.push_back(id);
    r.unit = it->second;
    max_t = std::max(max_t, r.t);
    rows.push_back(r);
  }

  FiringTrace trace;
  trace.dt = dt;
  trace.unit_ids = ids;
  const auto n_t = static_cast<Eigen::Index>(max_t + 1);
  const auto n_u = static_cast<Eigen::Index>(ids.size());
  trace.activations = Eigen::MatrixXd::Constant(n_t, n_u, std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : rows) {
    double& cell = trace.activations(r.t, static_cast<Eigen::Index>(r.unit));
    if (!std::isnan(cell))
      throw Error(ErrorCode::SchemaError, "trace CSV: duplicate row for t=" + std::to_string(r.t) + " unit '" +
                                              ids[r.unit] + "'");
    cell = r.value;
  }
  for (Eigen::Index t = 0; t < n_t; ++t)
    for (Eigen::Index u = 0; u < n_u; ++u)
      if (std::isnan(trace.activations(t, u)))
        throw Error(ErrorCode::SchemaError,
                    "trace CSV: missing row for t=" + std::to_string(t) + " unit '" + ids[u] + "'");
  trace.validate();
  return trace;
}

void export_raster(const FiringTrace& trace, const fs::path& path) {
  std::ostringstream os;
  write_trace_csv(trace, os);
  write_text(path, os.str());
}

FiringTrace load_trace_csv(const fs::path& path, double dt) {
  std::istringstream in(read_text(path));
  return read_trace_csv(in, dt);
}

std::string trace_to_json(const FiringTrace& trace) {
  ordered j;
  j["format_version"] = kFormatVersion;
  j["dt"] = trace.dt;
  j["unit_ids"] = trace.unit_ids;
  j["activations"] = ordered::array();
  for (Eigen::Index t = 0; t < trace.steps(); ++t) {
    ordered row = ordered::array();
    for (Eigen::Index c = 0; c < trace.activations.cols(); ++c) row.push_back(trace.activations(t, c));
    j["activations"].push_back(std::move(row));
  }
  return dump(j);
}

FiringTrace trace_from_json(std::string_view text) {
  const json doc = parse(text);
  check_version(doc);
  FiringTrace trace;
  trace.dt = num(field(doc, "dt", "$"), "dt");
  const auto& ids = array(field(doc, "unit_ids", "$"), "unit_ids");
  for (std::size_t i = 0; i < ids.size(); ++i) trace.unit_ids.push_back(str(ids[i], at_index("unit_ids", i)));
  const auto& rows = array(field(doc, "activations", "$"), "activations");
  const auto n_u = static_cast<Eigen::Index>(trace.unit_ids.size());
  trace.activations.resize(static_cast<Eigen::Index>(rows.size()), n_u);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const std::string p = at_index("activations", t);
    if (!rows[t].is_array() || static_cast<Eigen::Index>(rows[t].size()) != n_u)
      schema(p, "expected " + std::to_string(n_u) + " values");
    for (Eigen::Index c = 0; c < n_u; ++c)
      trace.activations(static_cast<Eigen::Index>(t), c) =
          num(rows[t][static_cast<std::size_t>(c)], at_index(p, static_cast<std::size_t>(c)));
  }
  trace.validate();
  return trace;
}

// -- schedules, mappings, propositions ---------------------------------------

std::string schedule_to_json(const FiringSchedule& schedule) {
  ordered j;
  j["format_version"] = kFormatVersion;
  j["mode"] = std::string(to_string(schedule.mode));
  j["length"] = schedule.length;
  j["intervals"] = ordered::object();
  for (const auto& [unit, list] : schedule.intervals) {
    ordered arr = ordered::array();
    for (const auto& [s, e] : list) arr.push_back(ordered::array({s, e}));
    j["intervals"][unit] = std::move(arr);
  }
  return dump(j);
}

FiringSchedule schedule_from_json(std::string_view text) {
  const json doc = parse(text);
  check_version(doc);
  FiringSchedule s;
  s.mode = parse_enum(parse_binding_mode, field(doc, "mode", "$"), "mode");
  s.length = integer(field(doc, "length", "$"), "length");
  const auto& iv = field(doc, "intervals", "$");
  if (!iv.is_object()) schema("intervals", "expected an object");
  for (const auto& [unit, list] : iv.items()) {
    const std::string p = "intervals." + unit;
    array(list, p);
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string ip = at_index(p, i);
      if (!list[i].is_array() || list[i].size() != 2) schema(ip, "expected [start, end]");
      const long a = integer(list[i][0], ip + "[0]"), b = integer(list[i][1], ip + "[1]");
      if (a < 0 || b <= a) schema(ip, "expected 0 <= start < end");
      s.intervals[unit].push_back({a, b});
    }
  }
  return s;
}

std::string mapping_to_json(const MappingTable& table) {
  ordered j;
  j["format_version"] = kFormatVersion;
  j["pairs"] = ordered::array();
  for (const auto& block : table.blocks())
    for (std::size_t d = 0; d < block.drivers.size(); ++d)
      for (std::size_t r = 0; r < block.recipients.size(); ++r) {
        const auto di = static_cast<Eigen::Index>(d), ri = static_cast<Eigen::Index>(r);
        j["pairs"].push_back({{"layer", std::string(to_string(block.layer))},
                              {"driver", block.drivers[d]},
                              {"recipient", block.recipients[r]},
                              {"h", block.hypotheses(di, ri)},
                              {"w", block.weights(di, ri)}});
      }
  j["best"] = ordered::array();
  for (const auto& p : best_mapping(table))
    j["best"].push_back({{"driver", p.driver}, {"recipient", p.recipient}, {"w", p.weight}});
  return dump(j);
}

std::string propositions_to_json(const std::vector<Proposition>& propositions) {
  ordered j;
  j["format_version"] = kFormatVersion;
  j["propositions"] = ordered::array();
  for (const auto& p : propositions) j["propositions"].push_back(to_json(p));
  return dump(j);
}

// -- files ------------------------------------------------------------------

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "read failed for '" + path.string() + "'");
  return os.str();
}

void write_text(const fs::path& path, std::string_view text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::IoError, "write failed for '" + path.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into '" + path.string() + "'");
  }
}

}  // namespace predlearn
