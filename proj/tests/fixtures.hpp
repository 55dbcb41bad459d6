#pragma once

// Small network builders shared by the unit and acceptance suites.

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "predlearn/network.hpp"
#include "predlearn/oscillation.hpp"

namespace predlearn::fixtures {

struct RoleIds {
  std::string rb;
  std::string pred;
  std::string obj;
};

struct PhaseSetNet {
  Network network;
  std::string p;
  std::vector<RoleIds> roles;
};

/// One P unit over k role bindings, each with its own PO_PRED and PO_OBJ.
/// `tag` is mixed into ids so lexicographic order carries no information.
inline PhaseSetNet phase_set_network(int k, Bank bank = Bank::Driver, const std::vector<std::string>& tags = {},
                                     DynamicsParams params = {}) {
  PhaseSetNet out;
  NetworkSpec spec;
  spec.params = params;
  out.p = "P";
  spec.tokens.push_back({out.p, Layer::P, bank, 0.0});
  for (int i = 0; i < k; ++i) {
    std::string tag = i < static_cast<int>(tags.size()) ? tags[static_cast<std::size_t>(i)] : std::to_string(i);
    RoleIds r{"rb_" + tag, "pred_" + tag, "obj_" + tag};
    spec.tokens.push_back({r.rb, Layer::Rb, bank, 0.0});
    spec.tokens.push_back({r.pred, Layer::PoPred, bank, 0.0});
    spec.tokens.push_back({r.obj, Layer::PoObj, bank, 0.0});
    spec.connections.push_back({out.p, r.rb, 1.0, ConnectionKind::Structural});
    spec.connections.push_back({r.rb, r.pred, 1.0, ConnectionKind::Structural});
    spec.connections.push_back({r.rb, r.obj, 1.0, ConnectionKind::Structural});
    out.roles.push_back(r);
  }
  out.network = Network(spec);
  return out;
}

/// Random distinct tags of the form "<letters><index>".
inline std::vector<std::string> random_tags(int k, std::mt19937& rng) {
  std::uniform_int_distribution<int> letter('a', 'z');
  std::vector<std::string> tags;
  for (int i = 0; i < k; ++i) {
    std::string t;
    for (int j = 0; j < 4; ++j) t.push_back(static_cast<char>(letter(rng)));
    tags.push_back(t + std::to_string(i));
  }
  return tags;
}

struct IsoPair {
  Network network;
  /// Generating correspondence, driver id -> recipient id, for every token.
  std::map<std::string, std::string> truth;
  DriveSchedule drive;
  long steps = 0;
};

/// A random proposition structure in DRIVER and an isomorphic copy with fresh
/// ids in RECIPIENT. POs carry random feature sets from a shared pool; an
/// argument may be shared between propositions. Each driver P is driven in
/// turn for a few cycles of its role bindings.
inline IsoPair iso_pair(std::mt19937& rng, int max_props = 3, int max_arity = 3, int max_per_layer = 4,
                        int pool = 32, int features_per_po = 4) {
  std::uniform_int_distribution<int> props_d(1, max_props);
  std::uniform_int_distribution<int> arity_d(1, max_arity);
  std::bernoulli_distribution share(0.3);

  std::vector<int> arity;
  do {
    arity.assign(static_cast<std::size_t>(props_d(rng)), 0);
    for (auto& a : arity) a = arity_d(rng);
  } while (std::accumulate(arity.begin(), arity.end(), 0) > max_per_layer);

  // Abstract structure: per proposition, per role, (pred index, obj index).
  struct Role { int pred; int obj; };
  std::vector<std::vector<Role>> structure;
  int n_pred = 0, n_obj = 0;
  for (std::size_t i = 0; i < arity.size(); ++i) {
    std::vector<Role> roles;
    std::set<int> used_here;
    for (int j = 0; j < arity[i]; ++j) {
      int obj = -1;
      if (share(rng)) {
        std::vector<int> candidates;
        for (int o = 0; o < n_obj; ++o)
          if (!used_here.count(o)) candidates.push_back(o);
        if (!candidates.empty())
          obj = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
      }
      if (obj < 0) obj = n_obj++;
      used_here.insert(obj);
      roles.push_back({n_pred++, obj});
    }
    structure.push_back(roles);
  }

  // Distinct random feature sets for every PO.
  std::set<std::vector<int>> seen;
  auto draw = [&] {
    std::vector<int> all(static_cast<std::size_t>(pool));
    std::iota(all.begin(), all.end(), 0);
    for (;;) {
      std::shuffle(all.begin(), all.end(), rng);
      std::vector<int> f(all.begin(), all.begin() + features_per_po);
      std::sort(f.begin(), f.end());
      if (seen.insert(f).second) return f;
    }
  };
  std::vector<std::vector<int>> pred_f, obj_f;
  for (int i = 0; i < n_pred; ++i) pred_f.push_back(draw());
  for (int i = 0; i < n_obj; ++i) obj_f.push_back(draw());

  NetworkSpec spec;
  for (int f = 0; f < pool; ++f) spec.semantics.push_back({"f" + std::to_string(f), "f" + std::to_string(f)});

  IsoPair out;
  const int total = static_cast<int>(arity.size()) + 2 * n_pred + n_obj;
  auto dtags = random_tags(total, rng);
  auto rtags = random_tags(total, rng);
  int next = 0;

  struct Ids { std::vector<std::string> p, rb, pred, obj; };
  Ids d, r;
  auto name = [&](const char* kind) {
    std::string di = std::string("d") + kind + "_" + dtags[static_cast<std::size_t>(next)];
    std::string ri = std::string("r") + kind + "_" + rtags[static_cast<std::size_t>(next)];
    ++next;
    out.truth[di] = ri;
    return std::pair{di, ri};
  };
  for (std::size_t i = 0; i < arity.size(); ++i) {
    auto [a, b] = name("p"); d.p.push_back(a); r.p.push_back(b);
  }
  for (int i = 0; i < n_pred; ++i) {
    auto [a, b] = name("rb"); d.rb.push_back(a); r.rb.push_back(b);
    auto [c, e] = name("pred"); d.pred.push_back(c); r.pred.push_back(e);
  }
  for (int i = 0; i < n_obj; ++i) {
    auto [a, b] = name("obj"); d.obj.push_back(a); r.obj.push_back(b);
  }

  std::vector<TokenSpec> recipient_tokens;
  for (auto [ids, bank, sink] : {std::tuple{&d, Bank::Driver, &spec.tokens}, std::tuple{&r, Bank::Recipient, &recipient_tokens}}) {
    for (const auto& id : ids->p) sink->push_back({id, Layer::P, bank, 0.0});
    for (const auto& id : ids->rb) sink->push_back({id, Layer::Rb, bank, 0.0});
    for (const auto& id : ids->pred) sink->push_back({id, Layer::PoPred, bank, 0.0});
    for (const auto& id : ids->obj) sink->push_back({id, Layer::PoObj, bank, 0.0});
    for (std::size_t i = 0; i < structure.size(); ++i)
      for (const auto& role : structure[i]) {
        const auto& rb = ids->rb[static_cast<std::size_t>(role.pred)];
        spec.connections.push_back({ids->p[i], rb, 1.0, ConnectionKind::Structural});
        spec.connections.push_back({rb, ids->pred[static_cast<std::size_t>(role.pred)], 1.0, ConnectionKind::Structural});
        spec.connections.push_back({rb, ids->obj[static_cast<std::size_t>(role.obj)], 1.0, ConnectionKind::Structural});
      }
    for (int i = 0; i < n_pred; ++i)
      for (int f : pred_f[static_cast<std::size_t>(i)])
        spec.connections.push_back({ids->pred[static_cast<std::size_t>(i)], "f" + std::to_string(f), 1.0, ConnectionKind::Semantic});
    for (int i = 0; i < n_obj; ++i)
      for (int f : obj_f[static_cast<std::size_t>(i)])
        spec.connections.push_back({ids->obj[static_cast<std::size_t>(i)], "f" + std::to_string(f), 1.0, ConnectionKind::Semantic});
  }
  std::shuffle(recipient_tokens.begin(), recipient_tokens.end(), rng);
  spec.tokens.insert(spec.tokens.end(), recipient_tokens.begin(), recipient_tokens.end());
  out.network = Network(spec);

  std::vector<std::size_t> order(arity.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  long t = 0;
  for (std::size_t i : order) {
    const long len = 3 * 10 * arity[i] + 10;
    out.drive.intervals.push_back({d.p[i], t, t + len, 1.0});
    t += len + 10;
  }
  out.steps = t;
  return out;
}

struct PropositionSet {
  Network network;
  std::vector<Proposition> propositions;
};

/// Random propositions over a small predicate and argument pool, at most
/// `max_roles` roles in total. Predicates and arguments may repeat across
/// roles; each role has its own RB and each proposition its own P.
inline PropositionSet random_propositions(std::mt19937& rng, int max_roles = 4, int max_arity = 3,
                                          Bank bank = Bank::Driver) {
  std::uniform_int_distribution<int> roles_d(1, max_roles);
  const int total = roles_d(rng);
  std::vector<int> arity;
  for (int left = total; left > 0;) {
    const int a = std::uniform_int_distribution<int>(1, std::min(left, max_arity))(rng);
    arity.push_back(a);
    left -= a;
  }
  auto tags = random_tags(3 * total + static_cast<int>(arity.size()) + 8, rng);
  std::size_t next = 0;
  auto fresh = [&](const char* kind) { return std::string(kind) + "_" + tags[next++]; };

  NetworkSpec spec;
  std::vector<std::string> preds, args;
  for (int i = 0; i < 3; ++i) {
    preds.push_back(fresh("pred"));
    args.push_back(fresh("arg"));
    spec.tokens.push_back({preds.back(), Layer::PoPred, bank, 0.0});
    spec.tokens.push_back({args.back(), Layer::PoObj, bank, 0.0});
  }
  std::uniform_int_distribution<std::size_t> pick(0, 2);

  PropositionSet out;
  for (int a : arity) {
    Proposition prop{fresh("prop"), {}};
    spec.tokens.push_back({prop.p_unit, Layer::P, bank, 0.0});
    for (int j = 0; j < a; ++j) {
      Role r{fresh("rb"), preds[pick(rng)], args[pick(rng)]};
      spec.tokens.push_back({r.rb, Layer::Rb, bank, 0.0});
      spec.connections.push_back({prop.p_unit, r.rb, 1.0, ConnectionKind::Structural});
      spec.connections.push_back({r.rb, r.predicate, 1.0, ConnectionKind::Structural});
      spec.connections.push_back({r.rb, r.argument, 1.0, ConnectionKind::Structural});
      prop.roles.push_back(r);
    }
    out.propositions.push_back(prop);
  }
  spec.propositions = out.propositions;
  out.network = Network(spec);
  return out;
}

}  // namespace predlearn::fixtures
