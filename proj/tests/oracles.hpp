#pragma once

// Independent reference computations used to check the library.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "predlearn/network.hpp"

namespace predlearn::oracles {

struct Correspondence {
  std::map<std::string, std::string> map;
  bool unique = true;
};

namespace detail {

inline std::vector<std::string> ids_in(const Network& net, Layer layer, Bank bank) {
  std::vector<std::string> out;
  for (const auto& t : net.tokens())
    if (t.layer == layer && t.bank == bank) out.push_back(t.id);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::string> children(const Network& net, const std::string& id, Layer layer) {
  std::vector<std::string> out;
  for (const auto& n : net.structural_neighbours(id))
    if (net.token(n).layer == layer) out.push_back(n);
  std::sort(out.begin(), out.end());
  return out;
}

/// Exhaustive search over bijections drivers -> recipients maximizing the
/// summed pair score. Marks the result non-unique on ties.
template <class PairScore>
void best_bijection(const std::vector<std::string>& drivers, const std::vector<std::string>& recipients,
                    PairScore score, Correspondence& out) {
  if (drivers.empty()) return;
  std::vector<std::size_t> perm(recipients.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = -1.0;
  int ties = 0;
  std::vector<std::size_t> arg;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < drivers.size(); ++i) s += score(drivers[i], recipients[perm[i]]);
    if (s > best + 1e-12) {
      best = s;
      ties = 1;
      arg = perm;
    } else if (std::abs(s - best) <= 1e-12) {
      ++ties;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (ties > 1) out.unique = false;
  for (std::size_t i = 0; i < drivers.size(); ++i) out.map[drivers[i]] = recipients[arg[i]];
}

}  // namespace detail

/// Exact DRIVER -> RECIPIENT correspondence. POs are matched by shared
/// semantic weight, then RBs by agreement with the PO matching, then P units
/// by agreement with the RB matching. Layers must have equal sizes.
inline Correspondence exact_correspondence(const Network& net) {
  using namespace detail;
  Correspondence out;
  for (Layer layer : {Layer::PoPred, Layer::PoObj}) {
    best_bijection(ids_in(net, layer, Bank::Driver), ids_in(net, layer, Bank::Recipient),
                   [&](const std::string& u, const std::string& v) {
                     auto wu = net.semantic_weights(u);
                     auto wv = net.semantic_weights(v);
                     double s = 0.0;
                     for (const auto& [label, w] : wu)
                       if (auto it = wv.find(label); it != wv.end()) s += std::min(w, it->second);
                     return s;
                   },
                   out);
  }
  auto agree = [&](Layer child_layer) {
    return [&, child_layer](const std::string& u, const std::string& v) {
      double s = 0.0;
      auto cv = children(net, v, child_layer);
      for (const auto& c : children(net, u, child_layer))
        if (std::find(cv.begin(), cv.end(), out.map[c]) != cv.end()) s += 1.0;
      return s;
    };
  };
  best_bijection(ids_in(net, Layer::Rb, Bank::Driver), ids_in(net, Layer::Rb, Bank::Recipient),
                 [&](const std::string& u, const std::string& v) {
                   return agree(Layer::PoPred)(u, v) + agree(Layer::PoObj)(u, v);
                 },
                 out);
  best_bijection(ids_in(net, Layer::P, Bank::Driver), ids_in(net, Layer::P, Bank::Recipient), agree(Layer::Rb), out);
  return out;
}

}  // namespace predlearn::oracles
