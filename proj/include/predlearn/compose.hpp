#pragma once

#include <vector>

#include <Eigen/Core>

#include "predlearn/error.hpp"

namespace predlearn {

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
struct RoleVectors {
  Vec<Scalar> predicate;
  Vec<Scalar> argument;
};

/// Superposition sum(p + a) and order-2 storage T = sum p a^T.
template <class Scalar>
struct ComposedStructure {
  Vec<Scalar> superposition;
  Mat<Scalar> storage;

  /// T^T p, L2-normalized; zero when nothing is retrieved.
  Vec<Scalar> retrieve(const Vec<Scalar>& predicate) const {
    if (predicate.size() != storage.rows())
      throw Error(ErrorCode::DimensionMismatch, "predicate vector does not match the storage tensor");
    Vec<Scalar> out = storage.transpose() * predicate;
    const Scalar norm = out.norm();
    if (norm > Scalar(0)) out /= norm;
    return out;
  }
};

template <class Scalar>
ComposedStructure<Scalar> compose_vectors(const std::vector<RoleVectors<Scalar>>& roles) {
  ComposedStructure<Scalar> out;
  if (roles.empty()) return out;
  const auto n = roles.front().predicate.size();
  out.superposition = Vec<Scalar>::Zero(n);
  out.storage = Mat<Scalar>::Zero(n, n);
  for (const auto& r : roles) {
    if (r.predicate.size() != n || r.argument.size() != n)
      throw Error(ErrorCode::DimensionMismatch, "role vectors must share one dimension");
    out.superposition += r.predicate + r.argument;
    out.storage.noalias() += r.predicate * r.argument.transpose();
  }
  return out;
}

}  // namespace predlearn
