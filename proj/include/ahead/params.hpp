#pragma once

#include "ahead/autodiff.hpp"

#include <cstddef>
#include <map>
#include <random>
#include <string>

namespace ahead {

/// Every learnable tensor of the model, addressed by a stable path such as
/// "encoder.layer0.rel:writes.head1.W_att".
class ParamStore {
 public:
  void add(const std::string& path, Matrix value);
  bool contains(const std::string& path) const { return entries_.count(path) != 0; }
  const Matrix& get(const std::string& path) const;
  Matrix& get_mut(const std::string& path);
  const std::map<std::string, Matrix>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  bool all_finite() const;

  bool operator==(const ParamStore& o) const;

 private:
  std::map<std::string, Matrix> entries_;
};

/// Uniform Glorot initialization: U(-a, a), a = sqrt(6 / (rows + cols)).
Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);

/// Lazily places parameters from a store onto a tape as tracked leaves.
class BoundParams {
 public:
  BoundParams(ad::Tape& tape, const ParamStore& store) : tape_(tape), store_(store) {}

  ad::Var operator()(const std::string& path);
  ad::Tape& tape() { return tape_; }
  const ParamStore& store() const { return store_; }

  /// Gradients of every bound parameter that received one.
  std::map<std::string, Matrix> gradients() const;

 private:
  ad::Tape& tape_;
  const ParamStore& store_;
  std::map<std::string, ad::Var> vars_;
};

}  // namespace ahead
