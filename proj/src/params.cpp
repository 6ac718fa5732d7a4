#include "ahead/params.hpp"

#include <cmath>
#include <stdexcept>

namespace ahead {

void ParamStore::add(const std::string& path, Matrix value) {
  if (!entries_.emplace(path, std::move(value)).second) {
    throw std::logic_error("duplicate parameter path: " + path);
  }
}

const Matrix& ParamStore::get(const std::string& path) const {
  auto it = entries_.find(path);
  if (it == entries_.end()) throw std::out_of_range("missing parameter: " + path);
  return it->second;
}

Matrix& ParamStore::get_mut(const std::string& path) {
  auto it = entries_.find(path);
  if (it == entries_.end()) throw std::out_of_range("missing parameter: " + path);
  return it->second;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [path, m] : entries_) n += static_cast<std::size_t>(m.size());
  return n;
}

bool ParamStore::all_finite() const {
  for (const auto& [path, m] : entries_) {
    if (!m.allFinite()) return false;
  }
  return true;
}

bool ParamStore::operator==(const ParamStore& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  auto it = o.entries_.begin();
  for (const auto& [path, m] : entries_) {
    if (path != it->first) return false;
    if (m.rows() != it->second.rows() || m.cols() != it->second.cols()) return false;
    if (m != it->second) return false;
    ++it;
  }
  return true;
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  // Row-major fill so the draw order does not depend on storage order.
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

ad::Var BoundParams::operator()(const std::string& path) {
  auto it = vars_.find(path);
  if (it != vars_.end()) return it->second;
  ad::Var v = tape_.leaf(store_.get(path));
  vars_.emplace(path, v);
  return v;
}

std::map<std::string, Matrix> BoundParams::gradients() const {
  std::map<std::string, Matrix> out;
  for (const auto& [path, v] : vars_) {
    const Matrix& g = tape_.grad(v);
    if (g.size() != 0) out.emplace(path, g);
  }
  return out;
}

}  // namespace ahead
