#include <algorithm>

#include "hones/types.hpp"

namespace hones {

Support::Support(Index n, std::vector<Index> indices) : member_(static_cast<std::size_t>(n), 0) {
  std::sort(indices.begin(), indices.end());
  for (Index j : indices) {
    if (j < 0 || j >= n) throw DimensionMismatch("support index out of range");
    if (!indices_.empty() && indices_.back() == j)
      throw InvalidProblem("support indices must be distinct");
    indices_.push_back(j);
    member_[static_cast<std::size_t>(j)] = 1;
  }
}

Support Support::full(Index n) {
  Support s(n);
  s.indices_.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) s.indices_[static_cast<std::size_t>(i)] = i;
  std::fill(s.member_.begin(), s.member_.end(), 1);
  return s;
}

Support Support::positive_part(const Vec& values, double threshold) {
  Support s(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) > threshold) {
      s.indices_.push_back(i);
      s.member_[static_cast<std::size_t>(i)] = 1;
    }
  }
  return s;
}

void Support::insert(Index j) {
  if (contains(j)) return;
  member_[static_cast<std::size_t>(j)] = 1;
  indices_.insert(std::upper_bound(indices_.begin(), indices_.end(), j), j);
}

void Support::erase(Index j) {
  if (!contains(j)) return;
  member_[static_cast<std::size_t>(j)] = 0;
  indices_.erase(std::lower_bound(indices_.begin(), indices_.end(), j));
}

std::vector<Index> Support::complement() const {
  std::vector<Index> out;
  out.reserve(member_.size() - indices_.size());
  for (std::size_t i = 0; i < member_.size(); ++i)
    if (member_[i] == 0) out.push_back(static_cast<Index>(i));
  return out;
}

Index symmetric_difference_size(const Support& a, const Support& b) {
  Index count = 0;
  for (Index j : a)
    if (!b.contains(j)) ++count;
  for (Index j : b)
    if (!a.contains(j)) ++count;
  return count;
}

}  // namespace hones
