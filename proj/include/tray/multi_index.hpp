// Copyright (c) 2026 the tray authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TRAY_MULTI_INDEX_HPP
#define TRAY_MULTI_INDEX_HPP

#include "tray/common.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <vector>

namespace tray {

inline long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Canonical storage of symmetric rank-m tensors over `dim` axes: one slot per
// non-decreasing index tuple, with the multiplicity (number of distinct
// orderings) carried alongside so dense contractions stay exact.
class SymmetricIndexSet {
public:
  static constexpr int kMaxRank = 6;
  using Tuple = std::array<std::uint8_t, kMaxRank>;

  SymmetricIndexSet(int dim, int rank) : dim_(dim), rank_(rank) {
    if (dim < 1 || dim > 8 || rank < 0 || rank > kMaxRank)
      throw RankError("SymmetricIndexSet: unsupported dim/rank");
    Tuple t{};
    enumerate(t, 0, 0);
  }

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  int size() const { return static_cast<int>(tuples_.size()); }
  const Tuple& tuple(int c) const { return tuples_[c]; }
  double multiplicity(int c) const { return mult_[c]; }

  // Position of an arbitrary (unsorted) index tuple.
  int position(const int* idx) const {
    Tuple t{};
    for (int i = 0; i < rank_; ++i) t[i] = static_cast<std::uint8_t>(idx[i]);
    std::sort(t.begin(), t.begin() + rank_);
    return lookup_.at(key(t));
  }
  int position(std::initializer_list<int> idx) const {
    return position(std::data(idx));
  }

  static const SymmetricIndexSet& get(int dim, int rank) {
    static std::map<std::pair<int, int>, SymmetricIndexSet> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({dim, rank});
    if (it == cache.end())
      it = cache.emplace(std::make_pair(dim, rank), SymmetricIndexSet(dim, rank)).first;
    return it->second;
  }

private:
  static std::uint64_t key(const Tuple& t) {
    std::uint64_t k = 0;
    for (int i = 0; i < kMaxRank; ++i) k = (k << 8) | t[i];
    return k;
  }

  void enumerate(Tuple& t, int pos, int lo) {
    if (pos == rank_) {
      lookup_[key(t)] = static_cast<int>(tuples_.size());
      tuples_.push_back(t);
      mult_.push_back(orderings(t));
      return;
    }
    for (int i = lo; i < dim_; ++i) {
      t[pos] = static_cast<std::uint8_t>(i);
      enumerate(t, pos + 1, i);
    }
  }

  double orderings(const Tuple& t) const {
    std::array<int, 8> counts{};
    for (int i = 0; i < rank_; ++i) counts[t[i]]++;
    double m = 1;
    for (int i = 2; i <= rank_; ++i) m *= i;
    for (int c : counts)
      for (int i = 2; i <= c; ++i) m /= i;
    return m;
  }

  int dim_, rank_;
  std::vector<Tuple> tuples_;
  std::vector<double> mult_;
  std::map<std::uint64_t, int> lookup_;
};

}  // namespace tray

#endif  // TRAY_MULTI_INDEX_HPP
