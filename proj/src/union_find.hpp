#pragma once

#include <numeric>
#include <vector>

namespace randhyp::detail {

class UnionFind {
public:
  explicit UnionFind(std::size_t n = 0) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t add() {
    parent_.push_back(parent_.size());
    rank_.push_back(0);
    return parent_.size() - 1;
  }

  std::size_t size() const { return parent_.size(); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

  /// Dense labels 0..k-1 in order of first appearance.
  std::vector<std::size_t> labels(std::size_t* count = nullptr) {
    std::vector<std::size_t> root_label(parent_.size(), SIZE_MAX), out(parent_.size());
    std::size_t next = 0;
    for (std::size_t i = 0; i < parent_.size(); ++i) {
      const std::size_t r = find(i);
      if (root_label[r] == SIZE_MAX) root_label[r] = next++;
      out[i] = root_label[r];
    }
    if (count) *count = next;
    return out;
  }

private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

} // namespace randhyp::detail
