#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "rankdrift/errors.hpp"
#include "rankdrift/rng.hpp"

namespace rankdrift {

// Indexable multiset: a treap keyed by value with subtree counts, giving
// O(log n) insert, erase-by-rank, k-th smallest, and count-below queries.
// Duplicate values are allowed (new duplicates land after existing ones).
// Priorities come from an internal SplitMix64 sequence with a fixed seed,
// so the tree shape depends only on the operation sequence and results are
// reproducible run to run.
template <class T, class Compare = std::less<T>>
class RankedMultiset {
 public:
  RankedMultiset() = default;
  explicit RankedMultiset(Compare cmp) : cmp_(std::move(cmp)) {}

  std::size_t size() const { return root_ == kNil ? 0 : nodes_[root_].size; }
  bool empty() const { return root_ == kNil; }

  void clear() {
    nodes_.clear();
    free_.clear();
    root_ = kNil;
  }

  void insert(const T& value) {
    const std::uint32_t id = alloc(value);
    auto [lhs, rhs] = split_le(root_, value);
    root_ = merge(merge(lhs, id), rhs);
  }

  // k-th smallest, 0-based.
  const T& at(std::size_t rank) const {
    if (rank >= size()) throw RankOutOfRange("rank out of range");
    std::uint32_t id = root_;
    for (;;) {
      const Node& node = nodes_[id];
      const std::size_t left = count(node.left);
      if (rank < left) {
        id = node.left;
      } else if (rank == left) {
        return node.key;
      } else {
        rank -= left + 1;
        id = node.right;
      }
    }
  }

  // Removes and returns the k-th smallest, 0-based.
  T erase_at(std::size_t rank) {
    if (rank >= size()) throw RankOutOfRange("rank out of range");
    auto [lhs, rest] = split_rank(root_, rank);
    auto [mid, rhs] = split_rank(rest, 1);
    root_ = merge(lhs, rhs);
    T value = std::move(nodes_[mid].key);
    release(mid);
    return value;
  }

  // Removes one element comparing equal to `value`; false if absent.
  bool erase_one(const T& value) {
    const std::size_t rank = count_lt(value);
    if (rank >= size()) return false;
    const T& candidate = at(rank);
    if (cmp_(candidate, value) || cmp_(value, candidate)) return false;
    erase_at(rank);
    return true;
  }

  bool contains(const T& value) const {
    const std::size_t rank = count_lt(value);
    if (rank >= size()) return false;
    const T& candidate = at(rank);
    return !cmp_(candidate, value) && !cmp_(value, candidate);
  }

  // #{x in set : x <= value}
  std::size_t count_le(const T& value) const {
    std::size_t total = 0;
    std::uint32_t id = root_;
    while (id != kNil) {
      const Node& node = nodes_[id];
      if (!cmp_(value, node.key)) {  // node.key <= value
        total += count(node.left) + 1;
        id = node.right;
      } else {
        id = node.left;
      }
    }
    return total;
  }

  // #{x in set : x < value}
  std::size_t count_lt(const T& value) const {
    std::size_t total = 0;
    std::uint32_t id = root_;
    while (id != kNil) {
      const Node& node = nodes_[id];
      if (cmp_(node.key, value)) {
        total += count(node.left) + 1;
        id = node.right;
      } else {
        id = node.left;
      }
    }
    return total;
  }

  // In-order visit of ranks [lo, hi).
  template <class Fn>
  void for_range(std::size_t lo, std::size_t hi, Fn&& fn) const {
    if (lo >= hi) return;
    visit(root_, 0, lo, hi, fn);
  }

  template <class Fn>
  void for_each(Fn&& fn) const {
    for_range(0, size(), fn);
  }

  std::vector<T> to_vector() const {
    std::vector<T> out;
    out.reserve(size());
    for_each([&](const T& v) { out.push_back(v); });
    return out;
  }

 private:
  static constexpr std::uint32_t kNil = 0xffffffffu;

  struct Node {
    T key;
    std::uint32_t left = kNil;
    std::uint32_t right = kNil;
    std::uint32_t size = 1;
    std::uint64_t priority = 0;
  };

  std::size_t count(std::uint32_t id) const {
    return id == kNil ? 0 : nodes_[id].size;
  }

  void pull(std::uint32_t id) {
    Node& node = nodes_[id];
    node.size =
        std::uint32_t(1 + count(node.left) + count(node.right));
  }

  std::uint32_t alloc(const T& value) {
    std::uint32_t id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
      nodes_[id] = Node{value};
    } else {
      id = std::uint32_t(nodes_.size());
      nodes_.push_back(Node{value});
    }
    nodes_[id].priority = splitmix64(priority_state_);
    return id;
  }

  void release(std::uint32_t id) { free_.push_back(id); }

  std::uint32_t merge(std::uint32_t a, std::uint32_t b) {
    if (a == kNil) return b;
    if (b == kNil) return a;
    if (nodes_[a].priority >= nodes_[b].priority) {
      nodes_[a].right = merge(nodes_[a].right, b);
      pull(a);
      return a;
    }
    nodes_[b].left = merge(a, nodes_[b].left);
    pull(b);
    return b;
  }

  // (elements <= value, elements > value)
  std::pair<std::uint32_t, std::uint32_t> split_le(std::uint32_t id,
                                                   const T& value) {
    if (id == kNil) return {kNil, kNil};
    Node& node = nodes_[id];
    if (!cmp_(value, node.key)) {
      auto [lhs, rhs] = split_le(node.right, value);
      node.right = lhs;
      pull(id);
      return {id, rhs};
    }
    auto [lhs, rhs] = split_le(node.left, value);
    node.left = rhs;
    pull(id);
    return {lhs, id};
  }

  // (first n elements, rest)
  std::pair<std::uint32_t, std::uint32_t> split_rank(std::uint32_t id,
                                                     std::size_t n) {
    if (id == kNil) return {kNil, kNil};
    Node& node = nodes_[id];
    const std::size_t left = count(node.left);
    if (n <= left) {
      auto [lhs, rhs] = split_rank(node.left, n);
      node.left = rhs;
      pull(id);
      return {lhs, id};
    }
    auto [lhs, rhs] = split_rank(node.right, n - left - 1);
    node.right = lhs;
    pull(id);
    return {id, rhs};
  }

  template <class Fn>
  void visit(std::uint32_t id, std::size_t offset, std::size_t lo,
             std::size_t hi, Fn& fn) const {
    if (id == kNil) return;
    const Node& node = nodes_[id];
    const std::size_t mid = offset + count(node.left);
    if (lo < mid) visit(node.left, offset, lo, hi, fn);
    if (mid >= lo && mid < hi) fn(node.key);
    if (hi > mid + 1) visit(node.right, mid + 1, lo, hi, fn);
  }

  Compare cmp_{};
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> free_;
  std::uint32_t root_ = kNil;
  std::uint64_t priority_state_ = 0x8f1bbcdc0d9f2e3cULL;
};

}  // namespace rankdrift
