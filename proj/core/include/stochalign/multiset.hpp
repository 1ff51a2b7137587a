#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>

namespace stochalign {

/// Finite multiset over an ordered element type. Entries with count zero are never stored.
template <typename Element>
class Multiset {
 public:
  using Count = std::int64_t;
  using Storage = std::map<Element, Count>;

  Multiset() = default;
  Multiset(std::initializer_list<std::pair<const Element, Count>> init) {
    for (const auto& [e, c] : init) add(e, c);
  }

  Count count(const Element& e) const {
    auto it = counts_.find(e);
    return it == counts_.end() ? 0 : it->second;
  }

  void add(const Element& e, Count n = 1) {
    if (n < 0) throw std::invalid_argument("negative multiplicity");
    if (n == 0) return;
    counts_[e] += n;
  }

  /// Removes n copies of e; throws if fewer are present.
  void remove(const Element& e, Count n = 1) {
    if (n < 0) throw std::invalid_argument("negative multiplicity");
    if (n == 0) return;
    auto it = counts_.find(e);
    if (it == counts_.end() || it->second < n) throw std::invalid_argument("multiset underflow");
    it->second -= n;
    if (it->second == 0) counts_.erase(it);
  }

  bool empty() const noexcept { return counts_.empty(); }
  std::size_t distinct() const noexcept { return counts_.size(); }

  Count size() const noexcept {
    Count total = 0;
    for (const auto& [e, c] : counts_) total += c;
    return total;
  }

  /// Sub-multiset test: every element occurs in `other` at least as often as here.
  bool subset_of(const Multiset& other) const {
    for (const auto& [e, c] : counts_)
      if (other.count(e) < c) return false;
    return true;
  }

  /// Sum union.
  Multiset operator+(const Multiset& other) const {
    Multiset out = *this;
    for (const auto& [e, c] : other.counts_) out.add(e, c);
    return out;
  }

  /// Difference; requires `other` to be a sub-multiset of *this.
  Multiset operator-(const Multiset& other) const {
    if (!other.subset_of(*this)) throw std::invalid_argument("multiset difference of non-subset");
    Multiset out = *this;
    for (const auto& [e, c] : other.counts_) out.remove(e, c);
    return out;
  }

  const Storage& entries() const noexcept { return counts_; }
  auto begin() const { return counts_.begin(); }
  auto end() const { return counts_.end(); }

  friend bool operator==(const Multiset&, const Multiset&) = default;

 private:
  Storage counts_;
};

}  // namespace stochalign
