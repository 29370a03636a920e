#pragma once

#include <algorithm>
#include <vector>

#include "fw/common.hpp"

namespace fw {

/// Weights below this are dropped after each blend; they decay by (1 - alpha)
/// factors and no longer affect results in double precision.
inline constexpr double kPruneWeight = 1e-15;

/// Convex-combination history of an iterate: x = sum_j w_j atom_j with
/// w_j >= 0 and sum_j w_j = 1.
template <class Atom>
class IterateLedger {
 public:
  struct Entry {
    double weight;
    Atom atom;
  };

  IterateLedger() = default;
  explicit IterateLedger(Atom start) { entries_.push_back({1.0, std::move(start)}); }

  /// x <- (1 - alpha) x + alpha * atom. Atoms comparing equal under `same`
  /// are merged into one entry.
  template <class Same>
  void blend(double alpha, Atom atom, Same&& same) {
    const double keep = 1.0 - alpha;
    for (auto& e : entries_) e.weight *= keep;
    auto hit = std::find_if(entries_.begin(), entries_.end(),
                            [&](const Entry& e) { return same(e.atom, atom); });
    if (hit != entries_.end())
      hit->weight += alpha;
    else if (alpha > 0.0)
      entries_.push_back({alpha, std::move(atom)});
    std::erase_if(entries_, [](const Entry& e) { return e.weight < kPruneWeight; });
    ++k_;
  }

  void blend(double alpha, Atom atom) {
    blend(alpha, std::move(atom), [](const Atom&, const Atom&) { return false; });
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  int iterations() const { return k_; }

  double weight_sum() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.weight;
    return s;
  }

 private:
  std::vector<Entry> entries_;
  int k_ = 0;
};

}  // namespace fw
