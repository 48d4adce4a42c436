#pragma once

#include <initializer_list>
#include <string>
#include <vector>

namespace branched {

// Half-open interval [lo, hi). Endpoints may be +-infinity (IEEE values,
// never large finite stand-ins).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

enum class SetClass { Empty, FiniteMeasure, HalfLine };

const char* to_string(SetClass c);

// Finite union of disjoint half-open intervals, kept sorted and merged.
// Degenerate inputs (lo >= hi) vanish during normalization, so [a,b) u [b,c)
// collapses to [a,c) exactly.
class IntervalSet {
 public:
  IntervalSet() = default;
  IntervalSet(std::initializer_list<Interval> parts);
  explicit IntervalSet(std::vector<Interval> parts);

  static IntervalSet of(double lo, double hi);
  static IntervalSet whole_line();

  const std::vector<Interval>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }

  // +inf as soon as any part is unbounded.
  double measure() const;
  SetClass classify() const;

  bool contains(double x) const;
  bool intersects(const IntervalSet& other) const;

  IntervalSet unite(const IntervalSet& other) const;
  IntervalSet intersect(const IntervalSet& other) const;
  // {tau - x : x in set}; result is re-expressed with left-closed edges.
  IntervalSet reflect(double tau) const;
  IntervalSet translate(double c) const;

  bool operator==(const IntervalSet&) const = default;

  // Text form [[-inf,0],[1,inf]]; empty set is [].
  std::string format() const;
  static IntervalSet parse(const std::string& text);

 private:
  std::vector<Interval> parts_;
  void normalize();
};

// Grid indices n in [0, count) whose point t0 + n*dt lies in the set.
// Membership follows the half-open rule, so boundaries are deterministic.
std::vector<int> clip_to_grid(const IntervalSet& s, double t0, double dt,
                              int count);

}  // namespace branched
