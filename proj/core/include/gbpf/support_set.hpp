#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gbpf {

// Closed interval; either end may be infinite.
struct Interval {
  double lo;
  double hi;

  bool contains(double x) const { return x >= lo && x <= hi; }
  bool empty() const { return !(lo <= hi); }
  bool operator==(const Interval&) const = default;
};

// Sorted, pairwise disjoint closed intervals. Shared endpoints between a set
// and its complement carry no mass for continuous laws; discrete laws use
// IntegerSet for complements.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  IntervalUnion(std::initializer_list<Interval> parts);
  explicit IntervalUnion(std::vector<Interval> parts);

  static IntervalUnion real_line();

  const std::vector<Interval>& parts() const noexcept { return parts_; }
  bool empty() const noexcept { return parts_.empty(); }
  bool contains(double x) const;

  IntervalUnion complement() const;
  IntervalUnion intersect(const IntervalUnion& other) const;
  IntervalUnion intersect(const Interval& other) const;
  IntervalUnion unite(const IntervalUnion& other) const;
  IntervalUnion subtract(const IntervalUnion& other) const { return intersect(other.complement()); }
  // Reflection x -> 2c - x.
  IntervalUnion mirrored(double center) const;

  bool operator==(const IntervalUnion&) const = default;

 private:
  std::vector<Interval> parts_;
};

// Finite set of integers. shares[i] is the fraction of the point mass at
// values[i] that belongs to the set (1 unless several cells split one atom).
class IntegerSet {
 public:
  IntegerSet() = default;
  IntegerSet(std::initializer_list<std::int64_t> values);
  explicit IntegerSet(std::vector<std::int64_t> values, std::vector<double> shares = {});

  static IntegerSet range(std::int64_t first, std::int64_t last);

  const std::vector<std::int64_t>& values() const noexcept { return values_; }
  const std::vector<double>& shares() const noexcept { return shares_; }
  bool empty() const noexcept { return values_.empty(); }
  bool contains(double x) const;
  double share(std::int64_t v) const;

  IntegerSet intersect(const Interval& iv) const;

 private:
  std::vector<std::int64_t> values_;
  std::vector<double> shares_;
};

using Box = std::vector<Interval>;

// Union of axis-aligned closed boxes, or its complement.
struct BoxUnion {
  std::vector<Box> boxes;
  bool complement = false;

  std::size_t dimension() const { return boxes.empty() ? 0 : boxes.front().size(); }
};

// Arbitrary region given by a membership test. Masses and moments are Monte
// Carlo estimates from `samples` draws of the marginal with a fixed seed.
struct Predicate {
  std::function<bool(std::span<const double>)> test;
  Box bounding_box;
  std::size_t samples = 1000000;
  std::uint64_t seed = 0x5eed;
  bool complement = false;
  std::string label = "predicate";
};

class SupportSet {
 public:
  using Rep = std::variant<IntervalUnion, IntegerSet, BoxUnion, Predicate>;

  SupportSet() = default;
  SupportSet(IntervalUnion s) : rep_(std::move(s)) {}  // NOLINT(google-explicit-constructor)
  SupportSet(IntegerSet s) : rep_(std::move(s)) {}     // NOLINT(google-explicit-constructor)
  SupportSet(BoxUnion s);                              // NOLINT(google-explicit-constructor)
  SupportSet(Predicate s);                             // NOLINT(google-explicit-constructor)

  static SupportSet box(Box b);

  const Rep& rep() const noexcept { return rep_; }
  template <class T>
  const T* get() const noexcept {
    return std::get_if<T>(&rep_);
  }

  std::size_t dimension() const;
  // Membership of a point; atoms split by shares count as members when their share is positive.
  bool contains(std::span<const double> x) const;
  bool contains(double x) const { return contains(std::span<const double>(&x, 1)); }

  std::string describe() const;

 private:
  Rep rep_;
};

}  // namespace gbpf
