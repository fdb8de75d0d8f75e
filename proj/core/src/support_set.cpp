#include "gbpf/support_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gbpf/errors.hpp"

namespace gbpf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Interval> normalize(std::vector<Interval> parts) {
  for (const auto& iv : parts) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi)) throw InvalidArgument("interval endpoint is NaN");
  }
  std::erase_if(parts, [](const Interval& iv) { return iv.empty(); });
  std::sort(parts.begin(), parts.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> out;
  for (const auto& iv : parts) {
    if (!out.empty() && iv.lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string fmt(const Interval& iv) { return "[" + fmt(iv.lo) + ", " + fmt(iv.hi) + "]"; }

}  // namespace

IntervalUnion::IntervalUnion(std::initializer_list<Interval> parts)
    : parts_(normalize(std::vector<Interval>(parts))) {}

IntervalUnion::IntervalUnion(std::vector<Interval> parts) : parts_(normalize(std::move(parts))) {}

IntervalUnion IntervalUnion::real_line() { return IntervalUnion{{-kInf, kInf}}; }

bool IntervalUnion::contains(double x) const {
  return std::any_of(parts_.begin(), parts_.end(), [x](const Interval& iv) { return iv.contains(x); });
}

IntervalUnion IntervalUnion::complement() const {
  if (parts_.empty()) return real_line();
  std::vector<Interval> out;
  double cursor = -kInf;
  for (const auto& iv : parts_) {
    if (iv.lo > cursor) out.push_back({cursor, iv.lo});
    cursor = iv.hi;
  }
  if (cursor < kInf) out.push_back({cursor, kInf});
  return IntervalUnion(std::move(out));
}

IntervalUnion IntervalUnion::intersect(const Interval& other) const {
  std::vector<Interval> out;
  for (const auto& iv : parts_) {
    Interval cut{std::max(iv.lo, other.lo), std::min(iv.hi, other.hi)};
    if (!cut.empty()) out.push_back(cut);
  }
  return IntervalUnion(std::move(out));
}

IntervalUnion IntervalUnion::intersect(const IntervalUnion& other) const {
  std::vector<Interval> out;
  for (const auto& iv : other.parts_) {
    const auto piece = intersect(iv);
    out.insert(out.end(), piece.parts_.begin(), piece.parts_.end());
  }
  return IntervalUnion(std::move(out));
}

IntervalUnion IntervalUnion::unite(const IntervalUnion& other) const {
  std::vector<Interval> all = parts_;
  all.insert(all.end(), other.parts_.begin(), other.parts_.end());
  return IntervalUnion(std::move(all));
}

IntervalUnion IntervalUnion::mirrored(double center) const {
  std::vector<Interval> out;
  out.reserve(parts_.size());
  for (const auto& iv : parts_) out.push_back({2.0 * center - iv.hi, 2.0 * center - iv.lo});
  return IntervalUnion(std::move(out));
}

IntegerSet::IntegerSet(std::initializer_list<std::int64_t> values) : IntegerSet(std::vector<std::int64_t>(values)) {}

IntegerSet::IntegerSet(std::vector<std::int64_t> values, std::vector<double> shares) {
  if (shares.empty()) shares.assign(values.size(), 1.0);
  if (shares.size() != values.size()) throw InvalidArgument("integer set: shares and values differ in length");
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  for (std::size_t i : order) {
    if (!(shares[i] >= 0.0 && shares[i] <= 1.0)) throw InvalidArgument("integer set: share outside [0, 1]");
    if (!values_.empty() && values_.back() == values[i]) throw InvalidArgument("integer set: repeated value");
    values_.push_back(values[i]);
    shares_.push_back(shares[i]);
  }
}

IntegerSet IntegerSet::range(std::int64_t first, std::int64_t last) {
  std::vector<std::int64_t> v;
  for (std::int64_t x = first; x <= last; ++x) v.push_back(x);
  return IntegerSet(std::move(v));
}

bool IntegerSet::contains(double x) const {
  if (x != std::floor(x)) return false;
  return share(static_cast<std::int64_t>(x)) > 0.0;
}

double IntegerSet::share(std::int64_t v) const {
  const auto it = std::lower_bound(values_.begin(), values_.end(), v);
  if (it == values_.end() || *it != v) return 0.0;
  return shares_[static_cast<std::size_t>(it - values_.begin())];
}

IntegerSet IntegerSet::intersect(const Interval& iv) const {
  std::vector<std::int64_t> v;
  std::vector<double> s;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (iv.contains(static_cast<double>(values_[i]))) {
      v.push_back(values_[i]);
      s.push_back(shares_[i]);
    }
  }
  return IntegerSet(std::move(v), std::move(s));
}

SupportSet::SupportSet(BoxUnion s) : rep_(std::move(s)) {
  const auto& b = std::get<BoxUnion>(rep_);
  for (const auto& box : b.boxes) {
    if (box.size() != b.dimension()) throw InvalidArgument("box union: boxes differ in dimension");
    if (box.empty()) throw InvalidArgument("box union: zero-dimensional box");
  }
}

SupportSet::SupportSet(Predicate s) : rep_(std::move(s)) {
  const auto& p = std::get<Predicate>(rep_);
  if (!p.test) throw InvalidArgument("predicate set without membership test");
  if (p.bounding_box.empty()) throw InvalidArgument("predicate set without bounding box");
  if (p.samples < 100) throw InvalidArgument("predicate set needs at least 100 Monte Carlo samples");
}

SupportSet SupportSet::box(Box b) { return SupportSet(BoxUnion{{std::move(b)}, false}); }

std::size_t SupportSet::dimension() const {
  if (const auto* b = get<BoxUnion>()) return b->dimension();
  if (const auto* p = get<Predicate>()) return p->bounding_box.size();
  return 1;
}

bool SupportSet::contains(std::span<const double> x) const {
  if (const auto* u = get<IntervalUnion>()) return x.size() == 1 && u->contains(x[0]);
  if (const auto* s = get<IntegerSet>()) return x.size() == 1 && s->contains(x[0]);
  if (const auto* b = get<BoxUnion>()) {
    bool inside = false;
    for (const auto& box : b->boxes) {
      if (box.size() != x.size()) continue;
      bool in_box = true;
      for (std::size_t k = 0; k < box.size() && in_box; ++k) in_box = box[k].contains(x[k]);
      if (in_box) {
        inside = true;
        break;
      }
    }
    return inside != b->complement;
  }
  const auto& p = std::get<Predicate>(rep_);
  bool inside = x.size() == p.bounding_box.size();
  for (std::size_t k = 0; k < x.size() && inside; ++k) inside = p.bounding_box[k].contains(x[k]);
  inside = inside && p.test(x);
  return inside != p.complement;
}

std::string SupportSet::describe() const {
  std::ostringstream os;
  if (const auto* u = get<IntervalUnion>()) {
    if (u->empty()) return "{}";
    for (std::size_t i = 0; i < u->parts().size(); ++i) os << (i ? " u " : "") << fmt(u->parts()[i]);
  } else if (const auto* s = get<IntegerSet>()) {
    os << "{";
    for (std::size_t i = 0; i < s->values().size(); ++i) {
      os << (i ? ", " : "") << s->values()[i];
      if (s->shares()[i] != 1.0) os << "*" << fmt(s->shares()[i]);
    }
    os << "}";
  } else if (const auto* b = get<BoxUnion>()) {
    if (b->complement) os << "complement of ";
    for (std::size_t i = 0; i < b->boxes.size(); ++i) {
      os << (i ? " u " : "");
      for (std::size_t k = 0; k < b->boxes[i].size(); ++k) os << (k ? " x " : "") << fmt(b->boxes[i][k]);
    }
  } else {
    const auto& p = std::get<Predicate>(rep_);
    os << (p.complement ? "complement of " : "") << p.label;
  }
  return os.str();
}

}  // namespace gbpf
