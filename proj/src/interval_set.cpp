#include "branched/interval_set.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "json_support.hpp"

namespace branched {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* to_string(SetClass c) {
  switch (c) {
    case SetClass::Empty: return "empty";
    case SetClass::FiniteMeasure: return "finite-measure";
    case SetClass::HalfLine: return "half-line";
  }
  return "?";
}

IntervalSet::IntervalSet(std::initializer_list<Interval> parts)
    : parts_(parts) {
  normalize();
}

IntervalSet::IntervalSet(std::vector<Interval> parts)
    : parts_(std::move(parts)) {
  normalize();
}

IntervalSet IntervalSet::of(double lo, double hi) { return IntervalSet{{lo, hi}}; }

IntervalSet IntervalSet::whole_line() { return IntervalSet{{-kInf, kInf}}; }

void IntervalSet::normalize() {
  for (const Interval& p : parts_) {
    if (std::isnan(p.lo) || std::isnan(p.hi))
      throw std::invalid_argument("interval endpoint is NaN");
  }
  std::erase_if(parts_, [](const Interval& p) { return !(p.lo < p.hi); });
  std::sort(parts_.begin(), parts_.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Interval> merged;
  for (const Interval& p : parts_) {
    if (!merged.empty() && p.lo <= merged.back().hi)
      merged.back().hi = std::max(merged.back().hi, p.hi);
    else
      merged.push_back(p);
  }
  parts_ = std::move(merged);
}

double IntervalSet::measure() const {
  double m = 0.0;
  for (const Interval& p : parts_) m += p.hi - p.lo;
  return m;
}

SetClass IntervalSet::classify() const {
  if (parts_.empty()) return SetClass::Empty;
  if (std::isinf(parts_.front().lo) || std::isinf(parts_.back().hi))
    return SetClass::HalfLine;
  return SetClass::FiniteMeasure;
}

bool IntervalSet::contains(double x) const {
  auto it = std::upper_bound(
      parts_.begin(), parts_.end(), x,
      [](double v, const Interval& p) { return v < p.lo; });
  if (it == parts_.begin()) return false;
  --it;
  return x >= it->lo && x < it->hi;
}

bool IntervalSet::intersects(const IntervalSet& other) const {
  return !intersect(other).empty();
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  std::vector<Interval> all = parts_;
  all.insert(all.end(), other.parts_.begin(), other.parts_.end());
  return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  std::vector<Interval> out;
  auto a = parts_.begin();
  auto b = other.parts_.begin();
  while (a != parts_.end() && b != other.parts_.end()) {
    double lo = std::max(a->lo, b->lo);
    double hi = std::min(a->hi, b->hi);
    if (lo < hi) out.push_back({lo, hi});
    if (a->hi < b->hi)
      ++a;
    else
      ++b;
  }
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::reflect(double tau) const {
  std::vector<Interval> out;
  out.reserve(parts_.size());
  for (const Interval& p : parts_) out.push_back({tau - p.hi, tau - p.lo});
  return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::translate(double c) const {
  std::vector<Interval> out;
  out.reserve(parts_.size());
  for (const Interval& p : parts_) out.push_back({p.lo + c, p.hi + c});
  return IntervalSet(std::move(out));
}

namespace {

double endpoint_from_json(const nlohmann::json& v) {
  if (v.is_string()) {
    const std::string& s = v.get_ref<const std::string&>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::invalid_argument("bad interval endpoint '" + s + "'");
  }
  if (v.is_number()) return v.get<double>();
  throw std::invalid_argument("interval endpoint must be number or inf token");
}

}  // namespace

std::string IntervalSet::format() const {
  std::string out = "[";
  bool first = true;
  auto put = [&out](double v) {
    if (v == kInf) {
      out += "inf";
    } else if (v == -kInf) {
      out += "-inf";
    } else {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
    }
  };
  for (const Interval& p : parts_) {
    if (!first) out += ",";
    first = false;
    out += "[";
    put(p.lo);
    out += ",";
    put(p.hi);
    out += "]";
  }
  out += "]";
  return out;
}

IntervalSet IntervalSet::parse(const std::string& text) {
  // JSON lacks an infinity literal, so quote bare inf tokens first.
  std::string quoted;
  quoted.reserve(text.size() + 8);
  for (size_t i = 0; i < text.size();) {
    const size_t start = (text[i] == '-' || text[i] == '+') ? i + 1 : i;
    if (start + 3 <= text.size() && text.compare(start, 3, "inf") == 0) {
      quoted += '"';
      quoted.append(text, i, start + 3 - i);
      quoted += '"';
      i = start + 3;
    } else {
      quoted += text[i++];
    }
  }
  nlohmann::json j = nlohmann::json::parse(quoted);
  return interval_set_from_json(j);
}

IntervalSet interval_set_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("interval set must be an array");
  std::vector<Interval> parts;
  for (const auto& item : j) {
    if (!item.is_array() || item.size() != 2)
      throw std::invalid_argument("interval must be a [lo,hi] pair");
    parts.push_back({endpoint_from_json(item[0]), endpoint_from_json(item[1])});
  }
  return IntervalSet(std::move(parts));
}

std::vector<int> clip_to_grid(const IntervalSet& s, double t0, double dt,
                              int count) {
  std::vector<int> idx;
  for (const Interval& p : s.parts()) {
    // First n with t0 + n*dt >= lo, then walk until >= hi.
    double lo = std::max(p.lo, t0);
    int n = (lo <= t0) ? 0 : static_cast<int>(std::ceil((lo - t0) / dt));
    while (n < count && t0 + n * dt < p.lo) ++n;  // guard rounding of ceil
    while (n > 0 && t0 + (n - 1) * dt >= p.lo) --n;
    for (; n < count; ++n) {
      double t = t0 + n * dt;
      if (t >= p.hi) break;
      if (t >= p.lo) idx.push_back(n);
    }
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  return idx;
}

}  // namespace branched
