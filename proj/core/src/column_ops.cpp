#include "epsbeta/column_ops.hpp"

#include <algorithm>

namespace epsbeta {

LocalColumn to_local(const ColumnProfile& p, const LocalFrame& fr) {
  LocalColumn out;
  double lower = p.lo;
  for (std::size_t k = 0; k < p.labels.size(); ++k) {
    const double upper = k < p.breakpoints.size() ? p.breakpoints[k] : p.hi;
    const double a = fr.u_of(lower);
    const double b = fr.u_of(upper);
    out.push_back(Interval{std::min(a, b), std::max(a, b), p.labels[k]});
    lower = upper;
  }
  if (fr.sign < 0) std::reverse(out.begin(), out.end());
  return out;
}

ColumnProfile to_grid(const LocalColumn& col, const ColumnProfile& like, const LocalFrame& fr) {
  ColumnProfile p;
  p.base = like.base;
  p.axis = like.axis;
  p.lo = like.lo;
  p.hi = like.hi;
  std::vector<Interval> iv;
  for (const Interval& s : col) {
    const double a = fr.t_of(s.lo);
    const double b = fr.t_of(s.hi);
    iv.push_back(Interval{std::min(a, b), std::max(a, b), s.label});
  }
  if (fr.sign < 0) std::reverse(iv.begin(), iv.end());
  for (std::size_t k = 0; k < iv.size(); ++k) {
    if (!(iv[k].hi > iv[k].lo)) continue;
    if (!p.labels.empty() && p.labels.back() == iv[k].label) continue;
    if (!p.labels.empty()) p.breakpoints.push_back(iv[k].lo);
    p.labels.push_back(iv[k].label);
  }
  if (p.labels.empty()) p.labels.push_back(0);
  return p;
}

Label label_at(const LocalColumn& col, double u) {
  for (const Interval& s : col)
    if (u < s.hi) return s.label;
  return col.empty() ? Label{0} : col.back().label;
}

double occupancy(const LocalColumn& col, Label l, double a, double b) {
  double total = 0.0;
  for (const Interval& s : col) {
    if (s.label != l) continue;
    const double len = std::min(s.hi, b) - std::max(s.lo, a);
    if (len > 0.0) total += len;
  }
  return total;
}

std::vector<double> breakpoints(const LocalColumn& col) {
  std::vector<double> out;
  for (std::size_t k = 1; k < col.size(); ++k)
    if (col[k].label != col[k - 1].label) out.push_back(col[k].lo);
  return out;
}

void merge_equal(LocalColumn& col) {
  LocalColumn out;
  for (const Interval& s : col) {
    if (!(s.hi > s.lo)) continue;
    if (!out.empty() && out.back().label == s.label) {
      out.back().hi = s.hi;
      continue;
    }
    out.push_back(s);
  }
  col = std::move(out);
}

LocalColumn transfer_column(const LocalColumn& col, Label i, Label j, double sm, double sp,
                            double delta) {
  if (delta == 0.0) return col;
  const double top = sp + delta;
  std::vector<double> cuts{sm, sm + delta, top};
  for (const Interval& s : col) {
    cuts.push_back(s.lo);
    cuts.push_back(s.hi);
    cuts.push_back(s.lo + delta);
    cuts.push_back(s.hi + delta);
  }
  const double lo = col.front().lo;
  const double hi = col.back().hi;
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double c) { return c < lo || c > hi; }),
             cuts.end());

  const bool base_is_i = label_at(col, sm) == i;
  LocalColumn out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    if (!(b > a)) continue;
    const double mid = 0.5 * (a + b);
    Label l = label_at(col, mid);
    if (mid > sm && mid < top && (l == i || l == j)) {
      const bool in_s = mid <= sm + delta ? base_is_i : label_at(col, mid - delta) == i;
      l = in_s ? i : j;
    }
    out.push_back(Interval{a, b, l});
  }
  merge_equal(out);
  return out;
}

}  // namespace epsbeta
