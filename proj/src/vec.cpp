#include "biht/vec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace biht {

SupportSet SparseUnitVector::support() const { return support_of(entries); }

void SparseUnitVector::validate() const {
  if (dim <= 0 || static_cast<int>(entries.size()) != dim)
    throw InvalidParams("SparseUnitVector: entries length must equal dim");
  if (budget < 1 || budget > dim)
    throw InvalidParams("SparseUnitVector: budget must lie in [1, dim]");
  int nnz = 0;
  for (double x : entries) {
    if (!std::isfinite(x)) throw InvalidParams("SparseUnitVector: non-finite entry");
    if (x != 0.0) ++nnz;
  }
  if (nnz > budget) throw InvalidParams("SparseUnitVector: more nonzeros than budget");
  const double n = norm(entries);
  if (std::fabs(n - 1.0) > 1e-12)
    throw InvalidParams("SparseUnitVector: norm deviates from 1 beyond 1e-12");
}

int sign_of(double a) {
  if (!std::isfinite(a)) throw InvalidParams("sign_of: non-finite input");
  return a >= 0.0 ? 1 : -1;
}

std::vector<std::int8_t> signs_of(const Vec& v) {
  std::vector<std::int8_t> s(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    s[i] = static_cast<std::int8_t>(sign_of(v[i]));
  return s;
}

double dot(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw InvalidParams("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

Vec normalized(const Vec& v) {
  const double n = norm(v);
  if (n == 0.0) throw DegenerateIterate("normalized: zero vector");
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

Vec top_k_threshold(const Vec& v, int k) {
  const int d = static_cast<int>(v.size());
  if (k < 1 || k > d) throw InvalidParams("top_k_threshold: k must lie in [1, dim]");
  if (k == d) return v;
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  // Total order: magnitude descending, then index ascending, so equal
  // magnitudes keep the lower index.
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&v](int a, int b) {
    const double ma = std::fabs(v[a]);
    const double mb = std::fabs(v[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  Vec out(d, 0.0);
  for (int i = 0; i < k; ++i) out[idx[i]] = v[idx[i]];
  return out;
}

Vec subset_threshold(const Vec& v, const SupportSet& J) {
  const int d = static_cast<int>(v.size());
  int prev = -1;
  for (int j : J) {
    if (j <= prev || j >= d)
      throw InvalidParams("subset_threshold: J must be sorted, unique, in [0, dim)");
    prev = j;
  }
  Vec out(d, 0.0);
  for (int j : J) out[j] = v[j];
  return out;
}

SupportSet support_of(const Vec& v) {
  SupportSet s;
  for (int i = 0; i < static_cast<int>(v.size()); ++i)
    if (v[i] != 0.0) s.push_back(i);
  return s;
}

SupportSet support_union(std::initializer_list<const SupportSet*> sets) {
  SupportSet out;
  for (const SupportSet* s : sets) out.insert(out.end(), s->begin(), s->end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SparseUnitVector random_sparse_unit(int d, int k, Rng& rng) {
  if (d < 1 || k < 1 || k > d)
    throw InvalidParams("random_sparse_unit: need 1 <= k <= d");
  // Partial Fisher-Yates draw of a uniform k-subset of [0, d).
  std::vector<int> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(d - i)));
    std::swap(idx[i], idx[j]);
  }
  SparseUnitVector out;
  out.dim = d;
  out.budget = k;
  out.entries.assign(d, 0.0);
  for (;;) {
    for (int i = 0; i < k; ++i) out.entries[idx[i]] = rng.next_normal();
    double n = 0.0;
    for (int i = 0; i < k; ++i) n += out.entries[idx[i]] * out.entries[idx[i]];
    if (n > 0.0) {
      n = std::sqrt(n);
      for (int i = 0; i < k; ++i) out.entries[idx[i]] /= n;
      return out;
    }
  }
}

double l2_error(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw InvalidParams("l2_error: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double t = u[i] - v[i];
    s += t * t;
  }
  return std::sqrt(s);
}

double angular_distance(const Vec& u, const Vec& v) {
  double c = dot(u, v);
  c = std::clamp(c, -1.0, 1.0);
  return std::acos(c);
}

}  // namespace biht
