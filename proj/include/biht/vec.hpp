#pragma once

#include <cstdint>
#include <vector>

#include "biht/errors.hpp"
#include "biht/rng.hpp"

namespace biht {

using Vec = std::vector<double>;

// Sorted, duplicate-free list of 0-based coordinate indices.
using SupportSet = std::vector<int>;

// A k-sparse unit vector stored densely together with its sparsity budget.
// The budget may exceed the number of nonzeros (an entry can be exactly
// zero by chance) but never the dimension.
struct SparseUnitVector {
  int dim = 0;
  int budget = 0;
  Vec entries;

  SupportSet support() const;
  // Throws InvalidParams unless entries has length dim, at most budget
  // nonzeros, and unit Euclidean norm to within 1e-12.
  void validate() const;
};

// Sign with the convention sign(0) = +1. Throws InvalidParams on NaN or
// infinite input.
int sign_of(double a);
std::vector<std::int8_t> signs_of(const Vec& v);

double dot(const Vec& u, const Vec& v);
double norm(const Vec& v);

// v / ||v||. Throws DegenerateIterate when v is identically zero.
Vec normalized(const Vec& v);

// Keeps the k entries of largest magnitude and zeroes the rest. Ties are
// broken toward the lower index so the result is deterministic. Requires
// 1 <= k <= dim; k = dim returns v unchanged.
Vec top_k_threshold(const Vec& v, int k);

// Keeps the coordinates listed in J and zeroes the rest. J must be sorted,
// duplicate free, with indices in [0, dim).
Vec subset_threshold(const Vec& v, const SupportSet& J);

// Indices of the exactly nonzero entries.
SupportSet support_of(const Vec& v);

// Sorted union of any number of support sets.
SupportSet support_union(std::initializer_list<const SupportSet*> sets);

// Uniformly random support of size k with independent standard normal
// entries, normalized. Requires 1 <= k <= d.
SparseUnitVector random_sparse_unit(int d, int k, Rng& rng);

// ||u - v||_2. Dimensions must agree.
double l2_error(const Vec& u, const Vec& v);

// arccos(<u, v>) for unit vectors, with the inner product clamped to
// [-1, 1] so accumulated rounding never steps outside the domain.
double angular_distance(const Vec& u, const Vec& v);

}  // namespace biht
