#pragma once

#include <vector>

namespace supcert {

// Absolute tolerance used by every check unless the caller overrides it.
inline constexpr double kDefaultTol = 1e-9;

// A permutation of {0, ..., d-1} stored as its image list: perm[k] = f(k).
// Index functions, canonical reorderings and omega rows all use this form.
using Permutation = std::vector<int>;

bool is_permutation(const Permutation& p);
Permutation identity_permutation(int d);

// perm composed after base: result[k] = base[perm[k]].
Permutation compose(const Permutation& base, const Permutation& perm);

}  // namespace supcert
