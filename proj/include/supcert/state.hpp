#pragma once

#include <Eigen/Dense>
#include <utility>

#include "supcert/basis.hpp"
#include "supcert/common.hpp"

namespace supcert {

// Pure state |psi> = sum_i psi_i |c_i> with real coefficients, normalized so
// that gram_inner(coeffs, coeffs) = 1.
struct PureState {
    GramBasis basis;
    Eigen::VectorXd coeffs;
};

// The weights psi~_i = psi_i * (G psi)_i that drive every convertibility
// condition.  `values` stays in coefficient order; `order` is the permutation
// that lists them non-increasing (stable, ties keep the lower index first).
struct TildeVector {
    Eigen::VectorXd values;
    Permutation order;

    Eigen::VectorXd sorted() const;
    bool is_sorted(double tol = kDefaultTol) const;
};

PureState make_state(const GramBasis& basis, Eigen::VectorXd coeffs,
                     bool normalize, double tol = kDefaultTol);

TildeVector tilde(const PureState& state);

// sum_{i != j} |psi_i psi_j|; zero exactly on the free (basis) states.
double l1_norm(const PureState& state);

// Number of coefficients with |psi_i| > tol.
int superposition_rank(const PureState& state, double tol = kDefaultTol);

// Permutes coefficients until the tilde values are non-increasing and returns
// the permuted state plus the permutation used (new[k] = old[perm[k]]).  On an
// equal-overlap basis one pass sorts exactly, since coefficient swaps permute
// the tilde values; general bases are re-sorted iteratively.
std::pair<PureState, Permutation> canonical_order(const PureState& state);

enum class MaximalSign { Plus, Minus };

// The maximally superposed states: Plus is the uniform combination (requires
// 1/(1-d) < mu <= 0), Minus the qubit difference (d = 2, 0 <= mu < 1).
PureState maximal_state(const GramBasis& basis, MaximalSign sign,
                        double tol = kDefaultTol);

}  // namespace supcert
