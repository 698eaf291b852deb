#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "supcert/common.hpp"
#include "supcert/conditions.hpp"
#include "supcert/state.hpp"

namespace supcert {

// The index functions f_n attached to the measurement operators K_n.  f_1 is
// the identity; every further f_n is a transposition, recorded in swap_pairs
// (0-based, pair for f_n at swap_pairs[n-1]).
struct IndexFunctionSet {
    std::vector<Permutation> fns;
    std::vector<std::pair<int, int>> swap_pairs;
};

// Appendix-style completion weights: x(j-2) = X_j for j = 2..d (diagonal
// coefficients of the free completion), y(j, l) = Y_jl for 1 <= j < l
// (0-based, only entries with j >= 1 are meaningful).  Positivity of every
// X_j coincides with the completeness-of-operators condition.
struct AppendixBQuantities {
    Eigen::VectorXd x;
    Eigen::MatrixXd y;
};

struct ResidualCertificate {
    Eigen::MatrixXcd residual;  // I - sum_n K_n^dag K_n
    bool psd = false;
    double min_eigenvalue = 0.0;
};

// Everything needed to execute and audit one deterministic transformation.
// Operators act on embedded vectors; psi_order/phi_order record the
// canonicalizing coefficient permutations applied before planning.
struct TransformPlan {
    IndexFunctionSet index_functions;
    Eigen::VectorXd probs;
    std::vector<Eigen::MatrixXcd> kraus_ops;
    std::vector<Eigen::MatrixXcd> completion;  // free operators, d <= 3 only
    Eigen::MatrixXcd residual;
    double residual_min_eig = 0.0;
    // "ge"/"le" per comparison psi~_k vs phi~_k, k = 2..d-1; empty for d = 2.
    std::vector<std::string> case_signature;
    std::vector<int> support;  // canonical slots carrying the source
    Permutation psi_order;
    Permutation phi_order;
};

struct PlanOutcome {
    ConvertibilityReport report;
    std::optional<TransformPlan> plan;  // set exactly when report.region == R1
};

// Picks the case row for the sorted tilde weights.  d = 2 and 3 have fixed
// rows; d = 4 selects among five rows by the signs of psi~_k - phi~_k (the
// mixed (<=, >=) pattern resolves by comparing psi~_1 + psi~_4 with
// phi~_1 + phi~_4); d >= 5 supports only the uniform sign patterns.
IndexFunctionSet select_index_functions(const TildeVector& psi,
                                        const TildeVector& phi);

// Solves sum_n p_n phi~_{f_n(k)} = psi~_k for the probability vector.
// Degenerate systems fall back to a least-squares solution and are rejected
// when the residual exceeds tol; negative components raise Infeasible.
Eigen::VectorXd solve_probabilities(const TildeVector& psi, const TildeVector& phi,
                                    const IndexFunctionSet& fns,
                                    double tol = kDefaultTol);

// Raw linear-system solution without feasibility enforcement, plus the
// infinity-norm residual of the solve.  Used by region classification, which
// must report rather than throw.
struct RawProbSolution {
    Eigen::VectorXd p;
    double residual = 0.0;
};

RawProbSolution solve_probability_system(const Eigen::VectorXd& psi_sorted,
                                         const Eigen::VectorXd& phi_sorted,
                                         const std::vector<Permutation>& fns);

// K_n = sum_k c_{k,n} |c_{f_n(k)}><c_k_perp| / zeta_k with
// c_{k,n} = sqrt(p_n) phi_{f_n(k)} / psi_k.  Requires every psi_k nonzero.
std::vector<Eigen::MatrixXcd> build_kraus(const GramBasis& basis,
                                          const PureState& psi,
                                          const PureState& phi,
                                          const IndexFunctionSet& fns,
                                          const Eigen::VectorXd& probs);

ResidualCertificate residual_certificate(const std::vector<Eigen::MatrixXcd>& kraus_ops,
                                         double tol = kDefaultTol);

// Completion weights X_j, Y_jl for d in {2, 3}.
AppendixBQuantities appendix_b_quantities(const GramBasis& basis,
                                          const PureState& psi,
                                          const PureState& phi,
                                          const Eigen::VectorXd& probs,
                                          const IndexFunctionSet& fns);

// Minimal set of free operators F_m with F_m psi = 0 and
// sum K^dag K + sum F^dag F = I, built by a rank-revealing factorization of
// the completion weights (trailing operators drop out, matching the
// convention that sets the redundant qubit coefficient to zero).
std::vector<Eigen::MatrixXcd> complete_free_operators(const GramBasis& basis,
                                                      const PureState& psi,
                                                      const AppendixBQuantities& q,
                                                      double tol = kDefaultTol);

// Full pipeline: canonical order, rank screening, case selection, probability
// solve, condition checks, operator synthesis, residual certificate and (for
// d <= 3) explicit completion.  Returns the plan when the pair sits in R1,
// otherwise the refusal report.
PlanOutcome plan(const GramBasis& basis, const PureState& psi,
                 const PureState& phi, double tol = kDefaultTol);

}  // namespace supcert
