#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>

#include "supcert/common.hpp"

namespace supcert {

// A linearly independent, non-orthogonal reference basis {|c_i>} described by
// its Gram matrix of pairwise overlaps.  Construction fixes one concrete
// embedding B (columns are the |c_i> as ordinary vectors, with B^dag B = gram)
// together with the dual family {|c_k_perp>} satisfying
// <c_k_perp|c_j> = zeta_k * delta_kj.  All downstream operator constructions
// consume only these matrices, so any embedding with the same Gram matrix
// yields the same certified quantities.
struct GramBasis {
    int d = 0;
    Eigen::MatrixXd gram;        // unit diagonal, symmetric, positive definite
    Eigen::MatrixXcd embedding;  // column i is |c_i>; upper-triangular Cholesky factor
    Eigen::MatrixXcd dual;       // column k is |c_k_perp>, unit norm
    Eigen::VectorXcd zeta;       // zeta_k = <c_k_perp|c_k>, real positive here
    std::optional<double> equal_mu;  // set when all off-diagonal overlaps coincide
};

// Equal-overlap constructor: every off-diagonal entry is mu.
GramBasis build_basis(int d, double mu, double tol = kDefaultTol);

// General constructor from a full overlap matrix.
GramBasis build_basis(const Eigen::MatrixXd& mu, double tol = kDefaultTol);

// Open interval of equal overlaps mu for which d vectors stay linearly
// independent: (1/(1-d), 1).
std::pair<double, double> independence_range(int d);

double det_gram(const GramBasis& basis);

// <x|y> for coefficient vectors expressed in the basis: x^T G y.
double gram_inner(const GramBasis& basis, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& y);

// True when both bases describe the same overlap structure within tol.
bool same_basis(const GramBasis& a, const GramBasis& b, double tol = kDefaultTol);

}  // namespace supcert
