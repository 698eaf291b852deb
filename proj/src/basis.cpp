#include "supcert/basis.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "supcert/errors.hpp"

namespace supcert {

bool is_permutation(const Permutation& p) {
    const int d = static_cast<int>(p.size());
    std::vector<bool> seen(d, false);
    for (int v : p) {
        if (v < 0 || v >= d || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

Permutation identity_permutation(int d) {
    Permutation p(d);
    for (int i = 0; i < d; ++i) p[i] = i;
    return p;
}

Permutation compose(const Permutation& base, const Permutation& perm) {
    Permutation out(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) out[k] = base[perm[k]];
    return out;
}

namespace {

void validate_overlap_matrix(const Eigen::MatrixXd& mu, double tol) {
    if (mu.rows() < 2 || mu.rows() != mu.cols()) {
        std::ostringstream msg;
        msg << "overlap matrix must be square with d >= 2, got " << mu.rows()
            << "x" << mu.cols();
        throw BadShape(msg.str());
    }
    for (Eigen::Index i = 0; i < mu.rows(); ++i) {
        if (std::abs(mu(i, i) - 1.0) > tol)
            throw BadShape("overlap matrix needs a unit diagonal");
        for (Eigen::Index j = i + 1; j < mu.cols(); ++j) {
            if (std::abs(mu(i, j) - mu(j, i)) > tol)
                throw BadShape("overlap matrix must be symmetric");
        }
    }
}

std::optional<double> detect_equal_mu(const Eigen::MatrixXd& mu, double tol) {
    const double first = mu(0, 1);
    for (Eigen::Index i = 0; i < mu.rows(); ++i)
        for (Eigen::Index j = 0; j < mu.cols(); ++j)
            if (i != j && std::abs(mu(i, j) - first) > tol) return std::nullopt;
    return first;
}

}  // namespace

GramBasis build_basis(int d, double mu, double tol) {
    if (d < 2) throw BadDimension("need at least two basis vectors");
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(d, d, mu);
    m.diagonal().setOnes();
    return build_basis(m, tol);
}

GramBasis build_basis(const Eigen::MatrixXd& mu, double tol) {
    validate_overlap_matrix(mu, tol);
    const int d = static_cast<int>(mu.rows());

    Eigen::MatrixXd gram = 0.5 * (mu + mu.transpose());
    gram.diagonal().setOnes();

    // Gate on the smallest eigenvalue, not the determinant: near the edge of
    // the admissible overlap range the determinant underflows any fixed
    // threshold long before the basis actually degenerates.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig <= tol) {
        std::ostringstream msg;
        msg << "smallest gram eigenvalue " << min_eig << " not above tolerance "
            << tol << "; vectors are dependent";
        throw NotPositiveDefinite(msg.str());
    }

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("cholesky factorization failed");

    // G = U^T U with U upper triangular; columns of U realize the |c_i>.
    Eigen::MatrixXd upper = llt.matrixL().transpose();

    GramBasis basis;
    basis.d = d;
    basis.gram = gram;
    basis.embedding = upper.cast<std::complex<double>>();

    // Raw duals B G^{-1} satisfy <raw_k|c_j> = delta_kj; normalizing column k
    // rescales that to zeta_k delta_kj with zeta_k = 1 / ||raw_k||.
    Eigen::MatrixXd raw_dual = upper * gram.inverse();
    Eigen::MatrixXd dual(d, d);
    for (int k = 0; k < d; ++k) dual.col(k) = raw_dual.col(k).normalized();
    basis.dual = dual.cast<std::complex<double>>();
    basis.zeta = (basis.dual.adjoint() * basis.embedding).diagonal();

    basis.equal_mu = detect_equal_mu(gram, tol);
    return basis;
}

std::pair<double, double> independence_range(int d) {
    if (d < 2) throw BadDimension("independence range needs d >= 2");
    return {1.0 / (1.0 - static_cast<double>(d)), 1.0};
}

double det_gram(const GramBasis& basis) { return basis.gram.determinant(); }

double gram_inner(const GramBasis& basis, const Eigen::VectorXd& x,
                  const Eigen::VectorXd& y) {
    if (x.size() != basis.d || y.size() != basis.d)
        throw BadShape("coefficient vector length does not match basis dimension");
    return x.dot(basis.gram * y);
}

bool same_basis(const GramBasis& a, const GramBasis& b, double tol) {
    if (a.d != b.d) return false;
    return (a.gram - b.gram).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace supcert
