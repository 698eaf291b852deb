#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "supcert/basis.hpp"
#include "supcert/errors.hpp"

using namespace supcert;

namespace {

// Hand-evaluated Gram determinant for the equal-overlap family:
// det = (1 - mu)^(d-1) * (1 + (d-1) mu).
double equal_mu_det(int d, double mu) {
    return std::pow(1.0 - mu, d - 1) * (1.0 + (d - 1) * mu);
}

}  // namespace

TEST_CASE("permutation helpers") {
    CHECK(is_permutation({0, 1, 2}));
    CHECK(is_permutation({2, 0, 1}));
    CHECK_FALSE(is_permutation({0, 0, 2}));
    CHECK_FALSE(is_permutation({0, 3, 1}));
    CHECK(identity_permutation(3) == Permutation{0, 1, 2});
    // result[k] = base[perm[k]]
    CHECK(compose({2, 0, 1}, {1, 2, 0}) == Permutation{0, 1, 2});
    CHECK(compose({0, 2, 1}, {0, 2, 1}) == Permutation{0, 1, 2});
}

TEST_CASE("equal-overlap basis reproduces the closed-form geometry") {
    const GramBasis basis = build_basis(2, 0.5);
    CHECK(basis.d == 2);
    CHECK(basis.gram(0, 1) == doctest::Approx(0.5));
    CHECK(basis.equal_mu.has_value());
    CHECK(*basis.equal_mu == doctest::Approx(0.5));

    // d = 2 embedding: c_1 = (1, 0), c_2 = (mu, sqrt(1 - mu^2)).
    CHECK(basis.embedding(0, 0).real() == doctest::Approx(1.0));
    CHECK(basis.embedding(1, 0).real() == doctest::Approx(0.0));
    CHECK(basis.embedding(0, 1).real() == doctest::Approx(0.5));
    CHECK(basis.embedding(1, 1).real() == doctest::Approx(std::sqrt(0.75)));

    // zeta_1 = zeta_2 = sqrt(1 - mu^2).
    CHECK(basis.zeta(0).real() == doctest::Approx(std::sqrt(0.75)));
    CHECK(basis.zeta(1).real() == doctest::Approx(std::sqrt(0.75)));
    CHECK(basis.zeta(0).imag() == doctest::Approx(0.0));
}

TEST_CASE("embedding and duals satisfy the defining relations") {
    Eigen::MatrixXd overlaps(3, 3);
    overlaps << 1.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 1.0;
    const GramBasis basis = build_basis(overlaps);
    CHECK_FALSE(basis.equal_mu.has_value());

    // B^dag B recovers the Gram matrix.
    const Eigen::MatrixXcd recovered =
        basis.embedding.adjoint() * basis.embedding;
    CHECK((recovered.real() - basis.gram).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(recovered.imag().cwiseAbs().maxCoeff() < 1e-12);

    // <c_k_perp | c_j> = zeta_k delta_kj with unit-norm duals and zeta > 0.
    const Eigen::MatrixXcd cross = basis.dual.adjoint() * basis.embedding;
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(basis.dual.col(k).norm() - 1.0) < 1e-12);
        CHECK(basis.zeta(k).real() > 0.0);
        CHECK(std::abs(cross(k, k) - basis.zeta(k)) < 1e-12);
        for (int j = 0; j < 3; ++j)
            if (j != k) CHECK(std::abs(cross(k, j)) < 1e-12);
    }

    // Embedding columns are unit vectors (unit Gram diagonal).
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(basis.embedding.col(i).norm() - 1.0) < 1e-12);
}

TEST_CASE("determinant fixture and reporting") {
    const GramBasis basis = build_basis(3, 0.9);
    CHECK(det_gram(basis) == doctest::Approx(0.028).epsilon(1e-12));
    CHECK(det_gram(basis) == doctest::Approx(equal_mu_det(3, 0.9)));
}

TEST_CASE("independence holds exactly on the open overlap interval") {
    for (int d = 2; d <= 8; ++d) {
        const auto [lo, hi] = independence_range(d);
        CHECK(lo == doctest::Approx(1.0 / (1.0 - d)));
        CHECK(hi == doctest::Approx(1.0));

        CHECK_NOTHROW(build_basis(d, 0.0));
        CHECK_NOTHROW(build_basis(d, lo + 1e-6));
        CHECK_NOTHROW(build_basis(d, hi - 1e-6));
        CHECK_THROWS_AS(build_basis(d, lo), NotPositiveDefinite);
        CHECK_THROWS_AS(build_basis(d, lo - 1e-6), NotPositiveDefinite);
        CHECK_THROWS_AS(build_basis(d, hi), NotPositiveDefinite);
        CHECK_THROWS_AS(build_basis(d, hi + 1e-6), NotPositiveDefinite);
    }
    CHECK_THROWS_AS(independence_range(1), BadDimension);
    CHECK_THROWS_AS(build_basis(1, 0.0), BadDimension);
}

TEST_CASE("overlap matrix validation") {
    Eigen::MatrixXd bad_diag(2, 2);
    bad_diag << 1.0, 0.2, 0.2, 0.9;
    CHECK_THROWS_AS(build_basis(bad_diag), BadShape);

    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.2, 0.3, 1.0;
    CHECK_THROWS_AS(build_basis(asym), BadShape);

    Eigen::MatrixXd rect(2, 3);
    rect.setZero();
    CHECK_THROWS_AS(build_basis(rect), BadShape);

    Eigen::MatrixXd indefinite(3, 3);
    indefinite << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
    CHECK_THROWS_AS(build_basis(indefinite), NotPositiveDefinite);
}

TEST_CASE("gram_inner is the basis metric") {
    const GramBasis basis = build_basis(2, 0.5);
    Eigen::VectorXd x(2), y(2);
    x << 3.0, -1.0;
    y << 4.0, -1.0;
    // x^T G y = 12 + 1 + 0.5 (-3 - 4) = 9.5
    CHECK(gram_inner(basis, x, y) == doctest::Approx(9.5));
    CHECK(gram_inner(basis, x, x) == doctest::Approx(7.0));

    Eigen::VectorXd wrong(3);
    wrong.setZero();
    CHECK_THROWS_AS(gram_inner(basis, x, wrong), BadShape);
}

TEST_CASE("same_basis compares overlap structure") {
    const GramBasis a = build_basis(3, 0.25);
    const GramBasis b = build_basis(3, 0.25);
    const GramBasis c = build_basis(3, 0.26);
    const GramBasis e = build_basis(2, 0.25);
    CHECK(same_basis(a, b));
    CHECK_FALSE(same_basis(a, c));
    CHECK_FALSE(same_basis(a, e));
}
