#include "supcert/state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "supcert/errors.hpp"

namespace supcert {

namespace {

// Stable descending argsort; ties keep the lower original index in front.
Permutation descending_order(const Eigen::VectorXd& v) {
    Permutation idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return v(a) > v(b); });
    return idx;
}

Eigen::VectorXd apply_order(const Eigen::VectorXd& v, const Permutation& order) {
    Eigen::VectorXd out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = v(order[k]);
    return out;
}

}  // namespace

Eigen::VectorXd TildeVector::sorted() const { return apply_order(values, order); }

bool TildeVector::is_sorted(double tol) const {
    for (Eigen::Index k = 0; k + 1 < values.size(); ++k)
        if (values(k) < values(k + 1) - tol) return false;
    return true;
}

PureState make_state(const GramBasis& basis, Eigen::VectorXd coeffs,
                     bool normalize, double tol) {
    if (coeffs.size() != basis.d)
        throw BadShape("coefficient count does not match basis dimension");
    if (coeffs.cwiseAbs().maxCoeff() == 0.0)
        throw ZeroVector("all coefficients are zero");

    const double q = gram_inner(basis, coeffs, coeffs);
    if (q <= 0.0) throw ZeroVector("coefficient vector has non-positive norm");

    if (normalize) {
        coeffs /= std::sqrt(q);
    } else if (std::abs(q - 1.0) > tol) {
        std::ostringstream msg;
        msg << "squared norm " << q << " differs from 1 beyond tolerance";
        throw NotNormalized(msg.str());
    }
    return PureState{basis, std::move(coeffs)};
}

TildeVector tilde(const PureState& state) {
    // psi~_i = psi_i (psi_i + sum_{j != i} mu_ij psi_j) = psi_i (G psi)_i.
    Eigen::VectorXd g = state.basis.gram * state.coeffs;
    TildeVector t;
    t.values = state.coeffs.cwiseProduct(g);
    t.order = descending_order(t.values);
    return t;
}

double l1_norm(const PureState& state) {
    const double abs_sum = state.coeffs.cwiseAbs().sum();
    return abs_sum * abs_sum - state.coeffs.squaredNorm();
}

int superposition_rank(const PureState& state, double tol) {
    int r = 0;
    for (Eigen::Index i = 0; i < state.coeffs.size(); ++i)
        if (std::abs(state.coeffs(i)) > tol) ++r;
    return r;
}

std::pair<PureState, Permutation> canonical_order(const PureState& state) {
    // On an equal-overlap basis a coefficient permutation permutes the tilde
    // values with it, so one pass lands sorted.  General overlap matrices get
    // a bounded re-sort loop; inputs outside its reach are returned best
    // effort and downstream ordering checks reject them.
    const int max_rounds = state.basis.equal_mu ? 1 : 8 * state.basis.d;
    PureState current = state;
    Permutation total = identity_permutation(state.basis.d);
    for (int round = 0; round < max_rounds; ++round) {
        TildeVector t = tilde(current);
        if (t.order == identity_permutation(state.basis.d)) break;
        current.coeffs = apply_order(current.coeffs, t.order);
        total = compose(total, t.order);
        if (state.basis.equal_mu) break;
    }
    return {std::move(current), std::move(total)};
}

PureState maximal_state(const GramBasis& basis, MaximalSign sign, double tol) {
    if (!basis.equal_mu)
        throw Unsupported("maximal states are defined for equal-overlap bases");
    const double mu = *basis.equal_mu;
    const int d = basis.d;

    if (sign == MaximalSign::Plus) {
        if (mu > tol) {
            std::ostringstream msg;
            msg << "uniform maximal state needs mu <= 0, got " << mu;
            throw OutOfRange(msg.str());
        }
        const double norm = d * (1.0 + (d - 1) * mu);
        if (norm <= tol) throw OutOfRange("overlap too close to the dependence limit");
        return PureState{basis,
                         Eigen::VectorXd::Constant(d, 1.0 / std::sqrt(norm))};
    }

    if (d != 2)
        throw Unsupported("the difference maximal state exists only for d = 2");
    if (mu < -tol) {
        std::ostringstream msg;
        msg << "difference maximal state needs mu >= 0, got " << mu;
        throw OutOfRange(msg.str());
    }
    const double norm = 2.0 * (1.0 - mu);
    Eigen::VectorXd c(2);
    c << 1.0 / std::sqrt(norm), -1.0 / std::sqrt(norm);
    return PureState{basis, std::move(c)};
}

}  // namespace supcert
