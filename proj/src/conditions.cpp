#include "supcert/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "supcert/errors.hpp"
#include "supcert/kraus.hpp"

namespace supcert {

std::string to_string(Region r) {
    switch (r) {
        case Region::R1: return "R1";
        case Region::R2: return "R2";
        case Region::R3: return "R3";
        case Region::R4: return "R4";
        case Region::R5: return "R5";
        case Region::Other: return "Other";
    }
    return "Other";
}

Region region_from_flags(bool majorization, bool coc, bool l1_monotone) {
    // The five named regions are the boolean patterns realized by the
    // reference pairs; R3 carries the all-false pattern of its fixture.
    if (majorization && coc && l1_monotone) return Region::R1;
    if (majorization && !coc && !l1_monotone) return Region::R2;
    if (!majorization && !coc && !l1_monotone) return Region::R3;
    if (majorization && !coc && l1_monotone) return Region::R4;
    if (!majorization && !coc && l1_monotone) return Region::R5;
    return Region::Other;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_sorted(const TildeVector& t, double tol, const char* who) {
    if (!t.is_sorted(tol)) {
        std::ostringstream msg;
        msg << who << " tilde weights are not non-increasing";
        throw NotOrdered(msg.str());
    }
}

}  // namespace

ConditionCheck check_majorization(const TildeVector& psi, const TildeVector& phi,
                                  double tol) {
    if (psi.values.size() != phi.values.size())
        throw BadShape("tilde vectors differ in length");
    require_sorted(psi, tol, "source");
    require_sorted(phi, tol, "target");

    const Eigen::Index d = psi.values.size();
    ConditionCheck out;
    out.slack.resize(d);
    double cum_psi = 0.0, cum_phi = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        cum_psi += psi.values(k);
        cum_phi += phi.values(k);
        out.slack(k) = cum_phi - cum_psi;
    }
    // The final relation is an equality; fold it in as -|gap| so the single
    // margin >= -tol criterion covers every relation at once.
    out.slack(d - 1) = -std::abs(out.slack(d - 1));
    out.margin = out.slack.minCoeff();
    out.ok = out.margin >= -tol;
    return out;
}

OmegaMatrix build_omega(const PureState& phi, const std::vector<Permutation>& fns) {
    const int d = phi.basis.d;
    if (fns.empty()) throw BadPermutation("no index functions given");
    for (const auto& f : fns) {
        if (static_cast<int>(f.size()) != d || !is_permutation(f))
            throw BadPermutation("index function is not a permutation of the slots");
    }
    if (fns.front() != identity_permutation(d))
        throw BadPermutation("first index function must be the identity");

    OmegaMatrix omega;
    omega.entries.resize(static_cast<Eigen::Index>(fns.size()), d);
    for (std::size_t n = 0; n < fns.size(); ++n)
        for (int j = 0; j < d; ++j)
            omega.entries(static_cast<Eigen::Index>(n), j) =
                phi.coeffs(fns[n][j]) * phi.coeffs(fns[n][j]);
    return omega;
}

ConditionCheck check_coc(const PureState& psi, const PureState& phi,
                         const Eigen::VectorXd& probs, const OmegaMatrix& omega,
                         double tol) {
    const int d = psi.basis.d;
    if (!same_basis(psi.basis, phi.basis, tol))
        throw BadShape("states use different bases");
    if (omega.entries.cols() != d)
        throw BadShape("omega width does not match the dimension");
    if (probs.size() != omega.entries.rows())
        throw BadShape("probability count does not match omega rows");
    require_sorted(tilde(psi), tol, "source");

    ConditionCheck out;
    out.slack.resize(d - 1);
    for (int j = 1; j < d; ++j) {
        const double mixed = probs.dot(omega.entries.col(j));
        out.slack(j - 1) = psi.coeffs(j) * psi.coeffs(j) - mixed;
    }
    out.margin = out.slack.size() ? out.slack.minCoeff() : 0.0;
    out.ok = out.margin >= -tol;
    return out;
}

ConvertibilityReport classify_region(const PureState& psi, const PureState& phi,
                                     double tol) {
    if (!same_basis(psi.basis, phi.basis, tol))
        throw BadShape("states use different bases");

    auto [psi_c, psi_perm] = canonical_order(psi);
    auto [phi_c, phi_perm] = canonical_order(phi);
    (void)psi_perm;
    (void)phi_perm;

    const TildeVector t_psi = tilde(psi_c);
    const TildeVector t_phi = tilde(phi_c);

    ConvertibilityReport report;
    const ConditionCheck maj = check_majorization(t_psi, t_phi, tol);
    report.majorization = maj.ok;
    report.margins.majorization = maj.margin;

    report.l1_initial = l1_norm(psi_c);
    report.l1_final = l1_norm(phi_c);
    report.margins.l1 = report.l1_initial - report.l1_final;
    report.l1_monotone = report.margins.l1 >= -tol;

    // Completeness condition via the plan probabilities.  An inconsistent or
    // negative solution means no measurement set of this shape reproduces the
    // target, so the condition is reported false with the worst violation as
    // the margin.
    const IndexFunctionSet fns = select_index_functions(t_psi, t_phi);
    const RawProbSolution raw =
        solve_probability_system(t_psi.sorted(), t_phi.sorted(), fns.fns);
    if (raw.residual > tol) {
        report.coc = false;
        report.margins.coc = -raw.residual;
    } else if (raw.p.minCoeff() < -tol) {
        report.coc = false;
        report.margins.coc = raw.p.minCoeff();
    } else {
        const OmegaMatrix omega = build_omega(phi_c, fns.fns);
        const ConditionCheck coc = check_coc(psi_c, phi_c, raw.p, omega, tol);
        report.coc = coc.ok;
        report.margins.coc = coc.margin;
    }

    report.region =
        region_from_flags(report.majorization, report.coc, report.l1_monotone);
    return report;
}

StochasticForm stochastic_form(const TildeVector& psi, const TildeVector& phi,
                               const Eigen::VectorXd& probs,
                               const std::vector<Permutation>& fns, double tol) {
    const Eigen::Index d = psi.values.size();
    if (phi.values.size() != d) throw BadShape("tilde vectors differ in length");
    if (probs.size() != static_cast<Eigen::Index>(fns.size()))
        throw BadShape("probability count does not match index functions");
    for (const auto& f : fns)
        if (static_cast<Eigen::Index>(f.size()) != d || !is_permutation(f))
            throw BadPermutation("index function is not a permutation of the slots");

    StochasticForm form;
    form.dmatrix = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t n = 0; n < fns.size(); ++n)
        for (Eigen::Index k = 0; k < d; ++k)
            form.dmatrix(k, fns[n][k]) += probs(static_cast<Eigen::Index>(n));

    if (form.dmatrix.minCoeff() < -tol || form.dmatrix.maxCoeff() > 1.0 + tol)
        throw NotStochastic("matrix entries fall outside [0, 1]");
    for (Eigen::Index k = 0; k < d; ++k) {
        if (std::abs(form.dmatrix.row(k).sum() - 1.0) > tol ||
            std::abs(form.dmatrix.col(k).sum() - 1.0) > tol)
            throw NotStochastic("row or column sums deviate from 1");
    }
    return form;
}

QubitInterval qubit_closed_form(const PureState& psi, const PureState& phi) {
    if (psi.basis.d != 2) throw BadDimension("closed form applies to d = 2 only");
    if (!same_basis(psi.basis, phi.basis, kDefaultTol))
        throw BadShape("states use different bases");

    const PureState psi_c = canonical_order(psi).first;
    const PureState phi_c = canonical_order(phi).first;
    const double mu = psi.basis.gram(0, 1);

    const bool psi_rank1 = psi_c.coeffs(1) == 0.0;
    const bool phi_rank1 = phi_c.coeffs(1) == 0.0;
    if (psi_rank1 && phi_rank1) {
        // Free state to free state: reachable at every admissible overlap.
        return QubitInterval{true, -1.0, 1.0, false, false};
    }
    if (psi_rank1) throw RankMismatch("source has no superposition to spend");

    const double lambda = psi_c.coeffs(0) / psi_c.coeffs(1);
    double num, den;
    if (phi_rank1) {
        // kappa -> infinity; the bound degenerates to -1/lambda.
        num = -1.0;
        den = lambda;
    } else {
        const double kappa = phi_c.coeffs(0) / phi_c.coeffs(1);
        if (std::abs(kappa) < std::abs(lambda))
            throw Indeterminate("target is more spread than the source allows");
        num = -(kappa + lambda);
        den = 1.0 + kappa * lambda;
    }

    double bound;
    if (num == 0.0 && den == 0.0) {
        bound = lambda < 0.0 ? 1.0 : -1.0;  // lambda = -+1 against kappa = +-1
    } else if (den == 0.0) {
        bound = num > 0.0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    } else {
        bound = num / den;
    }

    QubitInterval out;
    if (lambda < 0.0) {
        out.lo = 0.0;
        out.closed_lo = true;
        out.hi = std::min(bound, 1.0);
        out.closed_hi = false;
        out.feasible = mu >= 0.0 && mu < bound;
    } else {
        out.lo = std::max(bound, -1.0);
        out.closed_lo = false;
        out.hi = 0.0;
        out.closed_hi = true;
        out.feasible = mu > bound && mu <= 0.0;
    }
    return out;
}

PhaseVerdict qubit_phase_case(const QubitPhaseCase& phases, const PureState& psi,
                              double tol) {
    if (psi.basis.d != 2) throw BadDimension("phase cases apply to d = 2 only");

    auto wrapped = [](double a) {
        double r = std::fmod(a, 2.0 * kPi);
        if (r < 0.0) r += 2.0 * kPi;
        return r;
    };
    auto is_zero_angle = [&](double a) {
        const double r = wrapped(a);
        return r <= tol || (2.0 * kPi - r) <= tol;
    };

    const double mu = psi.basis.gram(0, 1);
    PhaseVerdict v;
    if (!is_zero_angle(phases.alpha2)) {
        // A source phase obstructs every overlap except the orthogonal point,
        // whatever the target phase does.
        v.kind = PhaseKind::InitialPhaseOnly;
        v.feasible = std::abs(mu) <= tol;
    } else if (!is_zero_angle(phases.beta2)) {
        v.kind = PhaseKind::FinalPhaseOnly;
        v.feasible = std::abs(psi.coeffs(0) - psi.coeffs(1)) <= tol ||
                     std::abs(psi.coeffs(0) + psi.coeffs(1)) <= tol;
    } else {
        v.kind = PhaseKind::General;
        v.feasible = true;
    }
    return v;
}

}  // namespace supcert
