#include "supcert/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "supcert/errors.hpp"

namespace supcert {

namespace {

constexpr double kPi = 3.14159265358979323846;

void push(VerificationReport& report, const std::string& name, double deviation,
          double tol) {
    OracleCheck check;
    check.name = name;
    check.deviation = deviation;
    check.pass = deviation <= tol;
    report.checks.push_back(std::move(check));
}

bool plan_shape_ok(const GramBasis& basis, const TransformPlan& plan) {
    const int d = basis.d;
    if (!is_permutation(plan.psi_order) || !is_permutation(plan.phi_order))
        return false;
    if (static_cast<int>(plan.psi_order.size()) != d ||
        static_cast<int>(plan.phi_order.size()) != d)
        return false;
    const std::size_t n_ops = plan.index_functions.fns.size();
    if (n_ops == 0 || plan.probs.size() != static_cast<Eigen::Index>(n_ops))
        return false;
    if (plan.kraus_ops.size() != n_ops) return false;
    for (const auto& f : plan.index_functions.fns)
        if (static_cast<int>(f.size()) != d || !is_permutation(f)) return false;
    if (plan.index_functions.fns.front() != identity_permutation(d)) return false;
    for (const auto& k : plan.kraus_ops)
        if (k.rows() != d || k.cols() != d) return false;
    for (const auto& f : plan.completion)
        if (f.rows() != d || f.cols() != d) return false;
    if (plan.residual.rows() != d || plan.residual.cols() != d) return false;
    return true;
}

Eigen::VectorXd permuted(const Eigen::VectorXd& coeffs, const Permutation& order) {
    Eigen::VectorXd out(coeffs.size());
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) out(k) = coeffs(order[k]);
    return out;
}

// Distance of K c_j from the ray spanned by c_{f(j)}, maximized over j.
double freeness_deviation(const GramBasis& basis, const Eigen::MatrixXcd& op,
                          const Permutation& fn) {
    double worst = 0.0;
    for (int j = 0; j < basis.d; ++j) {
        const Eigen::VectorXcd image = op * basis.embedding.col(j);
        const Eigen::VectorXcd target = basis.embedding.col(fn[j]);
        const Eigen::VectorXcd off = image - target * target.dot(image);
        worst = std::max(worst, off.cwiseAbs().maxCoeff());
    }
    return worst;
}

// A completion operator must funnel every basis vector onto one common basis
// ray: rank one (second singular value ~ 0) with the principal left singular
// vector aligned to some embedded basis column.
double completion_freeness_deviation(const GramBasis& basis,
                                     const Eigen::MatrixXcd& op) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(op, Eigen::ComputeThinU);
    const double rank_dev =
        svd.singularValues().size() > 1 ? svd.singularValues()(1) : 0.0;
    const Eigen::VectorXcd principal = svd.matrixU().col(0);
    double best_align = 0.0;
    for (int i = 0; i < basis.d; ++i)
        best_align = std::max(best_align,
                              std::abs(basis.embedding.col(i).dot(principal)));
    return std::max(rank_dev, 1.0 - best_align);
}

}  // namespace

VerificationReport verify_plan(const GramBasis& basis, const PureState& psi,
                               const PureState& phi, const TransformPlan& plan,
                               double tol) {
    VerificationReport report;
    if (!plan_shape_ok(basis, plan)) {
        push(report, "plan_shape", 1.0, tol);
        report.all_pass = false;
        return report;
    }
    push(report, "plan_shape", 0.0, tol);

    const Eigen::VectorXd psi_c = permuted(psi.coeffs, plan.psi_order);
    const Eigen::VectorXd phi_c = permuted(phi.coeffs, plan.phi_order);
    const Eigen::VectorXcd big_psi = basis.embedding * psi_c;
    const Eigen::VectorXcd big_phi = basis.embedding * phi_c;

    push(report, "psi_normalized", std::abs(big_psi.squaredNorm() - 1.0), tol);
    push(report, "phi_normalized", std::abs(big_phi.squaredNorm() - 1.0), tol);
    push(report, "probability_sum", std::abs(plan.probs.sum() - 1.0), tol);
    push(report, "probability_nonneg", std::max(0.0, -plan.probs.minCoeff()), tol);

    const int d = basis.d;
    Eigen::MatrixXcd op_sum = Eigen::MatrixXcd::Zero(d, d);
    for (std::size_t n = 0; n < plan.kraus_ops.size(); ++n) {
        const Eigen::MatrixXcd& k = plan.kraus_ops[n];
        const double p = plan.probs(static_cast<Eigen::Index>(n));
        const std::string tag = "K" + std::to_string(n + 1);
        const Eigen::VectorXcd image = k * big_psi;
        push(report, "kraus_action_" + tag,
             (image - std::sqrt(std::max(p, 0.0)) * big_phi).cwiseAbs().maxCoeff(),
             tol);
        push(report, "kraus_measure_" + tag, std::abs(image.squaredNorm() - p), tol);
        push(report, "kraus_freeness_" + tag,
             freeness_deviation(basis, k, plan.index_functions.fns[n]), tol);
        op_sum += k.adjoint() * k;
    }

    for (std::size_t m = 0; m < plan.completion.size(); ++m) {
        const Eigen::MatrixXcd& f = plan.completion[m];
        const std::string tag = "F" + std::to_string(plan.kraus_ops.size() + m + 1);
        push(report, "completion_annihilates_" + tag,
             (f * big_psi).cwiseAbs().maxCoeff(), tol);
        push(report, "completion_freeness_" + tag,
             completion_freeness_deviation(basis, f), tol);
        op_sum += f.adjoint() * f;
    }

    const Eigen::MatrixXcd recomputed_residual =
        Eigen::MatrixXcd::Identity(d, d) - op_sum;
    if (d <= 3) {
        // With the completion included the operator sum must close exactly.
        push(report, "completeness", recomputed_residual.cwiseAbs().maxCoeff(),
             std::sqrt(tol));
    }

    Eigen::MatrixXcd kraus_only = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& k : plan.kraus_ops) kraus_only += k.adjoint() * k;
    const Eigen::MatrixXcd kraus_residual =
        Eigen::MatrixXcd::Identity(d, d) - kraus_only;
    push(report, "residual_consistency",
         (kraus_residual - plan.residual).cwiseAbs().maxCoeff(), tol);

    const Eigen::MatrixXcd herm = 0.5 * (kraus_residual + kraus_residual.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(herm);
    const double min_eig = eig.eigenvalues().minCoeff();
    push(report, "residual_min_eig", std::abs(min_eig - plan.residual_min_eig), tol);
    push(report, "residual_psd", std::max(0.0, -min_eig), tol);

    push(report, "l1_monotone", std::max(0.0, l1_norm(phi) - l1_norm(psi)), tol);

    report.all_pass =
        std::all_of(report.checks.begin(), report.checks.end(),
                    [](const OracleCheck& c) { return c.pass; });
    return report;
}

RegionCensus exhaustive_condition_scan(const GramBasis& basis, const GridSpec& grid,
                                       double tol) {
    std::vector<PureState> states;
    if (basis.d == 2) {
        for (int i = 0; i < grid.resolution; ++i) {
            const double theta = kPi * i / grid.resolution;
            Eigen::VectorXd v(2);
            v << std::cos(theta), std::sin(theta);
            states.push_back(make_state(basis, v, true, tol));
        }
    } else if (basis.d == 3) {
        for (int a = 0; a < grid.resolution; ++a) {
            const double theta = kPi * (a + 0.5) / grid.resolution;
            for (int b = 0; b < grid.resolution; ++b) {
                const double phi_angle = kPi * (b + 0.5) / grid.resolution;
                Eigen::VectorXd v(3);
                v << std::cos(theta), std::sin(theta) * std::cos(phi_angle),
                    std::sin(theta) * std::sin(phi_angle);
                states.push_back(make_state(basis, v, true, tol));
            }
        }
    } else {
        throw Unsupported("scan grids cover d = 2 and d = 3 only");
    }
    for (const auto& v : grid.extra) states.push_back(make_state(basis, v, true, tol));

    const long n = static_cast<long>(states.size());
    RegionCensus census;
    census.states = n;
    census.pairs = n * n;
    if (census.pairs > 1000000)
        throw GridTooLarge("scan exceeds the 10^6 pair budget");
    if (grid.record_pairs) census.pair_regions.reserve(census.pairs);

    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            const ConvertibilityReport report =
                classify_region(states[i], states[j], tol);
            ++census.counts[to_string(report.region)];
            if (grid.record_pairs) census.pair_regions.push_back(report.region);

            bool verified = false;
            try {
                const PlanOutcome outcome = plan(basis, states[i], states[j], tol);
                if (outcome.plan)
                    verified = verify_plan(basis, states[i], states[j],
                                           *outcome.plan, tol)
                                   .all_pass;
            } catch (const Error&) {
                verified = false;
            }
            if ((report.region == Region::R1) != verified) {
                ScanDisagreement disagreement;
                disagreement.i = static_cast<int>(i);
                disagreement.j = static_cast<int>(j);
                disagreement.region = report.region;
                disagreement.plan_verified = verified;
                census.disagreements.push_back(disagreement);
            }
        }
    }
    return census;
}

}  // namespace supcert
