#include "supcert/kraus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "supcert/errors.hpp"

namespace supcert {

namespace {

Permutation swap_of(int d, int a, int b) {
    Permutation f = identity_permutation(d);
    std::swap(f[a], f[b]);
    return f;
}

// Table of measurement shapes keyed on the pointwise comparison of the two
// sorted weight vectors.  Every shape starts with the identity and continues
// with transpositions; the emitted order fixes which probability belongs to
// which operator.
IndexFunctionSet select_rows(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const int d = static_cast<int>(a.size());
    IndexFunctionSet set;
    set.fns.push_back(identity_permutation(d));
    auto add = [&](int i, int j) {
        set.fns.push_back(swap_of(d, i, j));
        set.swap_pairs.emplace_back(i, j);
    };

    if (d == 1) return set;
    if (d == 2) {
        add(0, 1);
        return set;
    }
    if (d == 3) {
        if (a(1) >= b(1)) {
            add(0, 2);
            add(0, 1);
        } else {
            add(0, 2);
            add(1, 2);
        }
        return set;
    }
    if (d == 4) {
        const bool s2 = a(1) >= b(1);
        const bool s3 = a(2) >= b(2);
        add(0, 3);
        if (s2 && s3) {
            add(0, 1);
            add(0, 2);
        } else if (s2 && !s3) {
            add(0, 1);
            add(2, 3);
        } else if (!s2 && !s3) {
            add(1, 3);
            add(2, 3);
        } else if (a(0) + a(3) >= b(0) + b(3)) {
            add(1, 3);
            add(1, 2);
        } else {
            add(0, 2);
            add(1, 2);
        }
        return set;
    }

    bool all_ge = true, all_le = true;
    for (int k = 1; k + 1 < d; ++k) {
        if (a(k) < b(k)) all_ge = false;
        if (a(k) > b(k)) all_le = false;
    }
    if (all_ge) {
        for (int n = 1; n < d; ++n) add(0, n);
    } else if (all_le) {
        for (int n = 1; n < d; ++n) add(n - 1, d - 1);
    } else {
        std::ostringstream msg;
        msg << "no measurement shape covers mixed weight orderings at d = " << d;
        throw UnsupportedCase(msg.str());
    }
    return set;
}

// Coefficient c_{k,n} for operator n acting on slot k, with the zero-slot
// convention: a vanishing source amplitude contributes nothing unless the
// target genuinely asks for weight there.
Eigen::MatrixXd kraus_coefficients(const Eigen::VectorXd& psi,
                                   const Eigen::VectorXd& phi,
                                   const std::vector<Permutation>& fns,
                                   const Eigen::VectorXd& probs, double tol) {
    const int d = static_cast<int>(psi.size());
    const int n_ops = static_cast<int>(fns.size());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d, n_ops);
    for (int n = 0; n < n_ops; ++n) {
        const double root_p = std::sqrt(std::max(probs(n), 0.0));
        for (int k = 0; k < d; ++k) {
            const double target = phi(fns[n][k]);
            if (psi(k) == 0.0) {
                if (probs(n) > tol && std::abs(target) > tol)
                    throw DivisionByZero(
                        "target demands weight on a slot the source leaves empty");
                continue;
            }
            c(k, n) = root_p * target / psi(k);
        }
    }
    return c;
}

Eigen::MatrixXcd assemble_operator(const GramBasis& basis, const Permutation& fn,
                                   const Eigen::VectorXd& coeff_col) {
    const int d = basis.d;
    Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        if (coeff_col(k) == 0.0) continue;
        K += (coeff_col(k) / basis.zeta(k)) * basis.embedding.col(fn[k]) *
             basis.dual.col(k).adjoint();
    }
    return K;
}

// Free operator with a single common target column t: every slot k is sent to
// the embedded vector for slot t, weighted by coeff(k).
Eigen::MatrixXcd assemble_rank_one(const GramBasis& basis, int target,
                                   const Eigen::VectorXd& coeff) {
    const int d = basis.d;
    Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        if (coeff(k) == 0.0) continue;
        F += (coeff(k) / basis.zeta(k)) * basis.embedding.col(target) *
             basis.dual.col(k).adjoint();
    }
    return F;
}

void validate_fns(int d, const std::vector<Permutation>& fns) {
    if (fns.empty()) throw BadPermutation("no index functions given");
    for (const auto& f : fns)
        if (static_cast<int>(f.size()) != d || !is_permutation(f))
            throw BadPermutation("index function is not a permutation of the slots");
    if (fns.front() != identity_permutation(d))
        throw BadPermutation("first index function must be the identity");
}

// Rank-revealing lower Cholesky factor of a PSD matrix, tolerating zero
// pivots.  Returns L with Z ~= L L^T; throws Incomplete when Z is visibly
// indefinite or inconsistent at a collapsed pivot.
Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& z, double tol) {
    const Eigen::Index r = z.rows();
    const double scale = std::max(1.0, z.cwiseAbs().maxCoeff());
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(r, r);
    for (Eigen::Index m = 0; m < r; ++m) {
        double s = z(m, m);
        for (Eigen::Index q = 0; q < m; ++q) s -= l(m, q) * l(m, q);
        if (s < -tol * scale)
            throw Incomplete("completion block is not positive semidefinite");
        if (s <= tol * scale) {
            const double off_tol = 8.0 * std::sqrt(tol * scale);
            for (Eigen::Index i = m + 1; i < r; ++i) {
                double resid = z(i, m);
                for (Eigen::Index q = 0; q < m; ++q) resid -= l(i, q) * l(m, q);
                if (std::abs(resid) > off_tol)
                    throw Incomplete("completion block is not positive semidefinite");
            }
            continue;
        }
        l(m, m) = std::sqrt(s);
        for (Eigen::Index i = m + 1; i < r; ++i) {
            double resid = z(i, m);
            for (Eigen::Index q = 0; q < m; ++q) resid -= l(i, q) * l(m, q);
            l(i, m) = resid / l(m, m);
        }
    }
    return l;
}

// Turn per-slot coefficient columns into rank-one free operators, dropping
// all-zero columns and assigning targets c_1, c_2, ... in column order.
std::vector<Eigen::MatrixXcd> operators_from_columns(const GramBasis& basis,
                                                     const Eigen::MatrixXd& cols,
                                                     double tol) {
    std::vector<Eigen::MatrixXcd> ops;
    int target = 0;
    for (Eigen::Index m = 0; m < cols.cols(); ++m) {
        if (cols.col(m).cwiseAbs().maxCoeff() <= tol) continue;
        ops.push_back(assemble_rank_one(basis, target++, cols.col(m)));
    }
    return ops;
}

}  // namespace

IndexFunctionSet select_index_functions(const TildeVector& psi,
                                        const TildeVector& phi) {
    if (psi.values.size() != phi.values.size())
        throw BadShape("tilde vectors differ in length");
    return select_rows(psi.sorted(), phi.sorted());
}

RawProbSolution solve_probability_system(const Eigen::VectorXd& psi_sorted,
                                         const Eigen::VectorXd& phi_sorted,
                                         const std::vector<Permutation>& fns) {
    const Eigen::Index d = psi_sorted.size();
    if (phi_sorted.size() != d) throw BadShape("tilde vectors differ in length");
    const Eigen::Index n = static_cast<Eigen::Index>(fns.size());
    if (n == 0) throw BadPermutation("no index functions given");

    Eigen::MatrixXd a(d, n);
    for (Eigen::Index col = 0; col < n; ++col)
        for (Eigen::Index k = 0; k < d; ++k)
            a(k, col) = phi_sorted(fns[static_cast<std::size_t>(col)][k]);

    RawProbSolution sol;
    sol.p = a.completeOrthogonalDecomposition().solve(psi_sorted);
    sol.residual = (a * sol.p - psi_sorted).cwiseAbs().maxCoeff();
    return sol;
}

Eigen::VectorXd solve_probabilities(const TildeVector& psi, const TildeVector& phi,
                                    const IndexFunctionSet& fns, double tol) {
    const RawProbSolution raw =
        solve_probability_system(psi.sorted(), phi.sorted(), fns.fns);
    if (raw.residual > tol)
        throw Degenerate("probability system has no consistent solution");
    if (std::abs(raw.p.sum() - 1.0) > tol)
        throw Degenerate("probabilities do not sum to one");
    if (raw.p.minCoeff() < -tol) {
        std::ostringstream msg;
        msg << "negative probability " << raw.p.minCoeff();
        throw Infeasible(msg.str());
    }
    Eigen::VectorXd p = raw.p;
    for (Eigen::Index n = 0; n < p.size(); ++n)
        if (p(n) < 0.0) p(n) = 0.0;
    return p;
}

std::vector<Eigen::MatrixXcd> build_kraus(const GramBasis& basis,
                                          const PureState& psi,
                                          const PureState& phi,
                                          const IndexFunctionSet& fns,
                                          const Eigen::VectorXd& probs) {
    const int d = basis.d;
    if (!same_basis(psi.basis, basis, kDefaultTol) ||
        !same_basis(phi.basis, basis, kDefaultTol))
        throw BadShape("states use different bases");
    validate_fns(d, fns.fns);
    if (probs.size() != static_cast<Eigen::Index>(fns.fns.size()))
        throw BadShape("probability count does not match index functions");
    if (probs.minCoeff() < -kDefaultTol)
        throw Infeasible("negative probability passed to the builder");

    const Eigen::MatrixXd c =
        kraus_coefficients(psi.coeffs, phi.coeffs, fns.fns, probs, kDefaultTol);
    std::vector<Eigen::MatrixXcd> ops;
    ops.reserve(fns.fns.size());
    for (std::size_t n = 0; n < fns.fns.size(); ++n)
        ops.push_back(assemble_operator(basis, fns.fns[n],
                                        c.col(static_cast<Eigen::Index>(n))));
    return ops;
}

ResidualCertificate residual_certificate(const std::vector<Eigen::MatrixXcd>& ops,
                                         double tol) {
    if (ops.empty()) throw BadShape("no operators given");
    const Eigen::Index d = ops.front().rows();
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& k : ops) {
        if (k.rows() != d || k.cols() != d)
            throw BadShape("operators differ in shape");
        sum += k.adjoint() * k;
    }
    ResidualCertificate cert;
    cert.residual = Eigen::MatrixXcd::Identity(d, d) - sum;
    const Eigen::MatrixXcd herm = 0.5 * (cert.residual + cert.residual.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(herm);
    cert.min_eigenvalue = eig.eigenvalues().minCoeff();
    cert.psd = cert.min_eigenvalue >= -tol;
    return cert;
}

AppendixBQuantities appendix_b_quantities(const GramBasis& basis,
                                          const PureState& psi,
                                          const PureState& phi,
                                          const Eigen::VectorXd& probs,
                                          const IndexFunctionSet& fns) {
    const int d = basis.d;
    if (d != 2 && d != 3)
        throw UnsupportedDimension("closed completion block is worked out for d <= 3");
    validate_fns(d, fns.fns);
    if (probs.size() != static_cast<Eigen::Index>(fns.fns.size()))
        throw BadShape("probability count does not match index functions");
    for (int k = 0; k < d; ++k)
        if (psi.coeffs(k) == 0.0)
            throw DivisionByZero("completion block needs full source support");

    // Z_{ij} compares the residual overlap of slots i and j after the Kraus
    // action against the bare overlap; the diagonal of the trailing block and
    // its off-diagonal entries feed X and Y directly.
    auto z_entry = [&](int i, int j) {
        double acc = 0.0;
        for (std::size_t n = 0; n < fns.fns.size(); ++n) {
            const int fi = fns.fns[n][i];
            const int fj = fns.fns[n][j];
            acc += probs(static_cast<Eigen::Index>(n)) * phi.coeffs(fi) *
                   phi.coeffs(fj) * basis.gram(fi, fj);
        }
        return basis.gram(i, j) - acc / (psi.coeffs(i) * psi.coeffs(j));
    };

    AppendixBQuantities q;
    q.x = Eigen::VectorXd::Zero(d - 1);
    q.y = Eigen::MatrixXd::Zero(d, d);
    for (int j = 1; j < d; ++j) {
        double acc = 0.0;
        for (int i = 0; i < d; ++i) {
            if (i == j) continue;
            acc += psi.coeffs(i) * z_entry(i, j);
        }
        q.x(j - 1) = -acc / psi.coeffs(j);
    }
    for (int j = 1; j < d; ++j)
        for (int l = j + 1; l < d; ++l)
            q.y(j, l) = z_entry(j, l);
    return q;
}

std::vector<Eigen::MatrixXcd> complete_free_operators(const GramBasis& basis,
                                                      const PureState& psi,
                                                      const AppendixBQuantities& q,
                                                      double tol) {
    const int d = basis.d;
    if (d != 2 && d != 3)
        throw UnsupportedDimension("closed completion block is worked out for d <= 3");
    if (q.x.size() != d - 1) throw BadShape("completion block has the wrong size");
    if (q.x.minCoeff() < -tol)
        throw Incomplete("negative completion weight; operators cannot close the sum");
    if (psi.coeffs(0) == 0.0)
        throw DivisionByZero("leading source amplitude vanishes");

    const int r = d - 1;
    Eigen::MatrixXd z(r, r);
    for (int j = 0; j < r; ++j) {
        z(j, j) = std::max(q.x(j), 0.0);
        for (int l = j + 1; l < r; ++l) {
            z(j, l) = q.y(j + 1, l + 1);
            z(l, j) = z(j, l);
        }
    }

    const Eigen::MatrixXd l = psd_cholesky(z, tol);

    // Rows j = 2..d come straight from the factor; the leading row is pinned
    // by the requirement that every column annihilate the source state.
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(d, r);
    for (int m = 0; m < r; ++m) {
        double lead = 0.0;
        for (int j = 1; j < d; ++j) {
            cols(j, m) = l(j - 1, m);
            lead += psi.coeffs(j) * cols(j, m);
        }
        cols(0, m) = -lead / psi.coeffs(0);
    }
    return operators_from_columns(basis, cols, tol);
}

namespace {

// Operators for a source that leaves some slots empty.  On the support the
// usual ratio applies; an empty slot k gets the shared ratio
// t_k = (G psi)_k / (G phi)_k with target k, the unique per-slot choice that
// keeps the source in the kernel of the residual.
std::vector<Eigen::MatrixXcd> build_kraus_restricted(
    const GramBasis& basis, const Eigen::VectorXd& psi, const Eigen::VectorXd& phi,
    const std::vector<Permutation>& fns, const Eigen::VectorXd& probs,
    const std::vector<int>& support, double tol) {
    const int d = basis.d;
    std::vector<bool> in_support(d, false);
    for (int k : support) in_support[k] = true;

    const Eigen::VectorXd g_psi = basis.gram * psi;
    const Eigen::VectorXd g_phi = basis.gram * phi;
    Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
    for (int k = 0; k < d; ++k) {
        if (in_support[k]) continue;
        if (std::abs(g_phi(k)) <= tol) {
            if (std::abs(g_psi(k)) > tol)
                throw Incomplete("empty slot cannot carry its residual overlap");
            continue;
        }
        t(k) = g_psi(k) / g_phi(k);
    }

    std::vector<Eigen::MatrixXcd> ops;
    ops.reserve(fns.size());
    for (std::size_t n = 0; n < fns.size(); ++n) {
        const double root_p = std::sqrt(std::max(probs(static_cast<Eigen::Index>(n)), 0.0));
        Eigen::VectorXd coeff = Eigen::VectorXd::Zero(d);
        for (int k = 0; k < d; ++k)
            coeff(k) = in_support[k] ? root_p * phi(fns[n][k]) / psi(k)
                                     : root_p * t(k);
        ops.push_back(assemble_operator(basis, fns[n], coeff));
    }
    return ops;
}

// Completion fallback used when the closed d <= 3 block does not apply
// (restricted support): factor the residual pulled back through the
// embedding, B^H R B, whose PSD square root gives the coefficient columns.
std::vector<Eigen::MatrixXcd> complete_from_residual(const GramBasis& basis,
                                                     const Eigen::MatrixXcd& residual,
                                                     double tol) {
    const Eigen::MatrixXcd z =
        basis.embedding.adjoint() * residual * basis.embedding;
    const Eigen::MatrixXcd herm = 0.5 * (z + z.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(herm);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -tol * scale)
        throw Incomplete("completion block is not positive semidefinite");

    const int d = basis.d;
    Eigen::MatrixXd cols = Eigen::MatrixXd::Zero(d, d);
    for (int m = 0; m < d; ++m) {
        const double lam = std::max(eig.eigenvalues()(m), 0.0);
        if (lam <= tol * scale) continue;
        const Eigen::VectorXcd vec = eig.eigenvectors().col(m);
        // Coefficients are real for real Gram data; take the real part after
        // rotating away a global phase.
        Eigen::Index top;
        vec.cwiseAbs().maxCoeff(&top);
        const std::complex<double> phase = vec(top) / std::abs(vec(top));
        cols.col(m) = (std::sqrt(lam) * (vec / phase)).real();
    }
    return operators_from_columns(basis, cols, std::sqrt(tol));
}

std::vector<std::string> signature_tags(const Eigen::VectorXd& a,
                                        const Eigen::VectorXd& b) {
    std::vector<std::string> sig;
    for (Eigen::Index k = 1; k + 1 < a.size(); ++k)
        sig.push_back(a(k) >= b(k) ? "ge" : "le");
    return sig;
}

}  // namespace

PlanOutcome plan(const GramBasis& basis, const PureState& psi, const PureState& phi,
                 double tol) {
    if (!same_basis(psi.basis, basis, tol) || !same_basis(phi.basis, basis, tol))
        throw BadShape("states use different bases");
    const int d = basis.d;

    auto [psi_c, psi_perm] = canonical_order(psi);
    auto [phi_c, phi_perm] = canonical_order(phi);

    std::vector<int> support, phi_support;
    for (int k = 0; k < d; ++k) {
        if (std::abs(psi_c.coeffs(k)) > tol) support.push_back(k);
        if (std::abs(phi_c.coeffs(k)) > tol) phi_support.push_back(k);
    }
    if (phi_support.size() > support.size())
        throw RankIncrease("target needs more superposed slots than the source has");
    if (!std::includes(support.begin(), support.end(), phi_support.begin(),
                       phi_support.end()))
        throw UnsupportedCase("target support is not aligned with the source support");

    // Zero the sub-threshold amplitudes so the builder's zero-slot convention
    // sees them as genuinely empty.
    for (int k = 0; k < d; ++k) {
        if (std::abs(psi_c.coeffs(k)) <= tol) psi_c.coeffs(k) = 0.0;
        if (std::abs(phi_c.coeffs(k)) <= tol) phi_c.coeffs(k) = 0.0;
    }

    const TildeVector t_psi = tilde(psi_c);
    const TildeVector t_phi = tilde(phi_c);
    const int r = static_cast<int>(support.size());

    Eigen::VectorXd sub_tpsi(r), sub_tphi(r);
    for (int s = 0; s < r; ++s) {
        sub_tpsi(s) = t_psi.values(support[s]);
        sub_tphi(s) = t_phi.values(support[s]);
    }

    IndexFunctionSet sub_fns = select_rows(sub_tpsi, sub_tphi);
    const RawProbSolution raw =
        solve_probability_system(sub_tpsi, sub_tphi, sub_fns.fns);

    // Lift each sub-problem shape to a full permutation, identity outside the
    // support.
    IndexFunctionSet fns;
    fns.swap_pairs = sub_fns.swap_pairs;
    for (auto& pair : fns.swap_pairs) {
        pair.first = support[pair.first];
        pair.second = support[pair.second];
    }
    for (const auto& sub : sub_fns.fns) {
        Permutation full = identity_permutation(d);
        for (int s = 0; s < r; ++s) full[support[s]] = support[sub[s]];
        fns.fns.push_back(std::move(full));
    }

    PlanOutcome outcome;
    ConvertibilityReport& report = outcome.report;
    const ConditionCheck maj = check_majorization(t_psi, t_phi, tol);
    report.majorization = maj.ok;
    report.margins.majorization = maj.margin;
    report.l1_initial = l1_norm(psi_c);
    report.l1_final = l1_norm(phi_c);
    report.margins.l1 = report.l1_initial - report.l1_final;
    report.l1_monotone = report.margins.l1 >= -tol;

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

    if (report.region != Region::R1) return outcome;

    TransformPlan tp;
    tp.index_functions = fns;
    tp.probs = raw.p;
    for (Eigen::Index n = 0; n < tp.probs.size(); ++n)
        if (tp.probs(n) < 0.0) tp.probs(n) = 0.0;
    tp.support = support;
    tp.psi_order = psi_perm;
    tp.phi_order = phi_perm;
    tp.case_signature = signature_tags(sub_tpsi, sub_tphi);
    tp.kraus_ops =
        r == d ? build_kraus(basis, psi_c, phi_c, fns, tp.probs)
               : build_kraus_restricted(basis, psi_c.coeffs, phi_c.coeffs, fns.fns,
                                        tp.probs, support, tol);

    ResidualCertificate cert = residual_certificate(tp.kraus_ops, tol);
    if (!cert.psd)
        throw Incomplete("Kraus sum overshoots the identity");

    if (d <= 3) {
        if (r == d) {
            const AppendixBQuantities q =
                appendix_b_quantities(basis, psi_c, phi_c, tp.probs, fns);
            tp.completion = complete_free_operators(basis, psi_c, q, tol);
        } else {
            tp.completion = complete_from_residual(basis, cert.residual, tol);
        }
        std::vector<Eigen::MatrixXcd> all = tp.kraus_ops;
        all.insert(all.end(), tp.completion.begin(), tp.completion.end());
        const ResidualCertificate closed = residual_certificate(all, tol);
        if (closed.residual.cwiseAbs().maxCoeff() > std::sqrt(tol))
            throw Incomplete("free completion fails to close the operator sum");
    }

    tp.residual = cert.residual;
    tp.residual_min_eig = cert.min_eigenvalue;
    outcome.plan = std::move(tp);
    return outcome;
}

}  // namespace supcert
