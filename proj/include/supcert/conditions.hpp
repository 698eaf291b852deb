#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "supcert/common.hpp"
#include "supcert/state.hpp"

namespace supcert {

// Convertibility regions for a source/target pair, named by which of the
// three conditions (weight majorization, completeness-of-operators, l1
// monotonicity) hold.  R1 = all three = deterministically convertible.
enum class Region { R1, R2, R3, R4, R5, Other };

std::string to_string(Region r);

// Maps the boolean condition triple to its region label; triples not realized
// by any pair of states map to Other.
Region region_from_flags(bool majorization, bool coc, bool l1_monotone);

struct ConditionCheck {
    bool ok = false;
    Eigen::VectorXd slack;  // per-inequality slack, >= -tol when satisfied
    double margin = 0.0;    // smallest slack (most binding inequality)
};

struct Margins {
    double majorization = 0.0;
    double coc = 0.0;
    double l1 = 0.0;
};

struct ConvertibilityReport {
    bool majorization = false;
    bool coc = false;
    bool l1_monotone = false;
    Region region = Region::Other;
    Margins margins;
    double l1_initial = 0.0;
    double l1_final = 0.0;
};

// Row n holds the squared target coefficients permuted by index function f_n:
// entries(n, j) = phi_{f_n(j)}^2.  Row 0 is always unpermuted.
struct OmegaMatrix {
    Eigen::MatrixXd entries;
};

// The transformation written as a doubly stochastic matrix acting on the
// tilde weights: dmatrix * phi~ = psi~.
struct StochasticForm {
    Eigen::MatrixXd dmatrix;
};

// Prefix-sum dominance of the sorted tilde weights.  Both inputs must already
// be non-increasing (throws NotOrdered otherwise).  slack(k) is the k-th
// partial-sum gap; the last entry carries the total-sum equality as
// -(|sum gap|) so ok == (margin >= -tol).
ConditionCheck check_majorization(const TildeVector& psi, const TildeVector& phi,
                                  double tol = kDefaultTol);

OmegaMatrix build_omega(const PureState& phi, const std::vector<Permutation>& fns);

// Completeness-of-operators condition: sum_n p_n omega(n, j) <= psi_j^2 for
// j = 2..d.  psi must be canonically ordered.
ConditionCheck check_coc(const PureState& psi, const PureState& phi,
                         const Eigen::VectorXd& probs, const OmegaMatrix& omega,
                         double tol = kDefaultTol);

// Evaluates all three conditions for the pair (after canonical ordering) and
// maps the boolean triple to a region label.
ConvertibilityReport classify_region(const PureState& psi, const PureState& phi,
                                     double tol = kDefaultTol);

StochasticForm stochastic_form(const TildeVector& psi, const TildeVector& phi,
                               const Eigen::VectorXd& probs,
                               const std::vector<Permutation>& fns,
                               double tol = kDefaultTol);

// Closed form for qubit pairs: with lambda = psi_1/psi_2 and kappa =
// phi_1/phi_2 (canonically ordered, |kappa| >= |lambda|), conversion is
// possible exactly for overlaps mu inside the reported interval.
struct QubitInterval {
    bool feasible = false;
    double lo = 0.0;
    double hi = 0.0;
    bool closed_lo = false;
    bool closed_hi = false;
};

QubitInterval qubit_closed_form(const PureState& psi, const PureState& phi);

// Relative phases on the source (alpha2) and target (beta2) of a qubit pair,
// first components fixed real by convention.
struct QubitPhaseCase {
    double alpha2 = 0.0;
    double beta2 = 0.0;
};

enum class PhaseKind { General, FinalPhaseOnly, InitialPhaseOnly };

struct PhaseVerdict {
    PhaseKind kind = PhaseKind::General;
    bool feasible = false;
};

PhaseVerdict qubit_phase_case(const QubitPhaseCase& phases, const PureState& psi,
                              double tol = kDefaultTol);

}  // namespace supcert
