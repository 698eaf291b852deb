#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "supcert/kraus.hpp"

namespace supcert {

struct OracleCheck {
    std::string name;
    double deviation = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<OracleCheck> checks;
    bool all_pass = false;
};

// Re-derives every claim a plan makes using nothing but the emitted matrices
// and numbers: operator actions on the embedded source, measured
// probabilities as squared norms, freeness of each operator, annihilation by
// the completion, completeness, residual consistency and l1 monotonicity.
VerificationReport verify_plan(const GramBasis& basis, const PureState& psi,
                               const PureState& phi, const TransformPlan& plan,
                               double tol = kDefaultTol);

// Angle grid over real normalized states: d = 2 uses `resolution` angles on
// [0, pi); d = 3 uses resolution x resolution points on the half sphere.
// `extra` appends explicit coefficient vectors (normalized on construction).
struct GridSpec {
    int resolution = 0;
    std::vector<Eigen::VectorXd> extra;
    bool record_pairs = false;  // keep the per-pair region labels (for CSV)
};

struct ScanDisagreement {
    int i = 0;
    int j = 0;
    Region region = Region::Other;
    bool plan_verified = false;
};

struct RegionCensus {
    std::map<std::string, long> counts;
    std::vector<ScanDisagreement> disagreements;
    long pairs = 0;
    long states = 0;
    std::vector<Region> pair_regions;  // row-major [i * states + j], optional
};

// Classifies every ordered pair on the grid and cross-checks the region
// verdict against an actual plan-and-verify attempt.  A disagreement is a
// pair where the R1 verdict and the verified-plan outcome differ.  Caps at
// 10^6 pairs (GridTooLarge beyond).
RegionCensus exhaustive_condition_scan(const GramBasis& basis, const GridSpec& grid,
                                       double tol = kDefaultTol);

}  // namespace supcert
