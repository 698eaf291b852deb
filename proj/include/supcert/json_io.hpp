#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "supcert/conditions.hpp"
#include "supcert/kraus.hpp"
#include "supcert/oracle.hpp"

namespace supcert {

struct Problem {
    GramBasis basis;
    PureState psi;
    PureState phi;
};

GramBasis parse_basis(const nlohmann::json& j, double tol = kDefaultTol);
PureState parse_state(const nlohmann::json& j, const GramBasis& basis,
                      double tol = kDefaultTol);
Problem parse_problem(const nlohmann::json& j, double tol = kDefaultTol);

nlohmann::json report_to_json(const ConvertibilityReport& report);
nlohmann::json plan_to_json(const TransformPlan& plan, bool verified);
nlohmann::json verification_to_json(const VerificationReport& v);
nlohmann::json state_to_json(const PureState& state, double tol = kDefaultTol);
nlohmann::json census_to_json(const RegionCensus& census);

// Deterministic serialization: object keys sorted, floats printed with 17
// significant digits, no whitespace.  Identical inputs give identical bytes.
std::string canonical_json(const nlohmann::json& j);

// Binary operator dump.  Layout: 16-byte header (magic "SUPK", u32 version,
// u32 d, u32 total op count), then u32 kraus count, u32 completion count,
// then each matrix as d*d little-endian complex doubles in row-major order.
void write_operator_dump(std::ostream& os, int d,
                         const std::vector<Eigen::MatrixXcd>& kraus,
                         const std::vector<Eigen::MatrixXcd>& completion);

struct OperatorDump {
    int d = 0;
    std::vector<Eigen::MatrixXcd> kraus;
    std::vector<Eigen::MatrixXcd> completion;
};

OperatorDump read_operator_dump(std::istream& is);

}  // namespace supcert
