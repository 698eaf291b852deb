#include "supcert/json_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "supcert/errors.hpp"

namespace supcert {

namespace {

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        std::ostringstream msg;
        msg << "missing field '" << key << "'";
        throw BadShape(msg.str());
    }
    return j.at(key);
}

Eigen::VectorXd parse_vector(const nlohmann::json& j, const char* what) {
    if (!j.is_array() || j.empty()) {
        std::ostringstream msg;
        msg << what << " must be a non-empty array of numbers";
        throw BadShape(msg.str());
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            std::ostringstream msg;
            msg << what << " must contain only numbers";
            throw BadShape(msg.str());
        }
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

void write_u32(std::ostream& os, std::uint32_t value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

std::uint32_t read_u32(std::istream& is) {
    std::uint32_t value = 0;
    is.read(reinterpret_cast<char*>(&value), sizeof(value));
    if (!is) throw BadShape("operator dump is truncated");
    return value;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXcd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            const double re = m(r, c).real();
            const double im = m(r, c).imag();
            os.write(reinterpret_cast<const char*>(&re), sizeof(re));
            os.write(reinterpret_cast<const char*>(&im), sizeof(im));
        }
}

Eigen::MatrixXcd read_matrix(std::istream& is, int d) {
    Eigen::MatrixXcd m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            double re = 0.0, im = 0.0;
            is.read(reinterpret_cast<char*>(&re), sizeof(re));
            is.read(reinterpret_cast<char*>(&im), sizeof(im));
            if (!is) throw BadShape("operator dump is truncated");
            m(r, c) = std::complex<double>(re, im);
        }
    return m;
}

void append_canonical(std::string& out, const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = j.cbegin(); it != j.cend(); ++it) {
                if (!first) out += ',';
                first = false;
                out += nlohmann::json(it.key()).dump();
                out += ':';
                append_canonical(out, it.value());
            }
            out += '}';
            break;
        }
        case nlohmann::json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                append_canonical(out, j[i]);
            }
            out += ']';
            break;
        }
        case nlohmann::json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                break;
            }
            if (v == 0.0) {
                out += "0";  // fold -0 into 0
                break;
            }
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out += buf;
            break;
        }
        default:
            out += j.dump();
            break;
    }
}

}  // namespace

GramBasis parse_basis(const nlohmann::json& j, double tol) {
    const nlohmann::json& mu = require(j, "mu");
    if (mu.is_number()) {
        const nlohmann::json& d = require(j, "d");
        if (!d.is_number_integer() || d.get<int>() < 2)
            throw BadShape("'d' must be an integer >= 2");
        return build_basis(d.get<int>(), mu.get<double>(), tol);
    }
    if (!mu.is_array() || mu.empty())
        throw BadShape("'mu' must be a number or a square matrix");
    const std::size_t n = mu.size();
    Eigen::MatrixXd overlaps(static_cast<Eigen::Index>(n),
                             static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        if (!mu[r].is_array() || mu[r].size() != n)
            throw BadShape("'mu' must be a square matrix");
        for (std::size_t c = 0; c < n; ++c) {
            if (!mu[r][c].is_number())
                throw BadShape("'mu' must contain only numbers");
            overlaps(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                mu[r][c].get<double>();
        }
    }
    return build_basis(overlaps, tol);
}

PureState parse_state(const nlohmann::json& j, const GramBasis& basis, double tol) {
    const Eigen::VectorXd coeffs = parse_vector(require(j, "coeffs"), "'coeffs'");
    bool normalize = false;
    if (j.contains("normalize")) {
        if (!j.at("normalize").is_boolean())
            throw BadShape("'normalize' must be a boolean");
        normalize = j.at("normalize").get<bool>();
    }
    return make_state(basis, coeffs, normalize, tol);
}

Problem parse_problem(const nlohmann::json& j, double tol) {
    GramBasis basis = parse_basis(require(j, "basis"), tol);
    PureState psi = parse_state(require(j, "psi"), basis, tol);
    PureState phi = parse_state(require(j, "phi"), basis, tol);
    return Problem{std::move(basis), std::move(psi), std::move(phi)};
}

nlohmann::json report_to_json(const ConvertibilityReport& report) {
    nlohmann::json j;
    j["majorization"] = report.majorization;
    j["coc"] = report.coc;
    j["l1_monotone"] = report.l1_monotone;
    j["region"] = to_string(report.region);
    j["margins"] = {{"majorization", report.margins.majorization},
                    {"coc", report.margins.coc},
                    {"l1", report.margins.l1}};
    j["l1_initial"] = report.l1_initial;
    j["l1_final"] = report.l1_final;
    return j;
}

nlohmann::json plan_to_json(const TransformPlan& plan, bool verified) {
    nlohmann::json j;
    j["probs"] = vector_to_json(plan.probs);
    nlohmann::json fns = nlohmann::json::array();
    for (const auto& f : plan.index_functions.fns) {
        nlohmann::json row = nlohmann::json::array();
        for (int v : f) row.push_back(v + 1);  // 1-based slot labels
        fns.push_back(std::move(row));
    }
    j["index_functions"] = fns;
    j["case_signature"] = plan.case_signature;
    j["residual_min_eig"] = plan.residual_min_eig;
    j["verified"] = verified;
    nlohmann::json psi_order = nlohmann::json::array();
    for (int v : plan.psi_order) psi_order.push_back(v + 1);
    nlohmann::json phi_order = nlohmann::json::array();
    for (int v : plan.phi_order) phi_order.push_back(v + 1);
    j["psi_order"] = psi_order;
    j["phi_order"] = phi_order;
    return j;
}

nlohmann::json verification_to_json(const VerificationReport& v) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : v.checks)
        checks.push_back(
            {{"name", c.name}, {"deviation", c.deviation}, {"pass", c.pass}});
    return {{"all_pass", v.all_pass}, {"checks", checks}};
}

nlohmann::json state_to_json(const PureState& state, double tol) {
    nlohmann::json j;
    j["coeffs"] = vector_to_json(state.coeffs);
    j["tilde"] = vector_to_json(tilde(state).values);
    j["l1"] = l1_norm(state);
    j["rank"] = superposition_rank(state, tol);
    return j;
}

nlohmann::json census_to_json(const RegionCensus& census) {
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [region, count] : census.counts) counts[region] = count;
    nlohmann::json disagreements = nlohmann::json::array();
    for (const auto& d : census.disagreements)
        disagreements.push_back({{"i", d.i},
                                 {"j", d.j},
                                 {"region", to_string(d.region)},
                                 {"plan_verified", d.plan_verified}});
    return {{"pairs", census.pairs},
            {"states", census.states},
            {"counts", counts},
            {"disagreements", disagreements}};
}

std::string canonical_json(const nlohmann::json& j) {
    std::string out;
    append_canonical(out, j);
    return out;
}

void write_operator_dump(std::ostream& os, int d,
                         const std::vector<Eigen::MatrixXcd>& kraus,
                         const std::vector<Eigen::MatrixXcd>& completion) {
    os.write("SUPK", 4);
    write_u32(os, 1);  // version
    write_u32(os, static_cast<std::uint32_t>(d));
    write_u32(os, static_cast<std::uint32_t>(kraus.size() + completion.size()));
    write_u32(os, static_cast<std::uint32_t>(kraus.size()));
    write_u32(os, static_cast<std::uint32_t>(completion.size()));
    for (const auto& m : kraus) write_matrix(os, m);
    for (const auto& m : completion) write_matrix(os, m);
}

OperatorDump read_operator_dump(std::istream& is) {
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "SUPK", 4) != 0)
        throw BadShape("operator dump has a bad magic number");
    const std::uint32_t version = read_u32(is);
    if (version != 1) throw BadShape("operator dump has an unknown version");
    const std::uint32_t d = read_u32(is);
    if (d < 2 || d > 1024) throw BadShape("operator dump has an implausible dimension");
    const std::uint32_t total = read_u32(is);
    const std::uint32_t n_kraus = read_u32(is);
    const std::uint32_t n_completion = read_u32(is);
    if (n_kraus + n_completion != total)
        throw BadShape("operator dump counts are inconsistent");

    OperatorDump dump;
    dump.d = static_cast<int>(d);
    for (std::uint32_t n = 0; n < n_kraus; ++n)
        dump.kraus.push_back(read_matrix(is, dump.d));
    for (std::uint32_t n = 0; n < n_completion; ++n)
        dump.completion.push_back(read_matrix(is, dump.d));
    is.peek();
    if (!is.eof()) throw BadShape("operator dump has trailing bytes");
    return dump;
}

}  // namespace supcert
