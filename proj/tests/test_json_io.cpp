#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "supcert/errors.hpp"
#include "supcert/json_io.hpp"
#include "supcert/kraus.hpp"
#include "supcert/oracle.hpp"

using namespace supcert;
using nlohmann::json;

namespace {

const char* kProblemText = R"({
  "basis": {"d": 2, "mu": 0.5},
  "psi": {"coeffs": [3, -1], "normalize": true},
  "phi": {"coeffs": [4, -1], "normalize": true}
})";

Eigen::MatrixXcd random_matrix(int d, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::MatrixXcd m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) m(r, c) = {unit(rng), unit(rng)};
    return m;
}

std::string dump_bytes(int d, const std::vector<Eigen::MatrixXcd>& kraus,
                       const std::vector<Eigen::MatrixXcd>& completion) {
    std::ostringstream os(std::ios::binary);
    write_operator_dump(os, d, kraus, completion);
    return os.str();
}

OperatorDump read_bytes(const std::string& bytes) {
    std::istringstream is(bytes, std::ios::binary);
    return read_operator_dump(is);
}

}  // namespace

TEST_CASE("basis parsing") {
    SUBCASE("scalar overlap") {
        const GramBasis basis = parse_basis(json::parse(R"({"d": 3, "mu": -0.25})"));
        CHECK(basis.d == 3);
        CHECK(basis.equal_mu.has_value());
        CHECK(*basis.equal_mu == doctest::Approx(-0.25));
    }
    SUBCASE("full overlap matrix") {
        const GramBasis basis = parse_basis(
            json::parse(R"({"mu": [[1, 0.3, 0.1], [0.3, 1, -0.2], [0.1, -0.2, 1]]})"));
        CHECK(basis.d == 3);
        CHECK_FALSE(basis.equal_mu.has_value());
        CHECK(basis.gram(1, 2) == doctest::Approx(-0.2));
    }
    SUBCASE("rejects malformed input") {
        CHECK_THROWS_AS(parse_basis(json::parse(R"({"d": 2})")), BadShape);
        CHECK_THROWS_AS(parse_basis(json::parse(R"({"mu": 0.5})")), BadShape);
        CHECK_THROWS_AS(parse_basis(json::parse(R"({"d": 1, "mu": 0.5})")), BadShape);
        CHECK_THROWS_AS(parse_basis(json::parse(R"({"mu": [[1, 0.5]]})")), BadShape);
        CHECK_THROWS_AS(parse_basis(json::parse(R"({"mu": [[1, "x"], ["x", 1]]})")),
                        BadShape);
        CHECK_THROWS_AS(parse_basis(json::parse(R"({"mu": "half"})")), BadShape);
    }
}

TEST_CASE("state parsing") {
    const GramBasis basis = parse_basis(json::parse(R"({"d": 2, "mu": 0.5})"));
    SUBCASE("normalization is opt-in") {
        const PureState psi =
            parse_state(json::parse(R"({"coeffs": [3, -1], "normalize": true})"), basis);
        CHECK(psi.coeffs(0) == doctest::Approx(3.0 / std::sqrt(7.0)));
        CHECK_THROWS_AS(parse_state(json::parse(R"({"coeffs": [3, -1]})"), basis),
                        NotNormalized);
    }
    SUBCASE("rejects malformed input") {
        CHECK_THROWS_AS(parse_state(json::parse(R"({})"), basis), BadShape);
        CHECK_THROWS_AS(parse_state(json::parse(R"({"coeffs": []})"), basis), BadShape);
        CHECK_THROWS_AS(parse_state(json::parse(R"({"coeffs": [1, "x"]})"), basis),
                        BadShape);
        CHECK_THROWS_AS(
            parse_state(json::parse(R"({"coeffs": [1, 0], "normalize": 1})"), basis),
            BadShape);
        CHECK_THROWS_AS(parse_state(json::parse(R"({"coeffs": [1, 0, 0]})"), basis),
                        BadShape);
    }
}

TEST_CASE("problem parsing") {
    const Problem problem = parse_problem(json::parse(kProblemText));
    CHECK(problem.basis.d == 2);
    CHECK(problem.psi.coeffs(0) == doctest::Approx(3.0 / std::sqrt(7.0)));
    CHECK(problem.phi.coeffs(1) == doctest::Approx(-1.0 / std::sqrt(13.0)));

    json missing = json::parse(kProblemText);
    missing.erase("phi");
    CHECK_THROWS_AS(parse_problem(missing), BadShape);
}

TEST_CASE("serialization shapes") {
    const Problem problem = parse_problem(json::parse(kProblemText));
    const PlanOutcome outcome = plan(problem.basis, problem.psi, problem.phi);
    REQUIRE(outcome.plan.has_value());

    SUBCASE("report") {
        const json j = report_to_json(outcome.report);
        CHECK(j.at("region") == "R1");
        CHECK(j.at("majorization") == true);
        CHECK(j.at("coc") == true);
        CHECK(j.at("l1_monotone") == true);
        CHECK(j.at("margins").at("coc").get<double>() ==
              doctest::Approx(11.0 / 182.0));
        CHECK(j.contains("l1_initial"));
        CHECK(j.contains("l1_final"));
    }
    SUBCASE("plan uses 1-based slot labels") {
        const json j = plan_to_json(*outcome.plan, true);
        CHECK(j.at("index_functions") == json::parse("[[1, 2], [2, 1]]"));
        CHECK(j.at("psi_order") == json::parse("[1, 2]"));
        CHECK(j.at("phi_order") == json::parse("[1, 2]"));
        CHECK(j.at("probs").size() == 2);
        CHECK(j.at("verified") == true);
        CHECK(j.at("case_signature").is_array());
        CHECK(j.at("case_signature").empty());
        CHECK(j.contains("residual_min_eig"));
    }
    SUBCASE("verification") {
        const VerificationReport report =
            verify_plan(problem.basis, problem.psi, problem.phi, *outcome.plan);
        const json j = verification_to_json(report);
        CHECK(j.at("all_pass") == true);
        REQUIRE(j.at("checks").is_array());
        CHECK(j.at("checks").size() == report.checks.size());
        CHECK(j.at("checks")[0].contains("name"));
        CHECK(j.at("checks")[0].contains("deviation"));
        CHECK(j.at("checks")[0].contains("pass"));
    }
    SUBCASE("state") {
        const json j = state_to_json(problem.psi);
        CHECK(j.at("coeffs").size() == 2);
        CHECK(j.at("tilde")[0].get<double>() == doctest::Approx(15.0 / 14.0));
        CHECK(j.at("l1").get<double>() == doctest::Approx(6.0 / 7.0));
        CHECK(j.at("rank") == 2);
    }
    SUBCASE("census") {
        GridSpec grid;
        grid.resolution = 4;
        const RegionCensus census =
            exhaustive_condition_scan(problem.basis, grid);
        const json j = census_to_json(census);
        CHECK(j.at("pairs") == 16);
        CHECK(j.at("states") == 4);
        CHECK(j.at("counts").is_object());
        CHECK(j.at("disagreements").is_array());
    }
}

TEST_CASE("canonical json is deterministic and lossless") {
    SUBCASE("key order does not depend on insertion order") {
        json a;
        a["zig"] = 1;
        a["alpha"] = 2;
        json b;
        b["alpha"] = 2;
        b["zig"] = 1;
        CHECK(canonical_json(a) == canonical_json(b));
        CHECK(canonical_json(a) == R"({"alpha":2,"zig":1})");
    }
    SUBCASE("floats survive a round trip") {
        for (double v : {0.1, 1.0 / 3.0, 2947.0 / 3519.0, 6.0 / 7.0,
                         -1.2345678901234567e-13}) {
            const json j = {{"v", v}};
            const json back = json::parse(canonical_json(j));
            CHECK(back.at("v").get<double>() == v);
        }
    }
    SUBCASE("special values") {
        CHECK(canonical_json(json{{"z", -0.0}}) == R"({"z":0})");
        CHECK(canonical_json(json{{"n", std::numeric_limits<double>::quiet_NaN()}}) ==
              R"({"n":null})");
        CHECK(canonical_json(json{{"i", std::numeric_limits<double>::infinity()}}) ==
              R"({"i":null})");
        CHECK(canonical_json(json{{"k", 42}}) == R"({"k":42})");
        CHECK(canonical_json(json{{"t", true}, {"s", "hi"}}) ==
              R"({"s":"hi","t":true})");
        CHECK(canonical_json(json::parse(R"([1, [2, 3], {"a": null}])")) ==
              R"([1,[2,3],{"a":null}])");
    }
    SUBCASE("no whitespace is emitted") {
        const json j = json::parse(kProblemText);
        const std::string s = canonical_json(j);
        CHECK(s.find(' ') == std::string::npos);
        CHECK(s.find('\n') == std::string::npos);
    }
}

TEST_CASE("operator dump round trip") {
    const std::vector<Eigen::MatrixXcd> kraus = {random_matrix(3, 11),
                                                 random_matrix(3, 22)};
    const std::vector<Eigen::MatrixXcd> completion = {random_matrix(3, 33)};
    const std::string bytes = dump_bytes(3, kraus, completion);
    // header: magic, version, d, total, kraus count, completion count,
    // then 3 matrices of 9 complex doubles each.
    CHECK(bytes.size() == 24 + 3 * 9 * 16);

    const OperatorDump dump = read_bytes(bytes);
    CHECK(dump.d == 3);
    REQUIRE(dump.kraus.size() == 2);
    REQUIRE(dump.completion.size() == 1);
    for (std::size_t n = 0; n < kraus.size(); ++n)
        CHECK((dump.kraus[n] - kraus[n]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((dump.completion[0] - completion[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operator dump corruption is detected") {
    const std::vector<Eigen::MatrixXcd> kraus = {random_matrix(2, 5)};
    const std::string good = dump_bytes(2, kraus, {});
    CHECK_NOTHROW(read_bytes(good));

    SUBCASE("bad magic") {
        std::string bad = good;
        bad[0] = 'X';
        CHECK_THROWS_AS(read_bytes(bad), BadShape);
    }
    SUBCASE("unknown version") {
        std::string bad = good;
        bad[4] = 2;
        CHECK_THROWS_AS(read_bytes(bad), BadShape);
    }
    SUBCASE("implausible dimension") {
        std::string bad = good;
        bad[8] = 1;
        CHECK_THROWS_AS(read_bytes(bad), BadShape);
    }
    SUBCASE("inconsistent counts") {
        std::string bad = good;
        bad[12] = 7;
        CHECK_THROWS_AS(read_bytes(bad), BadShape);
    }
    SUBCASE("truncated payload") {
        CHECK_THROWS_AS(read_bytes(good.substr(0, good.size() - 5)), BadShape);
        CHECK_THROWS_AS(read_bytes(good.substr(0, 10)), BadShape);
    }
    SUBCASE("trailing bytes") {
        CHECK_THROWS_AS(read_bytes(good + "x"), BadShape);
    }
}
