#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "supcert/errors.hpp"
#include "supcert/json_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitRefused = 2;
constexpr int kExitUnsupported = 3;

nlohmann::json load_json(const std::string& path) {
    if (path == "-") return nlohmann::json::parse(std::cin);
    std::ifstream in(path);
    if (!in) throw supcert::Error("cannot open '" + path + "'");
    return nlohmann::json::parse(in);
}

void emit(const nlohmann::json& j) {
    std::cout << supcert::canonical_json(j) << "\n";
}

int run_check(const std::string& input, double tol) {
    const supcert::Problem problem =
        supcert::parse_problem(load_json(input), tol);
    const supcert::ConvertibilityReport report =
        supcert::classify_region(problem.psi, problem.phi, tol);
    emit(supcert::report_to_json(report));
    return report.region == supcert::Region::R1 ? kExitOk : kExitRefused;
}

int run_plan(const std::string& input, const std::string& ops_path, double tol) {
    const supcert::Problem problem =
        supcert::parse_problem(load_json(input), tol);

    supcert::PlanOutcome outcome;
    try {
        outcome = supcert::plan(problem.basis, problem.psi, problem.phi, tol);
    } catch (const supcert::RankIncrease& e) {
        std::cerr << "plan refused: " << e.what() << "\n";
        return kExitRefused;
    }
    if (!outcome.plan) {
        emit(supcert::report_to_json(outcome.report));
        return kExitRefused;
    }

    const supcert::TransformPlan& plan = *outcome.plan;
    const supcert::VerificationReport verification = supcert::verify_plan(
        problem.basis, problem.psi, problem.phi, plan, tol);

    nlohmann::json j = supcert::plan_to_json(plan, verification.all_pass);
    if (!ops_path.empty()) {
        std::ofstream out(ops_path, std::ios::binary);
        if (!out) throw supcert::Error("cannot open '" + ops_path + "' for writing");
        supcert::write_operator_dump(out, problem.basis.d, plan.kraus_ops,
                                     plan.completion);
        j["ops_file"] = ops_path;
    }
    emit(j);
    return verification.all_pass ? kExitOk : kExitRefused;
}

supcert::Permutation parse_order(const nlohmann::json& j, const char* key, int d) {
    if (!j.contains(key) || !j.at(key).is_array() ||
        j.at(key).size() != static_cast<std::size_t>(d))
        throw supcert::BadShape(std::string("plan field '") + key +
                                "' must be a permutation array");
    supcert::Permutation order;
    for (const auto& v : j.at(key)) order.push_back(v.get<int>() - 1);
    return order;
}

int run_verify(const std::string& input, const std::string& plan_path,
               std::string ops_path, double tol) {
    const supcert::Problem problem =
        supcert::parse_problem(load_json(input), tol);
    const nlohmann::json plan_json = load_json(plan_path);
    if (ops_path.empty() && plan_json.contains("ops_file"))
        ops_path = plan_json.at("ops_file").get<std::string>();
    if (ops_path.empty())
        throw supcert::Error("no operator dump: pass --ops or plan with --emit-ops");

    const int d = problem.basis.d;
    supcert::TransformPlan plan;
    try {
        std::ifstream ops_in(ops_path, std::ios::binary);
        if (!ops_in) throw supcert::Error("cannot open '" + ops_path + "'");
        const supcert::OperatorDump dump = supcert::read_operator_dump(ops_in);
        if (dump.d != d)
            throw supcert::BadShape("operator dump dimension does not match");
        plan.kraus_ops = dump.kraus;
        plan.completion = dump.completion;

        for (const auto& f : plan_json.at("index_functions")) {
            supcert::Permutation perm;
            for (const auto& v : f) perm.push_back(v.get<int>() - 1);
            plan.index_functions.fns.push_back(std::move(perm));
        }
        const auto& probs = plan_json.at("probs");
        plan.probs.resize(static_cast<Eigen::Index>(probs.size()));
        for (std::size_t n = 0; n < probs.size(); ++n)
            plan.probs(static_cast<Eigen::Index>(n)) = probs[n].get<double>();
        plan.residual_min_eig = plan_json.at("residual_min_eig").get<double>();
        plan.psi_order = parse_order(plan_json, "psi_order", d);
        plan.phi_order = parse_order(plan_json, "phi_order", d);
    } catch (const std::exception& e) {
        emit({{"all_pass", false}, {"error", e.what()}});
        return kExitRefused;
    }

    // The residual matrix is not part of the dump; rebuild it so the
    // certificate checks run against the claimed minimum eigenvalue.
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& k : plan.kraus_ops) sum += k.adjoint() * k;
    plan.residual = Eigen::MatrixXcd::Identity(d, d) - sum;

    const supcert::VerificationReport report = supcert::verify_plan(
        problem.basis, problem.psi, problem.phi, plan, tol);
    emit(supcert::verification_to_json(report));
    return report.all_pass ? kExitOk : kExitRefused;
}

int run_maximal(int d, double mu, const std::string& sign, double tol) {
    const supcert::GramBasis basis = supcert::build_basis(d, mu, tol);
    const supcert::MaximalSign which = sign == "minus"
                                           ? supcert::MaximalSign::Minus
                                           : supcert::MaximalSign::Plus;
    const supcert::PureState state = supcert::maximal_state(basis, which, tol);
    emit(supcert::state_to_json(state, tol));
    return kExitOk;
}

int run_gram(int d, double mu) {
    const auto range = supcert::independence_range(d);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Constant(d, d, mu);
    gram.diagonal().setOnes();
    const double det = gram.determinant();
    emit({{"d", d},
          {"mu", mu},
          {"det", det},
          {"range", {range.first, range.second}},
          {"ok", mu > range.first && mu < range.second}});
    return kExitOk;
}

int run_scan(int d, double mu, int resolution, const std::string& csv_path,
             double tol) {
    const supcert::GramBasis basis = supcert::build_basis(d, mu, tol);
    supcert::GridSpec grid;
    grid.resolution = resolution;
    grid.record_pairs = !csv_path.empty();
    const supcert::RegionCensus census =
        supcert::exhaustive_condition_scan(basis, grid, tol);

    if (!csv_path.empty()) {
        std::ofstream csv(csv_path);
        if (!csv) throw supcert::Error("cannot open '" + csv_path + "' for writing");
        csv << "i,j,region\n";
        for (long i = 0; i < census.states; ++i)
            for (long j = 0; j < census.states; ++j)
                csv << i << "," << j << ","
                    << supcert::to_string(
                           census.pair_regions[static_cast<std::size_t>(
                               i * census.states + j)])
                    << "\n";
    }
    emit(supcert::census_to_json(census));
    return census.disagreements.empty() ? kExitOk : kExitRefused;
}

double tol_from_env() {
    const char* raw = std::getenv("SUPCERT_TOL");
    if (!raw) return supcert::kDefaultTol;
    char* end = nullptr;
    const double v = std::strtod(raw, &end);
    if (end == raw || v <= 0.0) return supcert::kDefaultTol;
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Plan and certify deterministic transformations between "
                 "superposition states over a non-orthogonal basis"};
    app.require_subcommand(1);

    double tol = tol_from_env();
    app.add_option("--tol", tol, "numeric tolerance")->capture_default_str();

    std::string input, ops_path, plan_path, csv_path, sign = "plus";
    int d = 2, resolution = 16;
    double mu = 0.5;

    CLI::App* check = app.add_subcommand(
        "check", "classify a source/target pair into its convertibility region");
    check->add_option("input", input, "problem JSON file ('-' for stdin)")
        ->required();

    CLI::App* plan_cmd = app.add_subcommand(
        "plan", "synthesize and self-verify a deterministic transformation");
    plan_cmd->add_option("input", input, "problem JSON file ('-' for stdin)")
        ->required();
    plan_cmd->add_option("--emit-ops", ops_path, "write operators to this file");

    CLI::App* verify = app.add_subcommand(
        "verify", "re-check an emitted plan against the problem it claims to solve");
    verify->add_option("input", input, "problem JSON file ('-' for stdin)")
        ->required();
    verify->add_option("plan", plan_path, "plan JSON file")->required();
    verify->add_option("--ops", ops_path, "operator dump (default: plan's ops_file)");

    CLI::App* maximal = app.add_subcommand(
        "maximal", "print the maximally superposed state for a basis");
    maximal->add_option("--d", d, "dimension")->required();
    maximal->add_option("--mu", mu, "pairwise overlap")->required();
    maximal->add_option("--sign", sign, "plus or minus")
        ->check(CLI::IsMember({"plus", "minus"}));

    CLI::App* gram = app.add_subcommand(
        "gram", "report the Gram determinant and the admissible overlap range");
    gram->add_option("--d", d, "dimension")->required();
    gram->add_option("--mu", mu, "pairwise overlap")->required();

    CLI::App* scan = app.add_subcommand(
        "scan", "classify every pair on a state grid and cross-check the planner");
    scan->add_option("--d", d, "dimension (2 or 3)")->required();
    scan->add_option("--mu", mu, "pairwise overlap")->required();
    scan->add_option("--grid", resolution, "grid resolution")
        ->capture_default_str();
    scan->add_option("--csv", csv_path, "write per-pair regions to this CSV file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(check)) return run_check(input, tol);
        if (app.got_subcommand(plan_cmd)) return run_plan(input, ops_path, tol);
        if (app.got_subcommand(verify))
            return run_verify(input, plan_path, ops_path, tol);
        if (app.got_subcommand(maximal)) return run_maximal(d, mu, sign, tol);
        if (app.got_subcommand(gram)) return run_gram(d, mu);
        if (app.got_subcommand(scan))
            return run_scan(d, mu, resolution, csv_path, tol);
    } catch (const supcert::UnsupportedCase& e) {
        std::cerr << "unsupported case: " << e.what() << "\n";
        return kExitUnsupported;
    } catch (const supcert::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
