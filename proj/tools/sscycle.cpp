// sscycle: simulate, couple, and exactly verify the stochastic sandpile and
// activated random walk models on the n-cycle.
//
// Exit codes: 0 success, 1 assertion/verification failure, 2 invalid input,
// 3 cap exceeded where fatal.

#include <cmath>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sscycle/coupling.hpp"
#include "sscycle/exact.hpp"
#include "sscycle/harness.hpp"

using nlohmann::json;
using namespace sscycle;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertionFailure = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitCapExceeded = 3;

PolicyKind policy_from_name(const std::string& name) {
    if (name == "min") return PolicyKind::MinIndex;
    if (name == "max") return PolicyKind::MaxIndex;
    if (name == "random") return PolicyKind::RandomLegal;
    throw InvalidSpecError("unknown policy '" + name + "'");
}

std::uint64_t default_cap(int n) {
    return 64ULL * static_cast<std::uint64_t>(n) * n * n;
}

int cmd_simulate(const std::string& model, int n, double p, double lambda, bool lambda_set,
                 std::uint64_t seed, const std::string& init, const std::string& policy_name,
                 std::uint64_t cap, const std::string& trace_path) {
    if (cap == 0) cap = default_cap(n);
    TopplingPolicy policy{policy_from_name(policy_name), seed ^ 0x70C1C7ULL};

    std::ofstream trace_file;
    std::ostream* trace = nullptr;
    if (!trace_path.empty()) {
        trace_file.open(trace_path);
        if (!trace_file) throw InvalidSpecError("cannot open trace file: " + trace_path);
        trace = &trace_file;
    }

    InitKind init_kind = init == "uniform" ? InitKind::Uniform
                       : init == "point"   ? InitKind::Point
                                           : throw InvalidSpecError("unknown init '" + init + "'");
    SandpileConfig s0 = initial_config(init_kind, n, seed);

    try {
        if (model == "ss") {
            InstructionField field{seed, n, p, p / (1.0 - p)};
            SsRun run = stabilize_ss(s0, field, policy, cap, trace);
            std::cout << "model=ss n=" << n << " p=" << p << " seed=" << seed
                      << " T=" << run.sequence_length << " final=" << to_text(run.final) << '\n';
        } else if (model == "arw") {
            if (!lambda_set) lambda = p / (1.0 - p);
            ArwConfig eta0;
            for (int c : s0.counts) eta0.values.push_back(NsValue::active(c));
            InstructionField field{seed, n, lambda / (1.0 + lambda), lambda};
            ArwRun run = stabilize_arw(eta0, field, policy, cap, trace);
            std::cout << "model=arw n=" << n << " lambda=" << lambda << " seed=" << seed
                      << " T=" << run.sequence_length << " final=" << to_text(run.final) << '\n';
        } else {
            throw InvalidSpecError("unknown model '" + model + "'");
        }
    } catch (const CapExceededError& e) {
        std::cerr << "cap exceeded: " << e.what() << '\n';
        return kExitCapExceeded;
    }
    return kExitOk;
}

int cmd_couple(int n, double lambda, std::uint64_t seed, int trials) {
    std::uint64_t cap = default_cap(n);
    for (int trial = 0; trial < trials; ++trial) {
        std::uint64_t trial_seed = derive_trial_seed(seed, n, trial);
        InstructionField field{trial_seed, n, lambda / (1.0 + lambda), lambda};
        ArwConfig eta0 = ArwConfig::point(n);
        try {
            CoupledRun run = run_coupled(eta0, field, cap);
            std::uint64_t max_od = 0;
            for (auto c : run.u.counts) max_od = std::max(max_od, c);
            std::cout << trial_seed << ',' << n << ',' << lambda << ',' << run.t_minus_1 << ','
                      << run.t_ss << ',' << run.t_arw << ',' << max_od << '\n';
        } catch (const CouplingViolationError& e) {
            std::cerr << "coupling violation at trial " << trial << ": " << e.what() << '\n';
            return kExitAssertionFailure;
        } catch (const CapExceededError& e) {
            std::cerr << "cap exceeded at trial " << trial << ": " << e.what() << '\n';
            return kExitCapExceeded;
        }
    }
    return kExitOk;
}

int cmd_verify(int n, const std::string& lambda_text, int horizon) {
    Rational lambda = parse_rational(lambda_text);
    VerificationReport report = run_verification(n, lambda, horizon);
    std::cout << report.text;
    return report.all_passed ? kExitOk : kExitAssertionFailure;
}

ExperimentSpec spec_from_json(const json& j) {
    ExperimentSpec spec;
    spec.n_grid = j.at("n_grid").get<std::vector<int>>();
    spec.schedule = schedule_from_name(j.value("schedule", "constant-p"));
    if (j.contains("p")) spec.p_const = j["p"].get<double>();
    if (j.contains("table"))
        for (auto& [key, value] : j["table"].items())
            spec.p_table[std::stoi(key)] = value.get<double>();
    spec.trials = j.value("trials", 200);
    spec.master_seed = j.value("master_seed", std::uint64_t{1});
    std::string init = j.value("init", "point");
    spec.init = init == "uniform" ? InitKind::Uniform : InitKind::Point;
    std::string model = j.value("model", "ss");
    spec.model = model == "arw" ? ModelKind::ARW : model == "coupled" ? ModelKind::Coupled : ModelKind::SS;
    spec.cap_factor = j.value("cap_factor", std::uint64_t{64});
    return spec;
}

int cmd_experiment(const std::string& config_path, const std::string& csv_path,
                   const std::string& svg_path, int workers) {
    std::ifstream in(config_path);
    if (!in) throw InvalidSpecError("cannot open config: " + config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidSpecError(std::string("bad config JSON: ") + e.what());
    }
    ExperimentSpec spec = spec_from_json(j);
    spec.validate();

    for (int n : spec.n_grid) {
        double proxy = slow_phase_proxy(n, spec.lazy_parameter(n));
        if (proxy >= 2.0)
            std::cerr << "warning: log(n)*(1-p) = " << proxy << " >= 2 at n = " << n
                      << "; runs may hit the cap\n";
    }

    std::vector<RunRecord> records = run_experiment(spec, workers);
    std::size_t capped = 0;
    for (const auto& r : records) capped += r.capped;
    std::cout << "ran " << records.size() << " trials (" << capped << " capped)\n";

    if (!csv_path.empty()) write_csv_file(csv_path, records);

    auto series = build_plot_series(records);
    for (const auto& s : series)
        std::cout << s.name << ": slope = " << s.fit.slope << ", intercept = " << s.fit.intercept
                  << ", R^2 = " << s.fit.r_squared << '\n';
    if (!svg_path.empty()) write_svg_file(svg_path, series);
    return kExitOk;
}

int cmd_fit(const std::string& csv_path) {
    auto records = read_csv_file(csv_path);
    for (const auto& s : build_plot_series(records))
        std::cout << s.name << ": slope = " << s.fit.slope << ", intercept = " << s.fit.intercept
                  << ", R^2 = " << s.fit.r_squared << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic sandpile / activated random walk on the n-cycle"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run one model to stabilization");
    std::string sim_model = "ss", sim_init = "point", sim_policy = "min", sim_trace;
    int sim_n = 8;
    double sim_p = 0.5, sim_lambda = 1.0;
    std::uint64_t sim_seed = 1, sim_cap = 0;
    sim->add_option("--model", sim_model, "ss|arw")->required();
    sim->add_option("--n", sim_n, "ring size")->required()->check(CLI::Range(2, 1 << 20));
    sim->add_option("--p", sim_p, "SS lazy parameter");
    auto* lambda_opt = sim->add_option("--lambda", sim_lambda, "ARW sleep rate");
    sim->add_option("--seed", sim_seed, "master seed")->required();
    sim->add_option("--init", sim_init, "point|uniform");
    sim->add_option("--policy", sim_policy, "min|max|random");
    sim->add_option("--cap", sim_cap, "toppling cap (default 64*n^3)");
    sim->add_option("--trace", sim_trace, "trace file path");

    // couple
    auto* couple = app.add_subcommand("couple", "coupled SS/ARW runs asserting the odometer identity");
    int cp_n = 8, cp_trials = 1;
    double cp_lambda = 1.0;
    std::uint64_t cp_seed = 1;
    couple->add_option("--n", cp_n)->required()->check(CLI::Range(2, 4096));
    couple->add_option("--lambda", cp_lambda)->required()->check(CLI::PositiveNumber);
    couple->add_option("--seed", cp_seed)->required();
    couple->add_option("--trials", cp_trials)->check(CLI::PositiveNumber);

    // verify
    auto* verify = app.add_subcommand("verify", "exact rational verification suite");
    int vf_n = 3, vf_horizon = 0;
    std::string vf_lambda = "1";
    verify->add_option("--n", vf_n)->required()->check(CLI::Range(2, 8));
    verify->add_option("--lambda", vf_lambda, "sleep rate as NUM/DEN")->required();
    verify->add_option("--horizon", vf_horizon, "law-equality horizon (default 2*|H|)");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Monte Carlo sweep from a JSON config");
    std::string ex_config, ex_csv, ex_svg;
    int ex_workers = 0;
    experiment->add_option("--config", ex_config)->required()->check(CLI::ExistingFile);
    experiment->add_option("--out-csv", ex_csv);
    experiment->add_option("--out-svg", ex_svg);
    experiment->add_option("--workers", ex_workers);

    // fit
    auto* fit = app.add_subcommand("fit", "recompute log-log fits from a records CSV");
    std::string fit_csv;
    fit->add_option("--csv", fit_csv)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(sim_model, sim_n, sim_p, sim_lambda, lambda_opt->count() > 0,
                                sim_seed, sim_init, sim_policy, sim_cap, sim_trace);
        if (couple->parsed()) return cmd_couple(cp_n, cp_lambda, cp_seed, cp_trials);
        if (verify->parsed()) return cmd_verify(vf_n, vf_lambda, vf_horizon);
        if (experiment->parsed()) return cmd_experiment(ex_config, ex_csv, ex_svg, ex_workers);
        if (fit->parsed()) return cmd_fit(fit_csv);
    } catch (const InvalidSpecError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const SizeGuardError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const InsufficientDataError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInvalidInput;
    } catch (const CapExceededError& e) {
        std::cerr << "cap exceeded: " << e.what() << '\n';
        return kExitCapExceeded;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitAssertionFailure;
    }
    return kExitInvalidInput;
}
