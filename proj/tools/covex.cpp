// covex - coverage-driven exploration toolkit for tabular MDPs.
//
// Subcommands: gen-mdp, solve, explore, sweep-rho, verify.
// Exit codes: 0 ok, 2 validation failure, 3 infeasibility, 4 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covex/coverage.hpp"
#include "covex/errors.hpp"
#include "covex/explorer.hpp"
#include "covex/mdp.hpp"
#include "covex/model_io.hpp"
#include "covex/occupancy.hpp"
#include "covex/polytope.hpp"
#include "covex/trace_io.hpp"
#include "covex/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct RunSpec {
    std::string model_path;
    int gen_states = 0;
    int gen_actions = 0;
    double gen_alpha = 1.0;
    double gen_lambda = 0.05;
    std::uint64_t gen_seed = 7;

    std::string mu_spec;  // "", "uniform", "model", "@file", or comma list
    std::vector<double> rho_list;
    std::string eta_spec = "auto";
    std::int64_t tau1 = 50;
    int episodes = 20;
    double epsilon = 0.5;
    std::uint64_t seed = 1;
    int iterations = 20000;
    int burn_in = -1;  // <0: episodes/4
    bool csv_occupancy = false;
    bool timing = false;
    std::string out_dir = ".";
    std::string config_path;
};

struct ResolvedRun {
    covex::MdpModel model;
    covex::CoverageWeights weights;
    double eta = 0.0;
    std::string model_source;
};

void apply_config_file(RunSpec& spec, const CLI::App& cmd) {
    if (spec.config_path.empty()) return;
    std::ifstream in(spec.config_path);
    if (!in) throw covex::ValidationError("config: cannot open " + spec.config_path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw covex::ValidationError("config: " + spec.config_path + ": " + e.what());
    }
    if (!doc.contains("version") || doc["version"] != 1)
        throw covex::ValidationError("config: expected \"version\": 1");

    // CLI flags always win over file values
    const auto absent = [&cmd](const std::string& flag) {
        const auto* opt = cmd.get_option_no_throw(flag);
        return opt == nullptr || opt->count() == 0;
    };
    if (doc.contains("model") && absent("--model")) spec.model_path = doc["model"];
    if (doc.contains("generator")) {
        const auto& g = doc["generator"];
        if (g.contains("S") && absent("--states")) spec.gen_states = g["S"];
        if (g.contains("A") && absent("--actions")) spec.gen_actions = g["A"];
        if (g.contains("alpha") && absent("--alpha")) spec.gen_alpha = g["alpha"];
        if (g.contains("lambda_mix") && absent("--lambda")) spec.gen_lambda = g["lambda_mix"];
        if (g.contains("seed") && absent("--gen-seed")) spec.gen_seed = g["seed"];
    }
    if (doc.contains("mu") && absent("--mu")) {
        if (doc["mu"].is_string())
            spec.mu_spec = doc["mu"];
        else if (doc["mu"].is_array()) {
            std::string list;
            for (const auto& v : doc["mu"]) {
                if (!list.empty()) list += ',';
                list += covex::fmt17(v.get<double>());
            }
            spec.mu_spec = list;
        }
    }
    if (doc.contains("rho") && absent("--rho")) {
        spec.rho_list.clear();
        if (doc["rho"].is_array())
            for (const auto& v : doc["rho"]) spec.rho_list.push_back(v.get<double>());
        else
            spec.rho_list.push_back(doc["rho"].get<double>());
    }
    if (doc.contains("eta") && absent("--eta"))
        spec.eta_spec = doc["eta"].is_string() ? doc["eta"].get<std::string>()
                                               : covex::fmt17(doc["eta"].get<double>());
    if (doc.contains("tau1") && absent("--tau1")) spec.tau1 = doc["tau1"];
    if (doc.contains("episodes") && absent("--episodes")) spec.episodes = doc["episodes"];
    if (doc.contains("epsilon") && absent("--epsilon")) spec.epsilon = doc["epsilon"];
    if (doc.contains("seed") && absent("--seed")) spec.seed = doc["seed"];
    if (doc.contains("iterations") && absent("--iterations")) spec.iterations = doc["iterations"];
    if (doc.contains("burn_in") && absent("--burn-in")) spec.burn_in = doc["burn_in"];
    if (doc.contains("csv_occupancy") && absent("--csv-occupancy"))
        spec.csv_occupancy = doc["csv_occupancy"];
    if (doc.contains("timing") && absent("--timing")) spec.timing = doc["timing"];
    if (doc.contains("out") && absent("--out")) spec.out_dir = doc["out"];
}

std::vector<double> parse_mu_values(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) continue;
        values.push_back(std::stod(token));
    }
    return values;
}

ResolvedRun resolve_run(const RunSpec& spec) {
    ResolvedRun run;
    std::optional<covex::CoverageWeights> file_mu;

    if (!spec.model_path.empty()) {
        auto loaded = covex::load_model(spec.model_path);
        run.model = std::move(loaded.model);
        file_mu = std::move(loaded.weights);
        run.model_source = spec.model_path;
    } else if (spec.gen_states > 0) {
        run.model = covex::random_ergodic_mdp(spec.gen_states,
                                              spec.gen_actions > 0 ? spec.gen_actions : 1,
                                              spec.gen_alpha, spec.gen_lambda, spec.gen_seed);
        std::ostringstream os;
        os << "generated(S=" << spec.gen_states << ",A=" << run.model.num_actions
           << ",alpha=" << spec.gen_alpha << ",lambda=" << spec.gen_lambda
           << ",seed=" << spec.gen_seed << ")";
        run.model_source = os.str();
    } else {
        throw covex::ValidationError("no model: pass --model FILE or --states/--actions");
    }

    const auto report = covex::validate_mdp(run.model);
    if (!report.ok) throw covex::ValidationError("model validation: " + report.message());

    const std::size_t n = run.model.num_pairs();
    if (spec.mu_spec.empty()) {
        run.weights = file_mu ? *file_mu : covex::CoverageWeights::uniform(n);
    } else if (spec.mu_spec == "uniform") {
        run.weights = covex::CoverageWeights::uniform(n);
    } else if (spec.mu_spec == "model") {
        if (!file_mu) throw covex::ValidationError("--mu model: model file carries no mu table");
        run.weights = *file_mu;
    } else if (spec.mu_spec.front() == '@') {
        std::ifstream in(spec.mu_spec.substr(1));
        if (!in) throw covex::ValidationError("--mu: cannot open " + spec.mu_spec.substr(1));
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw covex::ValidationError(std::string("--mu file: ") + e.what());
        }
        std::vector<double> flat;
        const auto& arr = doc.contains("mu") ? doc["mu"] : doc;
        for (const auto& v : arr) {
            if (v.is_array())
                for (const auto& w : v) flat.push_back(w.get<double>());
            else
                flat.push_back(v.get<double>());
        }
        run.weights = covex::CoverageWeights(std::move(flat));
    } else {
        run.weights = covex::CoverageWeights(parse_mu_values(spec.mu_spec));
    }
    if (run.weights.size() != n)
        throw covex::ValidationError("mu table size does not match S*A = " + std::to_string(n));

    if (spec.eta_spec == "auto")
        run.eta = covex::default_eta(run.model);
    else
        run.eta = std::stod(spec.eta_spec);
    if (!(run.eta >= 0.0 && run.eta < 0.5))
        throw covex::ValidationError("eta must lie in [0, 1/2)");
    return run;
}

ordered_json config_echo(const RunSpec& spec, const ResolvedRun& run, double rho) {
    ordered_json echo;
    echo["model"] = run.model_source;
    echo["S"] = run.model.num_states;
    echo["A"] = run.model.num_actions;
    echo["mu"] = run.weights.mu;
    echo["rho"] = rho;
    echo["eta"] = run.eta;
    echo["tau1"] = spec.tau1;
    echo["episodes"] = spec.episodes;
    echo["epsilon"] = spec.epsilon;
    echo["seed"] = spec.seed;
    echo["iterations"] = spec.iterations;
    return echo;
}

void write_json(const fs::path& path, const ordered_json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw covex::ValidationError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

double single_rho(const RunSpec& spec) {
    if (spec.rho_list.empty()) return 2.0;
    if (spec.rho_list.size() > 1)
        throw covex::ValidationError("this command expects exactly one --rho value");
    return spec.rho_list.front();
}

// ---------------------------------------------------------------- commands

int cmd_gen_mdp(int states, int actions, double alpha, double lambda, std::uint64_t seed,
                const std::string& embed_mu, const std::string& out_file) {
    auto model = covex::random_ergodic_mdp(states, actions, alpha, lambda, seed);
    const auto report = covex::validate_mdp(model);
    if (!report.ok) throw covex::ValidationError("generated model invalid: " + report.message());

    std::optional<covex::CoverageWeights> weights;
    if (embed_mu == "uniform") {
        weights = covex::CoverageWeights::uniform(model.num_pairs());
    } else if (embed_mu == "random") {
        covex::Rng rng(seed + 1);
        std::vector<double> mu(model.num_pairs());
        for (auto& w : mu) w = rng.uniform(0.5, 2.0);
        weights = covex::CoverageWeights(std::move(mu));
    } else if (embed_mu != "none") {
        throw covex::ValidationError("--embed-mu must be none, uniform, or random");
    }

    covex::save_model(out_file, model, weights);
    std::cout << "wrote " << out_file << " (S=" << states << ", A=" << actions << ")\n";
    return 0;
}

int cmd_solve(const RunSpec& spec) {
    const auto run = resolve_run(spec);
    const double rho = single_rho(spec);

    const auto result = covex::exact_solve(run.model, rho, run.weights, run.eta, spec.iterations);
    const auto policy =
        covex::policy_of_occupancy(run.model.num_states, run.model.num_actions, result.occupancy);
    const auto replayed = covex::occupancy_of_policy(run.model, policy);
    double policy_defect = 0.0;
    for (std::size_t i = 0; i < replayed.size(); ++i)
        policy_defect = std::max(policy_defect, std::abs(replayed[i] - result.occupancy[i]));

    const auto mm = covex::minimax_occupancy(run.model, run.weights, run.eta);
    const auto ratio = covex::max_ratio(run.weights, result.occupancy);

    ordered_json doc;
    doc["version"] = 1;
    doc["command"] = "solve";
    doc["config"] = config_echo(spec, run, rho);
    doc["d_star"] = result.occupancy;
    doc["u_star"] = result.u_value;
    doc["fw_gap"] = result.gap;
    doc["converged"] = result.converged;
    doc["fw_iterations"] = result.iterations;
    doc["policy"] = policy.probs;
    doc["policy_occupancy_defect"] = policy_defect;
    doc["max_ratio"] = ratio.value;
    doc["minimax_value"] = mm.status == covex::lp::Status::optimal ? mm.value : 0.0;
    if (run.eta > 0.0 && run.eta <= 0.05) {
        const auto unrestricted =
            covex::exact_solve(run.model, rho, run.weights, 0.0, spec.iterations);
        doc["u_star_unrestricted"] = unrestricted.u_value;
    }

    fs::create_directories(spec.out_dir);
    const auto out_path = fs::path(spec.out_dir) / "solve.json";
    write_json(out_path, doc);
    std::cout << "rho=" << rho << " eta=" << run.eta << " U*=" << covex::fmt17(result.u_value)
              << " gap=" << result.gap << " max_ratio=" << ratio.value << "\n"
              << "wrote " << out_path.string() << "\n";
    return 0;
}

int cmd_explore(const RunSpec& spec) {
    const auto run = resolve_run(spec);
    const double rho = single_rho(spec);
    if (!(run.eta > 0.0))
        throw covex::ValidationError("explore requires eta > 0 (auto selection provides one)");

    const covex::RhoObjective objective(rho, run.weights);
    const auto comparator =
        covex::exact_solve(run.model, rho, run.weights, run.eta, spec.iterations);

    covex::ExplorationConfig config;
    config.rho = rho;
    config.weights = run.weights;
    config.eta = run.eta;
    config.tau1 = spec.tau1;
    config.num_episodes = spec.episodes;
    config.epsilon_cold = spec.epsilon;
    config.seed = spec.seed;

    const auto trace = covex::run_exploration(run.model, config);
    const auto xi = covex::approximation_error(trace, comparator.occupancy, objective);
    const double u_star = covex::evaluate_U(objective, comparator.occupancy);

    std::vector<double> steps;
    steps.reserve(trace.episodes.size());
    for (const auto& ep : trace.episodes)
        steps.push_back(static_cast<double>(ep.t_start + ep.tau - 1));

    const std::size_t burn =
        spec.burn_in >= 0 ? static_cast<std::size_t>(spec.burn_in)
                          : static_cast<std::size_t>(std::max(0, spec.episodes / 4));
    ordered_json slope = nullptr;
    ordered_json slope_points = nullptr;
    try {
        const auto fit = covex::fit_rate(steps, xi, burn);
        slope = fit.slope;
        slope_points = fit.points_used;
    } catch (const std::invalid_argument&) {
        // too few usable points: slope stays null
    }

    const auto mm = covex::minimax_occupancy(run.model, run.weights, run.eta);

    covex::TraceCsvOptions csv_opt;
    csv_opt.include_occupancy = spec.csv_occupancy;
    csv_opt.include_timing = spec.timing;
    const auto csv = covex::trace_csv(trace, xi, u_star, csv_opt);

    ordered_json doc;
    doc["version"] = 1;
    doc["command"] = "explore";
    doc["config"] = config_echo(spec, run, rho);
    doc["config"]["burn_in"] = static_cast<int>(burn);
    doc["d_star"] = comparator.occupancy;
    doc["u_star"] = u_star;
    doc["fw_gap"] = comparator.gap;
    doc["final_d_hat"] = trace.episodes.back().d_hat;
    doc["final_xi"] = xi.back();
    doc["final_max_ratio"] = trace.episodes.back().max_ratio;
    doc["fitted_slope"] = slope;
    doc["slope_points"] = slope_points;
    doc["minimax_value"] = mm.status == covex::lp::Status::optimal ? mm.value : 0.0;
    doc["k_delta"] = trace.k_delta;
    doc["total_steps"] = trace.schedule.final_time - 1;
    if (run.eta <= 0.05) {
        const auto unrestricted =
            covex::exact_solve(run.model, rho, run.weights, 0.0, spec.iterations);
        doc["u_star_unrestricted"] = unrestricted.u_value;
    }

    fs::create_directories(spec.out_dir);
    const auto csv_path = fs::path(spec.out_dir) / "trace.csv";
    const auto json_path = fs::path(spec.out_dir) / "summary.json";
    covex::write_text_file(csv_path.string(), csv);
    write_json(json_path, doc);

    std::cout << "episodes=" << spec.episodes << " steps=" << (trace.schedule.final_time - 1)
              << " final_xi=" << covex::fmt17(xi.back()) << " slope="
              << (slope.is_null() ? std::string("n/a") : covex::fmt17(slope.get<double>()))
              << "\nwrote " << csv_path.string() << ", " << json_path.string() << "\n";
    return 0;
}

int cmd_sweep_rho(const RunSpec& spec) {
    const auto run = resolve_run(spec);
    auto rhos = spec.rho_list.empty() ? std::vector<double>{1, 2, 4, 8, 16, 32, 64}
                                      : spec.rho_list;
    std::sort(rhos.begin(), rhos.end());

    // per-rho solves are independent; run them on worker threads and
    // merge in rho order
    std::vector<std::future<covex::ExactSolveResult>> jobs;
    jobs.reserve(rhos.size());
    for (double rho : rhos)
        jobs.push_back(std::async(std::launch::async, [&run, &spec, rho] {
            return covex::exact_solve(run.model, rho, run.weights, run.eta, spec.iterations);
        }));

    const auto mm = covex::minimax_occupancy(run.model, run.weights, run.eta);
    const double baseline = mm.status == covex::lp::Status::optimal
                                ? mm.value
                                : std::numeric_limits<double>::quiet_NaN();

    ordered_json rows = ordered_json::array();
    std::printf("%10s %18s %14s %14s\n", "rho", "U*", "max_ratio", "gap_to_minimax");
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        const auto result = jobs[i].get();
        const auto ratio = covex::max_ratio(run.weights, result.occupancy);
        ordered_json row;
        row["rho"] = rhos[i];
        row["u_star"] = result.u_value;
        row["max_ratio"] = ratio.value;
        row["gap_to_minimax"] = ratio.value - baseline;
        row["fw_gap"] = result.gap;
        row["converged"] = result.converged;
        row["d_star"] = result.occupancy;
        rows.push_back(std::move(row));
        std::printf("%10g %18.10g %14.8g %14.6g\n", rhos[i], result.u_value, ratio.value,
                    ratio.value - baseline);
    }
    std::printf("minimax value 1/m* = %.10g\n", baseline);

    ordered_json doc;
    doc["version"] = 1;
    doc["command"] = "sweep-rho";
    doc["config"] = config_echo(spec, run, rhos.front());
    doc["config"]["rho_list"] = rhos;
    doc["minimax_value"] = baseline;
    doc["minimax_occupancy"] = mm.point;
    doc["rows"] = std::move(rows);

    fs::create_directories(spec.out_dir);
    const auto out_path = fs::path(spec.out_dir) / "sweep.json";
    write_json(out_path, doc);
    std::cout << "wrote " << out_path.string() << "\n";
    return 0;
}

int cmd_verify(const RunSpec& spec, double fd_tol, double fd_step, int trials) {
    ResolvedRun run;
    if (!spec.model_path.empty() || spec.gen_states > 0) {
        run = resolve_run(spec);
    } else {
        RunSpec fallback = spec;
        fallback.gen_states = 4;
        fallback.gen_actions = 3;
        run = resolve_run(fallback);
    }

    covex::VerifyOptions opt;
    opt.fd_rel_tol = fd_tol;
    opt.fd_step = fd_step;
    opt.trials = trials;
    opt.seed = spec.seed;

    const auto results = covex::verify_model(run.model, opt);
    bool validation_failed = false;
    bool any_failed = false;
    for (const auto& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
        if (!r.pass) {
            any_failed = true;
            if (r.name == "model_validation") validation_failed = true;
        }
    }
    if (validation_failed) return 2;
    return any_failed ? 4 : 0;
}

void add_model_options(CLI::App* cmd, RunSpec& spec) {
    cmd->add_option("--model", spec.model_path, "model JSON file");
    cmd->add_option("--states", spec.gen_states, "generate: number of states");
    cmd->add_option("--actions", spec.gen_actions, "generate: number of actions");
    cmd->add_option("--alpha", spec.gen_alpha, "generate: Dirichlet concentration");
    cmd->add_option("--lambda", spec.gen_lambda, "generate: uniform mixing weight");
    cmd->add_option("--gen-seed", spec.gen_seed, "generate: model seed");
    cmd->add_option("--mu", spec.mu_spec, "weights: uniform | model | v1,v2,... | @file");
    cmd->add_option("--eta", spec.eta_spec, "restriction level: auto | number");
    cmd->add_option("--out", spec.out_dir, "output directory");
    cmd->add_option("--config", spec.config_path, "JSON config file (flags override)");
    cmd->add_option("--iterations", spec.iterations, "Frank-Wolfe iteration budget");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coverage-driven exploration toolkit for tabular MDPs"};
    app.require_subcommand(1);

    // gen-mdp
    int gen_states = 5, gen_actions = 3;
    double gen_alpha = 1.0, gen_lambda = 0.05;
    std::uint64_t gen_seed = 7;
    std::string gen_embed_mu = "none", gen_out = "model.json";
    auto* gen = app.add_subcommand("gen-mdp", "generate a random ergodic model file");
    gen->add_option("--states", gen_states, "number of states")->required();
    gen->add_option("--actions", gen_actions, "number of actions")->required();
    gen->add_option("--alpha", gen_alpha, "Dirichlet concentration");
    gen->add_option("--lambda", gen_lambda, "uniform mixing weight");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--embed-mu", gen_embed_mu, "embed weights: none | uniform | random");
    gen->add_option("--out", gen_out, "output model file");

    RunSpec solve_spec;
    auto* solve = app.add_subcommand("solve", "exact coverage optimum over D_eta");
    add_model_options(solve, solve_spec);
    solve->add_option("--rho", solve_spec.rho_list, "objective parameter rho >= 1")
        ->delimiter(',');

    RunSpec explore_spec;
    auto* explore = app.add_subcommand("explore", "episodic exploration run");
    add_model_options(explore, explore_spec);
    explore->add_option("--rho", explore_spec.rho_list, "objective parameter rho >= 1")
        ->delimiter(',');
    explore->add_option("--tau1", explore_spec.tau1, "first episode length");
    explore->add_option("--episodes", explore_spec.episodes, "number of episodes K");
    explore->add_option("--epsilon", explore_spec.epsilon, "cold-start count floor");
    explore->add_option("--seed", explore_spec.seed, "run seed");
    explore->add_option("--burn-in", explore_spec.burn_in, "episodes dropped before rate fit");
    explore->add_flag("--csv-occupancy", explore_spec.csv_occupancy,
                      "append flattened d_hat columns to the trace CSV");
    explore->add_flag("--timing", explore_spec.timing,
                      "record real per-episode wall time in the CSV (non-reproducible)");

    RunSpec sweep_spec;
    auto* sweep = app.add_subcommand("sweep-rho", "compare optima across rho values");
    add_model_options(sweep, sweep_spec);
    sweep->add_option("--rho", sweep_spec.rho_list, "rho values to sweep")->delimiter(',');

    RunSpec verify_spec;
    double verify_fd_tol = 1e-5, verify_fd_step = 1e-6;
    int verify_trials = 25;
    auto* verify = app.add_subcommand("verify", "run the property suites");
    add_model_options(verify, verify_spec);
    verify->add_option("--seed", verify_spec.seed, "suite seed");
    verify->add_option("--fd-tol", verify_fd_tol, "finite-difference relative tolerance");
    verify->add_option("--fd-step", verify_fd_step, "finite-difference step h");
    verify->add_option("--trials", verify_trials, "trials per property");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return cmd_gen_mdp(gen_states, gen_actions, gen_alpha, gen_lambda, gen_seed,
                               gen_embed_mu, gen_out);
        if (solve->parsed()) {
            apply_config_file(solve_spec, *solve);
            return cmd_solve(solve_spec);
        }
        if (explore->parsed()) {
            apply_config_file(explore_spec, *explore);
            return cmd_explore(explore_spec);
        }
        if (sweep->parsed()) {
            apply_config_file(sweep_spec, *sweep);
            return cmd_sweep_rho(sweep_spec);
        }
        if (verify->parsed()) {
            apply_config_file(verify_spec, *verify);
            return cmd_verify(verify_spec, verify_fd_tol, verify_fd_step, verify_trials);
        }
    } catch (const covex::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const covex::ValidationError& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
