// Copyright 2026 The ils Authors.
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

// Command-line front end. run() is the whole program minus process setup, so
// tests drive it in-process with string streams.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ils/box.hpp"
#include "ils/decorrelate.hpp"
#include "ils/ilp.hpp"
#include "ils/io.hpp"
#include "ils/model.hpp"
#include "ils/oracle.hpp"
#include "ils/pivot_solver.hpp"

namespace ils::cli {

using io::json;

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kBadInput = 2,
    kRankDeficient = 3,
    kBoxTooLarge = 4,
};

inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::InvalidArgument:
        case ErrorKind::Infeasible:
            return kBadInput;
        case ErrorKind::RankDeficient:
        case ErrorKind::NotSpd:
            return kRankDeficient;
        case ErrorKind::BoxTooLarge:
            return kBoxTooLarge;
        default:
            return kFailure;
    }
}

inline const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names{"round", "pivot", "ilp", "enum"};
    return names;
}

/// Problem loaded from either file kind.
struct LoadedInput {
    std::optional<MixedModel> model;
    IntegerLsProblem problem;
    double sigma2 = 1.0;
};

inline LoadedInput load_input(const json& j) {
    LoadedInput in;
    if (io::detect_kind(j) == io::FileKind::MixedModel) {
        in.model = io::model_from_json(j);
        in.problem = reduce(*in.model);
        in.sigma2 = in.model->sigma2;
    } else {
        in.problem = io::problem_from_json(j);
    }
    return in;
}

struct SolveOptions {
    std::string method = "pivot";
    bool decorrelate = true;
    double kappa = 3.0;
    std::optional<Box> box;
    bool verify = false;
};

inline io::DecorrelationInfo describe(const DecorrelatedProblem& dp) {
    const double tol = 1e-12 * dp.H1.diagonal().maxCoeff();
    return {dp.map.gt, dp.H1, check_reduced(dp.H1, tol), dp.steps};
}

inline bool same_objective(double a, double b) { return std::fabs(a - b) <= 1e-10 * std::max(1.0, std::fabs(b)); }

/// Runs one method and fills in everything except matches_oracle.
inline io::SolveReport solve_with(const LoadedInput& in, const SolveOptions& opt, const std::string& method) {
    using clock = std::chrono::steady_clock;
    const IntegerLsProblem& problem = in.problem;
    io::SolveReport r;
    r.method = method;
    r.c0 = problem.c0;
    const auto start = clock::now();
    if (method == "round") {
        r.z_int = solve_round(problem).z_int;
    } else if (method == "pivot") {
        r.z_int = solve_pivot(problem, opt.decorrelate).z_int;
        if (opt.decorrelate) r.decorrelation = describe(decorrelate(problem));
    } else if (method == "ilp") {
        const IlpResult res = solve_ilp(problem, {opt.box, opt.kappa, in.sigma2, true});
        r.z_int = res.z_int;
        r.decorrelation = describe(res.decorrelated);
        r.stats.nodes = res.stats.nodes;
        r.stats.bits = res.stats.bits;
        r.stats.products = res.stats.products;
    } else if (method == "enum") {
        const DecorrelatedProblem dp = decorrelate(problem);
        const Box box = opt.box ? *opt.box : default_box(dp, opt.kappa, in.sigma2);
        const OracleResult res = enumerate_mapped(problem, dp.map, box);
        r.z_int = res.best_z;
        r.decorrelation = describe(dp);
        r.stats.candidates = res.candidates;
    } else {
        throw Error(ErrorKind::InvalidArgument, "unknown method " + method);
    }
    r.stats.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    r.objective_int = objective_int(problem, r.z_int);
    if (in.model) {
        const MixedSolution s = complete_solution(*in.model, problem, r.z_int);
        r.beta = s.beta;
        r.objective_full = s.objective_full;
    }
    return r;
}

inline OracleResult reference_optimum(const LoadedInput& in, const SolveOptions& opt) {
    const DecorrelatedProblem dp = decorrelate(in.problem);
    const Box box = opt.box ? *opt.box : default_box(dp, opt.kappa, in.sigma2);
    return enumerate_mapped(in.problem, dp.map, box, 1);
}

inline json solve_document(const LoadedInput& in, const SolveOptions& opt, bool all) {
    std::optional<OracleResult> oracle;
    if (opt.verify) oracle = reference_optimum(in, opt);
    auto finish = [&](io::SolveReport r) {
        if (oracle) r.matches_oracle = same_objective(r.objective_int, oracle->best_objective);
        return r;
    };
    if (!all) return io::to_json(finish(solve_with(in, opt, opt.method)));

    json reports = json::array();
    std::map<std::string, double> objective;
    for (const auto& method : method_names()) {
        io::SolveReport r = finish(solve_with(in, opt, method));
        objective[method] = r.objective_int;
        reports.push_back(io::to_json(r));
    }
    auto at_most = [](double a, double b) { return a <= b + 1e-10 * std::max(1.0, std::fabs(b)); };
    json summary;
    summary["objective_int"] = objective;
    summary["ilp_matches_enum"] = same_objective(objective["ilp"], objective["enum"]);
    summary["ilp_le_pivot"] = at_most(objective["ilp"], objective["pivot"]);
    summary["ilp_le_round"] = at_most(objective["ilp"], objective["round"]);
    std::string best = method_names().front();
    for (const auto& method : method_names())
        if (objective[method] < objective[best]) best = method;
    summary["best_method"] = best;
    return json{{"reports", std::move(reports)}, {"summary", std::move(summary)}};
}

inline void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
    file << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct BenchOptions {
    int instances = 100;
    int p = 2;
    int q = 4;
    int m = 0;  // 0 means 3 * (p + q)
    double noise = 0.1;
    double correlation = 0.8;
    double kappa = 3.0;
    std::uint64_t seed = 1;
};

struct MethodTally {
    int successes = 0;
    int recoveries = 0;
    double objective_sum = 0.0;
    double wall_ms_sum = 0.0;
};

inline json run_bench(const BenchOptions& opt, std::ostream& table) {
    const int m = opt.m > 0 ? opt.m : 3 * (opt.p + opt.q);
    std::map<std::string, MethodTally> tally;
    for (int i = 0; i < opt.instances; ++i) {
        const SyntheticInstance inst =
            generate_synthetic(opt.p, opt.q, m, opt.noise, opt.correlation, opt.seed + static_cast<std::uint64_t>(i));
        LoadedInput in{inst.model, reduce(inst.model), inst.model.sigma2};
        SolveOptions so;
        so.kappa = opt.kappa;
        const double best = reference_optimum(in, so).best_objective;
        for (const auto& method : method_names()) {
            const io::SolveReport r = solve_with(in, so, method);
            MethodTally& t = tally[method];
            t.successes += r.objective_int <= best + 1e-10 * std::max(1.0, std::fabs(best)) ? 1 : 0;
            t.recoveries += r.z_int == inst.true_z ? 1 : 0;
            t.objective_sum += r.objective_int;
            t.wall_ms_sum += r.stats.wall_ms;
        }
    }

    const double n = static_cast<double>(opt.instances);
    json methods;
    table << std::left << std::setw(8) << "method" << std::right << std::setw(10) << "success" << std::setw(10)
          << "recovery" << std::setw(16) << "mean_F2" << std::setw(12) << "mean_ms" << "\n";
    for (const auto& method : method_names()) {
        const MethodTally& t = tally[method];
        methods[method] = json{{"success_rate", t.successes / n},
                               {"recovery_rate", t.recoveries / n},
                               {"mean_objective", t.objective_sum / n},
                               {"mean_wall_ms", t.wall_ms_sum / n}};
        table << std::left << std::setw(8) << method << std::right << std::fixed << std::setprecision(3)
              << std::setw(10) << t.successes / n << std::setw(10) << t.recoveries / n << std::setw(16)
              << std::setprecision(6) << t.objective_sum / n << std::setw(12) << std::setprecision(3)
              << t.wall_ms_sum / n << "\n";
    }
    return json{{"instances", opt.instances}, {"p", opt.p},          {"q", opt.q},
                {"m", m},                     {"noise", opt.noise},  {"correlation", opt.correlation},
                {"kappa", opt.kappa},         {"seed", opt.seed},    {"methods", std::move(methods)}};
}

/// Entry point. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Integer least-squares toolkit: reduce, decorrelate and solve mixed integer models"};
    app.require_subcommand(1);

    std::string input;
    std::string output;

    auto* reduce_cmd = app.add_subcommand("reduce", "Eliminate real parameters from a mixed model file");
    reduce_cmd->add_option("input", input, "Mixed-model JSON file")->required();
    reduce_cmd->add_option("--output,-o", output, "Output path (default stdout)");

    auto* decor_cmd = app.add_subcommand("decorrelate", "Emit H1, Gt and z1_float for a problem file");
    decor_cmd->add_option("input", input, "Mixed-model or reduced-problem JSON file")->required();
    decor_cmd->add_option("--output,-o", output, "Output path (default stdout)");

    SolveOptions so;
    bool no_decorrelate = false;
    bool all = false;
    std::string box_path;
    auto* solve_cmd = app.add_subcommand("solve", "Solve a problem file and print a JSON report");
    solve_cmd->add_option("input", input, "Mixed-model or reduced-problem JSON file")->required();
    solve_cmd->add_option("--method", so.method, "round | pivot | ilp | enum")
        ->check(CLI::IsMember(method_names()));
    solve_cmd->add_flag("--no-decorrelate", no_decorrelate, "Skip decorrelation in the pivot method");
    auto* kappa_opt = solve_cmd->add_option("--kappa", so.kappa, "Box half-width in standard deviations")
                          ->check(CLI::PositiveNumber);
    solve_cmd->add_option("--box", box_path, "Box JSON file {lower, upper} in decorrelated coordinates")
        ->excludes(kappa_opt);
    solve_cmd->add_flag("--verify", so.verify, "Compare against the enumeration oracle");
    solve_cmd->add_flag("--all", all, "Run every method and add a comparison summary");
    solve_cmd->add_option("--output,-o", output, "Output path (default stdout)");

    BenchOptions gen;
    std::string truth_path;
    auto* gen_cmd = app.add_subcommand("generate", "Write a random mixed model and its truth file");
    gen_cmd->add_option("--p", gen.p, "Real parameters")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--q", gen.q, "Integer parameters")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--m", gen.m, "Observations (default 3 * (p + q))")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--noise", gen.noise, "Observation noise standard deviation")
        ->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--correlation", gen.correlation, "Shared-column strength in [0, 1)")
        ->check(CLI::Range(0.0, 0.999999));
    gen_cmd->add_option("--seed", gen.seed, "Random seed");
    gen_cmd->add_option("--output,-o", output, "Model output path (default stdout)");
    gen_cmd->add_option("--truth", truth_path, "Truth output path (default <output>.truth.json)");

    BenchOptions bench;
    auto* bench_cmd = app.add_subcommand("bench", "Compare all methods against the oracle on random models");
    bench_cmd->add_option("--instances", bench.instances, "Number of models")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--p", bench.p, "Real parameters")->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--q", bench.q, "Integer parameters")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--m", bench.m, "Observations (default 3 * (p + q))")->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--noise", bench.noise, "Observation noise standard deviation")
        ->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--correlation", bench.correlation, "Shared-column strength in [0, 1)")
        ->check(CLI::Range(0.0, 0.999999));
    bench_cmd->add_option("--kappa", bench.kappa, "Oracle box half-width in standard deviations")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", bench.seed, "Seed of the first model");
    bench_cmd->add_option("--output,-o", output, "JSON output path (default stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    }

    try {
        if (reduce_cmd->parsed()) {
            const MixedModel model = io::model_from_json(io::read_json_file(input));
            write_output(output, dump(io::to_json(reduce(model))), out);
        } else if (decor_cmd->parsed()) {
            const LoadedInput in = load_input(io::read_json_file(input));
            const DecorrelatedProblem dp = decorrelate(in.problem);
            const json doc{{"H1", io::to_json_matrix(dp.H1)},
                           {"Gt", io::to_json_matrix(dp.map.gt)},
                           {"z1_float", io::to_json_vector(dp.z1_float)},
                           {"c0", dp.c0},
                           {"reduced", describe(dp).reduced},
                           {"steps", dp.steps}};
            write_output(output, dump(doc), out);
        } else if (solve_cmd->parsed()) {
            so.decorrelate = !no_decorrelate;
            if (!box_path.empty()) so.box = io::box_from_json(io::read_json_file(box_path));
            const LoadedInput in = load_input(io::read_json_file(input));
            write_output(output, dump(solve_document(in, so, all)), out);
        } else if (gen_cmd->parsed()) {
            const int m = gen.m > 0 ? gen.m : 3 * (gen.p + gen.q);
            if (m < gen.p + gen.q) throw Error(ErrorKind::InvalidArgument, "--m must be at least p + q");
            const SyntheticInstance inst = generate_synthetic(gen.p, gen.q, m, gen.noise, gen.correlation, gen.seed);
            const json truth{{"true_beta", io::to_json_vector(inst.true_beta)},
                             {"true_z", io::to_json_vector(inst.true_z)},
                             {"seed", gen.seed}};
            write_output(output, dump(io::to_json(inst.model)), out);
            if (truth_path.empty() && !output.empty() && output != "-")
                truth_path = std::filesystem::path(output).replace_extension(".truth.json").string();
            if (!truth_path.empty()) write_output(truth_path, dump(truth), out);
        } else if (bench_cmd->parsed()) {
            std::ostringstream table;
            const json doc = run_bench(bench, table);
            write_output(output, dump(doc), out);
            (output.empty() || output == "-" ? err : out) << table.str();
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}

}  // namespace ils::cli
