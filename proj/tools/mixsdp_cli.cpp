// Command-line front-end: generic unit-diagonal SDP solves, MAXCUT and
// MAXSAT relaxations with rounding, optimality certificates, and a bench
// mode that emits per-run convergence traces.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixsdp/mixsdp.hpp"

namespace {

using nlohmann::json;

struct RunConfig {
    std::string input;
    std::vector<std::string> inputs; // bench only
    std::string rank = "auto";
    double tol = 1e-4;
    int max_sweeps = 10000;
    std::string step_size = "none";
    std::uint64_t seed = 0;
    int trials = 100;
    std::string trace_path;
    std::string json_path;
    std::string assignment_path;
    bool certify = false;
    bool quiet = false;
    bool deterministic = false;
    double cert_tol = 1e-8;
    int cert_iters = 100000;
    // bench
    int bench_seeds = 2;
    std::string bench_format = "cost";
    std::string out_dir = ".";
    // oracle
    std::string oracle_mode = "maxcut";
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mixsdp::input_error("cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw mixsdp::input_error("cannot open output file: " + tmp);
        out << content;
        if (!out) throw mixsdp::input_error("failed writing output file: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

std::string iso_timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

/// Resolves the --rank/--step-size strings into SolveOptions; throws
/// input_error on bad values. Runs before any file is touched.
mixsdp::SolveOptions make_solve_options(const RunConfig& cfg) {
    mixsdp::SolveOptions opts;
    if (cfg.rank == "auto") {
        opts.rank = mixsdp::SolveOptions::kAutoRank;
    } else {
        try {
            std::size_t pos = 0;
            const int r = std::stoi(cfg.rank, &pos);
            if (pos != cfg.rank.size() || r < 1) throw std::invalid_argument("rank");
            opts.rank = r;
        } catch (const std::exception&) {
            throw mixsdp::input_error("--rank must be `auto` or a positive integer");
        }
    }
    if (cfg.step_size == "none") {
        opts.step_size = mixsdp::StepSize::none();
    } else if (cfg.step_size == "auto") {
        opts.step_size = mixsdp::StepSize::automatic();
    } else {
        try {
            std::size_t pos = 0;
            const double theta = std::stod(cfg.step_size, &pos);
            if (pos != cfg.step_size.size() || !(theta > 0.0)) throw std::invalid_argument("theta");
            opts.step_size = mixsdp::StepSize::fixed(theta);
        } catch (const std::exception&) {
            throw mixsdp::input_error("--step-size must be `none`, `auto`, or a positive number");
        }
    }
    opts.tol_rel = cfg.tol;
    opts.max_sweeps = cfg.max_sweeps;
    opts.seed = cfg.seed;
    mixsdp::validate(opts);
    if (!(cfg.cert_tol > 0.0)) throw mixsdp::input_error("--cert-tol must be > 0");
    if (cfg.cert_iters < 1) throw mixsdp::input_error("--cert-iters must be positive");
    if (cfg.trials < 1) throw mixsdp::input_error("--trials must be positive");
    if (cfg.bench_seeds < 1) throw mixsdp::input_error("--seeds must be positive");
    if (cfg.bench_format != "cost" && cfg.bench_format != "graph")
        throw mixsdp::input_error("--format must be `cost` or `graph`");
    return opts;
}

std::string step_mode_name(const mixsdp::SolveOptions& opts) {
    switch (opts.step_size.mode) {
        case mixsdp::StepSize::Mode::none: return "plain";
        case mixsdp::StepSize::Mode::automatic: return "step-auto";
        case mixsdp::StepSize::Mode::fixed: return "step-fixed";
    }
    return "plain";
}

std::string solve_trace_csv(const std::vector<mixsdp::TraceRecord>& trace, bool deterministic) {
    std::ostringstream out;
    out << "sweep,f,decrease,elapsed_s\n";
    char line[160];
    for (const auto& t : trace) {
        std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.9f\n", t.sweep, t.f, t.decrease,
                      deterministic ? 0.0 : t.elapsed_s);
        out << line;
    }
    return out.str();
}

std::string maxsat_trace_csv(const std::vector<mixsdp::TraceRecord>& trace, double offset,
                             bool deterministic) {
    std::ostringstream out;
    out << "sweep,objective,bound,elapsed_s\n";
    char line[160];
    for (const auto& t : trace) {
        std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.9f\n", t.sweep, t.f, offset - t.f,
                      deterministic ? 0.0 : t.elapsed_s);
        out << line;
    }
    return out.str();
}

json certificate_json(const mixsdp::Certificate& cert) {
    return json{{"dual_value", cert.dual_value},
                {"primal_value", cert.primal_value},
                {"raw_gap", cert.raw_gap},
                {"lambda_min", cert.lambda_min_estimate},
                {"lambda_tol", cert.lambda_tol},
                {"certified_gap_bound", cert.certified_gap_bound},
                {"residual", cert.residual}};
}

void add_run_metadata(json& j, const RunConfig& cfg, const mixsdp::SolveResult& res,
                      double elapsed_s) {
    j["seed"] = cfg.seed;
    j["sweeps_used"] = res.sweeps_used;
    j["converged"] = res.converged;
    j["rank"] = res.V.rank();
    j["generator"] = res.generator;
    j["stopping_rule"] = res.stopping_rule;
    j["degenerate_columns"] = res.degenerate_columns;
    j["elapsed_s"] = cfg.deterministic ? 0.0 : elapsed_s;
    j["timestamp"] = cfg.deterministic ? "" : iso_timestamp();
}

int finish_run(const RunConfig& cfg, const json& summary, bool converged) {
    if (!cfg.json_path.empty()) write_file_atomic(cfg.json_path, summary.dump(2) + "\n");
    if (!cfg.quiet) std::cout << summary.dump(2) << "\n";
    return converged ? 0 : 3;
}

int run_solve(const RunConfig& cfg, const mixsdp::SolveOptions& opts, bool always_certify) {
    const mixsdp::SparseCost cost = mixsdp::parse_cost_text(read_file(cfg.input));
    const auto t0 = std::chrono::steady_clock::now();
    const mixsdp::SolveResult res = mixsdp::solve(cost, opts);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json j{{"input", cfg.input},
           {"n", cost.size()},
           {"nnz", cost.nnz()},
           {"dropped_diagonal", cost.dropped_diagonal()},
           {"f", res.f},
           {"mode", step_mode_name(opts)},
           {"tol_rel", opts.tol_rel}};
    add_run_metadata(j, cfg, res, elapsed);
    if (always_certify || cfg.certify)
        j["certificate"] = certificate_json(mixsdp::certify(cost, res.V, cfg.cert_tol, cfg.cert_iters));
    if (!cfg.trace_path.empty())
        write_file_atomic(cfg.trace_path, solve_trace_csv(res.trace, cfg.deterministic));
    return finish_run(cfg, j, res.converged);
}

int run_maxcut(const RunConfig& cfg, const mixsdp::SolveOptions& opts) {
    const mixsdp::maxcut::Graph graph = mixsdp::maxcut::parse_graph(read_file(cfg.input));
    const mixsdp::SparseCost cost = mixsdp::maxcut::graph_to_cost(graph);
    const auto t0 = std::chrono::steady_clock::now();
    const mixsdp::SolveResult res = mixsdp::solve(cost, opts);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const mixsdp::maxcut::CutAssignment best =
        mixsdp::maxcut::best_rounding(graph, res.V, cfg.trials, cfg.seed);
    const double bound = mixsdp::maxcut::sdp_cut_bound(graph, res.f);

    json j{{"input", cfg.input},
           {"n", graph.n},
           {"m", graph.edges.size()},
           {"W", graph.total_weight},
           {"f", res.f},
           {"cut_bound", bound},
           {"best_cut", best.value},
           {"ratio_vs_bound", bound != 0.0 ? json(best.value / bound) : json()},
           {"trials", cfg.trials},
           {"self_loops_dropped", graph.self_loops_dropped},
           {"has_negative_weights", graph.has_negative_weight}};
    add_run_metadata(j, cfg, res, elapsed);
    if (cfg.certify)
        j["certificate"] = certificate_json(mixsdp::certify(cost, res.V, cfg.cert_tol, cfg.cert_iters));

    if (!cfg.trace_path.empty())
        write_file_atomic(cfg.trace_path, solve_trace_csv(res.trace, cfg.deterministic));
    if (!cfg.assignment_path.empty()) {
        std::ostringstream out;
        for (int i = 0; i < graph.n; ++i)
            out << (i + 1) << ' ' << best.signs[static_cast<std::size_t>(i)] << '\n';
        write_file_atomic(cfg.assignment_path, out.str());
    }
    return finish_run(cfg, j, res.converged);
}

int run_maxsat(const RunConfig& cfg, const mixsdp::SolveOptions& opts) {
    namespace ms = mixsdp::maxsat;
    const ms::Formula formula = ms::parse_dimacs(read_file(cfg.input));
    const ms::ClauseSystem cs = ms::build_clause_system(formula);
    const auto t0 = std::chrono::steady_clock::now();
    const mixsdp::SolveResult res = ms::solve(cs, opts);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const ms::MaxsatState state = ms::make_state(cs, res.V);
    const double bound = ms::sat_upper_bound(cs, state);
    const ms::BoolAssignment best = ms::best_rounding(formula, state, cfg.trials, cfg.seed);

    json j{{"input", cfg.input},
           {"n_vars", formula.n_vars},
           {"n_clauses", formula.clauses.size()},
           {"total_weight", formula.total_weight()},
           {"f", res.f},
           {"sdp_bound", bound},
           {"best_satisfied", best.satisfied_weight},
           {"ratio_vs_bound", bound != 0.0 ? json(best.satisfied_weight / bound) : json()},
           {"hard_violations", ms::hard_violations(formula, best.values)},
           {"tautologies_dropped", formula.tautologies_dropped},
           {"trials", cfg.trials}};
    add_run_metadata(j, cfg, res, elapsed);
    if (cfg.certify) {
        const mixsdp::SparseCost cost = ms::materialize_cost(cs);
        j["certificate"] = certificate_json(mixsdp::certify(cost, res.V, cfg.cert_tol, cfg.cert_iters));
    }

    if (!cfg.trace_path.empty())
        write_file_atomic(cfg.trace_path,
                          maxsat_trace_csv(res.trace, cs.constant_offset(), cfg.deterministic));
    if (!cfg.assignment_path.empty()) {
        std::ostringstream out;
        out << 'v';
        for (int i = 0; i < formula.n_vars; ++i)
            out << ' ' << (best.values[static_cast<std::size_t>(i)] ? i + 1 : -(i + 1));
        out << '\n';
        write_file_atomic(cfg.assignment_path, out.str());
    }
    return finish_run(cfg, j, res.converged);
}

int run_bench(const RunConfig& cfg, const mixsdp::SolveOptions& base_opts) {
    std::filesystem::create_directories(cfg.out_dir);
    json rows = json::array();
    std::ostringstream table;
    table << "instance,mode,seed,sweeps,time_s,f,certified_gap_bound,status\n";

    for (const std::string& path : cfg.inputs) {
        const std::string stem = std::filesystem::path(path).stem().string();
        for (const std::string& mode : {std::string("plain"), std::string("step")}) {
            for (int s = 0; s < cfg.bench_seeds; ++s) {
                const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
                json row{{"instance", path}, {"mode", mode}, {"seed", seed}};
                try {
                    mixsdp::SparseCost cost;
                    if (cfg.bench_format == "graph")
                        cost = mixsdp::maxcut::graph_to_cost(mixsdp::maxcut::parse_graph(read_file(path)));
                    else
                        cost = mixsdp::parse_cost_text(read_file(path));

                    mixsdp::SolveOptions opts = base_opts;
                    opts.seed = seed;
                    opts.step_size = mode == "step" ? mixsdp::StepSize::automatic()
                                                    : mixsdp::StepSize::none();
                    const auto t0 = std::chrono::steady_clock::now();
                    const mixsdp::SolveResult res = mixsdp::solve(cost, opts);
                    const double elapsed =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                    const mixsdp::Certificate cert =
                        mixsdp::certify(cost, res.V, cfg.cert_tol, cfg.cert_iters);

                    const std::string trace_name =
                        cfg.out_dir + "/" + stem + "__" + mode + "__seed" + std::to_string(seed) + ".csv";
                    write_file_atomic(trace_name, solve_trace_csv(res.trace, cfg.deterministic));

                    const double time_s = cfg.deterministic ? 0.0 : elapsed;
                    row["sweeps"] = res.sweeps_used;
                    row["time_s"] = time_s;
                    row["f"] = res.f;
                    row["converged"] = res.converged;
                    row["certified_gap_bound"] = cert.certified_gap_bound;
                    row["trace"] = trace_name;
                    row["status"] = "ok";
                    char line[512];
                    std::snprintf(line, sizeof(line), "%s,%s,%llu,%d,%.9f,%.17g,%.17g,ok\n",
                                  path.c_str(), mode.c_str(),
                                  static_cast<unsigned long long>(seed), res.sweeps_used, time_s,
                                  res.f, cert.certified_gap_bound);
                    table << line;
                } catch (const std::exception& e) {
                    row["status"] = std::string("error: ") + e.what();
                    table << path << ',' << mode << ',' << seed << ",,,,,error\n";
                    std::cerr << "bench: " << path << " (" << mode << ", seed " << seed
                              << "): " << e.what() << "\n";
                }
                rows.push_back(std::move(row));
            }
        }
    }

    if (!cfg.json_path.empty()) write_file_atomic(cfg.json_path, rows.dump(2) + "\n");
    if (!cfg.quiet) std::cout << table.str();
    return 0;
}

int run_oracle(const RunConfig& cfg) {
    json j;
    if (cfg.oracle_mode == "maxcut") {
        const auto g = mixsdp::maxcut::parse_graph(read_file(cfg.input));
        const auto res = mixsdp::oracle::brute_maxcut(g);
        j = {{"mode", "maxcut"}, {"optimum", res.optimum_value},
             {"enumerated", res.enumerated}, {"witness", res.witness}};
    } else if (cfg.oracle_mode == "maxsat") {
        const auto f = mixsdp::maxsat::parse_dimacs(read_file(cfg.input));
        const auto res = mixsdp::oracle::brute_maxsat(f);
        j = {{"mode", "maxsat"}, {"optimum", res.optimum_value},
             {"enumerated", res.enumerated}, {"witness", res.witness}};
    } else {
        throw mixsdp::input_error("--mode must be maxcut or maxsat");
    }
    if (!cfg.json_path.empty()) write_file_atomic(cfg.json_path, j.dump(2) + "\n");
    if (!cfg.quiet) std::cout << j.dump(2) << "\n";
    return 0;
}

void add_common_flags(CLI::App* sub, RunConfig& cfg, bool with_rounding) {
    sub->add_option("--rank", cfg.rank, "Factor rank: `auto` or a positive integer");
    sub->add_option("--tol", cfg.tol, "Relative stopping tolerance");
    sub->add_option("--max-sweeps", cfg.max_sweeps, "Sweep budget");
    sub->add_option("--step-size", cfg.step_size, "`none`, `auto`, or a positive number");
    sub->add_option("--seed", cfg.seed, "RNG seed");
    sub->add_option("--trace", cfg.trace_path, "Write per-sweep trace CSV here");
    sub->add_option("--json", cfg.json_path, "Write JSON summary here");
    sub->add_flag("--certify", cfg.certify, "Attach an optimality certificate");
    sub->add_option("--cert-tol", cfg.cert_tol, "Eigenvalue estimation tolerance");
    sub->add_option("--cert-iters", cfg.cert_iters, "Eigenvalue iteration budget");
    sub->add_flag("--quiet", cfg.quiet, "Suppress stdout summary");
    sub->add_flag("--deterministic", cfg.deterministic,
                  "Zero timestamps and elapsed fields for reproducible output");
    if (with_rounding) {
        sub->add_option("--trials", cfg.trials, "Rounding trials");
        sub->add_option("--assignment", cfg.assignment_path, "Write the best assignment here");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Low-rank coordinate-descent solver for unit-diagonal SDPs, "
                 "with MAXCUT and MAXSAT front-ends"};
    app.require_subcommand(1);
    RunConfig cfg;

    CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a cost-matrix instance");
    solve_cmd->add_option("input", cfg.input, "Cost file (`n nnz`, then `i j w` lines)")->required();
    add_common_flags(solve_cmd, cfg, false);

    CLI::App* maxcut_cmd = app.add_subcommand("maxcut", "Solve the MAXCUT relaxation and round");
    maxcut_cmd->add_option("input", cfg.input, "Graph file (`n m`, then `u v [w]` lines)")->required();
    add_common_flags(maxcut_cmd, cfg, true);

    CLI::App* maxsat_cmd = app.add_subcommand("maxsat", "Solve the MAXSAT relaxation and round");
    maxsat_cmd->add_option("input", cfg.input, "DIMACS CNF or WCNF file")->required();
    add_common_flags(maxsat_cmd, cfg, true);

    CLI::App* cert_cmd = app.add_subcommand("cert", "Solve a cost-matrix instance and certify");
    cert_cmd->add_option("input", cfg.input, "Cost file")->required();
    add_common_flags(cert_cmd, cfg, false);

    CLI::App* bench_cmd = app.add_subcommand("bench", "Run plain and step modes across seeds");
    bench_cmd->add_option("inputs", cfg.inputs, "Instance files")->required();
    bench_cmd->add_option("--format", cfg.bench_format, "Instance format: `cost` or `graph`");
    bench_cmd->add_option("--seeds", cfg.bench_seeds, "Seeds per instance and mode");
    bench_cmd->add_option("--out-dir", cfg.out_dir, "Directory for trace files");
    add_common_flags(bench_cmd, cfg, false);

    CLI::App* oracle_cmd = app.add_subcommand("oracle", "Brute-force reference (debugging)");
    oracle_cmd->group(""); // hidden
    oracle_cmd->add_option("input", cfg.input, "Instance file")->required();
    oracle_cmd->add_option("--mode", cfg.oracle_mode, "`maxcut` or `maxsat`");
    oracle_cmd->add_option("--json", cfg.json_path, "Write JSON here");
    oracle_cmd->add_flag("--quiet", cfg.quiet, "Suppress stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\nRun with --help for usage.\n";
        return 2;
    }

    mixsdp::SolveOptions opts;
    try {
        opts = make_solve_options(cfg);
        if (maxsat_cmd->parsed() && opts.step_size.mode != mixsdp::StepSize::Mode::none)
            throw mixsdp::input_error("maxsat does not support --step-size");
    } catch (const mixsdp::input_error& e) {
        std::cerr << "option error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(cfg, opts, false);
        if (cert_cmd->parsed()) return run_solve(cfg, opts, true);
        if (maxcut_cmd->parsed()) return run_maxcut(cfg, opts);
        if (maxsat_cmd->parsed()) return run_maxsat(cfg, opts);
        if (bench_cmd->parsed()) return run_bench(cfg, opts);
        if (oracle_cmd->parsed()) return run_oracle(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
