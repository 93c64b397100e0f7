// Command-line harness around the plp library: closed-loop simulation,
// controller comparison, occurrence statistics and synthesis diagnostics.
//
// Exit codes: 0 success, 2 configuration problem (including ill-posed
// pattern collections), 3 closed-loop divergence, 1 anything else.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "plp/csv.hpp"
#include "plp/data_driven.hpp"
#include "plp/errors.hpp"
#include "plp/experiment.hpp"
#include "plp/pattern_oracle.hpp"
#include "plp/patterns.hpp"
#include "plp/rng.hpp"
#include "plp/sls.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_spec(const std::string& spec) {
    std::vector<std::uint64_t> seeds;
    const auto dots = spec.find("..");
    if (dots != std::string::npos) {
        const std::uint64_t lo = std::stoull(spec.substr(0, dots));
        const std::uint64_t hi = std::stoull(spec.substr(dots + 2));
        if (hi < lo) throw plp::ConfigError("seed range is empty: " + spec);
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    std::size_t pos = 0;
    while (pos < spec.size()) {
        const auto comma = spec.find(',', pos);
        const std::string tok = spec.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!tok.empty()) seeds.push_back(std::stoull(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (seeds.empty()) throw plp::ConfigError("no seeds in spec: " + spec);
    return seeds;
}

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    if (dir.back() == '/') return dir + name;
    return dir + "/" + name;
}

std::string word_text(const std::vector<int>& word) {
    std::string s;
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(word[i]);
    }
    return s;
}

void print_warnings(const plp::ExperimentConfig& config) {
    std::vector<std::string> warnings;
    plp::build_system(config, &warnings);
    for (const std::string& w : warnings) {
        std::cerr << "warning: " << w << "\n";
    }
}

struct SimulateArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string controller;  // empty = take from config
    std::uint64_t seed = 1;
    bool true_modes = false;
    bool no_timing = false;
};

int run_simulate(const SimulateArgs& args) {
    plp::ExperimentConfig config = plp::load_experiment_config(args.config_path);
    if (args.true_modes) config.use_true_modes = true;
    const std::string kind =
        args.controller.empty() ? config.controller : args.controller;
    print_warnings(config);

    const plp::RunResult result =
        plp::run_single(config, kind, args.seed, !args.no_timing);

    const std::string tag = kind + "_seed" + std::to_string(args.seed);
    plp::write_file(join_path(args.out_dir, "steps_" + tag + ".csv"),
                    plp::step_rows_csv(result.rows));
    plp::write_file(join_path(args.out_dir, "provenance_" + tag + ".csv"),
                    plp::provenance_csv(result.provenance));
    plp::write_file(join_path(args.out_dir, "summary_" + tag + ".csv"),
                    plp::summary_csv({result.summary}));

    const plp::RunSummary& s = result.summary;
    std::cout << kind << " seed " << args.seed << ": steps " << s.steps
              << ", switches " << s.switches << ", effort "
              << plp::fmt_double(s.cum_effort) << ", peak |x| "
              << plp::fmt_double(s.peak_norm) << ", syntheses "
              << s.synth_count << " (" << plp::fmt_double(s.cum_synth_ms)
              << " ms), cache hits " << s.cache_hits << ", realization "
              << plp::fmt_hash(s.realization_hash) << "\n";
    if (s.predictions > 0) {
        std::cout << "predictions: " << s.prediction_hits << "/"
                  << s.predictions << " pattern completions anticipated\n";
    }
    return 0;
}

struct CompareArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::string seed_spec = "1..5";
    bool true_modes = false;
    bool no_timing = false;
    bool parallel = false;
};

int run_compare_cmd(const CompareArgs& args) {
    plp::ExperimentConfig config = plp::load_experiment_config(args.config_path);
    if (args.true_modes) config.use_true_modes = true;
    const std::vector<std::uint64_t> seeds = parse_seed_spec(args.seed_spec);
    print_warnings(config);

    const plp::CompareResult result =
        plp::run_compare(config, seeds, !args.no_timing, args.parallel);

    std::vector<plp::RunSummary> summaries;
    summaries.reserve(result.runs.size());
    for (const plp::RunResult& run : result.runs) {
        summaries.push_back(run.summary);
    }
    plp::write_file(join_path(args.out_dir, "compare_runs.csv"),
                    plp::summary_csv(summaries));
    plp::write_file(join_path(args.out_dir, "compare_aggregate.csv"),
                    plp::aggregate_csv(result.aggregate));

    std::cout << "controllers x seeds: 3 x " << seeds.size() << "\n";
    for (const plp::AggregateRow& row : result.aggregate) {
        std::cout << row.controller << " " << row.metric << ": mean "
                  << plp::fmt_double(row.mean) << ", sd "
                  << plp::fmt_double(row.sd) << "\n";
    }
    return 0;
}

struct PatternStatsArgs {
    std::string config_path;
    std::uint64_t seed = 1;
    long oracle_trials = 0;
};

int run_pattern_stats(const PatternStatsArgs& args) {
    const plp::ExperimentConfig config =
        plp::load_experiment_config(args.config_path);
    if (config.patterns.empty()) {
        throw plp::ConfigError("config has no 'patterns' block to analyse");
    }
    const plp::ModeChain chain(config.chain.tpm);
    if (!chain.irreducible()) {
        throw plp::ConfigError(
            "occurrence statistics need an irreducible chain");
    }
    const plp::PatternCollection collection(config.patterns,
                                            chain.mode_count());
    const plp::PatternProblem problem = plp::solve_pattern_problem(
        config.chain.tpm, config.chain.initial_mode, collection);
    const Eigen::VectorXd solo = plp::per_pattern_tau(
        config.chain.tpm, config.chain.initial_mode, collection);

    std::cout << "modes " << chain.mode_count() << ", patterns "
              << collection.size() << ", length " << collection.length()
              << ", start mode " << config.chain.initial_mode << "\n";
    std::cout << "E[tau] = " << plp::fmt_double(problem.expected_tau)
              << "  (reward condition " << plp::fmt_double(problem.condition)
              << ", fairness residual "
              << plp::fmt_double(problem.fairness_residual) << ")\n";
    for (int k = 0; k < collection.size(); ++k) {
        std::cout << "pattern " << k << " [" << word_text(collection.pattern(k))
                  << "]: first-occurrence prob "
                  << plp::fmt_double(problem.first_occurrence(k))
                  << ", solo E[tau] " << plp::fmt_double(solo(k)) << "\n";
    }

    if (args.oracle_trials > 0) {
        const plp::OracleEstimate est = plp::monte_carlo_oracle(
            config.chain.tpm, config.chain.initial_mode, collection,
            args.oracle_trials, args.seed);
        std::cout << "oracle (" << est.trials << " trials, seed " << args.seed
                  << "): E[tau] = " << plp::fmt_double(est.mean_tau);
        if (est.se_defined) {
            std::cout << " +- " << plp::fmt_double(est.se_tau);
        } else {
            std::cout << " (standard error undefined: single trial)";
        }
        std::cout << "\n";
        for (int k = 0; k < collection.size(); ++k) {
            std::cout << "  pattern " << k << ": prob "
                      << plp::fmt_double(est.first_probs(k));
            if (est.se_defined) {
                std::cout << " +- " << plp::fmt_double(est.se_first(k));
            }
            std::cout << "\n";
        }
        if (est.se_defined) {
            const double gap = std::abs(est.mean_tau - problem.expected_tau);
            const double level = 3.0 * est.se_tau;
            std::cout << "closed form within 3 SE of oracle: "
                      << (gap <= level ? "yes" : "NO") << " (gap "
                      << plp::fmt_double(gap) << ", 3 SE "
                      << plp::fmt_double(level) << ")\n";
        }
    }
    return 0;
}

struct SlsCheckArgs {
    std::string config_path;
    std::uint64_t seed = 1;
    int trials = 5;
};

int run_sls_check(const SlsCheckArgs& args) {
    const plp::ExperimentConfig config =
        plp::load_experiment_config(args.config_path);
    std::vector<std::string> warnings;
    const plp::JumpLinearSystem system = plp::build_system(config, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

    const int H = config.sls.horizon;
    const plp::SlsWeights weights{config.sls.state_weight,
                                  config.sls.input_weight};
    std::optional<plp::SparsityMask> mask;
    if (config.sls.hops >= 0) {
        mask = plp::locality_mask(plp::union_topology(config.network),
                                  config.sls.hops, H,
                                  config.network.actuated);
        std::cout << "locality: " << config.sls.hops
                  << " hop(s) per step on the union graph\n";
    }

    std::vector<plp::SystemResponse> responses;
    for (int m = 0; m < system.mode_count(); ++m) {
        const plp::SystemResponse resp =
            plp::synthesize(system.A(m), system.B(m), H, weights,
                            mask ? &*mask : nullptr);
        const plp::AchievabilityReport rep =
            plp::validate_achievability(system.A(m), system.B(m), resp);
        const plp::ClosedLoopReport loop = plp::validate_closed_loop(
            system.A(m), system.B(m), resp, args.trials,
            config.disturbance_bound, args.seed);
        std::cout << "mode " << m << ": response residual "
                  << plp::fmt_double(rep.max_residual)
                  << ", impulse deviation "
                  << plp::fmt_double(loop.impulse_deviation)
                  << ", post-horizon tail " << plp::fmt_double(loop.tail_norm)
                  << ", random-run peak " << plp::fmt_double(loop.peak_norm)
                  << ", envelope " << (loop.stabilized ? "settles" : "GROWS")
                  << "\n";
        responses.push_back(resp);
    }

    if (system.mode_count() > 1) {
        std::vector<Eigen::MatrixXd> As, Bs;
        for (int m = 0; m < system.mode_count(); ++m) {
            As.push_back(system.A(m));
            Bs.push_back(system.B(m));
        }
        const plp::RobustSynthesis robust =
            plp::synthesize_robust(As, Bs, H, weights);
        std::cout << "hedged response residual per mode:";
        for (int m = 0; m < system.mode_count(); ++m) {
            std::cout << " " << plp::fmt_double(robust.mode_residuals(m));
        }
        std::cout << "\n";
    }

    if (config.sls.data_driven) {
        // noiseless excitation experiment per mode: the behavioural synthesis
        // must reproduce the model-based response
        const int n = system.state_dim();
        const int m_in = system.input_dim();
        const long len = 2 * (n + H * m_in + H);
        for (int m = 0; m < system.mode_count(); ++m) {
            auto rng = plp::make_engine(args.seed, 100 + m);
            std::uniform_real_distribution<double> unit(-1.0, 1.0);
            plp::DataSegment seg;
            seg.states = Eigen::MatrixXd::Zero(n, len + 1);
            seg.inputs = Eigen::MatrixXd::Zero(m_in, len);
            for (long t = 0; t < len; ++t) {
                for (int i = 0; i < m_in; ++i) seg.inputs(i, t) = unit(rng);
                seg.states.col(t + 1) = system.A(m) * seg.states.col(t) +
                                        system.B(m) * seg.inputs.col(t);
            }
            try {
                const plp::SystemResponse dd = plp::data_driven_synthesize(
                    {seg}, H, weights, config.sls.ridge, true,
                    mask ? &*mask : nullptr);
                double diff = 0.0;
                for (int s = 0; s < H; ++s) {
                    diff = std::max(
                        diff, (dd.state_maps[s] - responses[m].state_maps[s])
                                  .cwiseAbs()
                                  .maxCoeff());
                    diff = std::max(
                        diff, (dd.input_maps[s] - responses[m].input_maps[s])
                                  .cwiseAbs()
                                  .maxCoeff());
                }
                std::cout << "mode " << m
                          << ": data-driven vs model max gap "
                          << plp::fmt_double(diff) << " ("
                          << plp::count_windows({seg}, H) << " windows)\n";
            } catch (const plp::PersistenceError& ex) {
                std::cout << "mode " << m
                          << ": data-driven synthesis rejected: " << ex.what()
                          << "\n";
            }
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "plpsim: simulation and analysis for pattern-learning predictive "
        "control of switched network systems"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* sim_cmd = app.add_subcommand(
        "simulate", "one closed-loop run, written as CSV files");
    sim_cmd->add_option("--config", sim.config_path, "JSON experiment config")
        ->required();
    sim_cmd->add_option("--seed", sim.seed, "realization seed");
    sim_cmd->add_option("--out", sim.out_dir, "output directory");
    sim_cmd->add_option("--controller", sim.controller,
                        "override the configured controller "
                        "(plp, baseline-sls, robust-sls)");
    sim_cmd->add_flag("--true-modes", sim.true_modes,
                      "feed the controller the true mode (no identification)");
    sim_cmd->add_flag("--no-timing", sim.no_timing,
                      "report synthesis times as zero so output is "
                      "byte-reproducible");

    CompareArgs cmp;
    CLI::App* cmp_cmd = app.add_subcommand(
        "compare", "all three controllers on shared realizations");
    cmp_cmd->add_option("--config", cmp.config_path, "JSON experiment config")
        ->required();
    cmp_cmd->add_option("--seeds", cmp.seed_spec,
                        "seed range 'a..b' or comma list");
    cmp_cmd->add_option("--out", cmp.out_dir, "output directory");
    cmp_cmd->add_flag("--true-modes", cmp.true_modes,
                      "feed controllers the true mode");
    cmp_cmd->add_flag("--no-timing", cmp.no_timing,
                      "report synthesis times as zero so output is "
                      "byte-reproducible");
    cmp_cmd->add_flag("--parallel", cmp.parallel,
                      "fan runs across threads (only honored with "
                      "--no-timing)");

    PatternStatsArgs pat;
    CLI::App* pat_cmd = app.add_subcommand(
        "pattern-stats",
        "closed-form occurrence statistics for the configured patterns");
    pat_cmd->add_option("--config", pat.config_path, "JSON experiment config")
        ->required();
    pat_cmd->add_option("--oracle-trials", pat.oracle_trials,
                        "Monte Carlo cross-check sample count (0 = skip)");
    pat_cmd->add_option("--seed", pat.seed, "oracle seed");

    SlsCheckArgs sls;
    CLI::App* sls_cmd = app.add_subcommand(
        "sls-check", "synthesis diagnostics for the configured plant family");
    sls_cmd->add_option("--config", sls.config_path, "JSON experiment config")
        ->required();
    sls_cmd->add_option("--seed", sls.seed, "diagnostic seed");
    sls_cmd->add_option("--trials", sls.trials,
                        "random closed-loop runs per mode");

    try {
        app.parse(argc, argv);
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (cmp_cmd->parsed()) return run_compare_cmd(cmp);
        if (pat_cmd->parsed()) return run_pattern_stats(pat);
        if (sls_cmd->parsed()) return run_sls_check(sls);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const plp::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const plp::DegenerateCollectionError& ex) {
        std::cerr << "degenerate collection: " << ex.what() << "\n";
        return 2;
    } catch (const plp::DivergenceError& ex) {
        std::cerr << "divergence at step " << ex.step() << ": " << ex.what()
                  << "\n";
        return 3;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
