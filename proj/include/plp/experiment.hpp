#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plp/jump_system.hpp"
#include "plp/mode_chain.hpp"
#include "plp/plp_controller.hpp"
#include "plp/topology.hpp"

namespace plp {

struct NetworkConfig {
    int nodes = 0;
    double coupling = 0.1;
    // one undirected edge list per mode
    std::vector<std::vector<std::pair<int, int>>> mode_edges;
    std::vector<int> actuated;  // empty = every node actuated
};

struct ChainConfig {
    Eigen::MatrixXd tpm;
    int initial_mode = 0;
    int dwell = 1;
};

struct SlsConfig {
    int horizon = 8;
    int hops = -1;  // negative = no locality constraint
    double state_weight = 1.0;
    double input_weight = 1.0;
    bool data_driven = true;
    int data_refresh_limit = 1;
    double ridge = 1e-10;
};

struct ExperimentConfig {
    NetworkConfig network;
    ChainConfig chain;
    double disturbance_bound = 0.05;
    std::string disturbance_kind = "uniform";
    std::string controller = "plp";
    SlsConfig sls;
    std::vector<std::vector<int>> patterns;
    long steps = 500;
    bool use_true_modes = false;
};

// Strict parsers: any key outside the documented schema is rejected.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Plant family induced by the per-mode topologies.  `warnings` collects
// human-readable notes (e.g. coupling close to instability).
JumpLinearSystem build_system(const ExperimentConfig& config,
                              std::vector<std::string>* warnings = nullptr);
std::vector<NetworkTopology> build_topologies(const NetworkConfig& config);
// Union of every mode's edges; used to derive a single locality mask valid
// across switches.
NetworkTopology union_topology(const NetworkConfig& config);

struct StepRow {
    long t = 0;
    int true_mode = 0;
    int est_mode = -1;
    double state_norm = 0.0;
    double input_norm = 0.0;
    double cum_effort = 0.0;
    long synth_count = 0;
    double cum_synth_ms = 0.0;
    std::string event;
};

struct RunSummary {
    std::string controller;
    std::uint64_t seed = 0;
    long steps = 0;
    long switches = 0;             // true mode changes
    double cum_effort = 0.0;
    double peak_norm = 0.0;
    double rms_norm = 0.0;
    double peak_post_switch = 0.0;
    double rms_post_switch = 0.0;
    long synth_count = 0;
    double cum_synth_ms = 0.0;
    long cache_hits = 0;
    long model_syntheses = 0;
    long data_syntheses = 0;
    long predictions = 0;
    long prediction_hits = 0;
    double modeid_accuracy = 0.0;  // share of steps with correct estimate
    std::uint64_t realization_hash = 0;
};

struct RunResult {
    std::vector<StepRow> rows;
    RunSummary summary;
    std::vector<ProvenanceRow> provenance;
};

// One closed-loop run of `controller_kind` ("plp", "baseline-sls",
// "robust-sls") on the realization derived from `seed`.  The realization
// (mode path and disturbances) depends only on the config and seed, never
// on the controller, so arms are directly comparable.
RunResult run_single(const ExperimentConfig& config,
                     const std::string& controller_kind, std::uint64_t seed,
                     bool timing);

struct AggregateRow {
    std::string controller;
    std::string metric;
    double mean = 0.0;
    double sd = 0.0;
};

struct CompareResult {
    std::vector<RunResult> runs;  // controller-major, seed-minor order
    std::vector<AggregateRow> aggregate;
};

// All three controllers on the same seeds.  `parallel` fans the runs out
// across threads and is only honored with timing off, so that wall-time
// measurements stay meaningful.
CompareResult run_compare(const ExperimentConfig& config,
                          const std::vector<std::uint64_t>& seeds, bool timing,
                          bool parallel = false);

// CSV emission; every writer ends rows with '\n' and uses fmt_double.
std::string step_rows_csv(const std::vector<StepRow>& rows);
std::string provenance_csv(const std::vector<ProvenanceRow>& rows);
std::string summary_csv(const std::vector<RunSummary>& summaries);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);
void write_file(const std::string& path, const std::string& content);

}  // namespace plp
