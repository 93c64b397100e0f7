#include "plp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "plp/csv.hpp"
#include "plp/errors.hpp"
#include "plp/rng.hpp"
#include "plp/sls.hpp"

namespace plp {

namespace {

using nlohmann::json;

void expect_keys(const json& j, const std::string& where,
                 std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw ConfigError("'" + where + "' must be a JSON object");
    }
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
        }
    }
}

double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError("'" + where + "' must be a number");
    return j.get<double>();
}

long get_integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) {
        throw ConfigError("'" + where + "' must be an integer");
    }
    return j.get<long>();
}

bool get_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) throw ConfigError("'" + where + "' must be a boolean");
    return j.get<bool>();
}

std::string get_string(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError("'" + where + "' must be a string");
    return j.get<std::string>();
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError("'" + where + "' must be a non-empty array of rows");
    }
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) {
        throw ConfigError("'" + where + "' rows must be non-empty arrays");
    }
    const std::size_t cols = j[0].size();
    Eigen::MatrixXd m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw ConfigError("'" + where + "' rows have inconsistent length");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(r, c) = get_number(j[r][c], where);
        }
    }
    return m;
}

NetworkConfig parse_network(const json& j) {
    expect_keys(j, "network", {"nodes", "coupling", "mode_edges", "actuated"});
    if (!j.contains("nodes") || !j.contains("mode_edges")) {
        throw ConfigError("'network' needs 'nodes' and 'mode_edges'");
    }
    NetworkConfig net;
    net.nodes = static_cast<int>(get_integer(j.at("nodes"), "network.nodes"));
    if (j.contains("coupling")) {
        net.coupling = get_number(j.at("coupling"), "network.coupling");
    }
    const json& me = j.at("mode_edges");
    if (!me.is_array() || me.empty()) {
        throw ConfigError("'network.mode_edges' must list one edge set per mode");
    }
    for (const json& edges : me) {
        if (!edges.is_array()) {
            throw ConfigError("each entry of 'network.mode_edges' must be an "
                              "array of [i,j] pairs");
        }
        std::vector<std::pair<int, int>> list;
        for (const json& e : edges) {
            if (!e.is_array() || e.size() != 2) {
                throw ConfigError("edges must be [i,j] pairs");
            }
            list.emplace_back(
                static_cast<int>(get_integer(e[0], "edge endpoint")),
                static_cast<int>(get_integer(e[1], "edge endpoint")));
        }
        net.mode_edges.push_back(std::move(list));
    }
    if (j.contains("actuated")) {
        const json& act = j.at("actuated");
        if (!act.is_array()) {
            throw ConfigError("'network.actuated' must be an array of nodes");
        }
        for (const json& a : act) {
            net.actuated.push_back(
                static_cast<int>(get_integer(a, "network.actuated")));
        }
    }
    return net;
}

ChainConfig parse_chain(const json& j) {
    expect_keys(j, "chain", {"tpm", "initial_mode", "dwell"});
    if (!j.contains("tpm")) throw ConfigError("'chain' needs 'tpm'");
    ChainConfig chain;
    chain.tpm = parse_matrix(j.at("tpm"), "chain.tpm");
    if (j.contains("initial_mode")) {
        chain.initial_mode =
            static_cast<int>(get_integer(j.at("initial_mode"),
                                         "chain.initial_mode"));
    }
    if (j.contains("dwell")) {
        chain.dwell = static_cast<int>(get_integer(j.at("dwell"),
                                                   "chain.dwell"));
    }
    return chain;
}

SlsConfig parse_sls(const json& j) {
    expect_keys(j, "sls",
                {"horizon", "hops", "state_weight", "input_weight",
                 "data_driven", "data_refresh_limit", "ridge"});
    SlsConfig sls;
    if (j.contains("horizon")) {
        sls.horizon = static_cast<int>(get_integer(j.at("horizon"),
                                                   "sls.horizon"));
    }
    if (j.contains("hops")) {
        sls.hops = static_cast<int>(get_integer(j.at("hops"), "sls.hops"));
    }
    if (j.contains("state_weight")) {
        sls.state_weight = get_number(j.at("state_weight"),
                                      "sls.state_weight");
    }
    if (j.contains("input_weight")) {
        sls.input_weight = get_number(j.at("input_weight"),
                                      "sls.input_weight");
    }
    if (j.contains("data_driven")) {
        sls.data_driven = get_bool(j.at("data_driven"), "sls.data_driven");
    }
    if (j.contains("data_refresh_limit")) {
        sls.data_refresh_limit = static_cast<int>(
            get_integer(j.at("data_refresh_limit"), "sls.data_refresh_limit"));
    }
    if (j.contains("ridge")) {
        sls.ridge = get_number(j.at("ridge"), "sls.ridge");
    }
    return sls;
}

std::vector<std::vector<int>> parse_patterns(const json& j) {
    if (!j.is_array()) {
        throw ConfigError("'patterns' must be an array of mode words");
    }
    std::vector<std::vector<int>> words;
    for (const json& w : j) {
        if (!w.is_array() || w.empty()) {
            throw ConfigError("each pattern must be a non-empty array");
        }
        std::vector<int> word;
        for (const json& s : w) {
            word.push_back(static_cast<int>(get_integer(s, "pattern symbol")));
        }
        words.push_back(std::move(word));
    }
    return words;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("config is not valid JSON: ") +
                          ex.what());
    }
    try {
        expect_keys(j, "config",
                    {"network", "chain", "disturbance", "controller", "sls",
                     "patterns", "steps", "use_true_modes"});
        if (!j.contains("network") || !j.contains("chain")) {
            throw ConfigError("config needs 'network' and 'chain' blocks");
        }
        ExperimentConfig cfg;
        cfg.network = parse_network(j.at("network"));
        cfg.chain = parse_chain(j.at("chain"));
        if (j.contains("disturbance")) {
            const json& d = j.at("disturbance");
            expect_keys(d, "disturbance", {"bound", "kind"});
            if (d.contains("bound")) {
                cfg.disturbance_bound = get_number(d.at("bound"),
                                                   "disturbance.bound");
            }
            if (d.contains("kind")) {
                cfg.disturbance_kind = get_string(d.at("kind"),
                                                  "disturbance.kind");
            }
        }
        if (j.contains("controller")) {
            cfg.controller = get_string(j.at("controller"), "controller");
        }
        if (j.contains("sls")) cfg.sls = parse_sls(j.at("sls"));
        if (j.contains("patterns")) {
            cfg.patterns = parse_patterns(j.at("patterns"));
        }
        if (j.contains("steps")) {
            cfg.steps = get_integer(j.at("steps"), "steps");
        }
        if (j.contains("use_true_modes")) {
            cfg.use_true_modes = get_bool(j.at("use_true_modes"),
                                          "use_true_modes");
        }

        // cross-field checks
        const int M = static_cast<int>(cfg.chain.tpm.rows());
        if (static_cast<int>(cfg.network.mode_edges.size()) != M) {
            throw ConfigError("'network.mode_edges' must have one entry per "
                              "chain mode");
        }
        if (cfg.controller != "plp" && cfg.controller != "baseline-sls" &&
            cfg.controller != "robust-sls") {
            throw ConfigError("controller must be one of 'plp', "
                              "'baseline-sls', 'robust-sls'");
        }
        if (cfg.steps < 1) throw ConfigError("'steps' must be at least 1");
        if (cfg.sls.horizon < 1) {
            throw ConfigError("'sls.horizon' must be at least 1");
        }
        if (!cfg.patterns.empty()) {
            PatternCollection check(cfg.patterns, M);  // validates
        }
        if (cfg.disturbance_kind != "uniform" &&
            cfg.disturbance_kind != "gaussian" &&
            cfg.disturbance_kind != "zero") {
            throw ConfigError("disturbance.kind must be 'uniform', "
                              "'gaussian' or 'zero'");
        }
        return cfg;
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("malformed config: ") + ex.what());
    }
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config(buffer.str());
}

std::vector<NetworkTopology> build_topologies(const NetworkConfig& config) {
    std::vector<NetworkTopology> topos;
    for (const auto& edges : config.mode_edges) {
        topos.emplace_back(config.nodes, edges);
    }
    return topos;
}

NetworkTopology union_topology(const NetworkConfig& config) {
    std::vector<std::pair<int, int>> all;
    for (const auto& edges : config.mode_edges) {
        for (const auto& e : edges) {
            std::pair<int, int> norm{std::min(e.first, e.second),
                                     std::max(e.first, e.second)};
            if (std::find(all.begin(), all.end(), norm) == all.end()) {
                all.push_back(norm);
            }
        }
    }
    return NetworkTopology(config.nodes, all);
}

JumpLinearSystem build_system(const ExperimentConfig& config,
                              std::vector<std::string>* warnings) {
    const auto topos = build_topologies(config.network);
    const int n = config.network.nodes;
    std::vector<int> act = config.network.actuated;
    if (act.empty()) {
        act.resize(n);
        for (int i = 0; i < n; ++i) act[i] = i;
    }
    for (int node : act) {
        if (node < 0 || node >= n) {
            throw ConfigError("actuated node out of range");
        }
    }
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, act.size());
    for (std::size_t k = 0; k < act.size(); ++k) B(act[k], k) = 1.0;

    std::vector<Eigen::MatrixXd> As, Bs;
    for (std::size_t m = 0; m < topos.size(); ++m) {
        const TopologyDynamics dyn =
            topology_to_dynamics(topos[m], config.network.coupling);
        if (dyn.stability_warning && warnings) {
            warnings->push_back(
                "mode " + std::to_string(m) + ": coupling " +
                fmt_double(config.network.coupling) +
                " is at or beyond 1/max-degree; diffusion may oscillate");
        }
        As.push_back(dyn.state_matrix);
        Bs.push_back(B);
    }
    return JumpLinearSystem(std::move(As), std::move(Bs),
                            config.disturbance_bound);
}

RunResult run_single(const ExperimentConfig& config,
                     const std::string& controller_kind, std::uint64_t seed,
                     bool timing) {
    JumpLinearSystem system = build_system(config);
    ModeChain chain(config.chain.tpm);
    const int n = system.state_dim();
    const long steps = config.steps;

    auto rng_modes = make_engine(seed, 11);
    const std::vector<int> modes = sample_mode_sequence(
        chain, config.chain.initial_mode, steps, config.chain.dwell,
        rng_modes);
    auto rng_w = make_engine(seed, 13);
    const Eigen::MatrixXd w =
        sample_disturbance(n, steps, config.disturbance_bound,
                           config.disturbance_kind, rng_w);

    std::uint64_t hash = fnv1a(modes.data(), modes.size() * sizeof(int));
    hash = fnv1a(w.data(), static_cast<std::size_t>(w.size()) *
                               sizeof(double),
                 hash);

    std::optional<SparsityMask> mask;
    SynthesisOptions sopt;
    sopt.horizon = config.sls.horizon;
    sopt.weights = {config.sls.state_weight, config.sls.input_weight};
    sopt.prefer_data = config.sls.data_driven;
    sopt.ridge = config.sls.ridge;
    sopt.timing = timing;
    if (config.sls.hops >= 0) {
        mask = locality_mask(union_topology(config.network), config.sls.hops,
                             config.sls.horizon, config.network.actuated);
        sopt.mask = &*mask;
    }

    std::unique_ptr<InstrumentedController> ctrl;
    if (controller_kind == "plp") {
        PlpOptions po;
        po.synthesis = sopt;
        po.pattern_words = config.patterns;
        po.use_true_modes = config.use_true_modes;
        po.data_refresh_limit = config.sls.data_refresh_limit;
        ctrl = std::make_unique<PlpController>(
            system, config.chain.initial_mode, std::move(po));
    } else if (controller_kind == "baseline-sls") {
        ctrl = std::make_unique<BaselineSlsController>(
            system, config.chain.initial_mode, sopt, 1e-9,
            config.use_true_modes);
    } else if (controller_kind == "robust-sls") {
        ctrl = std::make_unique<RobustBaselineController>(system, sopt);
    } else {
        throw ConfigError("unknown controller '" + controller_kind + "'");
    }

    RunResult result;
    result.rows.reserve(static_cast<std::size_t>(steps));
    double cum_effort = 0.0;
    double sum_sq_norm = 0.0;
    double peak = 0.0;
    long est_steps = 0, est_correct = 0;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<double> norms(static_cast<std::size_t>(steps) + 1, 0.0);
    for (long t = 0; t < steps; ++t) {
        ctrl->observe_true_mode(modes[static_cast<std::size_t>(t)]);
        const Eigen::VectorXd u = ctrl->act(t, x);
        cum_effort += u.squaredNorm();

        StepRow row;
        row.t = t;
        row.true_mode = modes[static_cast<std::size_t>(t)];
        row.est_mode = ctrl->mode_estimate();
        row.state_norm = x.norm();
        row.input_norm = u.norm();
        row.cum_effort = cum_effort;
        row.synth_count = ctrl->stats().synth_count;
        row.cum_synth_ms = ctrl->stats().cum_synth_ms;
        row.event = ctrl->last_events();
        result.rows.push_back(std::move(row));

        norms[static_cast<std::size_t>(t)] = x.norm();
        sum_sq_norm += x.squaredNorm();
        peak = std::max(peak, x.norm());
        if (ctrl->mode_estimate() >= 0) {
            ++est_steps;
            if (ctrl->mode_estimate() == modes[static_cast<std::size_t>(t)]) {
                ++est_correct;
            }
        }

        x = system.A(modes[static_cast<std::size_t>(t)]) * x +
            system.B(modes[static_cast<std::size_t>(t)]) * u + w.col(t);
        if (!x.allFinite() || x.norm() > 1e9) {
            throw DivergenceError("state diverged at step " +
                                      std::to_string(t + 1),
                                  t + 1);
        }
    }
    norms[static_cast<std::size_t>(steps)] = x.norm();
    peak = std::max(peak, x.norm());

    // post-switch transients: the window of `horizon` states following each
    // true mode change
    double peak_post = 0.0, sum_sq_post = 0.0;
    long post_count = 0, switches = 0;
    for (long s = 1; s < steps; ++s) {
        if (modes[static_cast<std::size_t>(s)] ==
            modes[static_cast<std::size_t>(s - 1)]) {
            continue;
        }
        ++switches;
        for (long t = s + 1;
             t <= std::min(steps, s + config.sls.horizon); ++t) {
            peak_post = std::max(peak_post, norms[static_cast<std::size_t>(t)]);
            sum_sq_post += norms[static_cast<std::size_t>(t)] *
                           norms[static_cast<std::size_t>(t)];
            ++post_count;
        }
    }

    RunSummary& s = result.summary;
    s.controller = controller_kind;
    s.seed = seed;
    s.steps = steps;
    s.switches = switches;
    s.cum_effort = cum_effort;
    s.peak_norm = peak;
    s.rms_norm = std::sqrt(sum_sq_norm / static_cast<double>(steps));
    s.peak_post_switch = peak_post;
    s.rms_post_switch =
        post_count > 0 ? std::sqrt(sum_sq_post / post_count) : 0.0;
    s.synth_count = ctrl->stats().synth_count;
    s.cum_synth_ms = ctrl->stats().cum_synth_ms;
    s.cache_hits = ctrl->stats().cache_hits;
    s.model_syntheses = ctrl->stats().model_syntheses;
    s.data_syntheses = ctrl->stats().data_syntheses;
    s.predictions = ctrl->stats().predictions;
    s.prediction_hits = ctrl->stats().prediction_hits;
    s.modeid_accuracy =
        est_steps > 0 ? static_cast<double>(est_correct) / est_steps : -1.0;
    s.realization_hash = hash;
    result.provenance = ctrl->provenance();
    return result;
}

namespace {

void push_metric(std::vector<AggregateRow>& agg, const std::string& ctrl,
                 const std::string& metric, const std::vector<double>& vals) {
    AggregateRow row;
    row.controller = ctrl;
    row.metric = metric;
    const double n = static_cast<double>(vals.size());
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    row.mean = mean;
    row.sd = vals.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    agg.push_back(std::move(row));
}

}  // namespace

CompareResult run_compare(const ExperimentConfig& config,
                          const std::vector<std::uint64_t>& seeds, bool timing,
                          bool parallel) {
    if (seeds.empty()) throw ConfigError("compare needs at least one seed");
    const std::vector<std::string> kinds = {"plp", "baseline-sls",
                                            "robust-sls"};
    const int S = static_cast<int>(seeds.size());
    const int total = 3 * S;
    CompareResult out;
    out.runs.resize(total);

    // fanning runs across threads would corrupt wall-time measurements, so
    // parallel execution is honored only with timing disabled
    const bool fan_out = parallel && !timing;
    bool failed = false;
    std::string fail_what;
    long fail_step = -1;
    bool fail_is_divergence = false;

#pragma omp parallel for schedule(static) if (fan_out)
    for (int idx = 0; idx < total; ++idx) {
        try {
            const std::string& kind = kinds[idx / S];
            const std::uint64_t seed = seeds[idx % S];
            out.runs[idx] = run_single(config, kind, seed, timing);
        } catch (const DivergenceError& ex) {
#pragma omp critical
            {
                if (!failed) {
                    failed = true;
                    fail_what = ex.what();
                    fail_step = ex.step();
                    fail_is_divergence = true;
                }
            }
        } catch (const std::exception& ex) {
#pragma omp critical
            {
                if (!failed) {
                    failed = true;
                    fail_what = ex.what();
                }
            }
        }
    }
    if (failed) {
        if (fail_is_divergence) throw DivergenceError(fail_what, fail_step);
        throw std::runtime_error(fail_what);
    }

    for (int k = 0; k < 3; ++k) {
        std::vector<double> effort, peak, rms, peak_post, rms_post, synth,
            synth_ms, acc, hit_rate;
        for (int i = 0; i < S; ++i) {
            const RunSummary& s = out.runs[k * S + i].summary;
            effort.push_back(s.cum_effort);
            peak.push_back(s.peak_norm);
            rms.push_back(s.rms_norm);
            peak_post.push_back(s.peak_post_switch);
            rms_post.push_back(s.rms_post_switch);
            synth.push_back(static_cast<double>(s.synth_count));
            synth_ms.push_back(s.cum_synth_ms);
            acc.push_back(s.modeid_accuracy);
            hit_rate.push_back(
                s.predictions > 0
                    ? static_cast<double>(s.prediction_hits) / s.predictions
                    : 0.0);
        }
        const std::string& ctrl = kinds[k];
        push_metric(out.aggregate, ctrl, "cum_effort", effort);
        push_metric(out.aggregate, ctrl, "peak_norm", peak);
        push_metric(out.aggregate, ctrl, "rms_norm", rms);
        push_metric(out.aggregate, ctrl, "peak_post_switch", peak_post);
        push_metric(out.aggregate, ctrl, "rms_post_switch", rms_post);
        push_metric(out.aggregate, ctrl, "synth_count", synth);
        push_metric(out.aggregate, ctrl, "cum_synth_ms", synth_ms);
        push_metric(out.aggregate, ctrl, "modeid_accuracy", acc);
        push_metric(out.aggregate, ctrl, "prediction_hit_rate", hit_rate);
    }
    return out;
}

std::string step_rows_csv(const std::vector<StepRow>& rows) {
    std::string csv =
        "t,true_mode,est_mode,state_norm,input_norm,cum_effort,synth_count,"
        "cum_synth_ms,event\n";
    for (const StepRow& r : rows) {
        csv += std::to_string(r.t) + "," + std::to_string(r.true_mode) + "," +
               std::to_string(r.est_mode) + "," + fmt_double(r.state_norm) +
               "," + fmt_double(r.input_norm) + "," +
               fmt_double(r.cum_effort) + "," + std::to_string(r.synth_count) +
               "," + fmt_double(r.cum_synth_ms) + "," + r.event + "\n";
    }
    return csv;
}

std::string provenance_csv(const std::vector<ProvenanceRow>& rows) {
    std::string csv =
        "step,event,mode_estimate,true_mode,cache_hit,synth_ms,predictor_k,"
        "predicted_Etau\n";
    for (const ProvenanceRow& r : rows) {
        csv += std::to_string(r.step) + "," + r.event + "," +
               std::to_string(r.mode_estimate) + "," +
               std::to_string(r.true_mode) + "," +
               std::to_string(r.cache_hit) + "," + fmt_double(r.synth_ms) +
               "," + std::to_string(r.predictor) + "," +
               fmt_double(r.predicted_tau) + "\n";
    }
    return csv;
}

std::string summary_csv(const std::vector<RunSummary>& summaries) {
    std::string csv =
        "controller,seed,steps,switches,cum_effort,peak_norm,rms_norm,"
        "peak_post_switch,rms_post_switch,synth_count,cum_synth_ms,"
        "cache_hits,model_syntheses,data_syntheses,predictions,"
        "prediction_hits,modeid_accuracy,realization_hash\n";
    for (const RunSummary& s : summaries) {
        csv += s.controller + "," + std::to_string(s.seed) + "," +
               std::to_string(s.steps) + "," + std::to_string(s.switches) +
               "," + fmt_double(s.cum_effort) + "," +
               fmt_double(s.peak_norm) + "," + fmt_double(s.rms_norm) + "," +
               fmt_double(s.peak_post_switch) + "," +
               fmt_double(s.rms_post_switch) + "," +
               std::to_string(s.synth_count) + "," +
               fmt_double(s.cum_synth_ms) + "," +
               std::to_string(s.cache_hits) + "," +
               std::to_string(s.model_syntheses) + "," +
               std::to_string(s.data_syntheses) + "," +
               std::to_string(s.predictions) + "," +
               std::to_string(s.prediction_hits) + "," +
               fmt_double(s.modeid_accuracy) + "," +
               fmt_hash(s.realization_hash) + "\n";
    }
    return csv;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::string csv = "controller,metric,mean,sd\n";
    for (const AggregateRow& r : rows) {
        csv += r.controller + "," + r.metric + "," + fmt_double(r.mean) +
               "," + fmt_double(r.sd) + "\n";
    }
    return csv;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write to '" + path + "'");
    out << content;
}

}  // namespace plp
