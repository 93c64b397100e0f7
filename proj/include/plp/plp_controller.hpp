#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "plp/jump_system.hpp"
#include "plp/memory_table.hpp"
#include "plp/mode_estimator.hpp"
#include "plp/patterns.hpp"
#include "plp/sls_controller.hpp"

namespace plp {

// One line of the controller's decision log.
struct ProvenanceRow {
    long step = 0;
    std::string event;
    int mode_estimate = -1;
    int true_mode = -1;
    int cache_hit = 0;
    double synth_ms = 0.0;
    int predictor = -1;        // pattern currently predicted to recur first
    double predicted_tau = 0.0;
};

struct SynthStats {
    long synth_count = 0;
    double cum_synth_ms = 0.0;
    long cache_hits = 0;
    long model_syntheses = 0;
    long data_syntheses = 0;
    long predictions = 0;      // pattern completions while a prediction held
    long prediction_hits = 0;  // completions matching the predicted pattern
};

struct SynthesisOptions {
    int horizon = 8;
    SlsWeights weights{};
    bool prefer_data = true;
    double ridge = 1e-10;
    bool timing = true;  // false zeroes all reported synthesis times
    const SparsityMask* mask = nullptr;
};

struct LookupResult {
    const MemoryTable::Entry* entry = nullptr;
    bool cache_hit = false;
    double synth_ms = 0.0;
};

// Return the cached response for `mode`, synthesizing (and caching) one
// first when the cache is empty or stale.  Recorded data is preferred over
// the model when `prefer_data` is set and the mode's data survives the
// persistence check; otherwise the model bank is used.  A model synthesis
// that fails without any sparsity mask means the mode cannot be driven to
// rest within the horizon and raises UncontrollableModeError.
LookupResult memory_lookup_or_synthesize(MemoryTable& memory, int mode,
                                         const JumpLinearSystem& system,
                                         const SynthesisOptions& options);

// Common instrumentation for the closed-loop controllers: synthesis
// counters, wall-time accounting and the decision log.
class InstrumentedController : public Controller {
public:
    const SynthStats& stats() const { return stats_; }
    const std::vector<ProvenanceRow>& provenance() const { return log_; }
    virtual int mode_estimate() const = 0;
    // Events recorded during the most recent act() call, ';'-joined.
    const std::string& last_events() const { return last_events_; }

protected:
    SynthStats stats_;
    std::vector<ProvenanceRow> log_;
    std::string last_events_;

    void note(long step, const std::string& event, int est, int true_mode,
              bool cache_hit, double ms, int predictor, double ptau);
};

struct PlpOptions {
    SynthesisOptions synthesis{};
    std::vector<std::vector<int>> pattern_words;
    double slack = 1e-9;          // mode-id residual slack
    double tpm_alpha = 1.0;       // transition-estimate smoothing
    bool use_true_modes = false;
    long min_segment = 1;         // shortest segment worth remembering
    int data_refresh_limit = 1;   // data re-syntheses allowed per mode
};

// Pattern-learning predictive controller: identifies the active mode from
// residuals, remembers per-mode trajectory segments and cached responses,
// learns the switch statistics, and at every detected switch predicts which
// watched pattern will recur first so the responses along it are already
// cached when the modes arrive.
class PlpController : public InstrumentedController {
public:
    PlpController(const JumpLinearSystem& system, int initial_mode,
                  PlpOptions options);

    Eigen::VectorXd act(long step, const Eigen::VectorXd& state) override;
    void observe_true_mode(int mode) override { true_mode_ = mode; }
    std::string name() const override { return "plp"; }
    int mode_estimate() const override;

    const MemoryTable& memory() const { return memory_; }
    const ModeEstimator& estimator() const { return estimator_; }
    int predicted_pattern() const { return predictor_; }
    double predicted_tau() const { return predicted_tau_; }
    // Modes queued for pre-synthesis at the most recent prediction.
    const std::vector<int>& prediction_queue() const { return queue_; }

private:
    const JumpLinearSystem& system_;
    PlpOptions options_;
    std::optional<PatternCollection> collection_;
    ModeEstimator estimator_;
    MemoryTable memory_;
    std::optional<SlsController> loop_;

    int true_mode_ = -1;
    int control_mode_ = 0;           // mode the active response belongs to
    Eigen::VectorXd prev_x_, prev_u_;
    bool have_prev_ = false;

    // segment recorder
    std::vector<Eigen::VectorXd> seg_states_;
    std::vector<Eigen::VectorXd> seg_inputs_;
    bool seg_quarantined_ = false;

    // scheduler state; a prediction stays armed until the first pattern
    // window lying entirely after its arming point resolves it
    int predictor_ = -1;
    double predicted_tau_ = 0.0;
    long armed_at_ = -1;  // switch-sequence length when the bet was armed
    std::vector<int> queue_;

    void close_segment(long step, int mode);
    void ensure_response(long step, int mode);
    void schedule(long step, int mode);
    void account_prediction(const std::vector<int>& switch_seq);
    int decide_mode(long step, const Eigen::VectorXd& state, bool& switched,
                    bool& ambiguous);
};

// Baseline that re-synthesizes the active mode's response from the model at
// every detected switch, with no memory between visits.
class BaselineSlsController : public InstrumentedController {
public:
    BaselineSlsController(const JumpLinearSystem& system, int initial_mode,
                          SynthesisOptions options, double slack = 1e-9,
                          bool use_true_modes = false);

    Eigen::VectorXd act(long step, const Eigen::VectorXd& state) override;
    void observe_true_mode(int mode) override { true_mode_ = mode; }
    std::string name() const override { return "baseline-sls"; }
    int mode_estimate() const override;

private:
    const JumpLinearSystem& system_;
    SynthesisOptions options_;
    bool use_true_modes_ = false;
    ModeEstimator estimator_;
    std::optional<SlsController> loop_;
    int true_mode_ = -1;
    int control_mode_ = 0;
    Eigen::VectorXd prev_x_, prev_u_;
    bool have_prev_ = false;

    void synthesize_for(long step, int mode);
};

// Baseline that synthesizes one response hedged across every mode up front
// and never adapts.
class RobustBaselineController : public InstrumentedController {
public:
    RobustBaselineController(const JumpLinearSystem& system,
                             SynthesisOptions options);

    Eigen::VectorXd act(long step, const Eigen::VectorXd& state) override;
    std::string name() const override { return "robust-sls"; }
    int mode_estimate() const override { return -1; }

    const Eigen::VectorXd& mode_residuals() const { return residuals_; }

private:
    const JumpLinearSystem& system_;
    SynthesisOptions options_;
    std::optional<SlsController> loop_;
    Eigen::VectorXd residuals_;
    bool built_ = false;
};

}  // namespace plp
