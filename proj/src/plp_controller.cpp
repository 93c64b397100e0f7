#include "plp/plp_controller.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "plp/errors.hpp"

namespace plp {

namespace {

template <typename F>
double timed_ms(bool timing, F&& fn) {
    if (!timing) {
        fn();
        return 0.0;
    }
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

void InstrumentedController::note(long step, const std::string& event,
                                  int est, int true_mode, bool cache_hit,
                                  double ms, int predictor, double ptau) {
    ProvenanceRow row;
    row.step = step;
    row.event = event;
    row.mode_estimate = est;
    row.true_mode = true_mode;
    row.cache_hit = cache_hit ? 1 : 0;
    row.synth_ms = ms;
    row.predictor = predictor;
    row.predicted_tau = ptau;
    log_.push_back(std::move(row));
    if (!last_events_.empty()) last_events_ += ';';
    last_events_ += event;
}

LookupResult memory_lookup_or_synthesize(MemoryTable& memory, int mode,
                                         const JumpLinearSystem& system,
                                         const SynthesisOptions& options) {
    LookupResult result;
    if (memory.has_fresh(mode)) {
        result.entry = memory.lookup(mode);
        result.cache_hit = true;
        return result;
    }

    const int n = system.state_dim();
    const int m = system.input_dim();
    const long need = n + static_cast<long>(options.horizon) * m;
    SystemResponse response;
    Provenance provenance = Provenance::model;

    bool synthesized = false;
    if (options.prefer_data && memory.transition_count(mode) >= need) {
        try {
            result.synth_ms = timed_ms(options.timing, [&] {
                response = data_driven_synthesize(
                    memory.segments(mode), options.horizon, options.weights,
                    options.ridge, /*parallel=*/true, options.mask);
            });
            provenance = Provenance::data;
            synthesized = true;
        } catch (const PersistenceError&) {
            // data exists but cannot pin the response down; use the model
        }
    }
    if (!synthesized) {
        try {
            result.synth_ms = timed_ms(options.timing, [&] {
                response = synthesize(system.A(mode), system.B(mode),
                                      options.horizon, options.weights,
                                      options.mask, /*parallel=*/true);
            });
        } catch (const InfeasibleLocalityError& ex) {
            if (options.mask == nullptr) {
                throw UncontrollableModeError(
                    "mode " + std::to_string(mode) +
                        " admits no deadbeat response at this horizon: " +
                        ex.what(),
                    mode);
            }
            throw;
        }
        provenance = Provenance::model;
    }
    memory.store(mode, std::move(response), provenance);
    result.entry = memory.lookup(mode);
    return result;
}

PlpController::PlpController(const JumpLinearSystem& system, int initial_mode,
                             PlpOptions options)
    : system_(system),
      options_(std::move(options)),
      estimator_(&system, initial_mode, options_.slack, options_.tpm_alpha),
      memory_(system.mode_count(), options_.data_refresh_limit) {
    if (!options_.pattern_words.empty()) {
        collection_.emplace(options_.pattern_words, system.mode_count());
    }
    control_mode_ = initial_mode;
}

int PlpController::mode_estimate() const {
    return options_.use_true_modes ? control_mode_
                                   : estimator_.current_mode();
}

void PlpController::ensure_response(long step, int mode) {
    const LookupResult r =
        memory_lookup_or_synthesize(memory_, mode, system_, options_.synthesis);
    if (r.cache_hit) {
        ++stats_.cache_hits;
        note(step, "cache-hit", mode_estimate(), true_mode_, true, 0.0,
             predictor_, predicted_tau_);
        return;
    }
    ++stats_.synth_count;
    stats_.cum_synth_ms += r.synth_ms;
    const bool from_data = r.entry->provenance == Provenance::data;
    if (from_data) {
        ++stats_.data_syntheses;
    } else {
        ++stats_.model_syntheses;
    }
    note(step, from_data ? "synth-data" : "synth-model", mode_estimate(),
         true_mode_, false, r.synth_ms, predictor_, predicted_tau_);
}

void PlpController::schedule(long step, int mode) {
    if (!collection_) return;
    const Eigen::MatrixXd tpm = estimator_.tpm().estimate();
    try {
        const PatternProblem prob =
            solve_pattern_problem(tpm, mode, *collection_);
        int best = 0;
        for (int k = 1; k < collection_->size(); ++k) {
            if (prob.first_occurrence(k) > prob.first_occurrence(best)) {
                best = k;
            }
        }
        // the warm-up queue follows the current forecast; the scored bet is
        // only re-armed once the previous one has been resolved
        if (predictor_ < 0) {
            predictor_ = best;
            predicted_tau_ = prob.expected_tau;
            armed_at_ =
                static_cast<long>(estimator_.switch_sequence().size());
            note(step, "predict", mode_estimate(), true_mode_, false, 0.0,
                 predictor_, predicted_tau_);
        }
        queue_.clear();
        for (int m : collection_->pattern(best)) {
            if (std::find(queue_.begin(), queue_.end(), m) == queue_.end()) {
                queue_.push_back(m);
            }
        }
        for (int m : queue_) ensure_response(step, m);
    } catch (const DegenerateCollectionError&) {
        predictor_ = -1;
        predicted_tau_ = 0.0;
        armed_at_ = -1;
        queue_.clear();
        note(step, "predict-degenerate", mode_estimate(), true_mode_, false,
             0.0, -1, 0.0);
    } catch (const NumericalFailureError&) {
        predictor_ = -1;
        predicted_tau_ = 0.0;
        armed_at_ = -1;
        queue_.clear();
        note(step, "predict-degenerate", mode_estimate(), true_mode_, false,
             0.0, -1, 0.0);
    }
}

void PlpController::account_prediction(const std::vector<int>& switch_seq) {
    if (!collection_ || predictor_ < 0) return;
    const int L = collection_->length();
    const long len = static_cast<long>(switch_seq.size());
    // the occurrence clock starts at the arming switch, so only windows made
    // entirely of later symbols count; earlier or straddling ones are outside
    // the predicted race
    if (len - L < armed_at_) return;
    std::vector<int> tail(switch_seq.end() - L, switch_seq.end());
    const int k = collection_->index_of(tail);
    if (k < 0) return;
    ++stats_.predictions;
    if (k == predictor_) ++stats_.prediction_hits;
    predictor_ = -1;
    predicted_tau_ = 0.0;
    armed_at_ = -1;
}

void PlpController::close_segment(long step, int mode) {
    const long len = static_cast<long>(seg_inputs_.size());
    if (seg_quarantined_) {
        note(step, "segment-quarantined", mode, true_mode_, false, 0.0,
             predictor_, predicted_tau_);
        return;
    }
    if (len < options_.min_segment) return;
    const int n = system_.state_dim();
    const int m = system_.input_dim();
    DataSegment seg;
    seg.states = Eigen::MatrixXd(n, len + 1);
    seg.inputs = Eigen::MatrixXd(m, len);
    for (long t = 0; t <= len; ++t) seg.states.col(t) = seg_states_[t];
    for (long t = 0; t < len; ++t) seg.inputs.col(t) = seg_inputs_[t];
    memory_.add_segment(mode, std::move(seg));
}

int PlpController::decide_mode(long step, const Eigen::VectorXd& state,
                               bool& switched, bool& ambiguous) {
    if (options_.use_true_modes) {
        if (true_mode_ < 0) {
            throw ConfigError(
                "ground-truth mode feed requested but no mode was observed");
        }
        switched = true_mode_ != control_mode_;
        ambiguous = false;
        if (switched) estimator_.observe_switch(true_mode_);
        return true_mode_;
    }
    const ModeEstimator::Update upd =
        estimator_.update(prev_x_, prev_u_, state);
    switched = upd.switch_detected;
    ambiguous = upd.ambiguous;
    (void)step;
    return upd.mode;
}

Eigen::VectorXd PlpController::act(long step, const Eigen::VectorXd& state) {
    last_events_.clear();
    if (!have_prev_) {
        ensure_response(step, control_mode_);
        loop_.emplace(memory_.lookup(control_mode_)->response);
        seg_states_ = {state};
        seg_inputs_.clear();
        seg_quarantined_ = false;
        prev_u_ = loop_->step(state);
        prev_x_ = state;
        have_prev_ = true;
        return prev_u_;
    }

    bool switched = false, ambiguous = false;
    const int mode = decide_mode(step, state, switched, ambiguous);
    if (ambiguous) seg_quarantined_ = true;

    if (switched) {
        note(step, "switch", mode, true_mode_, false, 0.0, predictor_,
             predicted_tau_);
        account_prediction(estimator_.switch_sequence());
        close_segment(step, control_mode_);
        // the transition that revealed the switch already belongs to the
        // incoming mode
        seg_states_ = {prev_x_, state};
        seg_inputs_ = {prev_u_};
        seg_quarantined_ = ambiguous;
        ensure_response(step, mode);
        loop_->set_response(memory_.lookup(mode)->response);
        control_mode_ = mode;
        schedule(step, mode);
    } else {
        seg_states_.push_back(state);
        seg_inputs_.push_back(prev_u_);
    }

    prev_u_ = loop_->step(state);
    prev_x_ = state;
    return prev_u_;
}

BaselineSlsController::BaselineSlsController(const JumpLinearSystem& system,
                                             int initial_mode,
                                             SynthesisOptions options,
                                             double slack, bool use_true_modes)
    : system_(system),
      options_(std::move(options)),
      use_true_modes_(use_true_modes),
      estimator_(&system, initial_mode, slack),
      control_mode_(initial_mode) {}

int BaselineSlsController::mode_estimate() const {
    return use_true_modes_ ? control_mode_ : estimator_.current_mode();
}

void BaselineSlsController::synthesize_for(long step, int mode) {
    SystemResponse response;
    double ms = 0.0;
    try {
        ms = timed_ms(options_.timing, [&] {
            response = synthesize(system_.A(mode), system_.B(mode),
                                  options_.horizon, options_.weights,
                                  options_.mask, /*parallel=*/true);
        });
    } catch (const InfeasibleLocalityError& ex) {
        if (options_.mask == nullptr) {
            throw UncontrollableModeError(
                "mode " + std::to_string(mode) +
                    " admits no deadbeat response at this horizon: " +
                    ex.what(),
                mode);
        }
        throw;
    }
    ++stats_.synth_count;
    ++stats_.model_syntheses;
    stats_.cum_synth_ms += ms;
    note(step, "synth-model", mode, true_mode_, false, ms, -1, 0.0);
    if (loop_) {
        loop_->set_response(std::move(response));
    } else {
        loop_.emplace(std::move(response));
    }
}

Eigen::VectorXd BaselineSlsController::act(long step,
                                           const Eigen::VectorXd& state) {
    last_events_.clear();
    if (!have_prev_) {
        synthesize_for(step, control_mode_);
        prev_u_ = loop_->step(state);
        prev_x_ = state;
        have_prev_ = true;
        return prev_u_;
    }
    bool switched = false;
    int mode = control_mode_;
    if (use_true_modes_) {
        if (true_mode_ < 0) {
            throw ConfigError(
                "ground-truth mode feed requested but no mode was observed");
        }
        mode = true_mode_;
        switched = mode != control_mode_;
        if (switched) estimator_.observe_switch(mode);
    } else {
        const ModeEstimator::Update upd =
            estimator_.update(prev_x_, prev_u_, state);
        mode = upd.mode;
        switched = upd.switch_detected;
    }
    if (switched) {
        note(step, "switch", mode, true_mode_, false, 0.0, -1, 0.0);
        synthesize_for(step, mode);
        control_mode_ = mode;
    }
    prev_u_ = loop_->step(state);
    prev_x_ = state;
    return prev_u_;
}

RobustBaselineController::RobustBaselineController(
    const JumpLinearSystem& system, SynthesisOptions options)
    : system_(system), options_(std::move(options)) {}

Eigen::VectorXd RobustBaselineController::act(long step,
                                              const Eigen::VectorXd& state) {
    last_events_.clear();
    if (!built_) {
        std::vector<Eigen::MatrixXd> As, Bs;
        for (int m = 0; m < system_.mode_count(); ++m) {
            As.push_back(system_.A(m));
            Bs.push_back(system_.B(m));
        }
        RobustSynthesis robust;
        const double ms = timed_ms(options_.timing, [&] {
            robust = synthesize_robust(As, Bs, options_.horizon,
                                       options_.weights, /*parallel=*/true);
        });
        residuals_ = robust.mode_residuals;
        loop_.emplace(std::move(robust.response));
        ++stats_.synth_count;
        ++stats_.model_syntheses;
        stats_.cum_synth_ms += ms;
        note(step, "synth-robust", -1, -1, false, ms, -1, 0.0);
        built_ = true;
    }
    return loop_->step(state);
}

}  // namespace plp
