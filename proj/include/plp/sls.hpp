#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "plp/topology.hpp"

namespace plp {

// Finite-impulse-response closed-loop maps from disturbance to state and
// input: state_maps[s-1] is the response s steps after the disturbance
// enters (so state_maps[0] is always the identity), and the response
// vanishes after `horizon` steps.
struct SystemResponse {
    std::vector<Eigen::MatrixXd> state_maps;  // n x n each
    std::vector<Eigen::MatrixXd> input_maps;  // m x n each

    int horizon() const { return static_cast<int>(state_maps.size()); }
    int state_dim() const {
        return state_maps.empty() ? 0
                                  : static_cast<int>(state_maps[0].rows());
    }
    int input_dim() const {
        return input_maps.empty() ? 0
                                  : static_cast<int>(input_maps[0].rows());
    }
    bool same_shape(const SystemResponse& other) const;
};

struct SlsWeights {
    double state = 1.0;  // quadratic penalty on the state response
    double input = 1.0;  // quadratic penalty on the input response
};

// Entry (i, j) true means the map may couple disturbance node j to row i.
struct SparsityMask {
    std::vector<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> state;
    std::vector<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> input;
};

// Mask allowing information to travel `hops` edges per step: the response
// s steps after a disturbance at node j may touch node i only when
// dist(i, j) <= hops * s.  `actuated` lists the node of each input channel
// (defaults to co-located actuation, one input per node).
SparsityMask locality_mask(const NetworkTopology& topology, int hops,
                           int horizon, const std::vector<int>& actuated = {});

// Quadratic cost of a response under the given weights.
double response_objective(const SystemResponse& response,
                          const SlsWeights& weights);

// Minimum-cost finite-horizon response for one plant: each disturbance
// column is an independent equality-constrained least-squares problem
// (identity anchor, plant recursion, closure at the horizon).  Throws
// InfeasibleLocalityError naming the first offending column when the
// constraints cannot be met, which happens when the mask is too tight or
// the horizon too short for the plant.
SystemResponse synthesize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                          int horizon, const SlsWeights& weights = {},
                          const SparsityMask* mask = nullptr,
                          bool parallel = true);

struct AchievabilityReport {
    double anchor_residual = 0.0;     // || Phi_x[1] - I ||_max
    double recursion_residual = 0.0;  // plant equation over the horizon
    double closure_residual = 0.0;    // decay condition at the horizon
    double max_residual = 0.0;
};

// How well a response satisfies the closed-loop equations of plant (A, B).
AchievabilityReport validate_achievability(const Eigen::MatrixXd& A,
                                           const Eigen::MatrixXd& B,
                                           const SystemResponse& response);

struct RobustSynthesis {
    SystemResponse response;
    Eigen::VectorXd mode_residuals;  // max_residual against each plant
};

// Single response hedged across a family of plants: the identity anchor is
// enforced exactly, the total squared violation of every plant's equations
// is minimized, and the quadratic cost breaks ties among the minimizers.
// With identical plants this reduces to synthesize().
RobustSynthesis synthesize_robust(const std::vector<Eigen::MatrixXd>& As,
                                  const std::vector<Eigen::MatrixXd>& Bs,
                                  int horizon, const SlsWeights& weights = {},
                                  bool parallel = true);

struct ClosedLoopReport {
    double impulse_deviation = 0.0;   // worst gap to the predicted response
    double tail_norm = 0.0;           // worst state norm after the horizon
                                      // in the impulse experiments
    double peak_norm = 0.0;           // worst state norm seen in the random
                                      // disturbance experiments
    bool stabilized = false;          // random-run envelope non-increasing
                                      // once the horizon has passed
};

// Drives plant (A, B) with the disturbance-feedback controller induced by
// `response`: one impulse experiment per state coordinate plus `trials`
// random bounded-disturbance runs.
ClosedLoopReport validate_closed_loop(const Eigen::MatrixXd& A,
                                      const Eigen::MatrixXd& B,
                                      const SystemResponse& response,
                                      int trials, double disturbance_bound,
                                      std::uint64_t seed);

}  // namespace plp
