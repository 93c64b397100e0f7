#pragma once

#include <Eigen/Dense>
#include <vector>

#include "plp/sls.hpp"

namespace plp {

// Disturbance-feedback realization of a finite-impulse response: at every
// step the controller reconstructs the disturbance that must have entered
// the plant and replays the stored response maps against the recent
// disturbance history.  Swapping the response mid-run is allowed (the
// history is kept), which is how mode switches are absorbed.
class SlsController {
public:
    explicit SlsController(SystemResponse response);

    // Process the measured state, return the input to apply.
    Eigen::VectorXd step(const Eigen::VectorXd& state);

    // Replace the response maps; the disturbance history survives.
    void set_response(SystemResponse response);

    const SystemResponse& response() const { return response_; }

    // Forget the disturbance history (fresh deployment).
    void reset_history() { recent_.clear(); }

private:
    SystemResponse response_;
    // Reconstructed disturbances, newest first; at most horizon-1 are kept.
    std::vector<Eigen::VectorXd> recent_;
};

}  // namespace plp
