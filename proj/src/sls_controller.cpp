#include "plp/sls_controller.hpp"

#include "plp/errors.hpp"

namespace plp {

SlsController::SlsController(SystemResponse response)
    : response_(std::move(response)) {
    if (response_.horizon() < 1) {
        throw ConfigError("controller needs a non-empty response");
    }
}

void SlsController::set_response(SystemResponse response) {
    if (response.horizon() < 1) {
        throw ConfigError("controller needs a non-empty response");
    }
    if (!recent_.empty() &&
        response.state_dim() != response_.state_dim()) {
        throw ConfigError("response state dimension changed mid-run");
    }
    response_ = std::move(response);
}

Eigen::VectorXd SlsController::step(const Eigen::VectorXd& state) {
    const int n = response_.state_dim();
    const int H = response_.horizon();
    if (state.size() != n) {
        throw ConfigError("state dimension does not match the response");
    }

    // The state predicted from disturbances already seen; what remains is
    // the disturbance that entered at the previous step.
    Eigen::VectorXd predicted = Eigen::VectorXd::Zero(n);
    for (int s = 2; s <= H; ++s) {
        const int age = s - 2;
        if (age >= static_cast<int>(recent_.size())) break;
        predicted += response_.state_maps[s - 1] * recent_[age];
    }
    const Eigen::VectorXd w_now = state - predicted;

    Eigen::VectorXd u = response_.input_maps[0] * w_now;
    for (int s = 2; s <= H; ++s) {
        const int age = s - 2;
        if (age >= static_cast<int>(recent_.size())) break;
        u += response_.input_maps[s - 1] * recent_[age];
    }

    recent_.insert(recent_.begin(), w_now);
    if (static_cast<int>(recent_.size()) > H - 1) {
        recent_.resize(std::max(H - 1, 0));
    }
    return u;
}

}  // namespace plp
