#include "plp/topology.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "plp/errors.hpp"

namespace plp {

NetworkTopology::NetworkTopology(int nodes,
                                 std::vector<std::pair<int, int>> edges)
    : nodes_(nodes), edges_(std::move(edges)) {
    if (nodes_ <= 0) throw ConfigError("topology needs at least one node");
    adjacency_ = Eigen::MatrixXd::Zero(nodes_, nodes_);
    for (const auto& [a, b] : edges_) {
        if (a < 0 || b < 0 || a >= nodes_ || b >= nodes_) {
            throw ConfigError("edge endpoint out of range");
        }
        if (a == b) throw ConfigError("self-loops are not allowed");
        adjacency_(a, b) = 1.0;
        adjacency_(b, a) = 1.0;
    }
}

Eigen::MatrixXd NetworkTopology::laplacian() const {
    Eigen::MatrixXd lap = -adjacency_;
    for (int i = 0; i < nodes_; ++i) {
        lap(i, i) = adjacency_.row(i).sum();
    }
    return lap;
}

int NetworkTopology::max_degree() const {
    int deg = 0;
    for (int i = 0; i < nodes_; ++i) {
        deg = std::max(deg, static_cast<int>(adjacency_.row(i).sum()));
    }
    return deg;
}

std::vector<int> NetworkTopology::hop_neighborhood(int node, int hops) const {
    if (node < 0 || node >= nodes_) throw ConfigError("node out of range");
    if (hops < 0) throw ConfigError("hop count must be non-negative");
    std::vector<int> dist(nodes_, -1);
    std::deque<int> queue{node};
    dist[node] = 0;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        if (dist[v] == hops) continue;
        for (int w = 0; w < nodes_; ++w) {
            if (adjacency_(v, w) > 0.0 && dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    std::vector<int> result;
    for (int i = 0; i < nodes_; ++i) {
        if (dist[i] >= 0) result.push_back(i);
    }
    return result;
}

int NetworkTopology::distance(int from, int to) const {
    if (from < 0 || from >= nodes_ || to < 0 || to >= nodes_) {
        throw ConfigError("node out of range");
    }
    std::vector<int> dist(nodes_, -1);
    std::deque<int> queue{from};
    dist[from] = 0;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        if (v == to) return dist[v];
        for (int w = 0; w < nodes_; ++w) {
            if (adjacency_(v, w) > 0.0 && dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist[to];
}

TopologyDynamics topology_to_dynamics(const NetworkTopology& topology,
                                      double coupling) {
    if (coupling <= 0.0) throw ConfigError("coupling must be positive");
    const int n = topology.node_count();
    TopologyDynamics out;
    out.state_matrix =
        Eigen::MatrixXd::Identity(n, n) - coupling * topology.laplacian();
    const int deg = topology.max_degree();
    out.stability_warning = deg > 0 && coupling >= 1.0 / deg;
    return out;
}

}  // namespace plp
