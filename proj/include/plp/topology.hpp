#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace plp {

// Undirected interaction graph over the network nodes of one operating mode.
class NetworkTopology {
public:
    NetworkTopology(int nodes, std::vector<std::pair<int, int>> edges);

    int node_count() const { return nodes_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const Eigen::MatrixXd& adjacency() const { return adjacency_; }
    Eigen::MatrixXd laplacian() const;
    int max_degree() const;

    // All nodes within `hops` edges of `node` (including the node itself),
    // sorted ascending.
    std::vector<int> hop_neighborhood(int node, int hops) const;

    // BFS distance; -1 when unreachable.
    int distance(int from, int to) const;

private:
    int nodes_ = 0;
    std::vector<std::pair<int, int>> edges_;
    Eigen::MatrixXd adjacency_;
};

struct TopologyDynamics {
    Eigen::MatrixXd state_matrix;  // I - coupling * L, rows sum to one
    // Set when coupling >= 1/max_degree, where the diffusion map may stop
    // being a contraction and oscillatory eigenvalues appear.
    bool stability_warning = false;
};

// Discrete diffusion dynamics induced by a topology: A = I - coupling * L.
TopologyDynamics topology_to_dynamics(const NetworkTopology& topology,
                                      double coupling);

}  // namespace plp
