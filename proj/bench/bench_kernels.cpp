// Timing comparison of the OpenMP kernels against their serial reference
// paths.  The parallel code must produce bit-identical results, so besides
// the wall times this also reports whether the outputs matched exactly.
// On a single-core host the ratio hovers around 1; the point of the binary
// is to expose regressions on machines where threads are available.

#include <chrono>
#include <cstdio>
#include <vector>

#include <Eigen/Dense>
#ifdef _OPENMP
#include <omp.h>
#endif

#include "plp/pattern_oracle.hpp"
#include "plp/patterns.hpp"
#include "plp/rng.hpp"
#include "plp/sls.hpp"
#include "plp/topology.hpp"

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename Fn>
double time_ms(Fn&& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_ms();
        fn();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

void report(const char* kernel, double serial_ms, double parallel_ms,
            bool identical) {
    std::printf("%-28s %12.2f %12.2f %8.2fx   %s\n", kernel, serial_ms,
                parallel_ms, serial_ms / parallel_ms,
                identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled at build time; both columns run serially\n");
#endif
    std::printf("%-28s %12s %12s %9s\n", "kernel", "serial ms", "parallel ms",
                "speedup");

    // --- occurrence oracle ---------------------------------------------
    {
        Eigen::MatrixXd tpm(3, 3);
        tpm << 0.2, 0.5, 0.3, 0.4, 0.2, 0.4, 0.3, 0.3, 0.4;
        const plp::PatternCollection collection({{0, 1, 2}, {2, 1, 0}}, 3);
        const long trials = 400'000;
        plp::OracleEstimate serial, parallel;
        const double ts = time_ms(
            [&] {
                serial = plp::monte_carlo_oracle(tpm, 0, collection, trials,
                                                 7, false);
            },
            3);
        const double tp = time_ms(
            [&] {
                parallel = plp::monte_carlo_oracle(tpm, 0, collection, trials,
                                                   7, true);
            },
            3);
        const bool same = serial.mean_tau == parallel.mean_tau &&
                          serial.first_probs == parallel.first_probs;
        report("occurrence oracle", ts, tp, same);
    }

    // --- response synthesis (per-column solves) -------------------------
    {
        const int n = 40;
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
        const plp::NetworkTopology topo(n, edges);
        const Eigen::MatrixXd A = plp::topology_to_dynamics(topo, 0.2).state_matrix;
        const Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
        const plp::SparsityMask mask = plp::locality_mask(topo, 2, 10);
        plp::SystemResponse serial, parallel;
        const double ts = time_ms(
            [&] { serial = plp::synthesize(A, B, 10, {}, &mask, false); }, 3);
        const double tp = time_ms(
            [&] { parallel = plp::synthesize(A, B, 10, {}, &mask, true); }, 3);
        bool same = true;
        for (int s = 0; s < 10; ++s) {
            same = same && serial.state_maps[s] == parallel.state_maps[s] &&
                   serial.input_maps[s] == parallel.input_maps[s];
        }
        report("response synthesis", ts, tp, same);
    }

    return 0;
}
