#pragma once

#include <Eigen/Dense>
#include <vector>

#include "plp/sls.hpp"

namespace plp {

// One uninterrupted recording of a single mode: states has one more column
// than inputs (the closing state of the last transition).
struct DataSegment {
    Eigen::MatrixXd states;  // n x (len + 1)
    Eigen::MatrixXd inputs;  // m x len
};

// Block Hankel matrix of a vector signal: block (i, j) = signal[i + j] for
// i = 0..order-1, j = 0..len-order.  `signal` is d x len (one column per
// sample).  order > len is rejected.
Eigen::MatrixXd build_hankel(const Eigen::MatrixXd& signal, int order);

// True when the numerical rank of the order-r Hankel (singular values above
// 1e-10 times the largest) equals min(rows, cols).
bool persistence_check(const Eigen::MatrixXd& signal, int order);

// Behavioural synthesis: the response is optimized directly over
// combinations of recorded trajectory windows instead of plant matrices.
// Windows never straddle segment boundaries, so recordings of the same mode
// taken at different times can be pooled.  The quadratic objective is
// evaluated on the reconstructed response (not on the combination weights),
// which is what makes the result match the model-based solver on noiseless
// data.  Throws PersistenceError when the data cannot pin down the response
// at this horizon.
SystemResponse data_driven_synthesize(const std::vector<DataSegment>& segments,
                                      int horizon,
                                      const SlsWeights& weights = {},
                                      double ridge = 1e-10,
                                      bool parallel = true,
                                      const SparsityMask* mask = nullptr);

// Number of usable windows the segments contribute at this horizon.
long count_windows(const std::vector<DataSegment>& segments, int horizon);

}  // namespace plp
