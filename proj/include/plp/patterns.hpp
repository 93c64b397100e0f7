#pragma once

#include <Eigen/Dense>
#include <vector>

namespace plp {

// Duplicate-free set of equal-length mode words to be watched for in the
// switching sequence.
class PatternCollection {
public:
    PatternCollection(std::vector<std::vector<int>> patterns, int mode_count);

    int size() const { return static_cast<int>(patterns_.size()); }
    int length() const { return length_; }
    int mode_count() const { return mode_count_; }
    const std::vector<int>& pattern(int k) const { return patterns_.at(k); }
    const std::vector<std::vector<int>>& patterns() const { return patterns_; }
    bool contains(const std::vector<int>& word) const;
    // Index of the pattern equal to `word`, or -1.
    int index_of(const std::vector<int>& word) const;

private:
    std::vector<std::vector<int>> patterns_;
    int length_ = 0;
    int mode_count_ = 0;
};

// One watched word extended by its two-symbol left context (the symbol pair
// that precedes a non-initial occurrence); kept only when the chain can
// actually traverse it.
struct AugmentedWindow {
    std::vector<int> symbols;  // length L + 2
    int group = 0;             // index of the pattern it completes
};

struct AugmentedCollection {
    std::vector<AugmentedWindow> windows;
    int window_length = 0;
};

// All traversable augmented windows.  Throws DegenerateCollectionError when
// some pattern has no traversable window at all (it can then never occur in
// steady state and the occurrence problem is ill-posed).
AugmentedCollection augment_collection(const Eigen::MatrixXd& tpm,
                                       const PatternCollection& collection);

// A way the watch can stop within the first L + 1 steps: the realized
// prefix ends with a pattern before any two-symbol left context exists.
struct EndingString {
    std::vector<int> symbols;  // starts with the initial mode
    double prob = 0.0;         // probability the chain realizes the string
    int group = 0;             // pattern completed at its end
};

// Wealth bookkeeping of the fair-betting construction.  Row r, column l
// holds the expected total payout owed to team l when the watch stops by
// realizing ending string r (initial strings first, then one row per
// augmented window).  `direct_probs` are the stopping probabilities of the
// later strings computed directly from the visit statistics of the watch
// process; `live` lists the later strings with positive stopping
// probability, the block on which the reward system is solved.
struct GainMatrix {
    Eigen::MatrixXd wealth;
    std::vector<EndingString> initial_strings;
    AugmentedCollection augmented;
    Eigen::VectorXd direct_probs;
    std::vector<int> live;
};

GainMatrix compute_gain_matrix(const Eigen::MatrixXd& tpm, int initial_mode,
                               const PatternCollection& collection);

// Full solution of the occurrence problem for one (chain, start, patterns)
// triple: expected stopping time and the stopping distribution over
// patterns, with the intermediate quantities exposed for inspection.
struct PatternProblem {
    Eigen::MatrixXd tpm;
    int initial_mode = 0;
    GainMatrix gain;
    Eigen::VectorXd c_star;           // reward mix; zero off the live set
    double expected_tau = 0.0;        // E[steps until first occurrence]
    Eigen::VectorXd later_probs;      // stop probability per augmented window
    Eigen::VectorXd first_occurrence; // stop probability per pattern
    double condition = 1.0;           // condition number of the live block
    double fairness_residual = 0.0;   // max |W_live c* - 1|
};

PatternProblem solve_pattern_problem(const Eigen::MatrixXd& tpm,
                                     int initial_mode,
                                     const PatternCollection& collection);

// Conveniences over solve_pattern_problem.
double expected_tau(const Eigen::MatrixXd& tpm, int initial_mode,
                    const PatternCollection& collection);
Eigen::VectorXd first_occurrence_probs(const Eigen::MatrixXd& tpm,
                                       int initial_mode,
                                       const PatternCollection& collection);

// Expected first-occurrence time of each pattern watched alone; +inf for a
// pattern the chain can never realize from this start.
Eigen::VectorXd per_pattern_tau(const Eigen::MatrixXd& tpm, int initial_mode,
                                const PatternCollection& collection);

}  // namespace plp
