#pragma once

#include <stdexcept>
#include <string>

namespace plp {

// Bad or inconsistent user input: malformed config files, non-stochastic
// transition matrices, dimension mismatches.  The CLI maps this to exit 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Closed-loop state left the finite range during simulation.  Carries the
// step at which the blow-up was detected.  The CLI maps this to exit 3.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long step)
        : std::runtime_error(what), step_(step) {}
    long step() const { return step_; }

private:
    long step_ = -1;
};

// The pattern problem posed to the occurrence engine has no well-defined
// answer: a pattern cannot occur under the chain, the reward system is
// singular, or the normalisation degenerates.
class DegenerateCollectionError : public std::runtime_error {
public:
    explicit DegenerateCollectionError(const std::string& what)
        : std::runtime_error(what) {}
};

// A linear-algebra step produced values outside its certified range
// (e.g. probabilities materially below zero).
class NumericalFailureError : public std::runtime_error {
public:
    explicit NumericalFailureError(const std::string& what)
        : std::runtime_error(what) {}
};

// Recorded data is not persistently exciting at the requested order, so a
// behavioural synthesis cannot be trusted.
class PersistenceError : public std::runtime_error {
public:
    PersistenceError(const std::string& what, int order)
        : std::runtime_error(what), order_(order) {}
    int order() const { return order_; }

private:
    int order_ = 0;
};

// A sparsity-constrained synthesis has no solution within tolerance for
// some column.  Carries the offending column.
class InfeasibleLocalityError : public std::runtime_error {
public:
    InfeasibleLocalityError(const std::string& what, int column)
        : std::runtime_error(what), column_(column) {}
    int column() const { return column_; }

private:
    int column_ = -1;
};

// Observed transition data cannot be explained by any candidate model even
// after widening the search, i.e. the model bank is wrong.
class ModelMismatchError : public std::runtime_error {
public:
    explicit ModelMismatchError(const std::string& what)
        : std::runtime_error(what) {}
};

// Synthesis was requested for a mode whose pair (A, B) admits no
// finite-horizon deadbeat response.
class UncontrollableModeError : public std::runtime_error {
public:
    UncontrollableModeError(const std::string& what, int mode)
        : std::runtime_error(what), mode_(mode) {}
    int mode() const { return mode_; }

private:
    int mode_ = -1;
};

}  // namespace plp
