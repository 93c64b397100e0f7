#include "plp/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "plp/errors.hpp"

namespace plp {

namespace {

std::string word_to_string(const std::vector<int>& word) {
    std::string s = "(";
    for (std::size_t i = 0; i < word.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(word[i]);
    }
    return s + ")";
}

void check_tpm(const Eigen::MatrixXd& tpm) {
    if (tpm.rows() == 0 || tpm.rows() != tpm.cols()) {
        throw ConfigError("transition matrix must be square and non-empty");
    }
    for (Eigen::Index i = 0; i < tpm.rows(); ++i) {
        if (tpm.row(i).minCoeff() < 0.0 ||
            std::abs(tpm.row(i).sum() - 1.0) > 1e-9) {
            throw ConfigError("transition matrix row " + std::to_string(i) +
                              " is not a probability distribution");
        }
    }
}

// Probability of traversing `word` given the previous symbol `prev`.
double path_prob(const Eigen::MatrixXd& tpm, const std::vector<int>& word,
                 std::size_t begin, int prev) {
    double p = 1.0;
    int c = prev;
    for (std::size_t i = begin; i < word.size(); ++i) {
        p *= tpm(c, word[i]);
        c = word[i];
    }
    return p;
}

// Absorbing suffix process of the pattern watch.  Transient states are the
// recent-history suffixes (at least one symbol is always retained so the
// predecessor of any upcoming window stays known); absorption happens the
// first time the trailing L symbols form a watched pattern.
class WatchAutomaton {
public:
    WatchAutomaton(const Eigen::MatrixXd& tpm, int initial_mode,
                   const PatternCollection& collection)
        : L_(collection.length()) {
        const int M = static_cast<int>(tpm.rows());
        window_keep_ = std::max(L_ - 1, 1);

        double predicted = 1.0, power = 1.0;
        for (int i = 0; i < window_keep_; ++i) {
            power *= M;
            predicted += power;
        }
        if (predicted > 4096.0) {
            throw ConfigError(
                "pattern watch needs " + std::to_string(predicted) +
                " states; reduce pattern length or mode count");
        }

        states_[{}] = 0;
        order_.push_back({});
        std::vector<std::vector<std::pair<int, double>>> trans_rows;
        std::vector<std::vector<std::pair<int, double>>> abs_rows;
        for (std::size_t i = 0; i < order_.size(); ++i) {
            const std::vector<int> s = order_[i];  // copy: order_ may grow
            trans_rows.emplace_back();
            abs_rows.emplace_back();
            const int cond = s.empty() ? initial_mode : s.back();
            for (int x = 0; x < M; ++x) {
                const double p = tpm(cond, x);
                if (p <= 0.0) continue;
                std::vector<int> w = s;
                w.push_back(x);
                if (static_cast<int>(w.size()) >= L_) {
                    std::vector<int> window(w.end() - L_, w.end());
                    const int k = collection.index_of(window);
                    if (k >= 0) {
                        abs_rows[i].emplace_back(k, p);
                        continue;
                    }
                }
                std::vector<int> next = w;
                if (static_cast<int>(next.size()) > window_keep_) {
                    next.assign(w.end() - window_keep_, w.end());
                }
                auto [it, inserted] = states_.try_emplace(
                    next, static_cast<int>(order_.size()));
                if (inserted) order_.push_back(next);
                trans_rows[i].emplace_back(it->second, p);
            }
        }

        const int n = static_cast<int>(order_.size());
        T_ = Eigen::MatrixXd::Zero(n, n);
        R_ = Eigen::MatrixXd::Zero(n, collection.size());
        for (int i = 0; i < n; ++i) {
            for (const auto& [j, p] : trans_rows[i]) T_(i, j) += p;
            for (const auto& [k, p] : abs_rows[i]) R_(i, k) += p;
        }
    }

    // Expected absorption time and absorption distribution from the start
    // state; throws when absorption is not almost sure.
    std::pair<double, Eigen::VectorXd> absorption() const {
        const Eigen::Index n = T_.rows();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(n, n) -
                                             T_);
        if (!lu.isInvertible()) {
            throw DegenerateCollectionError(
                "the watch can run forever: no pattern is reachable from "
                "part of the chain");
        }
        const Eigen::VectorXd t = lu.solve(Eigen::VectorXd::Ones(n));
        const Eigen::MatrixXd b = lu.solve(R_);
        return {t(0), b.row(0).transpose()};
    }

    // Expected visit counts of each transient state before absorption.
    Eigen::VectorXd visit_counts() const {
        const Eigen::Index n = T_.rows();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(
            (Eigen::MatrixXd::Identity(n, n) - T_).transpose());
        if (!lu.isInvertible()) {
            throw DegenerateCollectionError(
                "the watch can run forever: no pattern is reachable from "
                "part of the chain");
        }
        Eigen::VectorXd e0 = Eigen::VectorXd::Zero(n);
        e0(0) = 1.0;
        return lu.solve(e0);
    }

    const std::vector<std::vector<int>>& states() const { return order_; }

private:
    int L_ = 0;
    int window_keep_ = 1;
    std::map<std::vector<int>, int> states_;
    std::vector<std::vector<int>> order_;
    Eigen::MatrixXd T_;
    Eigen::MatrixXd R_;
};

// True when prefix + word contains no watched window ending strictly before
// the final symbol of `word`.
bool completes_only_at_end(const std::vector<int>& prefix,
                           const std::vector<int>& word,
                           const PatternCollection& collection) {
    std::vector<int> s = prefix;
    s.insert(s.end(), word.begin(), word.end());
    const int L = collection.length();
    const int n = static_cast<int>(s.size());
    for (int end = L; end < n; ++end) {
        std::vector<int> window(s.begin() + (end - L), s.begin() + end);
        if (collection.contains(window)) return false;
    }
    return true;
}

// Payout owed to the team following `target` by its bettor that joined at
// alignment j (1-based, j >= 2) of the realized ending string `beta`.  The
// bettor survives only if the tail of beta matches a prefix of the target;
// its payout compounds the odds of every transition it sat through,
// including the one that brought in its first symbol.
double local_wealth(const Eigen::MatrixXd& tpm, const std::vector<int>& beta,
                    const std::vector<int>& target, int j) {
    const int b = static_cast<int>(beta.size());
    const int m = b - (j - 1);
    if (m > static_cast<int>(target.size())) return 0.0;
    for (int i = 0; i < m; ++i) {
        if (beta[j - 1 + i] != target[i]) return 0.0;
    }
    double w = 1.0 / tpm(beta[j - 2], beta[j - 1]);
    for (int i = j; i < b; ++i) {
        w /= tpm(beta[i - 1], beta[i]);
    }
    return w;
}

// A window the chain can never traverse is harmless unless some team's
// bettor partially matches it *through* one of its impossible transitions;
// the unbounded odds on that transition leave a residue that breaks the
// fair-betting accounting.  Only possible with zero entries in the tpm.
void phantom_residue_scan(const Eigen::MatrixXd& tpm,
                          const PatternCollection& collection,
                          const AugmentedCollection& augmented) {
    if ((tpm.array() > 0.0).all()) return;
    const int M = static_cast<int>(tpm.rows());
    const int L = collection.length();
    for (int k = 0; k < collection.size(); ++k) {
        for (int m1 = 0; m1 < M; ++m1) {
            for (int m2 = 0; m2 < M; ++m2) {
                std::vector<int> gp = {m1, m2};
                const auto& psi = collection.pattern(k);
                gp.insert(gp.end(), psi.begin(), psi.end());
                if (path_prob(tpm, gp, 1, gp[0]) > 0.0) continue;
                for (const auto& win : augmented.windows) {
                    for (int j = 2; j <= L + 2; ++j) {
                        const int m = L + 2 - (j - 1);
                        bool match = true;
                        for (int i = 0; i < m; ++i) {
                            if (gp[j - 1 + i] != win.symbols[i]) {
                                match = false;
                                break;
                            }
                        }
                        if (!match) continue;
                        for (int i = j - 1; i < L + 2; ++i) {
                            if (tpm(gp[i - 1], gp[i]) <= 0.0) {
                                throw DegenerateCollectionError(
                                    "unreachable window " + word_to_string(gp) +
                                    " overlaps " + word_to_string(win.symbols) +
                                    " through an impossible transition");
                            }
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

PatternCollection::PatternCollection(std::vector<std::vector<int>> patterns,
                                     int mode_count)
    : patterns_(std::move(patterns)), mode_count_(mode_count) {
    if (patterns_.empty()) throw ConfigError("pattern collection is empty");
    if (mode_count_ <= 0) throw ConfigError("mode count must be positive");
    length_ = static_cast<int>(patterns_[0].size());
    if (length_ < 1) throw ConfigError("patterns must have length at least 1");
    std::set<std::vector<int>> seen;
    for (const auto& p : patterns_) {
        if (static_cast<int>(p.size()) != length_) {
            throw ConfigError("patterns must all have the same length");
        }
        for (int v : p) {
            if (v < 0 || v >= mode_count_) {
                throw ConfigError("pattern symbol " + std::to_string(v) +
                                  " out of mode range");
            }
        }
        if (!seen.insert(p).second) {
            throw ConfigError("duplicate pattern " + word_to_string(p));
        }
    }
}

bool PatternCollection::contains(const std::vector<int>& word) const {
    return index_of(word) >= 0;
}

int PatternCollection::index_of(const std::vector<int>& word) const {
    for (int k = 0; k < size(); ++k) {
        if (patterns_[k] == word) return k;
    }
    return -1;
}

AugmentedCollection augment_collection(const Eigen::MatrixXd& tpm,
                                       const PatternCollection& collection) {
    check_tpm(tpm);
    const int M = static_cast<int>(tpm.rows());
    if (collection.mode_count() > M) {
        throw ConfigError("pattern symbols exceed the chain's mode count");
    }
    AugmentedCollection out;
    out.window_length = collection.length() + 2;
    std::vector<char> seen(collection.size(), 0);
    for (int k = 0; k < collection.size(); ++k) {
        for (int m1 = 0; m1 < M; ++m1) {
            for (int m2 = 0; m2 < M; ++m2) {
                std::vector<int> g = {m1, m2};
                const auto& psi = collection.pattern(k);
                g.insert(g.end(), psi.begin(), psi.end());
                if (path_prob(tpm, g, 1, g[0]) > 0.0) {
                    out.windows.push_back({std::move(g), k});
                    seen[k] = 1;
                }
            }
        }
    }
    for (int k = 0; k < collection.size(); ++k) {
        if (!seen[k]) {
            throw DegenerateCollectionError(
                "pattern " + word_to_string(collection.pattern(k)) +
                " can never occur under this chain");
        }
    }
    return out;
}

GainMatrix compute_gain_matrix(const Eigen::MatrixXd& tpm, int initial_mode,
                               const PatternCollection& collection) {
    check_tpm(tpm);
    if (initial_mode < 0 || initial_mode >= tpm.rows()) {
        throw ConfigError("initial mode out of range");
    }
    const int M = static_cast<int>(tpm.rows());

    GainMatrix gm;
    gm.augmented = augment_collection(tpm, collection);

    // Stops within the first L steps: the pattern sits flush against the
    // initial mode.
    for (int k = 0; k < collection.size(); ++k) {
        std::vector<int> b = {initial_mode};
        const auto& psi = collection.pattern(k);
        b.insert(b.end(), psi.begin(), psi.end());
        const double pr = path_prob(tpm, b, 1, b[0]);
        if (pr > 0.0) gm.initial_strings.push_back({std::move(b), pr, k});
    }
    // Stops at step L + 1: one free symbol after the start, provided that
    // symbol does not itself begin an occurrence one step earlier.
    for (int k = 0; k < collection.size(); ++k) {
        const auto& psi = collection.pattern(k);
        for (int x = 0; x < M; ++x) {
            std::vector<int> shifted = {x};
            shifted.insert(shifted.end(), psi.begin(), psi.end() - 1);
            if (collection.contains(shifted)) continue;
            std::vector<int> b = {initial_mode, x};
            b.insert(b.end(), psi.begin(), psi.end());
            const double pr = path_prob(tpm, b, 1, b[0]);
            if (pr > 0.0) gm.initial_strings.push_back({std::move(b), pr, k});
        }
    }

    const int KI = static_cast<int>(gm.initial_strings.size());
    const int KL = static_cast<int>(gm.augmented.windows.size());
    gm.wealth = Eigen::MatrixXd::Zero(KI + KL, KL);
    gm.direct_probs = Eigen::VectorXd::Zero(KL);

    for (int si = 0; si < KI; ++si) {
        const auto& beta = gm.initial_strings[si].symbols;
        for (int l = 0; l < KL; ++l) {
            const auto& g = gm.augmented.windows[l].symbols;
            double sum = 0.0;
            for (int j = 2; j <= static_cast<int>(beta.size()); ++j) {
                sum += local_wealth(tpm, beta, g, j);
            }
            gm.wealth(si, l) = sum;
        }
    }

    WatchAutomaton automaton(tpm, initial_mode, collection);
    const Eigen::VectorXd visits = automaton.visit_counts();

    for (int si = 0; si < KL; ++si) {
        const auto& beta = gm.augmented.windows[si].symbols;
        for (int l = 0; l < KL; ++l) {
            const auto& g = gm.augmented.windows[l].symbols;
            double sum = 0.0;
            for (int j = 2; j <= static_cast<int>(beta.size()); ++j) {
                sum += local_wealth(tpm, beta, g, j);
            }
            gm.wealth(KI + si, l) = sum;
        }
        // Diagonal term: the bettor that completes the window joined when
        // the watch sat in some state from which this window runs to the
        // final symbol without an earlier stop.  Its expected payout
        // averages the entry odds over the visit distribution of those
        // states.
        const auto& g = gm.augmented.windows[si].symbols;
        const double trans = path_prob(tpm, g, 1, g[0]);
        double num = 0.0, den = 0.0;
        const auto& states = automaton.states();
        for (std::size_t sid = 0; sid < states.size(); ++sid) {
            if (!completes_only_at_end(states[sid], g, collection)) continue;
            const int last = states[sid].empty() ? initial_mode
                                                 : states[sid].back();
            num += visits(static_cast<Eigen::Index>(sid));
            den += visits(static_cast<Eigen::Index>(sid)) * tpm(last, g[0]);
        }
        gm.direct_probs(si) = den * trans;
        if (den > 0.0) {
            gm.wealth(KI + si, si) += (1.0 / trans) * num / den;
        }
    }

    for (int l = 0; l < KL; ++l) {
        if (gm.direct_probs(l) > 0.0) gm.live.push_back(l);
    }
    return gm;
}

PatternProblem solve_pattern_problem(const Eigen::MatrixXd& tpm,
                                     int initial_mode,
                                     const PatternCollection& collection) {
    PatternProblem prob;
    prob.tpm = tpm;
    prob.initial_mode = initial_mode;
    prob.gain = compute_gain_matrix(tpm, initial_mode, collection);

    const int K = collection.size();
    const int KI = static_cast<int>(prob.gain.initial_strings.size());
    const int KL = static_cast<int>(prob.gain.augmented.windows.size());
    const int NL = static_cast<int>(prob.gain.live.size());

    prob.c_star = Eigen::VectorXd::Zero(KL);
    prob.later_probs = Eigen::VectorXd::Zero(KL);
    prob.first_occurrence = Eigen::VectorXd::Zero(K);

    Eigen::VectorXd init_p(KI);
    for (int si = 0; si < KI; ++si) {
        init_p(si) = prob.gain.initial_strings[si].prob;
        prob.first_occurrence(prob.gain.initial_strings[si].group) +=
            init_p(si);
    }

    if (NL == 0) {
        // Every stop happens within the first L + 1 steps; the expected
        // stopping time is a finite weighted sum over the initial strings.
        double tau = 0.0;
        for (int si = 0; si < KI; ++si) {
            tau += init_p(si) *
                   (static_cast<double>(
                        prob.gain.initial_strings[si].symbols.size()) -
                    1.0);
        }
        prob.expected_tau = tau;
        const double total = prob.first_occurrence.sum();
        if (total <= 0.0) {
            throw DegenerateCollectionError(
                "no ending string has positive probability");
        }
        prob.first_occurrence /= total;
        return prob;
    }

    phantom_residue_scan(tpm, collection, prob.gain.augmented);

    Eigen::MatrixXd WL(NL, NL);
    for (int r = 0; r < NL; ++r) {
        for (int c = 0; c < NL; ++c) {
            WL(r, c) = prob.gain.wealth(KI + prob.gain.live[r],
                                        prob.gain.live[c]);
        }
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(WL);
    const double sv_max = svd.singularValues()(0);
    const double sv_min = svd.singularValues()(NL - 1);
    prob.condition = sv_min > 0.0 ? sv_max / sv_min
                                  : std::numeric_limits<double>::infinity();
    if (!(prob.condition < 1e12)) {
        throw DegenerateCollectionError(
            "reward system is numerically singular (condition " +
            std::to_string(prob.condition) + ")");
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(WL);
    const Eigen::VectorXd c_live = lu.solve(Eigen::VectorXd::Ones(NL));
    const double c_sum = c_live.sum();
    if (std::abs(c_sum) <= 1e-12 * std::max(1.0, c_live.cwiseAbs().maxCoeff())) {
        throw DegenerateCollectionError(
            "reward mix sums to zero; stopping time is not identified");
    }
    for (int r = 0; r < NL; ++r) prob.c_star(prob.gain.live[r]) = c_live(r);
    prob.fairness_residual =
        (WL * c_live - Eigen::VectorXd::Ones(NL)).cwiseAbs().maxCoeff();

    Eigen::MatrixXd WI(KI, NL);
    for (int si = 0; si < KI; ++si) {
        for (int c = 0; c < NL; ++c) {
            WI(si, c) = prob.gain.wealth(si, prob.gain.live[c]);
        }
    }
    const double expected_initial_payout =
        KI > 0 ? init_p.dot(WI * c_live) : 0.0;
    prob.expected_tau =
        ((1.0 - init_p.sum()) + expected_initial_payout) / c_sum;

    // Stop distribution over the later strings from the fairness identity:
    // each later string's wealth column, weighted by the stop law, must pay
    // out exactly the expected stopping time.
    const Eigen::VectorXd rhs =
        Eigen::VectorXd::Constant(NL, prob.expected_tau) -
        (KI > 0 ? Eigen::VectorXd(WI.transpose() * init_p)
                : Eigen::VectorXd(Eigen::VectorXd::Zero(NL)));
    Eigen::PartialPivLU<Eigen::MatrixXd> lut(WL.transpose());
    Eigen::VectorXd p_live = lut.solve(rhs);
    const double worst = p_live.minCoeff();
    if (worst < -1e-9) {
        throw NumericalFailureError(
            "later-string stop probability went negative (" +
            std::to_string(worst) + ")");
    }
    p_live = p_live.cwiseMax(0.0);
    for (int r = 0; r < NL; ++r) {
        prob.later_probs(prob.gain.live[r]) = p_live(r);
        prob.first_occurrence(prob.gain.augmented.windows[prob.gain.live[r]]
                                  .group) += p_live(r);
    }

    const double total = prob.first_occurrence.sum();
    if (total <= 0.0) {
        throw DegenerateCollectionError("stop distribution vanished");
    }
    prob.first_occurrence /= total;
    return prob;
}

double expected_tau(const Eigen::MatrixXd& tpm, int initial_mode,
                    const PatternCollection& collection) {
    return solve_pattern_problem(tpm, initial_mode, collection).expected_tau;
}

Eigen::VectorXd first_occurrence_probs(const Eigen::MatrixXd& tpm,
                                       int initial_mode,
                                       const PatternCollection& collection) {
    return solve_pattern_problem(tpm, initial_mode, collection)
        .first_occurrence;
}

Eigen::VectorXd per_pattern_tau(const Eigen::MatrixXd& tpm, int initial_mode,
                                const PatternCollection& collection) {
    check_tpm(tpm);
    Eigen::VectorXd taus(collection.size());
    for (int k = 0; k < collection.size(); ++k) {
        PatternCollection single({collection.pattern(k)},
                                 collection.mode_count());
        try {
            WatchAutomaton automaton(tpm, initial_mode, single);
            taus(k) = automaton.absorption().first;
        } catch (const DegenerateCollectionError&) {
            taus(k) = std::numeric_limits<double>::infinity();
        }
    }
    return taus;
}

}  // namespace plp
