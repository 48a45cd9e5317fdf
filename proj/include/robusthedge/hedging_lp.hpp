#pragma once

// LP building blocks shared by the arbitrage and superhedging modules:
// strategy variables with their wealth rows on the primal side, leaf
// measures with martingale and option rows on the dual side.

#include "robusthedge/lp.hpp"
#include "robusthedge/model.hpp"
#include "robusthedge/polar.hpp"

#include <optional>
#include <vector>

namespace robusthedge::detail {

/// Non-leaf nodes of the non-polar part, in arena order.
template <class T>
std::vector<std::size_t> relevant_internal_nodes(const ScenarioTree<T>& tree, const SupportMask& mask) {
    std::vector<std::size_t> out;
    for (std::size_t n = 0; n < tree.size(); ++n)
        if (mask.relevant(n) && !tree.node(n).is_leaf()) out.push_back(n);
    return out;
}

inline constexpr std::size_t no_var = static_cast<std::size_t>(-1);

struct StrategyVars {
    std::size_t initial = no_var;
    std::vector<std::vector<std::size_t>> dynamic;  // per node; empty at leaves and polar nodes
    std::vector<std::size_t> statics;
};

template <class T>
StrategyVars add_strategy_vars(lp::LinearProgram<T>& lp, const ScenarioTree<T>& tree, const SupportMask& mask,
                               std::size_t num_options, bool with_initial) {
    StrategyVars v;
    if (with_initial) v.initial = lp.add_variable();
    v.dynamic.resize(tree.size());
    for (auto n : relevant_internal_nodes(tree, mask))
        for (std::size_t k = 0; k < tree.dimension(); ++k) v.dynamic[n].push_back(lp.add_variable());
    for (std::size_t i = 0; i < num_options; ++i) v.statics.push_back(lp.add_variable());
    return v;
}

/// Linear form of terminal wealth at `leaf` in the strategy variables.
template <class T>
std::vector<std::pair<std::size_t, T>> wealth_terms(const ScenarioTree<T>& tree, const StrategyVars& v,
                                                    const std::vector<std::vector<T>>& payoffs, std::size_t leaf) {
    std::vector<std::pair<std::size_t, T>> terms;
    if (v.initial != no_var) terms.emplace_back(v.initial, T(1));
    const auto& path = tree.path(leaf);
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const auto n = path[k];
        if (v.dynamic[n].empty()) continue;
        const auto inc = tree.increment(n, path[k + 1]);
        for (std::size_t i = 0; i < inc.size(); ++i)
            if (inc[i] != 0) terms.emplace_back(v.dynamic[n][i], inc[i]);
    }
    for (std::size_t i = 0; i < v.statics.size(); ++i)
        if (payoffs[i][leaf] != 0) terms.emplace_back(v.statics[i], payoffs[i][leaf]);
    return terms;
}

template <class T>
Strategy<T> read_strategy(const ScenarioTree<T>& tree, const StrategyVars& v, const std::vector<T>& x) {
    Strategy<T> s = zero_strategy(tree, v.statics.size());
    if (v.initial != no_var) s.initial = x[v.initial];
    for (std::size_t n = 0; n < tree.size(); ++n)
        for (std::size_t k = 0; k < v.dynamic[n].size(); ++k) s.dynamic[n][k] = x[v.dynamic[n][k]];
    for (std::size_t i = 0; i < v.statics.size(); ++i) s.statics[i] = x[v.statics[i]];
    return s;
}

/// One nonnegative variable per relevant leaf; polar leaves get no_var.
template <class T>
std::vector<std::size_t> add_leaf_measure_vars(lp::LinearProgram<T>& lp, const ScenarioTree<T>& tree,
                                               const SupportMask& mask) {
    std::vector<std::size_t> q(tree.num_leaves(), no_var);
    for (std::size_t l = 0; l < q.size(); ++l)
        if (mask.relevant_leaf[l]) q[l] = lp.add_variable(T(0));
    return q;
}

template <class T>
void add_normalization_row(lp::LinearProgram<T>& lp, const std::vector<std::size_t>& q) {
    std::vector<std::pair<std::size_t, T>> terms;
    for (auto j : q)
        if (j != no_var) terms.emplace_back(j, T(1));
    lp.add_row(std::move(terms), lp::Relation::Equal, T(1));
}

/// Unconditional martingale rows: for every relevant non-leaf node n and
/// coordinate k, sum over leaves below n of q(leaf) * dS^k on the edge
/// leaving n equals zero.
template <class T>
void add_martingale_rows(lp::LinearProgram<T>& lp, const ScenarioTree<T>& tree, const SupportMask& mask,
                         const std::vector<std::size_t>& q) {
    for (auto n : relevant_internal_nodes(tree, mask)) {
        for (std::size_t k = 0; k < tree.dimension(); ++k) {
            std::vector<std::pair<std::size_t, T>> terms;
            for (std::size_t l = tree.leaf_begin(n); l < tree.leaf_end(n); ++l) {
                if (q[l] == no_var) continue;
                const auto c = tree.child_towards(n, l);
                T d = tree.node(c).price[k] - tree.node(n).price[k];
                if (d != 0) terms.emplace_back(q[l], d);
            }
            lp.add_row(std::move(terms), lp::Relation::Equal, T(0));
        }
    }
}

template <class T>
void add_option_rows(lp::LinearProgram<T>& lp, const std::vector<std::vector<T>>& payoffs,
                     const std::vector<std::size_t>& q) {
    for (const auto& g : payoffs) {
        std::vector<std::pair<std::size_t, T>> terms;
        for (std::size_t l = 0; l < q.size(); ++l)
            if (q[l] != no_var && g[l] != 0) terms.emplace_back(q[l], g[l]);
        lp.add_row(std::move(terms), lp::Relation::Equal, T(0));
    }
}

template <class T>
PathMeasure<T> read_measure(const std::vector<std::size_t>& q, const std::vector<T>& x) {
    PathMeasure<T> p;
    p.weights.assign(q.size(), T(0));
    for (std::size_t l = 0; l < q.size(); ++l)
        if (q[l] != no_var) p.weights[l] = x[q[l]];
    return p;
}

}  // namespace robusthedge::detail
