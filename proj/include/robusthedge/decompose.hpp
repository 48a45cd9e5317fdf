#pragma once

#include "robusthedge/superhedge.hpp"

#include <optional>
#include <string>
#include <vector>

namespace robusthedge {

/// Node-indexed process; entries at polar nodes may be absent.
template <class T>
using AdaptedProcess = std::vector<std::optional<T>>;

template <class T>
struct SupermartingaleVerdict {
    bool yes = true;
    std::optional<std::size_t> node;  // first violating node
    std::optional<T> gap;             // E_t(V_{t+1}) - V_t > 0 there
};

/// V = V_0 + H.S - K with K nondecreasing and K_0 = 0.
template <class T>
struct Decomposition {
    Strategy<T> strategy;
    std::vector<std::optional<T>> consumption;  // K at relevant nodes
};

namespace detail {

template <class T>
void require_defined(const ScenarioTree<T>& tree, const SupportMask& mask, const AdaptedProcess<T>& v) {
    if (v.size() != tree.size()) throw InputError("process must have one slot per node");
    for (std::size_t n = 0; n < tree.size(); ++n)
        if (mask.relevant(n) && !v[n])
            throw InputError("process is undefined at relevant node '" + tree.node(n).id + "'");
}

}  // namespace detail

/// Tests E_t(V_{t+1}) <= V_t at every relevant non-leaf node, where E_t is
/// the one-period superhedging operator.
template <class T>
SupermartingaleVerdict<T> check_supermartingale(const ScenarioTree<T>& tree, const SupportMask& mask,
                                                const AdaptedProcess<T>& v, const PricingOptions& opts = {}) {
    detail::require_na(tree, mask, opts);
    detail::require_defined(tree, mask, v);
    const auto nodes = detail::relevant_internal_nodes(tree, mask);
    std::vector<T> upper(nodes.size());
    parallel_for(nodes.size(), opts.threads, [&](std::size_t i) {
        upper[i] = node_price(tree, mask, nodes[i], child_values_of(tree, nodes[i], v)).value;
    });
    SupermartingaleVerdict<T> res;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const T gap = upper[i] - *v[nodes[i]];
        if (is_pos(tree.arith(), gap)) {
            res.yes = false;
            res.node = nodes[i];
            res.gap = gap;
            break;
        }
    }
    return res;
}

/// Optional decomposition of a universal supermartingale: hedges come from
/// the one-period superhedging problems, K collects the unhedged decrease.
template <class T>
Decomposition<T> optional_decomposition(const ScenarioTree<T>& tree, const SupportMask& mask,
                                        const AdaptedProcess<T>& v, const PricingOptions& opts = {}) {
    auto verdict = check_supermartingale(tree, mask, v, opts);
    if (!verdict.yes)
        throw NotSupermartingale("process is not a supermartingale at node '" + tree.node(*verdict.node).id + "'");
    Decomposition<T> d;
    d.strategy = zero_strategy(tree, 0);
    d.strategy.initial = *v[0];
    d.consumption.assign(tree.size(), std::nullopt);
    d.consumption[0] = T(0);
    const auto nodes = detail::relevant_internal_nodes(tree, mask);
    std::vector<std::vector<T>> hedges(nodes.size());
    parallel_for(nodes.size(), opts.threads, [&](std::size_t i) {
        hedges[i] = node_price(tree, mask, nodes[i], child_values_of(tree, nodes[i], v)).hedge;
    });
    // Arena order visits parents before children.
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto n = nodes[i];
        d.strategy.dynamic[n] = hedges[i];
        const auto& nd = tree.node(n);
        for (std::size_t k = 0; k < nd.children.size(); ++k) {
            if (!mask.in_support(n, k)) continue;
            const auto c = nd.children[k];
            const T increment = *v[n] + dot(hedges[i], tree.increment(n, c)) - *v[c];
            d.consumption[c] = *d.consumption[n] + increment;
        }
    }
    return d;
}

/// Re-verifies K_0 = 0, monotone K along relevant edges, and the identity
/// V_t = V_0 + H.S_t - K_t at every relevant node.
template <class T>
std::string check_decomposition(const ScenarioTree<T>& tree, const SupportMask& mask, const AdaptedProcess<T>& v,
                                const Decomposition<T>& d) {
    const auto& a = tree.arith();
    if (!d.consumption[0] || !is_zero(a, *d.consumption[0])) return "K_0 must be zero";
    for (std::size_t n = 0; n < tree.size(); ++n) {
        if (!mask.relevant(n)) continue;
        const auto& id = tree.node(n).id;
        if (!d.consumption[n]) return "K undefined at node '" + id + "'";
        if (auto p = tree.node(n).parent; p && is_neg(a, T(*d.consumption[n] - *d.consumption[*p])))
            return "K decreases into node '" + id + "'";
        const T rhs = gains_at(tree, d.strategy, n) - *d.consumption[n];
        if (!approx_eq(a, *v[n], rhs)) return "identity V = V_0 + H.S - K fails at node '" + id + "'";
    }
    return {};
}

}  // namespace robusthedge
