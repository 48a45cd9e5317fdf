#pragma once

#include "robusthedge/arbitrage.hpp"
#include "robusthedge/hedging_lp.hpp"
#include "robusthedge/lp.hpp"
#include "robusthedge/model.hpp"
#include "robusthedge/parallel.hpp"
#include "robusthedge/polar.hpp"

#include <optional>
#include <string>
#include <vector>

namespace robusthedge {

struct PricingOptions {
    unsigned threads = 1;
    /// Run the no-arbitrage check first and throw ArbitrageDetected on failure.
    bool check_na = true;
};

/// One-period superhedging result at a node.
template <class T>
struct NodePrice {
    T value;
    std::vector<T> hedge;
    /// Optimal martingale kernel, aligned with the node's children.
    Measure<T> kernel;
};

/// Backward-recursion values; std::nullopt marks polar (unused) nodes.
template <class T>
struct ValueSurface {
    std::vector<std::optional<T>> values;
    std::vector<std::vector<T>> hedge;
};

template <class T>
struct DynamicPrice {
    T price;
    ValueSurface<T> surface;
    Strategy<T> strategy;
};

template <class T>
struct SemistaticPrice {
    T price;
    Strategy<T> strategy;
    /// Dual optimizer: a martingale measure attaining the price.
    PathMeasure<T> q;
};

enum class IntervalKind { Point, OpenInterval };

template <class T>
struct PriceInterval {
    T lower;
    T upper;
    IntervalKind kind;
    PathMeasure<T> q_low;
    PathMeasure<T> q_high;
};

template <class T>
struct ReplicationResult {
    bool replicable = false;
    T lower, upper;
    std::optional<Strategy<T>> strategy;
    std::optional<PathMeasure<T>> q_low, q_high;
};

template <class T>
struct LagrangeResult {
    T value;
    std::vector<T> h_star;
};

template <class T>
struct ProofResult {
    bool proved = false;
    T price;
    std::optional<Strategy<T>> certificate;
    std::optional<PathMeasure<T>> refutation;
};

namespace detail {

// Pricing needs the local tests to pass. Option quotes only need to admit
// some consistent martingale measure; when none exists the primal LP is
// unbounded and the caller reports ArbitrageDetected.
template <class T>
void require_na(const ScenarioTree<T>& tree, const SupportMask& mask, const PricingOptions& opts) {
    if (!opts.check_na) return;
    auto na = global_na(tree, mask, std::vector<StaticOption<T>>{}, opts.threads);
    if (!na.pass)
        throw ArbitrageDetected("the market admits an arbitrage at node '" + tree.node(*na.failing_node).id + "'");
}

template <class T>
std::vector<T> negated(const std::vector<T>& v) {
    std::vector<T> out(v);
    for (auto& x : out) x = -x;
    return out;
}

}  // namespace detail

/// One-period superhedging price of child values at `node`:
/// min x s.t. x + y.dS_c >= v_c on supported children. The LP dual is the
/// maximal expectation over martingale kernels on the support.
template <class T>
NodePrice<T> node_price(const ScenarioTree<T>& tree, const SupportMask& mask, std::size_t node,
                        const std::vector<std::optional<T>>& child_values) {
    const auto& nd = tree.node(node);
    lp::LinearProgram<T> lp(lp::Sense::Minimize);
    const auto x = lp.add_variable(std::nullopt, std::nullopt, T(1));
    std::vector<std::size_t> y;
    for (std::size_t k = 0; k < tree.dimension(); ++k) y.push_back(lp.add_variable());
    std::vector<std::size_t> row_child;
    for (std::size_t c = 0; c < nd.children.size(); ++c) {
        if (!mask.in_support(node, c)) continue;
        if (!child_values.at(c))
            throw InputError("no value for child '" + tree.node(nd.children[c]).id + "' of node '" + nd.id + "'");
        std::vector<std::pair<std::size_t, T>> terms{{x, T(1)}};
        const auto inc = tree.increment(node, nd.children[c]);
        for (std::size_t k = 0; k < inc.size(); ++k)
            if (inc[k] != 0) terms.emplace_back(y[k], inc[k]);
        lp.add_row(std::move(terms), lp::Relation::GreaterEqual, *child_values[c]);
        row_child.push_back(c);
    }
    auto out = lp::solve(lp, tree.arith());
    const auto* opt = std::get_if<lp::Optimal<T>>(&out);
    if (!opt) throw LocalArbitrage("local arbitrage at node '" + nd.id + "': one-period superhedging is unbounded");
    NodePrice<T> res;
    res.value = opt->value;
    for (auto j : y) res.hedge.push_back(opt->primal[j]);
    res.kernel.weights.assign(nd.children.size(), T(0));
    for (std::size_t r = 0; r < row_child.size(); ++r) res.kernel.weights[row_child[r]] = opt->dual[r];
    return res;
}

/// Values of `v` at the children of `node`, as node_price expects them.
template <class T>
std::vector<std::optional<T>> child_values_of(const ScenarioTree<T>& tree, std::size_t node,
                                              const std::vector<std::optional<T>>& v) {
    std::vector<std::optional<T>> out;
    for (auto c : tree.node(node).children) out.push_back(v.at(c));
    return out;
}

/// Superhedging by backward recursion over one-period problems (no options).
template <class T>
DynamicPrice<T> superhedge_dynamic(const ScenarioTree<T>& tree, const SupportMask& mask, const Claim<T>& claim,
                                   const PricingOptions& opts = {}) {
    detail::require_na(tree, mask, opts);
    DynamicPrice<T> res;
    auto& surf = res.surface;
    surf.values.assign(tree.size(), std::nullopt);
    surf.hedge.assign(tree.size(), {});
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        if (mask.relevant_leaf[l]) surf.values[tree.leaf_node(l)] = claim.values.at(l);
    for (int t = tree.horizon() - 1; t >= 0; --t) {
        const auto& level = tree.level_nodes(t);
        std::vector<std::optional<NodePrice<T>>> prices(level.size());
        parallel_for(level.size(), opts.threads, [&](std::size_t i) {
            const auto n = level[i];
            if (mask.relevant(n)) prices[i] = node_price(tree, mask, n, child_values_of(tree, n, surf.values));
        });
        for (std::size_t i = 0; i < level.size(); ++i) {
            const auto n = level[i];
            if (prices[i]) {
                surf.values[n] = prices[i]->value;
                surf.hedge[n] = std::move(prices[i]->hedge);
            } else {
                surf.hedge[n].assign(tree.dimension(), T(0));
            }
        }
    }
    res.price = *surf.values[0];
    res.strategy = zero_strategy(tree, 0);
    res.strategy.initial = res.price;
    for (std::size_t n = 0; n < tree.size(); ++n)
        if (!tree.node(n).is_leaf()) res.strategy.dynamic[n] = surf.hedge[n];
    return res;
}

/// Global primal LP: min x over (x, H, h) with x + H.S_T + h.g >= f on every
/// relevant leaf. The returned q is the LP's dual solution.
template <class T>
SemistaticPrice<T> superhedge_semistatic(const ScenarioTree<T>& tree, const SupportMask& mask, const Claim<T>& claim,
                                         const std::vector<StaticOption<T>>& options, const PricingOptions& opts = {}) {
    detail::require_na(tree, mask, opts);
    const auto payoffs = normalized_payoffs(options);
    lp::LinearProgram<T> lp(lp::Sense::Minimize);
    auto vars = detail::add_strategy_vars(lp, tree, mask, options.size(), true);
    lp.set_cost(vars.initial, T(1));
    std::vector<std::size_t> row_leaf;
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        if (!mask.relevant_leaf[l]) continue;
        lp.add_row(detail::wealth_terms(tree, vars, payoffs, l), lp::Relation::GreaterEqual, claim.values.at(l));
        row_leaf.push_back(l);
    }
    auto out = lp::solve(lp, tree.arith());
    const auto* opt = std::get_if<lp::Optimal<T>>(&out);
    if (!opt) throw ArbitrageDetected("superhedging LP is unbounded: no consistent martingale measure exists");
    SemistaticPrice<T> res;
    res.price = opt->value;
    res.strategy = detail::read_strategy(tree, vars, opt->primal);
    res.q.weights.assign(tree.num_leaves(), T(0));
    for (std::size_t r = 0; r < row_leaf.size(); ++r) res.q.weights[row_leaf[r]] = opt->dual[r];
    return res;
}

/// The dual problem solved as its own LP: max E_q[f] over martingale
/// measures on relevant leaves that price every option at zero.
template <class T>
std::pair<T, PathMeasure<T>> dual_price(const ScenarioTree<T>& tree, const SupportMask& mask, const Claim<T>& claim,
                                        const std::vector<StaticOption<T>>& options) {
    lp::LinearProgram<T> lp(lp::Sense::Maximize);
    auto q = detail::add_leaf_measure_vars(lp, tree, mask);
    for (std::size_t l = 0; l < q.size(); ++l)
        if (q[l] != detail::no_var) lp.set_cost(q[l], claim.values.at(l));
    detail::add_normalization_row(lp, q);
    detail::add_martingale_rows(lp, tree, mask, q);
    detail::add_option_rows(lp, normalized_payoffs(options), q);
    auto out = lp::solve(lp, tree.arith());
    const auto* opt = std::get_if<lp::Optimal<T>>(&out);
    if (!opt) throw ArbitrageDetected("no martingale measure is consistent with the model and option quotes");
    return {opt->value, detail::read_measure(q, opt->primal)};
}

/// Checks x + H.S_T + h.g >= f on every relevant leaf; returns the first
/// violation as text, or an empty string.
template <class T>
std::string check_superhedge(const ScenarioTree<T>& tree, const SupportMask& mask,
                             const std::vector<StaticOption<T>>& options, const Strategy<T>& s, const Claim<T>& f) {
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        if (!mask.relevant_leaf[l]) continue;
        if (is_neg(tree.arith(), T(wealth(tree, s, options, l) - f.values[l])))
            return "strategy falls short of the claim at leaf '" + tree.node(tree.leaf_node(l)).id + "'";
    }
    return {};
}

template <class T>
PriceInterval<T> price_interval(const ScenarioTree<T>& tree, const SupportMask& mask, const Claim<T>& claim,
                                const std::vector<StaticOption<T>>& options, const PricingOptions& opts = {}) {
    auto up = superhedge_semistatic(tree, mask, claim, options, opts);
    PricingOptions again = opts;
    again.check_na = false;
    auto down = superhedge_semistatic(tree, mask, Claim<T>{detail::negated(claim.values)}, options, again);
    PriceInterval<T> res;
    res.upper = up.price;
    res.lower = -down.price;
    res.kind = approx_eq(tree.arith(), res.lower, res.upper) ? IntervalKind::Point : IntervalKind::OpenInterval;
    res.q_high = std::move(up.q);
    res.q_low = std::move(down.q);
    return res;
}

/// Replicable iff the price interval is a point; the superhedge is then an
/// exact replication on relevant leaves.
template <class T>
ReplicationResult<T> check_replicable(const ScenarioTree<T>& tree, const SupportMask& mask, const Claim<T>& claim,
                                      const std::vector<StaticOption<T>>& options, const PricingOptions& opts = {}) {
    auto up = superhedge_semistatic(tree, mask, claim, options, opts);
    PricingOptions again = opts;
    again.check_na = false;
    auto down = superhedge_semistatic(tree, mask, Claim<T>{detail::negated(claim.values)}, options, again);
    ReplicationResult<T> res;
    res.upper = up.price;
    res.lower = -down.price;
    res.replicable = approx_eq(tree.arith(), res.lower, res.upper);
    if (res.replicable) {
        for (std::size_t l = 0; l < tree.num_leaves(); ++l)
            if (mask.relevant_leaf[l] &&
                !approx_eq(tree.arith(), wealth(tree, up.strategy, options, l), claim.values[l]))
                throw InternalError("replicating strategy misses leaf '" + tree.node(tree.leaf_node(l)).id + "'");
        res.strategy = std::move(up.strategy);
    } else {
        res.q_high = std::move(up.q);
        res.q_low = std::move(down.q);
    }
    return res;
}

/// Complete iff every relevant leaf indicator is replicable.
template <class T>
bool check_complete(const ScenarioTree<T>& tree, const SupportMask& mask, const std::vector<StaticOption<T>>& options,
                    const PricingOptions& opts = {}) {
    detail::require_na(tree, mask, opts);
    PricingOptions inner = opts;
    inner.check_na = false;
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        if (!mask.relevant_leaf[l]) continue;
        Claim<T> indicator{std::vector<T>(tree.num_leaves(), T(0))};
        indicator.values[l] = 1;
        if (!check_replicable(tree, mask, indicator, options, inner).replicable) return false;
    }
    return true;
}

/// Evaluates sup over option-free martingale measures of E[f - h*.g] at the
/// optimal static position h* and asserts it equals the superhedging price.
template <class T>
LagrangeResult<T> lagrange_check(const ScenarioTree<T>& tree, const SupportMask& mask, const Claim<T>& claim,
                                 const std::vector<StaticOption<T>>& options, const PricingOptions& opts = {}) {
    auto sp = superhedge_semistatic(tree, mask, claim, options, opts);
    Claim<T> shifted = claim;
    for (std::size_t i = 0; i < options.size(); ++i) {
        const auto g = options[i].normalized();
        for (std::size_t l = 0; l < shifted.values.size(); ++l) shifted.values[l] -= sp.strategy.statics[i] * g[l];
    }
    auto [value, q] = dual_price(tree, mask, shifted, std::vector<StaticOption<T>>{});
    if (!approx_eq(tree.arith(), value, sp.price))
        throw LagrangeGap("Lagrange value differs from the superhedging price");
    return {value, sp.strategy.statics};
}

/// Decides whether E_Q[f] <= bound for every martingale measure Q. A proof is
/// a dynamic strategy with f <= bound + H.S_T on every relevant leaf.
template <class T>
ProofResult<T> prove_inequality(const ScenarioTree<T>& tree, const SupportMask& mask, const Claim<T>& claim,
                                const T& bound, const PricingOptions& opts = {}) {
    auto dp = superhedge_dynamic(tree, mask, claim, opts);
    ProofResult<T> res;
    res.price = dp.price;
    res.proved = approx_le(tree.arith(), dp.price, bound);
    if (res.proved) {
        Strategy<T> cert = dp.strategy;
        cert.initial = bound;
        if (auto err = check_superhedge(tree, mask, std::vector<StaticOption<T>>{}, cert, claim); !err.empty())
            throw InternalError("pathwise certificate failed: " + err);
        res.certificate = std::move(cert);
    } else {
        auto [value, q] = dual_price(tree, mask, claim, std::vector<StaticOption<T>>{});
        res.refutation = std::move(q);
    }
    return res;
}

}  // namespace robusthedge
