#pragma once

#include "robusthedge/hedging_lp.hpp"
#include "robusthedge/lp.hpp"
#include "robusthedge/model.hpp"
#include "robusthedge/parallel.hpp"
#include "robusthedge/polar.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace robusthedge {

/// Local no-arbitrage verdict at one node. When the node fails,
/// `certificate` is a position y with y.dS >= 0 on every supported child and
/// > 0 on at least one, scaled so its largest absolute entry is 1.
template <class T>
struct NodeNaReport {
    std::size_t node = 0;
    bool pass = true;
    std::optional<std::vector<T>> certificate;
};

template <class T>
struct GlobalNaResult {
    bool pass = true;
    std::vector<NodeNaReport<T>> reports;  // relevant non-leaf nodes, arena order
    /// Present on failure: x = 0 strategy with nonnegative wealth on every
    /// relevant leaf and positive wealth on `witness_leaves`.
    std::optional<Strategy<T>> strategy;
    std::vector<std::size_t> witness_leaves;
    /// Node whose local test failed; absent when the arbitrage needs options.
    std::optional<std::size_t> failing_node;
};

enum class DominationStatus { Witness, NoneExists, Indeterminate };

/// Martingale measure q charging every leaf that `dominated` charges.
template <class T>
struct FtapWitness {
    PathMeasure<T> q;
    PathMeasure<T> dominated;
};

template <class T>
struct DominationResult {
    DominationStatus status = DominationStatus::NoneExists;
    std::optional<FtapWitness<T>> witness;
    std::optional<T> t_star;  // absent if the constraint set is empty
};

namespace detail {

/// Positions of supported children and their price increments.
template <class T>
std::pair<std::vector<std::size_t>, std::vector<std::vector<T>>> supported_increments(const ScenarioTree<T>& tree,
                                                                                      const SupportMask& mask,
                                                                                      std::size_t node) {
    std::vector<std::size_t> pos;
    std::vector<std::vector<T>> inc;
    const auto& nd = tree.node(node);
    for (std::size_t k = 0; k < nd.children.size(); ++k) {
        if (!mask.in_support(node, k)) continue;
        pos.push_back(k);
        inc.push_back(tree.increment(node, nd.children[k]));
    }
    return {std::move(pos), std::move(inc)};
}

/// max t  s.t.  q in the simplex, sum q_c v_c = 0, q_c >= t.
/// t* > 0 iff the origin lies in the relative interior of conv{v_c}.
template <class T>
std::optional<T> relative_interior_margin(const std::vector<std::vector<T>>& points, std::size_t dim,
                                          const Arith<T>& a) {
    lp::LinearProgram<T> lp(lp::Sense::Maximize);
    std::vector<std::size_t> q;
    for (std::size_t c = 0; c < points.size(); ++c) q.push_back(lp.add_variable(T(0)));
    const auto t = lp.add_variable(std::nullopt, std::nullopt, T(1));
    std::vector<std::pair<std::size_t, T>> norm;
    for (auto j : q) norm.emplace_back(j, T(1));
    lp.add_row(std::move(norm), lp::Relation::Equal, T(1));
    for (std::size_t k = 0; k < dim; ++k) {
        std::vector<std::pair<std::size_t, T>> terms;
        for (std::size_t c = 0; c < points.size(); ++c)
            if (points[c][k] != 0) terms.emplace_back(q[c], points[c][k]);
        lp.add_row(std::move(terms), lp::Relation::Equal, T(0));
    }
    for (auto j : q) lp.add_row({{j, T(1)}, {t, T(-1)}}, lp::Relation::GreaterEqual, T(0));
    auto out = lp::solve(lp, a);
    if (const auto* opt = std::get_if<lp::Optimal<T>>(&out)) return opt->value;
    if (std::holds_alternative<lp::Infeasible<T>>(out)) return std::nullopt;
    throw InternalError("relative-interior LP reported unbounded");
}

/// Finds y with y.v_c >= 0 for all c and > 0 for some c, if one exists.
template <class T>
std::optional<std::vector<T>> separating_position(const std::vector<std::vector<T>>& points, std::size_t dim,
                                                  const Arith<T>& a) {
    lp::LinearProgram<T> lp(lp::Sense::Maximize);
    std::vector<std::size_t> y;
    for (std::size_t k = 0; k < dim; ++k) y.push_back(lp.add_variable());
    std::vector<std::size_t> s;
    for (std::size_t c = 0; c < points.size(); ++c) s.push_back(lp.add_variable(T(0), T(1), T(1)));
    for (std::size_t c = 0; c < points.size(); ++c) {
        std::vector<std::pair<std::size_t, T>> terms;
        for (std::size_t k = 0; k < dim; ++k)
            if (points[c][k] != 0) terms.emplace_back(y[k], points[c][k]);
        terms.emplace_back(s[c], T(-1));
        lp.add_row(std::move(terms), lp::Relation::GreaterEqual, T(0));
    }
    auto out = lp::solve(lp, a);
    const auto* opt = std::get_if<lp::Optimal<T>>(&out);
    if (!opt) throw InternalError("separation LP must have an optimum");
    if (!is_pos(a, opt->value)) return std::nullopt;
    std::vector<T> cert(dim);
    T scale = 0;
    for (std::size_t k = 0; k < dim; ++k) {
        cert[k] = opt->primal[y[k]];
        T mag = cert[k] < 0 ? T(-cert[k]) : cert[k];
        if (mag > scale) scale = mag;
    }
    for (auto& v : cert) v /= scale;
    return cert;
}

}  // namespace detail

/// Local no-arbitrage test at a non-leaf node: passes iff zero lies in the
/// relative interior of the convex hull of supported price increments.
template <class T>
NodeNaReport<T> node_na(const ScenarioTree<T>& tree, const SupportMask& mask, std::size_t node) {
    const auto& a = tree.arith();
    NodeNaReport<T> r;
    r.node = node;
    auto [pos, inc] = detail::supported_increments(tree, mask, node);
    auto margin = detail::relative_interior_margin(inc, tree.dimension(), a);
    r.pass = margin && is_pos(a, *margin);
    if (!r.pass) {
        r.certificate = detail::separating_position(inc, tree.dimension(), a);
        if (!r.certificate)
            throw InternalError("node '" + tree.node(node).id + "' fails the interior test but has no separating position");
    }
    return r;
}

/// Semistatic arbitrage search with options: max sum of capped wealth over
/// relevant leaves subject to wealth >= 0 there.
template <class T>
std::optional<Strategy<T>> semistatic_arbitrage(const ScenarioTree<T>& tree, const SupportMask& mask,
                                                const std::vector<StaticOption<T>>& options) {
    const auto& a = tree.arith();
    const auto payoffs = normalized_payoffs(options);
    lp::LinearProgram<T> lp(lp::Sense::Maximize);
    auto vars = detail::add_strategy_vars(lp, tree, mask, options.size(), false);
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) {
        if (!mask.relevant_leaf[l]) continue;
        auto w = lp.add_variable(T(0), T(1), T(1));
        auto terms = detail::wealth_terms(tree, vars, payoffs, l);
        terms.emplace_back(w, T(-1));
        lp.add_row(std::move(terms), lp::Relation::GreaterEqual, T(0));
    }
    auto out = lp::solve(lp, a);
    const auto* opt = std::get_if<lp::Optimal<T>>(&out);
    if (!opt) throw InternalError("arbitrage search LP must have an optimum");
    if (!is_pos(a, opt->value)) return std::nullopt;
    return detail::read_strategy(tree, vars, opt->primal);
}

/// Quasi-sure no-arbitrage for the whole market. Without options this is the
/// conjunction of the local tests at relevant nodes; with options a global
/// semistatic search runs once every local test passes.
template <class T>
GlobalNaResult<T> global_na(const ScenarioTree<T>& tree, const SupportMask& mask,
                            const std::vector<StaticOption<T>>& options = {}, unsigned threads = 1) {
    const auto& a = tree.arith();
    GlobalNaResult<T> res;
    const auto nodes = detail::relevant_internal_nodes(tree, mask);
    res.reports.resize(nodes.size());
    parallel_for(nodes.size(), threads, [&](std::size_t i) { res.reports[i] = node_na(tree, mask, nodes[i]); });

    // Arena order is level order, so the first failure is the lowest-level one.
    for (const auto& r : res.reports) {
        if (r.pass) continue;
        res.pass = false;
        res.failing_node = r.node;
        Strategy<T> s = zero_strategy(tree, options.size());
        s.dynamic[r.node] = *r.certificate;
        res.strategy = std::move(s);
        break;
    }
    if (res.pass && !options.empty()) {
        if (auto s = semistatic_arbitrage(tree, mask, options)) {
            res.pass = false;
            res.strategy = std::move(*s);
        }
    }
    if (!res.pass) {
        for (std::size_t l = 0; l < tree.num_leaves(); ++l)
            if (mask.relevant_leaf[l] && is_pos(a, wealth(tree, *res.strategy, options, l)))
                res.witness_leaves.push_back(l);
    }
    return res;
}

/// Searches for a martingale measure q, consistent with the option quotes and
/// supported on relevant leaves, with q >= t p for the largest possible t.
template <class T>
DominationResult<T> find_dominating_mm(const ScenarioTree<T>& tree, const SupportMask& mask,
                                       const std::vector<StaticOption<T>>& options, const PathMeasure<T>& p) {
    const auto& a = tree.arith();
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        if (!mask.relevant_leaf[l] && is_pos(a, p.weights.at(l)))
            throw InputError("measure to dominate charges polar leaf '" + tree.node(tree.leaf_node(l)).id + "'");

    lp::LinearProgram<T> lp(lp::Sense::Maximize);
    auto q = detail::add_leaf_measure_vars(lp, tree, mask);
    const auto t = lp.add_variable(std::nullopt, std::nullopt, T(1));
    detail::add_normalization_row(lp, q);
    detail::add_martingale_rows(lp, tree, mask, q);
    detail::add_option_rows(lp, normalized_payoffs(options), q);
    for (std::size_t l = 0; l < q.size(); ++l)
        if (q[l] != detail::no_var && p.weights[l] != 0)
            lp.add_row({{q[l], T(1)}, {t, T(-p.weights[l])}}, lp::Relation::GreaterEqual, T(0));

    DominationResult<T> res;
    auto out = lp::solve(lp, a);
    if (std::holds_alternative<lp::Infeasible<T>>(out)) return res;
    const auto* opt = std::get_if<lp::Optimal<T>>(&out);
    if (!opt) throw InternalError("domination LP reported unbounded");
    res.t_star = opt->value;
    if (is_pos(a, opt->value)) {
        res.status = DominationStatus::Witness;
        res.witness = FtapWitness<T>{detail::read_measure(q, opt->primal), p};
    } else {
        res.status = Arith<T>::exact ? DominationStatus::NoneExists : DominationStatus::Indeterminate;
    }
    return res;
}

/// Checks that q is a probability on relevant leaves, a martingale at every
/// relevant node, and prices every normalized option at zero.
template <class T>
std::string check_martingale_measure(const ScenarioTree<T>& tree, const SupportMask& mask,
                                     const std::vector<StaticOption<T>>& options, const PathMeasure<T>& q) {
    const auto& a = tree.arith();
    if (q.weights.size() != tree.num_leaves()) return "measure has wrong length";
    T total = 0;
    for (std::size_t l = 0; l < q.weights.size(); ++l) {
        const auto& id = tree.node(tree.leaf_node(l)).id;
        if (is_neg(a, q.weights[l])) return "negative mass on leaf '" + id + "'";
        if (!mask.relevant_leaf[l] && !is_zero(a, q.weights[l])) return "mass on polar leaf '" + id + "'";
        total += q.weights[l];
    }
    if (!approx_eq(a, total, T(1))) return "masses do not sum to one";
    for (std::size_t n = 0; n < tree.size(); ++n) {
        const auto& nd = tree.node(n);
        if (nd.is_leaf()) continue;
        const T mass_n = subtree_mass(tree, q, n);
        for (std::size_t k = 0; k < tree.dimension(); ++k) {
            T lhs = 0;
            for (auto c : nd.children) lhs += subtree_mass(tree, q, c) * tree.node(c).price[k];
            if (!approx_eq(a, lhs, T(mass_n * nd.price[k])))
                return "martingale property fails at node '" + nd.id + "'";
        }
    }
    for (const auto& o : options)
        if (!is_zero(a, expectation(q, o.normalized()))) return "option '" + o.name + "' is mispriced";
    return {};
}

template <class T>
std::string check_witness(const ScenarioTree<T>& tree, const SupportMask& mask,
                          const std::vector<StaticOption<T>>& options, const FtapWitness<T>& w) {
    if (auto err = check_martingale_measure(tree, mask, options, w.q); !err.empty()) return err;
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        if (is_pos(tree.arith(), w.dominated.weights[l]) && !is_pos(tree.arith(), w.q.weights[l]))
            return "leaf '" + tree.node(tree.leaf_node(l)).id + "' charged by the dominated measure but not by q";
    return {};
}

/// Re-verifies an arbitrage: zero cost, nonnegative wealth on relevant
/// leaves, positive wealth on every listed witness leaf.
template <class T>
std::string check_arbitrage(const ScenarioTree<T>& tree, const SupportMask& mask,
                            const std::vector<StaticOption<T>>& options, const Strategy<T>& s,
                            const std::vector<std::size_t>& witness_leaves) {
    const auto& a = tree.arith();
    if (!is_zero(a, s.initial)) return "arbitrage strategy must start from zero capital";
    if (witness_leaves.empty()) return "no witness leaves";
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        if (mask.relevant_leaf[l] && is_neg(a, wealth(tree, s, options, l)))
            return "negative wealth at leaf '" + tree.node(tree.leaf_node(l)).id + "'";
    for (auto l : witness_leaves) {
        if (!mask.relevant_leaf.at(l)) return "witness leaf is polar";
        if (!is_pos(a, wealth(tree, s, options, l))) return "no gain at witness leaf";
    }
    return {};
}

}  // namespace robusthedge
