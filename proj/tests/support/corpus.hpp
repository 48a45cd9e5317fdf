#pragma once

// Seeded random scenario trees for property tests.

#include "robusthedge/model.hpp"
#include "robusthedge/oracle.hpp"
#include "robusthedge/polar.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace corpus {

using robusthedge::Rational;
using Model = robusthedge::Model<Rational>;

struct Instance {
    std::uint64_t seed;
    Model model;
};

inline constexpr std::size_t max_leaves = 16;

inline int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline robusthedge::Claim<Rational> random_claim(std::mt19937_64& rng, std::size_t leaves, int lo = -5, int hi = 5) {
    robusthedge::Claim<Rational> c;
    for (std::size_t l = 0; l < leaves; ++l) c.values.emplace_back(uniform(rng, lo, hi));
    return c;
}

namespace detail {

inline robusthedge::Measure<Rational> random_generator(std::mt19937_64& rng, std::size_t children) {
    robusthedge::Measure<Rational> m;
    m.weights.assign(children, Rational(0));
    if (uniform(rng, 0, 2) == 0) {
        m.weights[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(children) - 1))] = 1;
        return m;
    }
    std::vector<int> w(children, 0);
    int total = 0;
    while (total == 0) {
        for (auto& x : w) {
            x = uniform(rng, 0, 1) ? uniform(rng, 1, 4) : 0;
            total += x;
        }
    }
    for (std::size_t k = 0; k < children; ++k) m.weights[k] = Rational(w[k], total);
    return m;
}

// Balanced nodes get a last increment equal to minus the sum of the others,
// so the uniform kernel is a full-support martingale kernel there.
inline std::vector<std::vector<int>> random_increments(std::mt19937_64& rng, std::size_t children, std::size_t dim,
                                                       bool balanced) {
    std::vector<std::vector<int>> inc(children, std::vector<int>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
        int sum = 0;
        for (std::size_t c = 0; c + 1 < children; ++c) sum += inc[c][k] = uniform(rng, -3, 3);
        inc[children - 1][k] = balanced ? -sum : uniform(rng, -3, 3);
    }
    return inc;
}

inline void cover_all_children(std::vector<robusthedge::Measure<Rational>>& gens, std::size_t children) {
    std::vector<bool> seen(children, false);
    for (const auto& g : gens)
        for (std::size_t k = 0; k < children; ++k) seen[k] = seen[k] || g.weights[k] > 0;
    if (std::find(seen.begin(), seen.end(), false) == seen.end()) return;
    gens.front().weights.assign(children, Rational(1, static_cast<int>(children)));
}

}  // namespace detail

/// Builds a tree with horizon <= 3, branching 1..4, dimension <= 2, at most
/// four generators per node and at most 16 leaves. With `constant` every
/// price equals the root price and each child gets its own Dirac generator.
inline robusthedge::ScenarioTree<Rational> random_tree(std::mt19937_64& rng, bool constant = false) {
    using robusthedge::Node;
    for (;;) {
        const int horizon = uniform(rng, 1, 3);
        const std::size_t dim = static_cast<std::size_t>(uniform(rng, 1, 2));
        std::vector<Node<Rational>> nodes(1);
        nodes[0].id = "n0";
        for (std::size_t k = 0; k < dim; ++k) nodes[0].price.emplace_back(uniform(rng, 5, 15));
        std::vector<std::size_t> frontier{0};
        for (int t = 0; t < horizon; ++t) {
            std::vector<std::size_t> next;
            for (auto p : frontier) {
                const auto b = static_cast<std::size_t>(uniform(rng, 1, 4));
                const bool balanced = uniform(rng, 0, 9) != 0;
                const auto inc = detail::random_increments(rng, b, dim, balanced);
                for (std::size_t c = 0; c < b; ++c) {
                    Node<Rational> n;
                    n.id = "n" + std::to_string(nodes.size());
                    n.level = t + 1;
                    n.parent = p;
                    n.price = nodes[p].price;
                    if (!constant)
                        for (std::size_t k = 0; k < dim; ++k) n.price[k] += inc[c][k];
                    nodes[p].children.push_back(nodes.size());
                    next.push_back(nodes.size());
                    nodes.push_back(std::move(n));
                }
                auto& gens = nodes[p].ambiguity.generators;
                if (constant) {
                    for (std::size_t c = 0; c < b; ++c) {
                        robusthedge::Measure<Rational> m;
                        m.weights.assign(b, Rational(0));
                        m.weights[c] = 1;
                        gens.push_back(std::move(m));
                    }
                } else {
                    const int g = uniform(rng, 1, 4);
                    for (int i = 0; i < g; ++i) gens.push_back(detail::random_generator(rng, b));
                    if (balanced) detail::cover_all_children(gens, b);
                }
            }
            frontier = std::move(next);
        }
        if (frontier.size() > max_leaves) continue;
        return robusthedge::ScenarioTree<Rational>(horizon, dim, std::move(nodes));
    }
}

/// Random instance with up to two static options. Half of the options are
/// quoted at their expectation under the barycenter of the option-free
/// martingale vertices (when there are any); the others get random quotes.
inline Instance random_instance(std::uint64_t seed, int max_options = 2) {
    std::mt19937_64 rng(seed);
    Instance inst{seed, {}};
    auto& m = inst.model;
    m.tree = random_tree(rng);
    const auto leaves = m.tree.num_leaves();
    const auto mask = robusthedge::compute_support(m.tree);
    const auto poly = robusthedge::enumerate_vertices(m.tree, mask, {});
    const int e = uniform(rng, 0, max_options);
    for (int i = 0; i < e; ++i) {
        robusthedge::StaticOption<Rational> o;
        o.name = "opt" + std::to_string(i);
        o.payoff = random_claim(rng, leaves, 0, 5).values;
        if (!poly.vertices.empty() && uniform(rng, 0, 1) == 0) {
            Rational e_q = 0;
            for (const auto& v : poly.vertices)
                for (std::size_t l = 0; l < leaves; ++l) e_q += v.weights[l] * o.payoff[l];
            o.quote = e_q / static_cast<int>(poly.vertices.size());
        } else {
            o.quote = uniform(rng, 0, 5);
        }
        m.options.push_back(std::move(o));
    }
    m.claims["f"] = random_claim(rng, leaves);
    return inst;
}

inline std::vector<Instance> make_corpus(std::size_t count, std::uint64_t base_seed = 20240601, int max_options = 2) {
    std::vector<Instance> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(random_instance(base_seed + i, max_options));
    return out;
}

}  // namespace corpus
