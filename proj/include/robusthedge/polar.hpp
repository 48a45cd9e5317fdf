#pragma once

#include "robusthedge/model.hpp"

#include <vector>

namespace robusthedge {

/// Quasi-sure supports and the non-polar part of a tree.
struct SupportMask {
    /// support[n][k] is true iff child k of node n gets positive weight
    /// under some generator of n. Empty for leaves.
    std::vector<std::vector<bool>> support;
    std::vector<bool> relevant_node;
    std::vector<bool> relevant_leaf;

    bool in_support(std::size_t node, std::size_t child_pos) const { return support[node][child_pos]; }
    bool relevant(std::size_t node) const { return relevant_node[node]; }

    std::size_t num_relevant_leaves() const {
        std::size_t n = 0;
        for (bool b : relevant_leaf) n += b;
        return n;
    }
};

/// Supports are unions of generator supports; relevance propagates top-down.
template <class T>
SupportMask compute_support(const ScenarioTree<T>& tree) {
    const auto& a = tree.arith();
    SupportMask m;
    m.support.resize(tree.size());
    m.relevant_node.assign(tree.size(), false);
    m.relevant_leaf.assign(tree.num_leaves(), false);
    m.relevant_node[0] = true;
    for (std::size_t n = 0; n < tree.size(); ++n) {
        const auto& node = tree.node(n);
        if (node.is_leaf()) {
            m.relevant_leaf[tree.leaf_index(n)] = m.relevant_node[n];
            continue;
        }
        auto& s = m.support[n];
        s.assign(node.children.size(), false);
        for (const auto& g : node.ambiguity.generators)
            for (std::size_t k = 0; k < s.size(); ++k)
                if (is_pos(a, g.weights[k])) s[k] = true;
        if (m.relevant_node[n])
            for (std::size_t k = 0; k < s.size(); ++k)
                if (s[k]) m.relevant_node[node.children[k]] = true;
    }
    return m;
}

/// True iff no measure in the model charges any of the given leaves.
inline bool is_polar(const SupportMask& mask, const std::vector<std::size_t>& leaves) {
    for (auto l : leaves)
        if (mask.relevant_leaf.at(l)) return false;
    return true;
}

/// Uniform mixture of the generators at every node.
template <class T>
std::vector<std::optional<Measure<T>>> uniform_mixture_kernels(const ScenarioTree<T>& tree) {
    std::vector<std::optional<Measure<T>>> kernels(tree.size());
    for (std::size_t n = 0; n < tree.size(); ++n) {
        const auto& node = tree.node(n);
        if (node.is_leaf()) continue;
        Measure<T> k;
        k.weights.assign(node.children.size(), T(0));
        const T share = T(1) / T(static_cast<long>(node.ambiguity.generators.size()));
        for (const auto& g : node.ambiguity.generators)
            for (std::size_t i = 0; i < k.weights.size(); ++i) k.weights[i] += share * g.weights[i];
        kernels[n] = std::move(k);
    }
    return kernels;
}

/// The reference selector: a member of the model with maximal support.
template <class T>
PathMeasure<T> reference_selector(const ScenarioTree<T>& tree) {
    return product_measure(tree, uniform_mixture_kernels(tree));
}

}  // namespace robusthedge
