#pragma once

#include "robusthedge/errors.hpp"
#include "robusthedge/numeric.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace robusthedge {

/// One-step kernel: weights aligned with the owning node's child list.
template <class T>
struct Measure {
    std::vector<T> weights;

    bool operator==(const Measure&) const = default;
};

/// Finitely generated ambiguity set; semantically the convex hull of `generators`.
template <class T>
struct AmbiguitySet {
    std::vector<Measure<T>> generators;

    bool operator==(const AmbiguitySet&) const = default;
};

template <class T>
struct Node {
    std::string id;
    int level = 0;
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;
    std::vector<T> price;
    AmbiguitySet<T> ambiguity;  // empty for leaves

    bool is_leaf() const { return children.empty(); }
    bool operator==(const Node&) const = default;
};

/// Probability vector over the tree's leaves (leaf order).
template <class T>
struct PathMeasure {
    std::vector<T> weights;

    bool operator==(const PathMeasure&) const = default;
};

/// Function on leaves, indexed in leaf order.
template <class T>
struct Claim {
    std::vector<T> values;

    bool operator==(const Claim&) const = default;
};

/// A statically traded option. `payoff` is stored as given; `normalized()`
/// subtracts the quote so the option costs nothing at time zero.
template <class T>
struct StaticOption {
    std::string name;
    T quote = 0;
    std::vector<T> payoff;

    std::vector<T> normalized() const {
        std::vector<T> g(payoff);
        for (auto& v : g) v -= quote;
        return g;
    }
    bool operator==(const StaticOption&) const = default;
};

/// Semistatic strategy: x + H.S_T + h.g. `dynamic[n]` is the position held
/// over the period following node n (empty at leaves).
template <class T>
struct Strategy {
    std::vector<std::vector<T>> dynamic;
    std::vector<T> statics;
    T initial = 0;

    bool operator==(const Strategy&) const = default;
};

/// Finite event tree with prices and per-node ambiguity sets.
///
/// Nodes live in an arena in breadth-first order with children kept in the
/// order given by the input, so node 0 is the root and the leaves of any
/// subtree form a contiguous range of the leaf order.
template <class T>
class ScenarioTree {
public:
    ScenarioTree() = default;

    /// Builds the tree from nodes in arbitrary order; `nodes[i].children`
    /// must already be filled. Reorders into breadth-first order.
    ScenarioTree(int horizon, std::size_t dimension, std::vector<Node<T>> nodes, Arith<T> arith = {})
        : horizon_(horizon), dimension_(dimension), arith_(arith) {
        if (nodes.empty()) throw MalformedDocument("tree has no nodes");
        std::optional<std::size_t> root;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!nodes[i].parent) {
                if (root) throw MalformedDocument("more than one root: '" + nodes[*root].id + "' and '" + nodes[i].id + "'");
                root = i;
            }
        }
        if (!root) throw MalformedDocument("tree has no root");

        std::vector<std::size_t> order{*root};
        std::vector<std::size_t> new_index(nodes.size(), nodes.size());
        new_index[*root] = 0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            for (std::size_t c : nodes[order[k]].children) {
                if (new_index[c] != nodes.size())
                    throw MalformedDocument("node '" + nodes[c].id + "' reached twice");
                new_index[c] = order.size();
                order.push_back(c);
            }
        }
        if (order.size() != nodes.size()) {
            for (std::size_t i = 0; i < nodes.size(); ++i)
                if (new_index[i] == nodes.size())
                    throw MalformedDocument("node '" + nodes[i].id + "' is not connected to the root");
        }
        nodes_.reserve(nodes.size());
        for (std::size_t old : order) {
            Node<T> n = std::move(nodes[old]);
            if (n.parent) n.parent = new_index[*n.parent];
            for (auto& c : n.children) c = new_index[c];
            nodes_.push_back(std::move(n));
        }
        index_structure();
        validate();
    }

    int horizon() const { return horizon_; }
    std::size_t dimension() const { return dimension_; }
    const Arith<T>& arith() const { return arith_; }
    void set_arith(Arith<T> a) { arith_ = a; }

    std::size_t size() const { return nodes_.size(); }
    const Node<T>& node(std::size_t i) const { return nodes_.at(i); }
    const std::vector<Node<T>>& nodes() const { return nodes_; }

    std::size_t num_leaves() const { return leaves_.size(); }
    /// Node index of the k-th leaf.
    std::size_t leaf_node(std::size_t k) const { return leaves_.at(k); }
    /// Leaf position of a leaf node.
    std::size_t leaf_index(std::size_t node) const { return leaf_pos_.at(node); }
    const std::vector<std::size_t>& leaves() const { return leaves_; }

    /// Leaves under `node` are [leaf_begin, leaf_end) in leaf order.
    std::size_t leaf_begin(std::size_t node) const { return leaf_range_.at(node).first; }
    std::size_t leaf_end(std::size_t node) const { return leaf_range_.at(node).second; }

    const std::vector<std::size_t>& level_nodes(int t) const { return levels_.at(static_cast<std::size_t>(t)); }

    /// Root-to-leaf node indices for leaf k (length horizon + 1).
    const std::vector<std::size_t>& path(std::size_t leaf) const { return paths_.at(leaf); }

    std::optional<std::size_t> find(const std::string& id) const {
        auto it = by_id_.find(id);
        if (it == by_id_.end()) return std::nullopt;
        return it->second;
    }
    std::size_t index_of(const std::string& id) const {
        auto i = find(id);
        if (!i) throw DanglingChildReference("unknown node '" + id + "'");
        return *i;
    }

    /// Price increment S(child) - S(node).
    std::vector<T> increment(std::size_t node, std::size_t child) const {
        std::vector<T> d(dimension_);
        for (std::size_t k = 0; k < dimension_; ++k) d[k] = nodes_[child].price[k] - nodes_[node].price[k];
        return d;
    }

    /// Child of `node` on the path to `leaf`.
    std::size_t child_towards(std::size_t node, std::size_t leaf) const {
        return paths_.at(leaf).at(static_cast<std::size_t>(nodes_[node].level) + 1);
    }

    bool operator==(const ScenarioTree& o) const {
        return horizon_ == o.horizon_ && dimension_ == o.dimension_ && nodes_ == o.nodes_;
    }

    template <class U>
    ScenarioTree<U> convert(Arith<U> arith = {}) const {
        std::vector<Node<U>> out;
        out.reserve(nodes_.size());
        for (const auto& n : nodes_) {
            Node<U> m;
            m.id = n.id;
            m.level = n.level;
            m.parent = n.parent;
            m.children = n.children;
            m.price = vector_cast<U>(n.price);
            for (const auto& g : n.ambiguity.generators) m.ambiguity.generators.push_back({vector_cast<U>(g.weights)});
            out.push_back(std::move(m));
        }
        return ScenarioTree<U>(horizon_, dimension_, std::move(out), arith);
    }

private:
    void index_structure() {
        levels_.assign(static_cast<std::size_t>(std::max(horizon_, 0)) + 1, {});
        leaf_pos_.assign(nodes_.size(), static_cast<std::size_t>(-1));
        leaf_range_.assign(nodes_.size(), {0, 0});
        by_id_.clear();
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (!by_id_.emplace(nodes_[i].id, i).second)
                throw MalformedDocument("duplicate node id '" + nodes_[i].id + "'");
        }
        // Depth-first walk yields leaves in path-lexicographic order.
        std::vector<std::size_t> current;
        leaves_.clear();
        paths_.clear();
        auto walk = [&](auto&& self, std::size_t n) -> void {
            current.push_back(n);
            leaf_range_[n].first = leaves_.size();
            if (nodes_[n].is_leaf()) {
                leaf_pos_[n] = leaves_.size();
                leaves_.push_back(n);
                paths_.push_back(current);
            } else {
                for (std::size_t c : nodes_[n].children) self(self, c);
            }
            leaf_range_[n].second = leaves_.size();
            current.pop_back();
        };
        walk(walk, 0);
    }

    void validate() {
        if (horizon_ < 1) throw MalformedDocument("horizon must be at least 1");
        if (dimension_ < 1) throw DimensionMismatch("dimension must be at least 1");
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            auto& n = nodes_[i];
            const int expected = n.parent ? nodes_[*n.parent].level + 1 : 0;
            if (n.level != expected)
                throw MalformedDocument("node '" + n.id + "' has level " + std::to_string(n.level) + ", expected " +
                                        std::to_string(expected));
            if (n.level > horizon_) throw MalformedDocument("node '" + n.id + "' lies beyond the horizon");
            if (n.price.size() != dimension_)
                throw DimensionMismatch("node '" + n.id + "' has " + std::to_string(n.price.size()) +
                                        " prices, expected " + std::to_string(dimension_));
            levels_[static_cast<std::size_t>(n.level)].push_back(i);
            if (n.is_leaf()) {
                if (n.level != horizon_) throw MalformedDocument("leaf '" + n.id + "' is not at the horizon");
                if (!n.ambiguity.generators.empty())
                    throw MalformedDocument("leaf '" + n.id + "' must not carry generators");
                continue;
            }
            if (n.ambiguity.generators.empty())
                throw MalformedDocument("node '" + n.id + "' has no generators");
            for (std::size_t g = 0; g < n.ambiguity.generators.size(); ++g) {
                const auto& w = n.ambiguity.generators[g].weights;
                if (w.size() != n.children.size())
                    throw DanglingChildReference("generator " + std::to_string(g) + " at node '" + n.id +
                                                 "' does not index exactly the node's children");
                T sum = 0;
                for (const auto& x : w) {
                    if (x < 0) throw ProbabilityNotNormalized(n.id, g, "has a negative weight");
                    sum += x;
                }
                bool normalized = false;
                if constexpr (Arith<T>::exact)
                    normalized = sum == 1;
                else
                    normalized = std::abs(sum - T(1)) <= 1e-12;
                if (!normalized) throw ProbabilityNotNormalized(n.id, g, "does not sum to 1");
            }
        }
    }

    int horizon_ = 0;
    std::size_t dimension_ = 0;
    Arith<T> arith_{};
    std::vector<Node<T>> nodes_;
    std::vector<std::size_t> leaves_;
    std::vector<std::size_t> leaf_pos_;
    std::vector<std::pair<std::size_t, std::size_t>> leaf_range_;
    std::vector<std::vector<std::size_t>> levels_;
    std::vector<std::vector<std::size_t>> paths_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Tree plus traded options and named leaf functions from a model document.
template <class T>
struct Model {
    ScenarioTree<T> tree;
    std::vector<StaticOption<T>> options;
    std::map<std::string, Claim<T>> claims;
    /// Adapted processes: node-indexed, absent entries allowed.
    std::map<std::string, std::vector<std::optional<T>>> processes;
    std::map<std::string, PathMeasure<T>> measures;

    bool operator==(const Model&) const = default;

    template <class U>
    Model<U> convert(Arith<U> arith = {}) const {
        Model<U> m;
        m.tree = tree.template convert<U>(arith);
        for (const auto& o : options) m.options.push_back({o.name, scalar_cast<U>(o.quote), vector_cast<U>(o.payoff)});
        for (const auto& [k, c] : claims) m.claims[k] = Claim<U>{vector_cast<U>(c.values)};
        for (const auto& [k, p] : processes) {
            std::vector<std::optional<U>> v;
            for (const auto& x : p) v.push_back(x ? std::optional<U>(scalar_cast<U>(*x)) : std::nullopt);
            m.processes[k] = std::move(v);
        }
        for (const auto& [k, p] : measures) m.measures[k] = PathMeasure<U>{vector_cast<U>(p.weights)};
        return m;
    }
};

template <class T>
Strategy<T> zero_strategy(const ScenarioTree<T>& tree, std::size_t num_options) {
    Strategy<T> s;
    s.dynamic.resize(tree.size());
    for (std::size_t n = 0; n < tree.size(); ++n)
        if (!tree.node(n).is_leaf()) s.dynamic[n].assign(tree.dimension(), T(0));
    s.statics.assign(num_options, T(0));
    return s;
}

/// Normalized option payoffs as a leaf-by-option matrix (rows = options).
template <class T>
std::vector<std::vector<T>> normalized_payoffs(const std::vector<StaticOption<T>>& options) {
    std::vector<std::vector<T>> g;
    g.reserve(options.size());
    for (const auto& o : options) g.push_back(o.normalized());
    return g;
}

/// Terminal wealth x + sum_u H_u . dS_u + h . g at one leaf.
template <class T>
T wealth(const ScenarioTree<T>& tree, const Strategy<T>& strategy, const std::vector<StaticOption<T>>& options,
         std::size_t leaf) {
    const auto& path = tree.path(leaf);
    T w = strategy.initial;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const auto n = path[k];
        if (n >= strategy.dynamic.size() || strategy.dynamic[n].empty()) continue;
        const auto& H = strategy.dynamic[n];
        const auto& from = tree.node(n).price;
        const auto& to = tree.node(path[k + 1]).price;
        for (std::size_t i = 0; i < tree.dimension(); ++i) w += H[i] * (to[i] - from[i]);
    }
    for (std::size_t i = 0; i < options.size() && i < strategy.statics.size(); ++i)
        w += strategy.statics[i] * (options[i].payoff.at(leaf) - options[i].quote);
    return w;
}

/// Gains process x + H.S_t at an arbitrary node (options excluded).
template <class T>
T gains_at(const ScenarioTree<T>& tree, const Strategy<T>& strategy, std::size_t node) {
    std::vector<std::size_t> up;
    for (std::optional<std::size_t> n = node; n; n = tree.node(*n).parent) up.push_back(*n);
    T w = strategy.initial;
    for (std::size_t k = up.size(); k-- > 1;) {
        const auto n = up[k];
        if (strategy.dynamic.size() <= n || strategy.dynamic[n].empty()) continue;
        w += dot(strategy.dynamic[n], tree.increment(n, up[k - 1]));
    }
    return w;
}

template <class T>
std::vector<T> wealth_vector(const ScenarioTree<T>& tree, const Strategy<T>& strategy,
                             const std::vector<StaticOption<T>>& options) {
    std::vector<T> w(tree.num_leaves());
    for (std::size_t l = 0; l < w.size(); ++l) w[l] = wealth(tree, strategy, options, l);
    return w;
}

/// Kernels indexed by node; only nodes reached with positive mass need one.
template <class T>
PathMeasure<T> product_measure(const ScenarioTree<T>& tree, const std::vector<std::optional<Measure<T>>>& kernels) {
    std::vector<T> mass(tree.size(), T(0));
    mass[0] = 1;
    for (std::size_t n = 0; n < tree.size(); ++n) {
        const auto& node = tree.node(n);
        if (node.is_leaf() || mass[n] == 0) continue;
        if (n >= kernels.size() || !kernels[n]) throw MissingKernel("no kernel at node '" + node.id + "'");
        const auto& w = kernels[n]->weights;
        if (w.size() != node.children.size())
            throw DimensionMismatch("kernel at node '" + node.id + "' does not match its children");
        for (std::size_t i = 0; i < node.children.size(); ++i) mass[node.children[i]] = mass[n] * w[i];
    }
    PathMeasure<T> p;
    p.weights.reserve(tree.num_leaves());
    for (auto leaf : tree.leaves()) p.weights.push_back(mass[leaf]);
    return p;
}

/// Mass of the subtree rooted at `node`.
template <class T>
T subtree_mass(const ScenarioTree<T>& tree, const PathMeasure<T>& p, std::size_t node) {
    T s = 0;
    for (std::size_t l = tree.leaf_begin(node); l < tree.leaf_end(node); ++l) s += p.weights[l];
    return s;
}

template <class T>
T expectation(const PathMeasure<T>& p, const std::vector<T>& f) {
    return dot(p.weights, f);
}

}  // namespace robusthedge
