#pragma once

// Brute-force ground truth. Vertices of the martingale polytope are found by
// walking support sets of linearly independent columns and solving the
// square systems directly; nothing here goes through the simplex code.

#include "robusthedge/errors.hpp"
#include "robusthedge/model.hpp"
#include "robusthedge/polar.hpp"

#include <algorithm>
#include <vector>

namespace robusthedge {

template <class T>
struct MartingalePolytope {
    /// Relevant leaves, in leaf order; the polytope lives on these coordinates.
    std::vector<std::size_t> ambient;
    /// Equality rows over `ambient`: normalization, martingale, options.
    std::vector<std::vector<T>> equalities;
    std::vector<T> rhs;
    std::vector<PathMeasure<T>> vertices;
};

template <class T>
struct BrutePrice {
    T max;
    PathMeasure<T> argmax;
    T min;
    PathMeasure<T> argmin;
};

inline constexpr std::size_t default_vertex_cap = 16;

namespace detail {

/// Basic feasible solutions of {q >= 0 : A q = b} with strictly positive
/// entries on their support. Returns (support, values) pairs.
template <class T>
std::vector<std::pair<std::vector<std::size_t>, std::vector<T>>> enumerate_bfs(const std::vector<std::vector<T>>& A,
                                                                              const std::vector<T>& b,
                                                                              std::size_t ncols) {
    const std::size_t m = A.size();
    struct Level {
        std::vector<T> reduced;    // column after elimination against earlier levels
        std::size_t pivot = 0;
        std::vector<T> combo;      // reduced = sum combo[i] * column(chosen[i])
        std::vector<T> residual;   // b minus its projection on levels 0..this
        std::vector<T> coeff;      // solution in chosen columns for the projection
    };
    std::vector<std::pair<std::vector<std::size_t>, std::vector<T>>> found;
    std::vector<std::size_t> chosen;
    std::vector<Level> levels;

    auto column = [&](std::size_t j) {
        std::vector<T> v(m);
        for (std::size_t i = 0; i < m; ++i) v[i] = A[i][j];
        return v;
    };
    auto is_zero_vec = [](const std::vector<T>& v) {
        return std::all_of(v.begin(), v.end(), [](const T& x) { return x == 0; });
    };

    auto dfs = [&](auto&& self, std::size_t start) -> void {
        for (std::size_t j = start; j < ncols; ++j) {
            const std::size_t k = chosen.size();
            Level lv;
            lv.reduced = column(j);
            lv.combo.assign(k + 1, T(0));
            lv.combo[k] = 1;
            for (std::size_t i = 0; i < k; ++i) {
                const auto& L = levels[i];
                if (lv.reduced[L.pivot] == 0) continue;
                const T f = lv.reduced[L.pivot] / L.reduced[L.pivot];
                for (std::size_t r = 0; r < m; ++r)
                    if (L.reduced[r] != 0) lv.reduced[r] -= f * L.reduced[r];
                for (std::size_t c = 0; c < L.combo.size(); ++c) lv.combo[c] -= f * L.combo[c];
            }
            if (is_zero_vec(lv.reduced)) continue;  // dependent column
            lv.pivot = 0;
            while (lv.reduced[lv.pivot] == 0) ++lv.pivot;

            lv.residual = k == 0 ? b : levels[k - 1].residual;
            lv.coeff = k == 0 ? std::vector<T>{} : levels[k - 1].coeff;
            lv.coeff.push_back(T(0));
            if (lv.residual[lv.pivot] != 0) {
                const T beta = lv.residual[lv.pivot] / lv.reduced[lv.pivot];
                for (std::size_t r = 0; r < m; ++r)
                    if (lv.reduced[r] != 0) lv.residual[r] -= beta * lv.reduced[r];
                for (std::size_t c = 0; c <= k; ++c) lv.coeff[c] += beta * lv.combo[c];
            }
            chosen.push_back(j);
            levels.push_back(std::move(lv));
            const auto& top = levels.back();
            if (is_zero_vec(top.residual)) {
                // b is spanned: the solution is unique; supersets would put 0 on new columns.
                if (std::all_of(top.coeff.begin(), top.coeff.end(), [](const T& x) { return x > 0; }))
                    found.emplace_back(chosen, top.coeff);
            } else if (chosen.size() < m) {
                self(self, j + 1);
            }
            chosen.pop_back();
            levels.pop_back();
        }
    };
    if (!is_zero_vec(b)) dfs(dfs, 0);
    return found;
}

}  // namespace detail

/// Enumerates every vertex of the set of martingale measures on relevant
/// leaves that price all normalized options at zero.
template <class T>
MartingalePolytope<T> enumerate_vertices(const ScenarioTree<T>& tree, const SupportMask& mask,
                                         const std::vector<StaticOption<T>>& options,
                                         std::size_t cap = default_vertex_cap) {
    MartingalePolytope<T> poly;
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        if (mask.relevant_leaf[l]) poly.ambient.push_back(l);
    const std::size_t n = poly.ambient.size();
    if (n > cap)
        throw InstanceTooLarge(std::to_string(n) + " relevant leaves exceed the enumeration cap of " +
                               std::to_string(cap));

    poly.equalities.push_back(std::vector<T>(n, T(1)));
    poly.rhs.push_back(T(1));
    // Mass-weighted form: sum over leaves below node of q * S(next) = S(node) * mass(node).
    for (std::size_t node = 0; node < tree.size(); ++node) {
        const auto& nd = tree.node(node);
        if (nd.is_leaf() || !mask.relevant(node)) continue;
        for (std::size_t k = 0; k < tree.dimension(); ++k) {
            std::vector<T> row(n, T(0));
            for (std::size_t i = 0; i < n; ++i) {
                const auto leaf = poly.ambient[i];
                if (leaf < tree.leaf_begin(node) || leaf >= tree.leaf_end(node)) continue;
                const auto& path = tree.path(leaf);
                const auto next = path[static_cast<std::size_t>(nd.level) + 1];
                row[i] = tree.node(next).price[k] - nd.price[k];
            }
            poly.equalities.push_back(std::move(row));
            poly.rhs.push_back(T(0));
        }
    }
    for (const auto& o : options) {
        std::vector<T> row(n);
        for (std::size_t i = 0; i < n; ++i) row[i] = o.payoff[poly.ambient[i]] - o.quote;
        poly.equalities.push_back(std::move(row));
        poly.rhs.push_back(T(0));
    }

    auto bfs = detail::enumerate_bfs(poly.equalities, poly.rhs, n);
    std::sort(bfs.begin(), bfs.end());
    for (const auto& [support, values] : bfs) {
        PathMeasure<T> q;
        q.weights.assign(tree.num_leaves(), T(0));
        for (std::size_t i = 0; i < support.size(); ++i) q.weights[poly.ambient[support[i]]] = values[i];
        poly.vertices.push_back(std::move(q));
    }
    return poly;
}

/// Extremal expectations of `claim` over the enumerated vertices.
template <class T>
BrutePrice<T> brute_price(const MartingalePolytope<T>& poly, const Claim<T>& claim) {
    if (poly.vertices.empty())
        throw EmptyPolytope("no martingale measure exists: local arbitrage or arbitrageable option quotes");
    BrutePrice<T> res;
    bool first = true;
    for (const auto& v : poly.vertices) {
        T e = 0;
        for (auto l : poly.ambient) e += v.weights[l] * claim.values[l];
        if (first || e > res.max) {
            res.max = e;
            res.argmax = v;
        }
        if (first || e < res.min) {
            res.min = e;
            res.argmin = v;
        }
        first = false;
    }
    return res;
}

/// Vertices of the one-period martingale kernels at `node`, aligned with its
/// children (zero off the quasi-sure support).
template <class T>
std::vector<Measure<T>> enumerate_local_vertices(const ScenarioTree<T>& tree, const SupportMask& mask,
                                                 std::size_t node) {
    const auto& nd = tree.node(node);
    std::vector<std::size_t> cols;
    for (std::size_t k = 0; k < nd.children.size(); ++k)
        if (mask.in_support(node, k)) cols.push_back(k);
    std::vector<std::vector<T>> A;
    std::vector<T> b;
    A.push_back(std::vector<T>(cols.size(), T(1)));
    b.push_back(T(1));
    for (std::size_t k = 0; k < tree.dimension(); ++k) {
        std::vector<T> row;
        for (auto c : cols) row.push_back(tree.node(nd.children[c]).price[k] - nd.price[k]);
        A.push_back(std::move(row));
        b.push_back(T(0));
    }
    std::vector<Measure<T>> out;
    for (const auto& [support, values] : detail::enumerate_bfs(A, b, cols.size())) {
        Measure<T> m;
        m.weights.assign(nd.children.size(), T(0));
        for (std::size_t i = 0; i < support.size(); ++i) m.weights[cols[support[i]]] = values[i];
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace robusthedge
