// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "robusthedge/robusthedge.hpp"
#include "support/corpus.hpp"
#include "support/fixtures.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

using namespace robusthedge;
using fixtures::q;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = true;
    std::ostringstream note;

    void expect(bool ok, const std::string& what) {
        if (!ok && pass) note << "first failure: " << what << "; ";
        pass = pass && ok;
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const std::string& title, const std::function<void(Verdict&)>& body) {
    Verdict v;
    const auto t0 = Clock::now();
    try {
        body(v);
    } catch (const std::exception& e) {
        v.expect(false, std::string("exception: ") + e.what());
    }
    failures += !v.pass;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << " " << title << ": " << v.note.str() << "("
              << std::fixed << std::setprecision(2) << seconds_since(t0) << " s)" << std::endl;
}

const std::vector<corpus::Instance>& full_corpus() {
    static const auto c = corpus::make_corpus(1200);
    return c;
}

bool strict_na(const Model<Rational>& m) {
    return global_na(m.tree, compute_support(m.tree), m.options).pass;
}

const std::vector<const corpus::Instance*>& na_corpus() {
    static const auto c = [] {
        std::vector<const corpus::Instance*> out;
        for (const auto& inst : full_corpus())
            if (strict_na(inst.model)) out.push_back(&inst);
        return out;
    }();
    return c;
}

// Option-free versions of corpus trees that pass the local tests.
const std::vector<const corpus::Instance*>& local_na_corpus() {
    static const auto c = [] {
        std::vector<const corpus::Instance*> out;
        for (const auto& inst : full_corpus())
            if (global_na(inst.model.tree, compute_support(inst.model.tree)).pass) out.push_back(&inst);
        return out;
    }();
    return c;
}

void trinomial(Verdict& v) {
    auto m = fixtures::trinomial();
    auto mask = compute_support(m.tree);
    const auto& call = m.claims.at("call");
    auto dp = superhedge_dynamic(m.tree, mask, call);
    auto lp = superhedge_semistatic(m.tree, mask, call, {});
    v.expect(dp.price == q("6/5") && lp.price == q("6/5"), "price is 6/5");
    auto poly = enumerate_vertices(m.tree, mask, {});
    v.expect(poly.vertices.size() == 2 &&
                 poly.vertices[0].weights == std::vector<Rational>{q("3/5"), 0, q("2/5")} &&
                 poly.vertices[1].weights == std::vector<Rational>{0, 1, 0},
             "vertices (3/5,0,2/5) and (0,1,0)");
    v.expect(brute_price(poly, call).max == dp.price, "oracle agrees");
    v.expect(dp.strategy.dynamic[0] == std::vector<Rational>{q("3/5")}, "hedge 3/5");
    auto w = wealth_vector(m.tree, dp.strategy, {});
    v.expect(w[0] == call.values[0] && w[2] == call.values[2] && w[1] >= call.values[1],
             "equality at 8 and 13, domination at 10");
    v.note << "price 6/5, 2 vertices, H = 3/5; ";
}

void duality(Verdict& v) {
    const auto t0 = Clock::now();
    std::size_t n = 0;
    double worst_float = 0;
    for (const auto* inst : na_corpus()) {
        const auto& m = inst->model;
        auto mask = compute_support(m.tree);
        const auto& f = m.claims.at("f");
        auto primal = superhedge_semistatic(m.tree, mask, f, m.options, {1, false});
        auto [dual, qd] = dual_price(m.tree, mask, f, m.options);
        v.expect(primal.price == dual, "exact gap zero, seed " + std::to_string(inst->seed));

        auto fm = m.convert<double>();
        auto fmask = compute_support(fm.tree);
        auto fp = superhedge_semistatic(fm.tree, fmask, fm.claims.at("f"), fm.options, {1, false});
        auto [fd, fq] = dual_price(fm.tree, fmask, fm.claims.at("f"), fm.options);
        worst_float = std::max(worst_float, std::abs(fp.price - fd));
        ++n;
    }
    v.expect(n >= 500, "at least 500 NA-passing instances");
    v.expect(worst_float <= 1e-7, "float gap within 1e-7");
    v.expect(seconds_since(t0) < 120, "under two minutes");
    v.note << n << " instances, exact gap 0, worst float gap " << std::scientific << std::setprecision(1)
           << worst_float << std::defaultfloat << "; ";
}

void first_ftap(Verdict& v) {
    std::size_t agree = 0, pass = 0;
    for (const auto& inst : full_corpus()) {
        const auto& m = inst.model;
        auto mask = compute_support(m.tree);
        auto g = global_na(m.tree, mask, m.options);
        auto d = find_dominating_mm(m.tree, mask, m.options, reference_selector(m.tree));
        const bool witness = d.status == DominationStatus::Witness;
        v.expect(g.pass == witness, "verdicts agree, seed " + std::to_string(inst.seed));
        agree += g.pass == witness;
        pass += g.pass;
        if (witness) v.expect(check_witness(m.tree, mask, m.options, *d.witness).empty(), "witness verifies");
        if (!g.pass) {
            bool ok = !g.witness_leaves.empty();
            for (std::size_t l = 0; l < m.tree.num_leaves(); ++l) {
                if (!mask.relevant_leaf[l]) continue;
                const auto w = wealth(m.tree, *g.strategy, m.options, l);
                const bool in_witness =
                    std::find(g.witness_leaves.begin(), g.witness_leaves.end(), l) != g.witness_leaves.end();
                ok = ok && w >= 0 && (!in_witness || w > 0);
            }
            v.expect(ok && g.strategy->initial == 0, "arbitrage wealth, seed " + std::to_string(inst.seed));
        }
    }
    v.note << agree << "/" << full_corpus().size() << " agree (" << pass << " pass, "
           << full_corpus().size() - pass << " fail); ";
}

void dynamic_consistency(Verdict& v) {
    std::size_t n = 0;
    for (const auto* inst : local_na_corpus()) {
        const auto& m = inst->model;
        auto mask = compute_support(m.tree);
        const auto& f = m.claims.at("f");
        auto dp = superhedge_dynamic(m.tree, mask, f, {1, false});
        auto lp = superhedge_semistatic(m.tree, mask, f, {}, {1, false});
        v.expect(dp.price == lp.price, "dp = lp, seed " + std::to_string(inst->seed));
        ++n;
    }
    v.note << n << " option-free instances; ";
}

void second_ftap(Verdict& v) {
    std::size_t n = 0, replicable = 0, complete = 0;
    for (const auto* inst : na_corpus()) {
        const auto& m = inst->model;
        const auto& t = m.tree;
        auto mask = compute_support(t);
        auto poly = enumerate_vertices(t, mask, m.options);
        std::mt19937_64 rng(inst->seed);
        // A random claim plus one that is replicable by construction.
        auto s = zero_strategy(t, m.options.size());
        s.initial = corpus::uniform(rng, -3, 3);
        for (std::size_t k = 0; k < t.size(); ++k)
            for (auto& h : s.dynamic[k]) h = corpus::uniform(rng, -2, 2);
        for (auto& h : s.statics) h = corpus::uniform(rng, -2, 2);
        const std::vector<Claim<Rational>> claims{m.claims.at("f"), Claim<Rational>{wealth_vector(t, s, m.options)}};
        for (const auto& f : claims) {
            auto r = check_replicable(t, mask, f, m.options, {1, false});
            std::vector<Rational> e;
            for (const auto& vq : poly.vertices) e.push_back(expectation(vq, f.values));
            const bool constant = std::adjacent_find(e.begin(), e.end(), std::not_equal_to<>()) == e.end();
            v.expect(r.replicable == (r.upper == r.lower), "verdict matches interval, seed " + std::to_string(inst->seed));
            v.expect(r.replicable == constant, "verdict matches oracle, seed " + std::to_string(inst->seed));
            replicable += r.replicable;
            ++n;
        }
        const bool c = check_complete(t, mask, m.options, {1, false});
        v.expect(c == (poly.vertices.size() == 1), "completeness matches vertex count, seed " + std::to_string(inst->seed));
        complete += c;
    }
    v.note << n << " claims (" << replicable << " replicable), " << complete << " complete markets; ";
}

void decomposition(Verdict& v) {
    std::size_t n = 0;
    for (const auto* inst : local_na_corpus()) {
        const auto& m = inst->model;
        const auto& t = m.tree;
        auto mask = compute_support(t);
        std::mt19937_64 rng(inst->seed ^ 0x5eed);
        auto f = corpus::random_claim(rng, t.num_leaves());
        auto dp = superhedge_dynamic(t, mask, f, {1, false});
        auto values = dp.surface.values;
        auto d = optional_decomposition(t, mask, values, {1, false});
        bool ok = check_decomposition(t, mask, values, d).empty();
        for (std::size_t k = 0; k < t.size(); ++k)
            if (mask.relevant(k)) ok = ok && *d.consumption[k] >= 0 && gains_at(t, d.strategy, k) - *d.consumption[k] == *values[k];
        v.expect(ok, "K >= 0 and identity, seed " + std::to_string(inst->seed));

        // Bump a node the parent's optimal kernel charges; prefer non-leaf nodes.
        std::optional<std::size_t> bump;
        for (std::size_t k = 1; k < t.size() && !(bump && !t.node(*bump).is_leaf()); ++k) {
            if (!mask.relevant(k)) continue;
            const auto p = *t.node(k).parent;
            auto np = node_price(t, mask, p, child_values_of(t, p, values));
            const auto& ch = t.node(p).children;
            const auto pos = static_cast<std::size_t>(std::find(ch.begin(), ch.end(), k) - ch.begin());
            if (np.kernel.weights[pos] > 0 && (!bump || !t.node(k).is_leaf())) bump = k;
        }
        if (!bump) {
            v.expect(false, "no node to perturb, seed " + std::to_string(inst->seed));
            continue;
        }
        auto bumped = values;
        *bumped[*bump] += 1;
        auto verdict = check_supermartingale(t, mask, bumped, {1, false});
        const auto parent = *t.node(*bump).parent;
        // Expected gap from the oracle: max over local vertex kernels at the parent.
        Rational best;
        bool first = true;
        for (const auto& k : enumerate_local_vertices(t, mask, parent)) {
            Rational e = 0;
            for (std::size_t c = 0; c < k.weights.size(); ++c)
                if (k.weights[c] != 0) e += k.weights[c] * *bumped[t.node(parent).children[c]];
            if (first || e > best) best = e;
            first = false;
        }
        v.expect(!verdict.yes && verdict.node == parent && *verdict.gap == best - *bumped[parent],
                 "perturbation flips verdict with exact gap, seed " + std::to_string(inst->seed));
        ++n;
    }
    v.note << n << " instances decomposed and perturbed; ";
}

void martingale_inequality(Verdict& v) {
    auto m = fixtures::grid();
    const auto& t = m.tree;
    auto mask = compute_support(t);
    const auto& f = m.claims.at("m1sq_minus_m1m2");
    auto p = prove_inequality(t, mask, f, Rational(0));
    v.expect(p.proved, "bound 0 proved");
    if (p.proved) {
        for (auto n : t.level_nodes(1))
            v.expect(p.certificate->dynamic[n] == std::vector<Rational>{-t.node(n).price[0]}, "H2 = -M1");
        for (std::size_t l = 0; l < t.num_leaves(); ++l)
            v.expect(f.values[l] <= wealth(t, *p.certificate, {}, l), "leafwise certificate");
    }
    auto r = prove_inequality(t, mask, f, Rational(-1));
    v.expect(!r.proved, "bound -1 refuted");
    if (!r.proved) {
        v.expect(check_martingale_measure(t, mask, {}, *r.refutation).empty(), "refuting measure is a martingale");
        v.expect(expectation(*r.refutation, f.values) > -1, "refuting measure exceeds the bound");
    }
    v.note << "proved <= 0 with H2 = -M1, refuted <= -1; ";
}

void constant_stock(Verdict& v) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        std::mt19937_64 rng(seed * 7919);
        auto tree = corpus::random_tree(rng, true);
        auto mask = compute_support(tree);
        auto f = corpus::random_claim(rng, tree.num_leaves(), -20, 20);
        const auto top = *std::max_element(f.values.begin(), f.values.end());
        v.expect(superhedge_dynamic(tree, mask, f).price == top, "dp = max f, seed " + std::to_string(seed));
        v.expect(superhedge_semistatic(tree, mask, f, {}).price == top, "lp = max f, seed " + std::to_string(seed));
    }
    v.note << "50 claims; ";
}

void algebra(Verdict& v) {
    std::size_t pairs = 0, with_polar = 0;
    const PricingOptions po{1, false};
    for (const auto* inst : na_corpus()) {
        const auto& m = inst->model;
        const auto& t = m.tree;
        auto mask = compute_support(t);
        const auto L = t.num_leaves();
        auto pi = [&](const Claim<Rational>& f) { return superhedge_semistatic(t, mask, f, m.options, po).price; };
        std::mt19937_64 rng(inst->seed * 31 + 1);
        for (int rep = 0; rep < 2; ++rep) {
            auto f = corpus::random_claim(rng, L);
            auto g = corpus::random_claim(rng, L);
            const Rational pf = pi(f);
            const std::string tag = ", seed " + std::to_string(inst->seed);

            auto up = f;
            for (auto& x : up.values) x += corpus::uniform(rng, 0, 2);
            v.expect(pf <= pi(up), "monotone" + tag);

            const Rational c(corpus::uniform(rng, -9, 9), corpus::uniform(rng, 1, 4));
            auto shifted = f;
            for (auto& x : shifted.values) x += c;
            v.expect(pi(shifted) == pf + c, "translation" + tag);

            const Rational lambda(corpus::uniform(rng, 0, 9), corpus::uniform(rng, 1, 4));
            auto scaled = f;
            for (auto& x : scaled.values) x *= lambda;
            v.expect(pi(scaled) == lambda * pf, "homogeneous" + tag);

            auto sum = f;
            for (std::size_t l = 0; l < L; ++l) sum.values[l] += g.values[l];
            v.expect(pi(sum) <= pf + pi(g), "subadditive" + tag);

            auto changed = f;
            bool any = false;
            for (std::size_t l = 0; l < L; ++l)
                if (!mask.relevant_leaf[l]) {
                    changed.values[l] += corpus::uniform(rng, 1, 50);
                    any = true;
                }
            v.expect(pi(changed) == pf, "polar invariance" + tag);
            with_polar += any;
            ++pairs;
        }
    }
    v.expect(pairs >= 1000, "at least 1000 pairs");
    v.note << pairs << " pairs (" << with_polar << " with polar leaves); ";
}

}  // namespace

int main() {
    report(1, "trinomial fixture", trinomial);
    report(2, "zero duality gap", duality);
    report(3, "first FTAP agreement", first_ftap);
    report(4, "dynamic equals global price", dynamic_consistency);
    report(5, "second FTAP and completeness", second_ftap);
    report(6, "optional decomposition", decomposition);
    report(7, "martingale inequality prover", martingale_inequality);
    report(8, "constant stock prices at the maximum", constant_stock);
    report(9, "algebraic properties of the price", algebra);
    std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}
