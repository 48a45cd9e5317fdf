#include "robusthedge/arbitrage.hpp"
#include "robusthedge/model_io.hpp"
#include "robusthedge/oracle.hpp"
#include "support/corpus.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace robusthedge;
using fixtures::q;

TEST(Oracle, TrinomialHasTwoVertices) {
    auto m = fixtures::trinomial();
    auto poly = enumerate_vertices(m.tree, compute_support(m.tree), m.options);
    ASSERT_EQ(poly.vertices.size(), 2u);
    EXPECT_EQ(poly.vertices[0].weights, (std::vector<Rational>{q("3/5"), 0, q("2/5")}));
    EXPECT_EQ(poly.vertices[1].weights, (std::vector<Rational>{0, 1, 0}));
}

TEST(Oracle, TradedCallPinsOneVertex) {
    auto m = fixtures::trinomial_traded();
    auto poly = enumerate_vertices(m.tree, compute_support(m.tree), m.options);
    ASSERT_EQ(poly.vertices.size(), 1u);
    EXPECT_EQ(poly.vertices[0].weights, (std::vector<Rational>{q("3/5"), 0, q("2/5")}));
}

TEST(Oracle, ConstantStockGivesDiracVertices) {
    std::mt19937_64 rng(5);
    auto tree = corpus::random_tree(rng, true);
    auto poly = enumerate_vertices(tree, compute_support(tree), {});
    ASSERT_EQ(poly.vertices.size(), tree.num_leaves());
    for (std::size_t i = 0; i < poly.vertices.size(); ++i)
        for (std::size_t l = 0; l < tree.num_leaves(); ++l) EXPECT_EQ(poly.vertices[i].weights[l], i == l ? 1 : 0);
}

TEST(Oracle, BrutePriceOfTrinomialCall) {
    auto m = fixtures::trinomial();
    auto poly = enumerate_vertices(m.tree, compute_support(m.tree), m.options);
    auto b = brute_price(poly, m.claims.at("call"));
    EXPECT_EQ(b.max, q("6/5"));
    EXPECT_EQ(b.argmax.weights, poly.vertices[0].weights);
    EXPECT_EQ(b.min, 0);
    EXPECT_EQ(b.argmin.weights, poly.vertices[1].weights);
    auto c = brute_price(poly, Claim<Rational>{{5, 5, 5}});
    EXPECT_EQ(c.max, 5);
    EXPECT_EQ(c.min, 5);
}

TEST(Oracle, AllPositiveNodeHasEmptyPolytope) {
    auto m = fixtures::load("allpos.json");
    auto poly = enumerate_vertices(m.tree, compute_support(m.tree), m.options);
    EXPECT_TRUE(poly.vertices.empty());
    EXPECT_THROW(brute_price(poly, m.claims.at("one")), EmptyPolytope);
}

TEST(Oracle, CapsInstanceSize) {
    std::string doc = R"({"horizon":1,"dimension":1,"nodes":[{"id":"r","level":0,"price":[0],"generators":[{)";
    for (int i = 0; i < 17; ++i) doc += (i ? "," : "") + std::string("\"c") + std::to_string(i) + "\":\"1/17\"";
    doc += "}]}";
    for (int i = 0; i < 17; ++i)
        doc += R"(,{"id":"c)" + std::to_string(i) + R"(","level":1,"parent":"r","price":[)" + std::to_string(i - 8) + "]}";
    auto m = load_model(doc + "]}");
    EXPECT_THROW(enumerate_vertices(m.tree, compute_support(m.tree), m.options), InstanceTooLarge);
}

TEST(Oracle, VerticesAreDistinctMartingaleMeasures) {
    for (std::uint64_t seed = 1; seed <= 150; ++seed) {
        auto inst = corpus::random_instance(seed);
        const auto& m = inst.model;
        auto mask = compute_support(m.tree);
        auto poly = enumerate_vertices(m.tree, mask, m.options);
        for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
            EXPECT_EQ(check_martingale_measure(m.tree, mask, m.options, poly.vertices[i]), "") << "seed " << seed;
            for (std::size_t j = 0; j < i; ++j) EXPECT_NE(poly.vertices[i], poly.vertices[j]) << "seed " << seed;
        }
    }
}

TEST(Oracle, LocalVerticesOfTrinomialNode) {
    auto m = fixtures::trinomial();
    auto v = enumerate_local_vertices(m.tree, compute_support(m.tree), 0);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0].weights, (std::vector<Rational>{q("3/5"), 0, q("2/5")}));
    EXPECT_EQ(v[1].weights, (std::vector<Rational>{0, 1, 0}));
}
