#include "robusthedge/model_io.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace robusthedge;
using fixtures::q;

TEST(Numeric, ParsesFractionsIntegersAndDecimalsExactly) {
    EXPECT_EQ(parse_rational("6/5"), Rational(6, 5));
    EXPECT_EQ(parse_rational("-12"), Rational(-12));
    EXPECT_EQ(parse_rational("0.1"), Rational(1, 10));
    EXPECT_EQ(parse_rational("1.25e-1"), Rational(1, 8));
    EXPECT_EQ(parse_rational("-2/4"), Rational(-1, 2));
    EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
    EXPECT_THROW(parse_rational("abc"), std::invalid_argument);
}

TEST(Numeric, FormatsFractionWithDecimal) {
    EXPECT_EQ(format_value(Rational(6, 5)), "6/5 (=1.2)");
    EXPECT_EQ(format_value(Rational(3)), "3");
    EXPECT_EQ(format_value(Rational(1, 3)), "1/3 (=0.333333333333)");
    EXPECT_EQ(to_fraction_string(Rational(4)), "4/1");
}

TEST(Model, SmallestTreeInfersDimension) {
    auto m = load_model(R"({"horizon":1,"dimension":1,"nodes":[
        {"id":"r","level":0,"price":[1],"generators":[{"c":1}]},
        {"id":"c","level":1,"parent":"r","price":[1]}]})");
    EXPECT_EQ(m.tree.size(), 2u);
    EXPECT_EQ(m.tree.num_leaves(), 1u);
    EXPECT_EQ(m.tree.dimension(), 1u);
}

TEST(Model, UnnormalizedGeneratorNamesNodeAndIndex) {
    try {
        load_model(R"({"horizon":1,"dimension":1,"nodes":[
            {"id":"r","level":0,"price":[1],"generators":[{"a":1},{"a":0.5,"b":0.6}]},
            {"id":"a","level":1,"parent":"r","price":[0]},
            {"id":"b","level":1,"parent":"r","price":[2]}]})");
        FAIL() << "expected ProbabilityNotNormalized";
    } catch (const ProbabilityNotNormalized& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("'r'"), std::string::npos) << what;
        EXPECT_NE(what.find("generator 1"), std::string::npos) << what;
    }
}

TEST(Model, RejectsStructuralErrors) {
    EXPECT_THROW(load_model(R"({"horizon":1,"dimension":1,"nodes":[
        {"id":"r","level":0,"price":[1],"generators":[{"zz":1}]},
        {"id":"c","level":1,"parent":"r","price":[1]}]})"),
                 DanglingChildReference);
    EXPECT_THROW(load_model(R"({"horizon":1,"dimension":2,"nodes":[
        {"id":"r","level":0,"price":[1,2],"generators":[{"c":1}]},
        {"id":"c","level":1,"parent":"r","price":[1]}]})"),
                 DimensionMismatch);
    EXPECT_THROW(load_model(R"({"horizon":2,"dimension":1,"nodes":[
        {"id":"r","level":0,"price":[1],"generators":[{"c":1}]},
        {"id":"c","level":1,"parent":"r","price":[1]}]})"),
                 InputError);
    EXPECT_THROW(load_model("{not json"), MalformedDocument);
    EXPECT_THROW(fixtures::load("broken.json"), ProbabilityNotNormalized);
}

TEST(Model, TrinomialRoundTripsThroughSave) {
    auto m = fixtures::trinomial_traded();
    EXPECT_EQ(m.tree.num_leaves(), 3u);
    ASSERT_EQ(m.options.size(), 1u);
    EXPECT_EQ(m.options[0].quote, q("6/5"));
    auto again = load_model(model_to_json(m).dump());
    EXPECT_EQ(again.tree, m.tree);
    EXPECT_EQ(again.options, m.options);
    EXPECT_EQ(again.claims, m.claims);
    EXPECT_EQ(again.measures, m.measures);
}

TEST(Model, LeavesFollowDocumentOrder) {
    auto m = fixtures::trinomial();
    std::vector<std::string> ids;
    for (auto n : m.tree.leaves()) ids.push_back(m.tree.node(n).id);
    EXPECT_EQ(ids, (std::vector<std::string>{"8", "10", "13"}));
}

TEST(Model, WealthAddsGainsAlongThePath) {
    auto m = fixtures::trinomial();
    auto s = zero_strategy(m.tree, 0);
    s.initial = q("6/5");
    s.dynamic[0] = {q("3/5")};
    auto w = wealth_vector(m.tree, s, {});
    EXPECT_EQ(w, (std::vector<Rational>{Rational(0), q("6/5"), Rational(3)}));
}

TEST(Model, WealthUsesNormalizedOptionPayoffs) {
    auto m = fixtures::trinomial_traded();
    auto s = zero_strategy(m.tree, 1);
    s.statics[0] = 1;
    auto w = wealth_vector(m.tree, s, m.options);
    EXPECT_EQ(w, (std::vector<Rational>{q("-6/5"), q("-6/5"), q("9/5")}));
}

TEST(Model, ProductMeasureWithOnePeriodReturnsKernel) {
    auto m = fixtures::trinomial();
    std::vector<std::optional<Measure<Rational>>> k(m.tree.size());
    k[0] = Measure<Rational>{{q("1/2"), q("1/3"), q("1/6")}};
    EXPECT_EQ(product_measure(m.tree, k).weights, k[0]->weights);
}

TEST(Model, ProductMeasureFollowsDiracContinuation) {
    auto m = load_model(R"({"horizon":2,"dimension":1,"nodes":[
        {"id":"r","level":0,"price":[0],"generators":[{"a":"1/2","b":"1/2"}]},
        {"id":"a","level":1,"parent":"r","price":[1],"generators":[{"a1":1}]},
        {"id":"b","level":1,"parent":"r","price":[-1],"generators":[{"b1":1}]},
        {"id":"a1","level":2,"parent":"a","price":[1]},
        {"id":"a2","level":2,"parent":"a","price":[2]},
        {"id":"b1","level":2,"parent":"b","price":[-1]}]})");
    std::vector<std::optional<Measure<Rational>>> k(m.tree.size());
    for (std::size_t n = 0; n < m.tree.size(); ++n)
        if (!m.tree.node(n).is_leaf()) k[n] = m.tree.node(n).ambiguity.generators[0];
    auto p = product_measure(m.tree, k);
    EXPECT_EQ(p.weights, (std::vector<Rational>{q("1/2"), Rational(0), q("1/2")}));
}

TEST(Model, ProductMeasureNeedsKernelsWhereMassArrives) {
    auto m = fixtures::grid();
    std::vector<std::optional<Measure<Rational>>> k(m.tree.size());
    k[0] = Measure<Rational>{{Rational(1), Rational(0), Rational(0)}};
    EXPECT_THROW(product_measure(m.tree, k), MissingKernel);
    k[1] = Measure<Rational>{{q("1/4"), q("1/4"), q("1/2")}};
    auto p = product_measure(m.tree, k);
    Rational total = 0;
    for (const auto& w : p.weights) total += w;
    EXPECT_EQ(total, 1);
}

TEST(Model, ConvertsToFloat) {
    auto m = fixtures::trinomial_traded().convert<double>();
    EXPECT_DOUBLE_EQ(m.options[0].quote, 1.2);
    EXPECT_DOUBLE_EQ(m.tree.node(0).price[0], 10.0);
}
