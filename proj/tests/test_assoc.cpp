#include "oracle/dense.hpp"
#include "rosa/assoc.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace rosa;

namespace {

std::vector<Key> K(std::initializer_list<Key> ks) { return std::vector<Key>(ks); }
std::vector<Value> V(std::initializer_list<Value> vs) { return std::vector<Value>(vs); }

const Value* at(const AssociativeArray& a, const Key& r, const Key& c) { return a.get(r, c); }

double num(const AssociativeArray& a, const Key& r, const Key& c) {
    const Value* v = a.get(r, c);
    return v ? as_double(*v) : 0.0;
}

} // namespace

TEST(Construct, CombinesDuplicatesWithAdd) {
    const auto a = construct(K({1, 1, 2}), K({"a", "a", "b"}), V({2, 3, 4}), plus_times());
    EXPECT_EQ(a.nnz(), 2u);
    EXPECT_EQ(num(a, 1, "a"), 5.0);
    EXPECT_EQ(num(a, 2, "b"), 4.0);
}

TEST(Construct, MaxPlusKeepsLargest) {
    const auto a = construct(K({1, 1}), K({"a", "a"}), V({2, 7}), preset("max.plus"));
    EXPECT_EQ(num(a, 1, "a"), 7.0);
}

TEST(Construct, DropsZerosAndCancellation) {
    const auto a = construct(K({1, 1, 2}), K({"a", "a", "b"}), V({2, -2, 0}), plus_times());
    EXPECT_TRUE(a.empty());
    EXPECT_EQ(a.row_count(), 0u);
}

TEST(Construct, BroadcastsScalar) {
    const auto a = construct(K({1, 2, 3}), K({"x", "y", "z"}), Value{std::int64_t{4}}, plus_times());
    EXPECT_EQ(a.nnz(), 3u);
    EXPECT_EQ(num(a, 3, "z"), 4.0);
}

TEST(Construct, ArityMismatchThrows) {
    EXPECT_THROW(construct(K({1, 2}), K({"a"}), V({1, 1}), plus_times()), ArityError);
    EXPECT_THROW(construct(K({1, 2, 3}), K({"a", "b", "c"}), V({1, 1}), plus_times()), ArityError);
}

TEST(Construct, OutOfDomainValueThrows) {
    EXPECT_THROW(construct(K({1}), K({"a"}), V({-1}), preset("max.times")), DomainError);
    EXPECT_THROW(construct(K({1}), K({"a"}), V({Value{std::string("s")}}), plus_times()), DomainError);
}

TEST(Construct, KeysWithTabsRejected) {
    EXPECT_THROW(construct(K({"a\tb"}), K({"c"}), V({1}), plus_times()), ArgumentError);
}

TEST(Construct, RowsSortIntegersBeforeText) {
    const auto a = construct(K({"b", 10, "a", 2}), K({"c", "c", "c", "c"}), Value{std::int64_t{1}}, plus_times());
    const auto rows = row_keys(a);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows[0], Key{2});
    EXPECT_EQ(rows[1], Key{10});
    EXPECT_EQ(rows[2], Key{"a"});
    EXPECT_EQ(rows[3], Key{"b"});
}

TEST(Identity, RepeatedKeyIsNotASelector) {
    EXPECT_THROW(identity_pairs(K({1, 1}), K({"a", "b"}), plus_times()), NotASelectorError);
    EXPECT_THROW(identity_pairs(K({1, 2}), K({"a", "a"}), plus_times()), NotASelectorError);
    EXPECT_NO_THROW(ones(K({1, 1}), K({"a", "b"}), plus_times()));
}

TEST(ArrayMult, SelectorPicksRows) {
    const auto p = construct(K({1, 1, 2, 3}), K({"mem", "cwd|/", "mem", "mem"}), V({10, 1, 20, 30}), plus_times());
    const auto picked = array_mult(identity(K({1, 3}), plus_times()), p);
    EXPECT_EQ(row_keys(picked), K({1, 3}));
    EXPECT_EQ(picked.nnz(), 3u);
    EXPECT_EQ(num(picked, 3, "mem"), 30.0);
}

TEST(ArrayMult, UnionIntersectionUsesSets) {
    const ValueSet u{"r", "w", "x"};
    const auto s = preset("union.intersection", u);
    const auto a = construct(K({"alice"}), K({"f"}), V({ValueSet{"r", "w"}}), s);
    const auto b = construct(K({"f"}), K({"obj"}), V({ValueSet{"w", "x"}}), s);
    const auto c = array_mult(a, b);
    ASSERT_NE(at(c, "alice", "obj"), nullptr);
    EXPECT_TRUE(values_equal(*at(c, "alice", "obj"), ValueSet{"w"}));
}

TEST(ArrayMult, MinPlusShortestPaths) {
    const auto s = preset("min.plus");
    const auto g = construct(K({"a", "a", "b"}), K({"b", "c", "c"}), V({1, 5, 2}), s);
    const auto g2 = ewise_add(g, array_mult(g, g));
    EXPECT_EQ(num(g2, "a", "c"), 3.0);
}

TEST(Algebra, MixingSemiringsThrows) {
    const auto a = construct(K({1}), K({1}), V({1}), plus_times());
    const auto b = construct(K({1}), K({1}), V({1}), preset("max.plus"));
    EXPECT_THROW(ewise_add(a, b), AlgebraError);
    EXPECT_THROW(array_mult(a, b), AlgebraError);
    EXPECT_THROW(remove(a, b), AlgebraError);
}

TEST(Remove, IsStructural) {
    const auto a = construct(K({1, 1, 2}), K({"a", "b", "a"}), V({5, 6, 7}), plus_times());
    const auto b = construct(K({1, 3}), K({"a", "a"}), V({99, 1}), plus_times());
    const auto c = remove(a, b);
    EXPECT_EQ(c.nnz(), 2u);
    EXPECT_EQ(at(c, 1, "a"), nullptr);
    EXPECT_EQ(num(c, 1, "b"), 6.0);
    EXPECT_EQ(num(c, 2, "a"), 7.0);
}

TEST(Remove, RowEmptiedDisappears) {
    const auto a = construct(K({1, 2}), K({"a", "a"}), V({5, 7}), plus_times());
    const auto c = remove(a, construct(K({1}), K({"a"}), V({1}), plus_times()));
    EXPECT_EQ(row_keys(c), K({2}));
}

TEST(KeyPatternTest, Forms) {
    const auto all = KeyPattern::parse("*");
    const auto pre = KeyPattern::parse("child|*");
    const auto list = KeyPattern::parse("a,3,b");
    EXPECT_TRUE(all.matches(Key{5}));
    EXPECT_TRUE(pre.matches(Key{"child|7"}));
    EXPECT_FALSE(pre.matches(Key{"parent|7"}));
    EXPECT_FALSE(pre.matches(Key{7}));
    EXPECT_TRUE(list.matches(Key{3}));
    EXPECT_FALSE(list.matches(Key{"3"}));
    EXPECT_TRUE(list.matches(Key{"b"}));
}

TEST(Select, RowAndColumnPatterns) {
    const auto a = construct(K({1, 1, 2, 2}), K({"child|3", "mem", "child|4", "cwd|/"}), V({1, 10, 1, 1}), plus_times());
    const auto c = select(a, KeyPattern::all(), KeyPattern::prefix("child|"));
    EXPECT_EQ(c.nnz(), 2u);
    const auto d = select(a, KeyPattern::keys(K({2})), KeyPattern::all());
    EXPECT_EQ(d.nnz(), 2u);
    EXPECT_EQ(row_keys(d), K({2}));
}

TEST(Transpose, SwapsKeys) {
    const auto a = construct(K({1, 2}), K({"x", "y"}), V({3, 4}), plus_times());
    const auto t = transpose(a);
    EXPECT_EQ(num(t, "x", 1), 3.0);
    EXPECT_EQ(num(t, "y", 2), 4.0);
    EXPECT_TRUE(oracle::exact_equal(transpose(t), a));
}

TEST(Transform, DropsZeroResults) {
    const auto a = construct(K({1, 2}), K({"x", "y"}), V({3, 4}), plus_times());
    const auto b = transform(a, [](const Key& r, const Key&, const Value& v) -> Value {
        return r == Key{1} ? Value{std::int64_t{0}} : v;
    });
    EXPECT_EQ(b.nnz(), 1u);
}

TEST(Builder, RejectsOutOfOrderPush) {
    AssociativeArray::Builder b(plus_times());
    b.push(1, "b", std::int64_t{1});
    EXPECT_THROW(b.push(1, "a", std::int64_t{1}), ArgumentError);
}

// Randomized comparison with brute-force dense evaluation, every preset.
class DenseOracle : public ::testing::TestWithParam<std::string_view> {
protected:
    static constexpr int cases = 60;
};

TEST_P(DenseOracle, EwiseAdd) {
    const auto s = oracle::make_preset(GetParam());
    std::mt19937_64 rng(11);
    for (int i = 0; i < cases; ++i) {
        const auto pool = oracle::key_pool(1 + rng() % 16);
        const auto a = oracle::random_array(s, rng, pool);
        const auto b = oracle::random_array(s, rng, pool);
        const auto c = ewise_add(a, b);
        ASSERT_TRUE(oracle::matches(oracle::dense_add(oracle::to_dense(a, pool, pool), oracle::to_dense(b, pool, pool)), c));
        ASSERT_TRUE(oracle::has_no_stored_zero(c));
    }
}

TEST_P(DenseOracle, EwiseMult) {
    const auto s = oracle::make_preset(GetParam());
    std::mt19937_64 rng(12);
    for (int i = 0; i < cases; ++i) {
        const auto pool = oracle::key_pool(1 + rng() % 16);
        const auto a = oracle::random_array(s, rng, pool, 0.5);
        const auto b = oracle::random_array(s, rng, pool, 0.5);
        const auto c = ewise_mult(a, b);
        ASSERT_TRUE(oracle::matches(
            oracle::dense_ewise_mult(oracle::to_dense(a, pool, pool), oracle::to_dense(b, pool, pool)), c));
        ASSERT_TRUE(oracle::has_no_stored_zero(c));
    }
}

TEST_P(DenseOracle, ArrayMult) {
    const auto s = oracle::make_preset(GetParam());
    std::mt19937_64 rng(13);
    for (int i = 0; i < cases; ++i) {
        const auto pool = oracle::key_pool(1 + rng() % 16);
        const auto a = oracle::random_array(s, rng, pool, 0.2 + 0.1 * static_cast<double>(rng() % 4));
        const auto b = oracle::random_array(s, rng, pool, 0.2 + 0.1 * static_cast<double>(rng() % 4));
        const auto c = array_mult(a, b);
        ASSERT_TRUE(oracle::matches(
            oracle::dense_matmul(oracle::to_dense(a, pool, pool), oracle::to_dense(b, pool, pool)), c));
        ASSERT_TRUE(oracle::has_no_stored_zero(c));
    }
}

TEST_P(DenseOracle, Transpose) {
    const auto s = oracle::make_preset(GetParam());
    std::mt19937_64 rng(14);
    for (int i = 0; i < cases; ++i) {
        const auto pool = oracle::key_pool(1 + rng() % 16);
        const auto a = oracle::random_array(s, rng, pool);
        ASSERT_TRUE(oracle::matches(oracle::dense_transpose(oracle::to_dense(a, pool, pool)), transpose(a)));
    }
}

TEST_P(DenseOracle, IdentityIsNeutral) {
    const auto s = oracle::make_preset(GetParam());
    std::mt19937_64 rng(15);
    for (int i = 0; i < 20; ++i) {
        const auto pool = oracle::key_pool(1 + rng() % 16);
        const auto a = oracle::random_array(s, rng, pool);
        const auto id = identity(pool, s);
        ASSERT_TRUE(oracle::exact_equal(array_mult(id, a), a));
        ASSERT_TRUE(oracle::exact_equal(array_mult(a, id), a));
    }
}

INSTANTIATE_TEST_SUITE_P(AllPresets, DenseOracle, ::testing::ValuesIn(preset_names), [](const auto& info) {
    std::string n(info.param);
    std::replace(n.begin(), n.end(), '.', '_');
    return n;
});
