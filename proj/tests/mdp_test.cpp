#include <gtest/gtest.h>

#include <set>
#include <tuple>

#include "qmdp/layout.hpp"
#include "qmdp/mdp.hpp"
#include "test_support.hpp"

using namespace qmdp;

namespace {

bool names_pair(const std::vector<Violation>& vs, int s, int a) {
    for (const auto& v : vs) {
        if (v.pair && *v.pair == std::make_pair(s, a)) return true;
    }
    return false;
}

} // namespace

TEST(MdpValidate, BundledExampleIsValid) { EXPECT_TRUE(validate(paper_example_mdp()).empty()); }

TEST(MdpValidate, UnnormalizedRowNamesThePair) {
    auto spec = paper_example_mdp();
    spec.transitions[1].prob = 0.3; // (s0,a0) now sums to 0.9
    const auto vs = validate(spec);
    ASSERT_FALSE(vs.empty());
    EXPECT_TRUE(names_pair(vs, 0, 0));
}

TEST(MdpValidate, RewardOverflowAgainstPinnedWidth) {
    auto spec = paper_example_mdp();
    spec.reward_bits = 2;
    spec.rewards[3] = 4;
    const auto vs = validate(spec);
    ASSERT_EQ(vs.size(), 1u);
    EXPECT_NE(vs[0].message.find("reward overflow"), std::string::npos);
}

TEST(MdpValidate, CatchesIndexDuplicateAndMissingRow) {
    auto spec = paper_example_mdp();
    spec.transitions.push_back({0, 0, 1, 0.0}); // duplicate triple
    spec.transitions.push_back({5, 0, 1, 0.5}); // out of range
    auto vs = validate(spec);
    EXPECT_GE(vs.size(), 2u);

    spec = paper_example_mdp();
    spec.transitions.pop_back(); // (s3,a1) has no successors left
    vs = validate(spec);
    EXPECT_TRUE(names_pair(vs, 3, 1));
}

TEST(MdpValidate, RejectsNegativeRewardAndBadStart) {
    auto spec = paper_example_mdp();
    spec.rewards[0] = -1;
    spec.initial = FixedStart{7};
    EXPECT_EQ(validate(spec).size(), 2u);
}

TEST(MdpModel, RewardWidth) {
    auto spec = paper_example_mdp();
    EXPECT_EQ(reward_width(spec), 2);
    spec.rewards = {0, 0, 0, 0};
    EXPECT_EQ(reward_width(spec), 1);
    spec.rewards = {0, 4, 0, 0};
    EXPECT_EQ(reward_width(spec), 3);
}

TEST(MdpSupport, PublishedRows) {
    const auto spec = paper_example_mdp();
    EXPECT_EQ(support(spec, 0, 0), (std::vector<Successor>{{1, 0.6}, {2, 0.4}}));
    EXPECT_EQ(support(spec, 3, 1), (std::vector<Successor>{{3, 1.0}}));
    EXPECT_EQ(support(spec, 1, 1), (std::vector<Successor>{{2, 0.5}, {3, 0.5}}));
    EXPECT_THROW(support(spec, 4, 0), std::out_of_range);
    EXPECT_THROW(support(spec, 0, 2), std::out_of_range);
}

TEST(MdpSupport, BundledSupportEqualsSampleTable) {
    const auto spec = paper_example_mdp();
    const RegisterLayout layout(spec, 1);
    std::set<std::tuple<int, int, int>> table;
    for (const auto& row : qmdp::testing::kTableOneRows) {
        const auto rec = decode_trajectory(layout, row);
        const auto& st = rec.steps.at(0);
        EXPECT_EQ(st.reward, spec.rewards[static_cast<std::size_t>(st.next)]) << row;
        table.insert(std::make_tuple(st.state, st.action, st.next));
    }
    std::set<std::tuple<int, int, int>> supported;
    for (int s = 0; s < spec.num_states; ++s) {
        for (int a = 0; a < spec.num_actions; ++a) {
            for (const auto& succ : support(spec, s, a)) supported.insert(std::make_tuple(s, a, succ.next));
        }
    }
    EXPECT_EQ(table.size(), 15u);
    EXPECT_EQ(supported, table);
}

TEST(MdpSupport, RowsSumToOneOnRandomSpecs) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const auto spec = qmdp::testing::random_spec(rng, 2 + trial % 4, 1 + trial % 3);
        ASSERT_TRUE(validate(spec).empty());
        for (int s = 0; s < spec.num_states; ++s) {
            for (int a = 0; a < spec.num_actions; ++a) {
                double sum = 0.0;
                for (const auto& succ : support(spec, s, a)) sum += succ.prob;
                EXPECT_NEAR(sum, 1.0, 1e-9);
            }
        }
    }
}

TEST(MdpIo, RoundTripBundled) {
    const auto spec = paper_example_mdp();
    EXPECT_EQ(load_mdp(save_mdp(spec)), spec);
}

TEST(MdpIo, RoundTripRandomSpecs) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        auto spec = qmdp::testing::random_spec(rng);
        if (trial % 3 == 0) spec.initial = FixedStart{trial % 4};
        if (trial % 5 == 0) spec.reward_bits = 3;
        const auto text = save_mdp(spec);
        EXPECT_EQ(load_mdp(text), spec);
        EXPECT_EQ(save_mdp(load_mdp(text)), text);
    }
}

TEST(MdpIo, ParsesDecimalProbability) {
    const auto spec = load_mdp(R"({
      "num_states": 2, "num_actions": 1,
      "transitions": [{"state": 0, "action": 0, "next": 1, "prob": 0.6},
                      {"state": 0, "action": 0, "next": 0, "prob": 0.4},
                      {"state": 1, "action": 0, "next": 1, "prob": 1.0}],
      "rewards": [0, 1],
      "initial": {"fixed": 0}
    })");
    EXPECT_EQ(spec.transitions[0], (Transition{0, 0, 1, 0.6}));
    EXPECT_EQ(spec.initial, InitialDistribution{FixedStart{0}});
}

TEST(MdpIo, MissingFieldIsNamed) {
    try {
        load_mdp(R"({"num_states": 2, "num_actions": 1, "rewards": [0, 1], "initial": "uniform"})");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.field(), "transitions");
        EXPECT_NE(std::string(e.what()).find("transitions"), std::string::npos);
    }
}

TEST(MdpIo, SyntaxErrorReportsLine) {
    try {
        load_mdp("{\n  \"num_states\": 2,\n  \"num_actions\": ,\n}");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
}

TEST(MdpIo, WrongTypeAndBadInitial) {
    EXPECT_THROW(load_mdp(R"({"num_states": "four"})"), ParseError);
    EXPECT_THROW(load_mdp(R"({"num_states": 1, "num_actions": 1,
        "transitions": [{"state": 0, "action": 0, "next": 0, "prob": 1.0}],
        "rewards": [0], "initial": "random"})"),
                 ParseError);
}

TEST(MdpIo, InvalidDocumentRaisesValidationError) {
    try {
        load_mdp(R"({"num_states": 1, "num_actions": 1,
            "transitions": [{"state": 0, "action": 0, "next": 0, "prob": 0.5}],
            "rewards": [0], "initial": "uniform"})");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        ASSERT_EQ(e.violations().size(), 1u);
        EXPECT_EQ(e.violations()[0].pair, std::make_pair(0, 0));
    }
}

TEST(MdpStart, ParseAndPrint) {
    EXPECT_EQ(parse_start("uniform"), InitialDistribution{UniformStart{}});
    EXPECT_EQ(parse_start("fixed:3"), InitialDistribution{FixedStart{3}});
    EXPECT_EQ(to_string(parse_start("fixed:12")), "fixed:12");
    EXPECT_THROW(parse_start("fixed:"), std::invalid_argument);
    EXPECT_THROW(parse_start("fixed:-1"), std::invalid_argument);
    EXPECT_THROW(parse_start("any"), std::invalid_argument);
}
