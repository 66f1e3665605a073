#include "debunk/campaign.hpp"
#include "debunk/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace debunk;
using namespace debunk::env;
using hawkes::Event;
using hawkes::Matrix;
using hawkes::NewsKind;

namespace {

HawkesParams zero_params(std::size_t n) {
    HawkesParams p;
    const auto k = static_cast<Eigen::Index>(n);
    p.A = Matrix::Zero(k, k);
    p.mu_fake = Vector::Zero(k);
    p.mu_mitigation = Vector::Zero(k);
    return p;
}

EventLog posts(std::size_t user, NewsKind kind, std::initializer_list<double> times) {
    EventLog log;
    for (double t : times) {
        log.events.push_back({user, t, kind});
    }
    return log;
}

Scenario small_scenario(std::uint64_t seed) {
    Scenario s;
    s.graph = graph::assign_costs(graph::erdos_renyi(12, 0.2, seed), 1.0, 5.0);
    s.params = zero_params(12);
    Rng rng(seed);
    for (Eigen::Index i = 0; i < 12; ++i) {
        for (Eigen::Index j = 0; j < 12; ++j) {
            if (s.graph.adjacency(j, i) != 0.0) {
                s.params.A(i, j) = 0.1 * rng.uniform();
            }
        }
        s.params.mu_mitigation[i] = 0.05;
    }
    s.spreaders = {0, 1};
    s.params.mu_fake[0] = 0.2;
    s.params.mu_fake[1] = 0.15;
    return s;
}

CampaignConfig short_config() {
    CampaignConfig c;
    c.horizon = 100.0;
    c.num_stages = 4;
    c.budget_min = 3.0;
    c.budget_max = 8.0;
    return c;
}

} // namespace

TEST(Schedule, SingleStageCoversHorizon) {
    CampaignConfig c;
    c.num_stages = 1;
    const auto s = make_schedule(c, 3);
    EXPECT_EQ(s.boundaries, (std::vector<double>{0.0, 500.0}));
}

TEST(Schedule, TenStagesStrictlyIncreasingAndDeterministic) {
    CampaignConfig c;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto s = make_schedule(c, seed);
        ASSERT_EQ(s.boundaries.size(), 11u);
        EXPECT_EQ(s.boundaries.front(), 0.0);
        EXPECT_EQ(s.boundaries.back(), 500.0);
        for (std::size_t k = 1; k < s.boundaries.size(); ++k) {
            EXPECT_LT(s.boundaries[k - 1], s.boundaries[k]);
        }
        EXPECT_EQ(make_schedule(c, seed).boundaries, s.boundaries);
    }
}

TEST(Budgets, WithinRangeAndEqualSplitKeepsTotal) {
    CampaignConfig c;
    const auto b = draw_budgets(c, 4);
    double total = 0.0;
    for (double x : b) {
        EXPECT_GE(x, 5.0);
        EXPECT_LE(x, 50.0);
        total += x;
    }
    c.equal_split_budgets = true;
    const auto equal = draw_budgets(c, 4);
    for (double x : equal) {
        EXPECT_NEAR(x, total / 10.0, 1e-12);
    }
}

TEST(BuildState, NoEventsLeavesOnlyFollowers) {
    const auto g = graph::from_edges(3, {{0, 1}, {0, 2}, {1, 2}});
    const auto s = build_state(zero_params(3), g, EventLog{}, EventLog{}, 10.0, 25.0);
    ASSERT_EQ(s.dim(), 15u);
    EXPECT_TRUE(s.values.head(12).isZero());
    EXPECT_EQ(s.followers()[0], 2.0);
    EXPECT_EQ(s.followers()[1], 1.0);
    EXPECT_EQ(s.followers()[2], 0.0);
    const auto normalized =
        build_state(zero_params(3), g, EventLog{}, EventLog{}, 10.0, 25.0, true);
    EXPECT_DOUBLE_EQ(normalized.followers()[0], 1.0);
    EXPECT_DOUBLE_EQ(normalized.followers()[1], 0.5);
    EXPECT_DOUBLE_EQ(normalized.followers()[2], 0.0);
}

TEST(BuildState, ExcitedIntensityExcludesBase) {
    auto p = zero_params(2);
    p.A(0, 1) = 0.3;
    p.mu_fake << 0.7, 0.7;
    const auto g = graph::from_edges(2, {{1, 0}});
    const auto s = build_state(p, g, posts(1, NewsKind::Fake, {0.0}), EventLog{}, 1.0, 25.0);
    EXPECT_NEAR(s.y_fake()[0], 0.3 * std::exp(-1.0), 1e-12);
    EXPECT_NEAR(s.y_fake()[0], 0.1104, 1e-4);
    EXPECT_DOUBLE_EQ(s.y_fake()[1], 0.0);
}

TEST(BuildState, PostingRateOverWindow) {
    const auto g = graph::from_edges(2, {});
    const auto mitigation = posts(1, NewsKind::Mitigation, {10.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0});
    const auto s = build_state(zero_params(2), g, EventLog{}, mitigation, 75.0, 25.0);
    // Window (50, 75] holds 60 and 70; at 100 the window (75, 100] holds 80 and 90.
    EXPECT_DOUBLE_EQ(s.z_mitigation()[1], 2.0 / 25.0);
    const auto five = posts(0, NewsKind::Mitigation, {76.0, 80.0, 85.0, 90.0, 99.0});
    const auto s2 = build_state(zero_params(2), g, EventLog{}, five, 100.0, 25.0);
    EXPECT_DOUBLE_EQ(s2.z_mitigation()[0], 0.2);
}

TEST(ApplyAction, BoostsOnlySelectedMitigationRates) {
    auto p = zero_params(10);
    p.mu_mitigation.setConstant(0.05);
    p.mu_fake.setConstant(0.1);
    EXPECT_TRUE(apply_action(p, Action{}, 3.0) == p);
    EXPECT_TRUE(apply_action(p, Action{{2, 7}}, 0.0) == p);
    const auto boosted = apply_action(p, Action{{2, 7}}, 3.0);
    for (Eigen::Index i = 0; i < 10; ++i) {
        EXPECT_DOUBLE_EQ(boosted.mu_mitigation[i], (i == 2 || i == 7) ? 3.05 : 0.05);
        EXPECT_DOUBLE_EQ(boosted.mu_fake[i], 0.1);
    }
    EXPECT_EQ(boosted.A, p.A);
    EXPECT_THROW((void)apply_action(p, Action{{10}}, 1.0), std::out_of_range);
}

TEST(Reward, TwoNodeHandValue) {
    // User 1 follows user 0; user 1 posts 4 true and 2 fake items in (0, 10].
    const auto g = graph::from_edges(2, {{0, 1}});
    const auto fake = posts(1, NewsKind::Fake, {2.0, 6.0});
    const auto mitigation = posts(1, NewsKind::Mitigation, {1.0, 3.0, 5.0, 9.0});
    EXPECT_NEAR(reward(g, fake, mitigation, 0.0, 10.0), 0.04, 1e-12);
}

TEST(Reward, ThreeNodeHandValue) {
    // 0 is followed by 1 and 2; 1 is followed by 2.
    // Posts in (5, 15]: fake N = (1, 2, 3), true N = (2, 0, 1).
    // B N_F = (2 + 3, 3, 0) = (5, 3, 0) and B N_M = (0 + 1, 1, 0) = (1, 1, 0).
    // Rates divide by 10: r = (0.1 * 0.5 + 0.1 * 0.3) / 3.
    const auto g = graph::from_edges(3, {{0, 1}, {0, 2}, {1, 2}});
    EventLog fake;
    fake.events = {{0, 6.0, NewsKind::Fake}, {1, 7.0, NewsKind::Fake}, {2, 8.0, NewsKind::Fake},
                   {1, 9.0, NewsKind::Fake}, {2, 11.0, NewsKind::Fake}, {2, 15.0, NewsKind::Fake},
                   {0, 16.0, NewsKind::Fake}};
    EventLog mitigation;
    mitigation.events = {{1, 4.0, NewsKind::Mitigation}, {0, 5.5, NewsKind::Mitigation},
                         {0, 12.0, NewsKind::Mitigation}, {2, 14.0, NewsKind::Mitigation}};
    EXPECT_NEAR(reward(g, fake, mitigation, 5.0, 15.0), (0.1 * 0.5 + 0.1 * 0.3) / 3.0, 1e-12);
    // Transposed exposure: B^T N_F = (0, 1, 1 + 2) = (0, 1, 3); B^T N_M = (0, 2, 2).
    EXPECT_NEAR(reward(g, fake, mitigation, 5.0, 15.0, true), (0.2 * 0.1 + 0.2 * 0.3) / 3.0,
                1e-12);
}

TEST(Reward, ZeroCases) {
    const auto g = graph::from_edges(2, {{0, 1}});
    EXPECT_DOUBLE_EQ(reward(g, EventLog{}, EventLog{}, 0.0, 10.0), 0.0);
    const auto none = graph::from_edges(2, {});
    EXPECT_DOUBLE_EQ(reward(none, posts(1, NewsKind::Fake, {1.0}),
                            posts(1, NewsKind::Mitigation, {2.0}), 0.0, 10.0),
                     0.0);
    EXPECT_THROW((void)reward(g, EventLog{}, EventLog{}, 5.0, 5.0), std::invalid_argument);
}

TEST(CampaignReturn, DiscountedSum) {
    const std::vector<double> three{1.0, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(campaign_return(three, 0.0), 1.0);
    const std::vector<double> two{1.0, 1.0};
    EXPECT_DOUBLE_EQ(campaign_return(two, 0.8), 1.8);
    EXPECT_DOUBLE_EQ(campaign_return({}, 0.8), 0.0);
    EXPECT_THROW((void)campaign_return(two, 1.5), std::invalid_argument);
}

TEST(ValidateAction, RejectsOverBudgetSpreadersAndDuplicates) {
    const std::vector<double> costs{2.0, 3.0, 4.0};
    const std::vector<std::size_t> spreaders{2};
    EXPECT_NO_THROW(validate_action(Action{{0, 1}}, costs, spreaders, 5.0));
    EXPECT_THROW(validate_action(Action{{0, 1}}, costs, spreaders, 4.9), std::invalid_argument);
    EXPECT_THROW(validate_action(Action{{2}}, costs, spreaders, 10.0), std::invalid_argument);
    EXPECT_THROW(validate_action(Action{{0, 0}}, costs, spreaders, 10.0), std::invalid_argument);
    EXPECT_THROW(validate_action(Action{{3}}, costs, spreaders, 10.0), std::invalid_argument);
}

TEST(RunStage, ZeroRatesGiveNothing) {
    Scenario s;
    s.graph = graph::assign_costs(graph::erdos_renyi(4, 0.5, 1), 1.0, 5.0);
    s.params = zero_params(4);
    CampaignLogs logs;
    const auto config = short_config();
    const auto schedule = make_schedule(config, 1);
    const auto out = run_stage(s, config, logs, schedule, 0, Action{}, 5.0, 9);
    EXPECT_DOUBLE_EQ(out.reward, 0.0);
    EXPECT_TRUE(logs.fake.empty());
    EXPECT_TRUE(logs.mitigation.empty());
}

TEST(RunStage, InvalidActionsAreRejected) {
    const auto s = small_scenario(3);
    CampaignLogs logs;
    const auto config = short_config();
    const auto schedule = make_schedule(config, 1);
    EXPECT_THROW((void)run_stage(s, config, logs, schedule, 0, Action{{0}}, 100.0, 1),
                 std::invalid_argument);
    EXPECT_THROW((void)run_stage(s, config, logs, schedule, 0, Action{{2, 3, 4, 5, 6}}, 1.0, 1),
                 std::invalid_argument);
    EXPECT_THROW((void)run_stage(s, config, logs, schedule, 9, Action{}, 1.0, 1), std::out_of_range);
}

TEST(CampaignRun, ReplayIsIdenticalAndBoostDoesNotLeak) {
    const auto s = small_scenario(5);
    const auto before = s.params;
    const auto config = short_config();
    auto play = [&] {
        Campaign c(s, config, 42);
        Rng rng(1);
        while (!c.finished()) {
            Action a;
            double left = c.budget();
            for (std::size_t i = 2; i < 12; ++i) {
                if (rng.bernoulli(0.5) && c.costs()[i] <= left) {
                    a.debunkers.push_back(i);
                    left -= c.costs()[i];
                }
            }
            c.step(a);
            const auto state = c.observe();
            EXPECT_EQ(state.dim(), 60u);
            EXPECT_TRUE((state.values.array() >= 0.0).all());
        }
        return c;
    };
    const auto a = play();
    const auto b = play();
    EXPECT_TRUE(s.params == before);
    EXPECT_EQ(a.logs().fake, b.logs().fake);
    EXPECT_EQ(a.logs().mitigation, b.logs().mitigation);
    EXPECT_EQ(a.rewards(), b.rewards());
    for (const auto& r : a.records()) {
        EXPECT_LE(r.cost_spent, r.budget);
        EXPECT_GE(r.reward, 0.0);
    }
    EXPECT_DOUBLE_EQ(a.discounted_return(), campaign_return(a.rewards(), config.gamma));
    Campaign done = a;
    EXPECT_THROW(done.step(Action{}), std::logic_error);
}

TEST(CampaignRun, RejectsUnstableScenario) {
    auto s = small_scenario(2);
    s.params.A = Matrix::Constant(12, 12, 0.5);
    EXPECT_THROW(Campaign(s, short_config(), 1), hawkes::StabilityError);
}

// With A = 0, boosting node 0 adds `boost` to its mean posting rate, which
// reaches every node that counts node 0's posts in its exposure.
TEST(CampaignRun, PoissonLimitBoostRaisesExposureByBoost) {
    Scenario s;
    s.graph = graph::assign_costs(graph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}}), 1.0, 5.0);
    s.params = zero_params(3);
    s.params.mu_mitigation << 0.2, 0.1, 0.3;
    CampaignConfig config;
    config.horizon = 50.0;
    config.num_stages = 1;
    config.budget_min = config.budget_max = 10.0;
    config.boost = 2.0;

    const int runs = 400;
    auto mean_exposure = [&](const Action& action, bool transpose) {
        Vector total = Vector::Zero(3);
        for (int r = 0; r < runs; ++r) {
            Campaign c(s, config, derive_seed(17, {std::uint64_t(r)}));
            c.step(action);
            total += exposure_rate(s.graph, c.logs().mitigation, NewsKind::Mitigation, 0.0, 50.0,
                                   transpose);
        }
        return Vector(total / runs);
    };
    for (bool transpose : {false, true}) {
        const Vector base = mean_exposure(Action{}, transpose);
        const Vector boosted = mean_exposure(Action{{0}}, transpose);
        const Vector reach = transpose ? Vector(s.graph.adjacency.row(0).transpose())
                                       : Vector(s.graph.adjacency.col(0));
        for (Eigen::Index i = 0; i < 3; ++i) {
            EXPECT_NEAR(boosted[i] - base[i], 2.0 * reach[i], 0.2) << "node " << i;
        }
    }
}

TEST(StageRecords, RoundTrip) {
    const auto s = small_scenario(8);
    Campaign c(s, short_config(), 3);
    std::size_t cheap = 2;
    for (std::size_t i = 3; i < s.n(); ++i) {
        cheap = s.graph.costs[i] < s.graph.costs[cheap] ? i : cheap;
    }
    c.step(Action{{cheap}});
    c.step(Action{});
    std::stringstream buffer;
    write_stage_records(buffer, c.records());
    const auto back = read_stage_records(buffer);
    ASSERT_EQ(back.size(), 2u);
    EXPECT_EQ(back[0].debunkers, (std::vector<std::size_t>{cheap}));
    EXPECT_TRUE(back[1].debunkers.empty());
    EXPECT_DOUBLE_EQ(back[0].reward, c.records()[0].reward);
    EXPECT_DOUBLE_EQ(back[0].t_end, c.records()[0].t_end);
    EXPECT_DOUBLE_EQ(back[1].budget, c.records()[1].budget);
}
