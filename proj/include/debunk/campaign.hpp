#pragma once

#include "debunk/graph.hpp"
#include "debunk/hawkes.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace debunk::env {

using hawkes::EventLog;
using hawkes::HawkesParams;
using hawkes::Vector;

struct CampaignConfig {
    double horizon{500.0};
    std::size_t num_stages{10};
    double budget_min{5.0};
    double budget_max{50.0};
    double boost{3.0};         // added to mu_mitigation of each debunker for its stage
    double delta_T{25.0};      // window of the posting-rate features
    double gamma{0.8};
    // Reward and exposure use B^T instead of B (exposure to accounts a user follows).
    bool exposure_transpose{false};
    // Min-max scale the follower block of the state into [0, 1].
    bool normalize_followers{false};
    // Every stage gets the mean of the drawn budgets (same campaign total).
    bool equal_split_budgets{false};

    void validate() const;
};

/// Boundaries t_0 = 0 < t_1 < ... < t_K = horizon.
struct StageSchedule {
    std::vector<double> boundaries;

    [[nodiscard]] std::size_t stages() const {
        return boundaries.empty() ? 0 : boundaries.size() - 1;
    }
    [[nodiscard]] double start(std::size_t k) const { return boundaries.at(k); }
    [[nodiscard]] double end(std::size_t k) const { return boundaries.at(k + 1); }
};

/// s = [y_F; y_M; z_F; z_M; e], stored contiguously (dimension 5n).
struct CampaignState {
    std::size_t n{0};
    Vector values;

    CampaignState() = default;
    explicit CampaignState(std::size_t nodes)
        : n(nodes), values(Vector::Zero(static_cast<Eigen::Index>(5 * nodes))) {}

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(values.size()); }
    [[nodiscard]] auto block(std::size_t b) const {
        return values.segment(static_cast<Eigen::Index>(b * n), static_cast<Eigen::Index>(n));
    }
    [[nodiscard]] auto block(std::size_t b) {
        return values.segment(static_cast<Eigen::Index>(b * n), static_cast<Eigen::Index>(n));
    }
    [[nodiscard]] auto y_fake() const { return block(0); }
    [[nodiscard]] auto y_mitigation() const { return block(1); }
    [[nodiscard]] auto z_fake() const { return block(2); }
    [[nodiscard]] auto z_mitigation() const { return block(3); }
    [[nodiscard]] auto followers() const { return block(4); }
};

struct Action {
    std::vector<std::size_t> debunkers;

    [[nodiscard]] bool empty() const { return debunkers.empty(); }
};

/// Graph, Hawkes parameters and fake-news sources of one synthetic or fitted network.
struct Scenario {
    graph::SocialGraph graph;
    HawkesParams params;
    std::vector<std::size_t> spreaders;

    [[nodiscard]] std::size_t n() const { return graph.n; }
    void validate() const;
};

struct CampaignLogs {
    EventLog fake;
    EventLog mitigation;
};

[[nodiscard]] StageSchedule make_schedule(const CampaignConfig& config, std::uint64_t seed);

/// Per-stage budgets drawn uniformly from [budget_min, budget_max].
[[nodiscard]] std::vector<double> draw_budgets(const CampaignConfig& config, std::uint64_t seed);

[[nodiscard]] CampaignState build_state(const HawkesParams& params, const graph::SocialGraph& graph,
                                        const EventLog& log_fake, const EventLog& log_mitigation,
                                        double t_k, double delta_T,
                                        bool normalize_followers = false);

[[nodiscard]] HawkesParams apply_action(const HawkesParams& params, const Action& action,
                                        double boost);

/// Adjacency-weighted posting rate of `kind` over (t0, t1]: B (N(t1) - N(t0)) / (t1 - t0).
[[nodiscard]] Vector exposure_rate(const graph::SocialGraph& graph, const EventLog& log,
                                   hawkes::NewsKind kind, double t0, double t1,
                                   bool transpose = false);

/// Cumulative adjacency-weighted post count of `kind` up to t: B N(t).
[[nodiscard]] Vector cumulative_exposure(const graph::SocialGraph& graph, const EventLog& log,
                                         hawkes::NewsKind kind, double t, bool transpose = false);

/// Correlation-maximization reward over the stage (t_k, t]: (1/n) M^T F.
[[nodiscard]] double reward(const graph::SocialGraph& graph, const EventLog& log_fake,
                            const EventLog& log_mitigation, double t_k, double t,
                            bool transpose = false);

[[nodiscard]] double campaign_return(std::span<const double> rewards, double gamma);

/// Throws std::invalid_argument unless the action is duplicate-free, avoids
/// `excluded` and costs at most `budget` (summed in selection order).
void validate_action(const Action& action, std::span<const double> costs,
                     std::span<const std::size_t> excluded, double budget);

struct StageOutcome {
    double reward{0.0};
    CampaignState next_state;
};

/// Simulates stage k with the action's debunkers boosted, appending events to
/// `logs`. The boost lives only in a local copy of the parameters.
[[nodiscard]] StageOutcome run_stage(const Scenario& scenario, const CampaignConfig& config,
                                     CampaignLogs& logs, const StageSchedule& schedule,
                                     std::size_t k, const Action& action, double budget,
                                     std::uint64_t seed);

/// A multi-stage decision problem seen by policies and training loops.
class StagedEnvironment {
public:
    virtual ~StagedEnvironment() = default;

    [[nodiscard]] virtual std::size_t num_nodes() const = 0;
    [[nodiscard]] virtual std::size_t num_stages() const = 0;
    [[nodiscard]] virtual std::size_t stage() const = 0;
    [[nodiscard]] virtual std::span<const double> costs() const = 0;
    [[nodiscard]] virtual std::span<const std::size_t> excluded() const = 0;
    [[nodiscard]] virtual double budget() const = 0;
    [[nodiscard]] virtual double total_budget() const = 0;
    [[nodiscard]] virtual CampaignState observe() const = 0;
    /// Executes the current stage and returns its reward.
    virtual double step(const Action& action) = 0;

    [[nodiscard]] bool finished() const { return stage() >= num_stages(); }
};

struct StageRecord {
    std::size_t stage{0};
    double t_start{0.0};
    double t_end{0.0};
    double budget{0.0};
    std::vector<std::size_t> debunkers;
    double cost_spent{0.0};
    double reward{0.0};
};

/// One mitigation campaign over the configured horizon.
class Campaign final : public StagedEnvironment {
public:
    Campaign(const Scenario& scenario, CampaignConfig config, std::uint64_t seed);

    [[nodiscard]] std::size_t num_nodes() const override { return scenario_->n(); }
    [[nodiscard]] std::size_t num_stages() const override { return schedule_.stages(); }
    [[nodiscard]] std::size_t stage() const override { return stage_; }
    [[nodiscard]] std::span<const double> costs() const override {
        return scenario_->graph.costs;
    }
    [[nodiscard]] std::span<const std::size_t> excluded() const override {
        return scenario_->spreaders;
    }
    [[nodiscard]] double budget() const override { return budgets_.at(stage_); }
    [[nodiscard]] double total_budget() const override;
    [[nodiscard]] CampaignState observe() const override { return state_; }
    double step(const Action& action) override;

    [[nodiscard]] const Scenario& scenario() const { return *scenario_; }
    [[nodiscard]] const CampaignConfig& config() const { return config_; }
    [[nodiscard]] const StageSchedule& schedule() const { return schedule_; }
    [[nodiscard]] const std::vector<double>& budgets() const { return budgets_; }
    [[nodiscard]] const CampaignLogs& logs() const { return logs_; }
    [[nodiscard]] const std::vector<StageRecord>& records() const { return records_; }
    [[nodiscard]] std::vector<double> rewards() const;
    [[nodiscard]] double discounted_return() const;

private:
    const Scenario* scenario_;
    CampaignConfig config_;
    std::uint64_t seed_;
    StageSchedule schedule_;
    std::vector<double> budgets_;
    CampaignLogs logs_;
    CampaignState state_;
    std::size_t stage_{0};
    std::vector<StageRecord> records_;
};

// `stage,t_start,t_end,budget,debunkers,cost_spent,reward` with debunkers joined by ';'.
void write_stage_records(std::ostream& out, const std::vector<StageRecord>& records);
[[nodiscard]] std::vector<StageRecord> read_stage_records(std::istream& in);

/// Writes stages.csv, fake_events.csv and mitigation_events.csv into `directory`.
void save_trace(const std::string& directory, const Campaign& campaign);

} // namespace debunk::env
