#include "debunk/campaign.hpp"

#include "debunk/random.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <stdexcept>

namespace debunk::env {

namespace {

// Stream tags for the per-campaign random substreams.
constexpr std::uint64_t kScheduleStream = 1;
constexpr std::uint64_t kBudgetStream = 2;
constexpr std::uint64_t kStageStream = 3;

} // namespace

void CampaignConfig::validate() const {
    if (!(horizon > 0.0)) {
        throw std::invalid_argument("campaign.horizon must be positive");
    }
    if (num_stages < 1) {
        throw std::invalid_argument("campaign.stages must be at least 1");
    }
    if (!(budget_min > 0.0) || budget_min > budget_max) {
        throw std::invalid_argument("campaign budget range must satisfy 0 < min <= max");
    }
    if (!(boost >= 0.0)) {
        throw std::invalid_argument("campaign.boost must be nonnegative");
    }
    if (!(delta_T > 0.0)) {
        throw std::invalid_argument("campaign.delta_t must be positive");
    }
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("campaign.gamma must lie in [0, 1]");
    }
}

void Scenario::validate() const {
    params.validate();
    if (params.n() != graph.n) {
        throw std::invalid_argument("scenario: graph and parameters disagree on node count");
    }
    if (!graph.has_costs() && graph.n > 0) {
        throw std::invalid_argument("scenario: graph has no mitigation costs");
    }
    for (auto s : spreaders) {
        if (s >= graph.n) {
            throw std::invalid_argument("scenario: spreader index out of range");
        }
    }
}

StageSchedule make_schedule(const CampaignConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    std::set<double> interior;
    while (interior.size() + 1 < config.num_stages) {
        const double t = rng.uniform() * config.horizon;
        if (t > 0.0 && t < config.horizon) {
            interior.insert(t);
        }
    }
    StageSchedule schedule;
    schedule.boundaries.reserve(config.num_stages + 1);
    schedule.boundaries.push_back(0.0);
    schedule.boundaries.insert(schedule.boundaries.end(), interior.begin(), interior.end());
    schedule.boundaries.push_back(config.horizon);
    return schedule;
}

std::vector<double> draw_budgets(const CampaignConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng(seed);
    std::vector<double> budgets(config.num_stages);
    for (auto& b : budgets) {
        b = rng.uniform(config.budget_min, config.budget_max);
    }
    if (config.equal_split_budgets) {
        const double mean = std::accumulate(budgets.begin(), budgets.end(), 0.0) /
                            static_cast<double>(budgets.size());
        std::fill(budgets.begin(), budgets.end(), mean);
    }
    return budgets;
}

CampaignState build_state(const HawkesParams& params, const graph::SocialGraph& graph,
                          const EventLog& log_fake, const EventLog& log_mitigation, double t_k,
                          double delta_T, bool normalize_followers) {
    using hawkes::NewsKind;
    const std::size_t n = params.n();
    if (graph.n != n) {
        throw std::invalid_argument("build_state: graph and parameters disagree on node count");
    }
    CampaignState state(n);
    state.block(0) = hawkes::excitation(params, NewsKind::Fake, log_fake, t_k);
    state.block(1) = hawkes::excitation(params, NewsKind::Mitigation, log_mitigation, t_k);
    state.block(2) =
        hawkes::counts_between(log_fake, NewsKind::Fake, n, t_k - delta_T, t_k) / delta_T;
    state.block(3) =
        hawkes::counts_between(log_mitigation, NewsKind::Mitigation, n, t_k - delta_T, t_k) /
        delta_T;
    auto e = state.block(4);
    for (std::size_t i = 0; i < n; ++i) {
        e[static_cast<Eigen::Index>(i)] = static_cast<double>(graph.followers[i]);
    }
    if (normalize_followers && n > 0) {
        const double lo = e.minCoeff();
        const double hi = e.maxCoeff();
        if (hi > lo) {
            e = (e.array() - lo) / (hi - lo);
        } else {
            e.setZero();
        }
    }
    return state;
}

HawkesParams apply_action(const HawkesParams& params, const Action& action, double boost) {
    HawkesParams boosted = params;
    for (auto i : action.debunkers) {
        if (i >= params.n()) {
            throw std::out_of_range("apply_action: debunker index out of range");
        }
        boosted.mu_mitigation[static_cast<Eigen::Index>(i)] += boost;
    }
    return boosted;
}

Vector exposure_rate(const graph::SocialGraph& graph, const EventLog& log, hawkes::NewsKind kind,
                     double t0, double t1, bool transpose) {
    if (!(t1 > t0)) {
        throw std::invalid_argument("exposure window must satisfy t > t_k");
    }
    const Vector posts = hawkes::counts_between(log, kind, graph.n, t0, t1);
    Vector exposed = transpose ? Vector(graph.adjacency.transpose() * posts)
                               : Vector(graph.adjacency * posts);
    return exposed / (t1 - t0);
}

Vector cumulative_exposure(const graph::SocialGraph& graph, const EventLog& log,
                           hawkes::NewsKind kind, double t, bool transpose) {
    const Vector posts = hawkes::counts(log, kind, graph.n, t);
    return transpose ? Vector(graph.adjacency.transpose() * posts)
                     : Vector(graph.adjacency * posts);
}

double reward(const graph::SocialGraph& graph, const EventLog& log_fake,
              const EventLog& log_mitigation, double t_k, double t, bool transpose) {
    using hawkes::NewsKind;
    if (!(t > t_k)) {
        throw std::invalid_argument("reward: evaluation time must exceed the stage start");
    }
    if (graph.n == 0) {
        return 0.0;
    }
    const Vector m = exposure_rate(graph, log_mitigation, NewsKind::Mitigation, t_k, t, transpose);
    const Vector f = exposure_rate(graph, log_fake, NewsKind::Fake, t_k, t, transpose);
    return m.dot(f) / static_cast<double>(graph.n);
}

double campaign_return(std::span<const double> rewards, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("campaign_return: gamma must lie in [0, 1]");
    }
    double total = 0.0;
    double discount = 1.0;
    for (double r : rewards) {
        total += discount * r;
        discount *= gamma;
    }
    return total;
}

void validate_action(const Action& action, std::span<const double> costs,
                     std::span<const std::size_t> excluded, double budget) {
    std::vector<char> seen(costs.size(), 0);
    double spent = 0.0;
    for (auto i : action.debunkers) {
        if (i >= costs.size()) {
            throw std::invalid_argument("action: debunker index out of range");
        }
        if (seen[i]) {
            throw std::invalid_argument("action: duplicate debunker " + std::to_string(i));
        }
        seen[i] = 1;
        if (std::find(excluded.begin(), excluded.end(), i) != excluded.end()) {
            throw std::invalid_argument("action: fake-news spreader " + std::to_string(i) +
                                        " selected as debunker");
        }
        spent += costs[i];
    }
    if (spent > budget) {
        throw std::invalid_argument("action: cost " + std::to_string(spent) +
                                    " exceeds stage budget " + std::to_string(budget));
    }
}

StageOutcome run_stage(const Scenario& scenario, const CampaignConfig& config, CampaignLogs& logs,
                       const StageSchedule& schedule, std::size_t k, const Action& action,
                       double budget, std::uint64_t seed) {
    using hawkes::NewsKind;
    if (k >= schedule.stages()) {
        throw std::out_of_range("run_stage: stage index out of range");
    }
    validate_action(action, scenario.graph.costs, scenario.spreaders, budget);
    const double t0 = schedule.start(k);
    const double t1 = schedule.end(k);
    const HawkesParams boosted = apply_action(scenario.params, action, config.boost);

    // Stability depends on A and omega only, which the boost leaves untouched.
    hawkes::simulate_append(scenario.params, NewsKind::Fake, logs.fake, t0, t1,
                            derive_seed(seed, {kStageStream, k, 0}), false);
    hawkes::simulate_append(boosted, NewsKind::Mitigation, logs.mitigation, t0, t1,
                            derive_seed(seed, {kStageStream, k, 1}), false);

    StageOutcome outcome;
    outcome.reward =
        reward(scenario.graph, logs.fake, logs.mitigation, t0, t1, config.exposure_transpose);
    outcome.next_state = build_state(scenario.params, scenario.graph, logs.fake, logs.mitigation,
                                     t1, config.delta_T, config.normalize_followers);
    return outcome;
}

Campaign::Campaign(const Scenario& scenario, CampaignConfig config, std::uint64_t seed)
    : scenario_(&scenario), config_(config), seed_(seed) {
    config_.validate();
    scenario.validate();
    const double radius = scenario.params.branching_radius();
    if (radius >= 1.0) {
        throw hawkes::StabilityError("campaign: spectral radius of A/omega is " +
                                     std::to_string(radius) + " (must be < 1)");
    }
    schedule_ = make_schedule(config_, derive_seed(seed_, {kScheduleStream}));
    budgets_ = draw_budgets(config_, derive_seed(seed_, {kBudgetStream}));
    logs_.fake.horizon = 0.0;
    logs_.mitigation.horizon = 0.0;
    state_ = build_state(scenario.params, scenario.graph, logs_.fake, logs_.mitigation, 0.0,
                         config_.delta_T, config_.normalize_followers);
}

double Campaign::total_budget() const {
    return std::accumulate(budgets_.begin(), budgets_.end(), 0.0);
}

double Campaign::step(const Action& action) {
    if (finished()) {
        throw std::logic_error("campaign: all stages already executed");
    }
    const double stage_budget = budgets_[stage_];
    auto outcome = run_stage(*scenario_, config_, logs_, schedule_, stage_, action, stage_budget,
                             seed_);
    StageRecord record;
    record.stage = stage_;
    record.t_start = schedule_.start(stage_);
    record.t_end = schedule_.end(stage_);
    record.budget = stage_budget;
    record.debunkers = action.debunkers;
    for (auto i : action.debunkers) {
        record.cost_spent += scenario_->graph.costs[i];
    }
    record.reward = outcome.reward;
    records_.push_back(std::move(record));
    state_ = std::move(outcome.next_state);
    ++stage_;
    return outcome.reward;
}

std::vector<double> Campaign::rewards() const {
    std::vector<double> out;
    out.reserve(records_.size());
    for (const auto& r : records_) {
        out.push_back(r.reward);
    }
    return out;
}

double Campaign::discounted_return() const {
    const auto r = rewards();
    return campaign_return(r, config_.gamma);
}

void write_stage_records(std::ostream& out, const std::vector<StageRecord>& records) {
    out << "stage,t_start,t_end,budget,debunkers,cost_spent,reward\n";
    for (const auto& r : records) {
        out << r.stage << ',' << detail::format_double(r.t_start) << ','
            << detail::format_double(r.t_end) << ',' << detail::format_double(r.budget) << ',';
        for (std::size_t i = 0; i < r.debunkers.size(); ++i) {
            out << (i ? ";" : "") << r.debunkers[i];
        }
        out << ',' << detail::format_double(r.cost_spent) << ','
            << detail::format_double(r.reward) << '\n';
    }
}

std::vector<StageRecord> read_stage_records(std::istream& in) {
    std::vector<StageRecord> records;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line.rfind("stage,", 0) == 0) {
            continue;
        }
        const auto fields = detail::split(line, ',');
        if (fields.size() != 7) {
            throw std::runtime_error("stage record line " + std::to_string(line_number) +
                                     ": expected 7 fields");
        }
        try {
            StageRecord r;
            r.stage = detail::parse_index(fields[0]);
            r.t_start = detail::parse_double(fields[1]);
            r.t_end = detail::parse_double(fields[2]);
            r.budget = detail::parse_double(fields[3]);
            if (!fields[4].empty()) {
                for (auto id : detail::split(fields[4], ';')) {
                    r.debunkers.push_back(detail::parse_index(id));
                }
            }
            r.cost_spent = detail::parse_double(fields[5]);
            r.reward = detail::parse_double(fields[6]);
            records.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error("stage record line " + std::to_string(line_number) + ": " +
                                     e.what());
        }
    }
    return records;
}

void save_trace(const std::string& directory, const Campaign& campaign) {
    std::filesystem::create_directories(directory);
    const std::filesystem::path dir(directory);
    std::ofstream stages(dir / "stages.csv");
    if (!stages) {
        throw std::runtime_error("cannot write trace into " + directory);
    }
    write_stage_records(stages, campaign.records());
    hawkes::save_event_log((dir / "fake_events.csv").string(), campaign.logs().fake);
    hawkes::save_event_log((dir / "mitigation_events.csv").string(), campaign.logs().mitigation);
}

} // namespace debunk::env
