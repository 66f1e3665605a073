#include "debunk/agents/policies.hpp"

#include "debunk/agents/training.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace debunk::agents {

void Policy::begin_campaign(const env::StagedEnvironment&, std::uint64_t seed) {
    rng_ = Rng(seed);
}

env::Action greedy_fill(std::span<const std::size_t> order, std::span<const double> costs,
                        std::span<const std::size_t> excluded, double budget) {
    std::vector<char> blocked(costs.size(), 0);
    for (auto i : excluded) {
        if (i < blocked.size()) {
            blocked[i] = 1;
        }
    }
    env::Action action;
    double spent = 0.0;
    for (auto i : order) {
        if (i >= costs.size() || blocked[i]) {
            continue;
        }
        if (spent + costs[i] <= budget) {
            action.debunkers.push_back(i);
            spent += costs[i];
            blocked[i] = 1;
        }
    }
    return action;
}

std::vector<std::size_t> rank_descending(const Vector& scores) {
    std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[static_cast<Eigen::Index>(a)] > scores[static_cast<Eigen::Index>(b)];
    });
    return order;
}

env::Action random_fill(std::span<const double> costs, std::span<const std::size_t> excluded,
                        double budget, Rng& rng) {
    env::Action action;
    for (;;) {
        const auto legal = legal_actions(costs, excluded, action.debunkers, budget);
        if (legal.empty()) {
            return action;
        }
        action.debunkers.push_back(legal[static_cast<std::size_t>(rng.below(legal.size()))]);
    }
}

namespace {

class NoMitigation final : public Policy {
public:
    std::string name() const override { return "NONE"; }
    env::Action act(const env::StagedEnvironment&) override { return {}; }
};

class RandomPolicy final : public Policy {
public:
    std::string name() const override { return "RND"; }
    env::Action act(const env::StagedEnvironment& env) override {
        return random_fill(env.costs(), env.excluded(), env.budget(), rng_);
    }
};

// Score p_i = z_M,i * z_F,i.
class MaxInfluence final : public Policy {
public:
    std::string name() const override { return "MAX-INF"; }
    env::Action act(const env::StagedEnvironment& env) override {
        const auto s = env.observe();
        const Vector scores = s.z_mitigation().cwiseProduct(s.z_fake());
        const auto order = rank_descending(scores);
        return greedy_fill(order, env.costs(), env.excluded(), env.budget());
    }
};

class MaxCoverage final : public Policy {
public:
    std::string name() const override { return "MAX-COV"; }
    env::Action act(const env::StagedEnvironment& env) override {
        const auto costs = env.costs();
        std::vector<std::size_t> order(costs.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
        return greedy_fill(order, costs, env.excluded(), env.budget());
    }
};

class RewardRegressor final : public Policy {
public:
    explicit RewardRegressor(std::shared_ptr<const RewardModel> model) : model_(std::move(model)) {}
    std::string name() const override { return "NN"; }
    env::Action act(const env::StagedEnvironment& env) override {
        const auto order = rank_descending(model_->predict(env.observe()));
        return greedy_fill(order, env.costs(), env.excluded(), env.budget());
    }

private:
    std::shared_ptr<const RewardModel> model_;
};

class DqnPolicy final : public Policy {
public:
    DqnPolicy(std::shared_ptr<const QPolicy> q, std::shared_ptr<const FspModel> fsp)
        : q_(std::move(q)), fsp_(std::move(fsp)) {}
    std::string name() const override { return fsp_ ? "DQN-FSP" : "DQN"; }
    env::Action act(const env::StagedEnvironment& env) override {
        return select_multi_debunkers(*q_, fsp_.get(), env.observe(), env.costs(), env.excluded(),
                                      env.budget());
    }

private:
    std::shared_ptr<const QPolicy> q_;
    std::shared_ptr<const FspModel> fsp_;
};

// One random debunker set for the whole campaign, drawn within the first
// stage's budget; stages with smaller budgets keep the longest fitting prefix.
class FixedRandomDebunkers final : public Policy {
public:
    std::string name() const override { return "LTD"; }
    bool equal_split_budgets() const override { return true; }
    void begin_campaign(const env::StagedEnvironment& env, std::uint64_t seed) override {
        Policy::begin_campaign(env, seed);
        fixed_ = random_fill(env.costs(), env.excluded(), env.budget(), rng_);
    }
    env::Action act(const env::StagedEnvironment& env) override {
        env::Action action = fixed_;
        const auto costs = env.costs();
        double spent = 0.0;
        for (auto i : action.debunkers) {
            spent += costs[i];
        }
        while (!action.empty() && spent > env.budget()) {
            spent -= costs[action.debunkers.back()];
            action.debunkers.pop_back();
        }
        return action;
    }

private:
    env::Action fixed_;
};

template <typename T>
std::shared_ptr<const T> require(const std::shared_ptr<const T>& model, const std::string& name) {
    if (!model) {
        throw std::invalid_argument("policy " + name + " needs a trained model");
    }
    return model;
}

} // namespace

const std::vector<std::string>& policy_names() {
    static const std::vector<std::string> names{"RND", "MAX-INF", "MAX-COV", "NN",
                                                "DQN", "DQN-FSP", "LTD",     "NONE"};
    return names;
}

bool policy_needs_models(const std::string& name) {
    return name == "NN" || name == "DQN" || name == "DQN-FSP";
}

std::unique_ptr<Policy> make_policy(const std::string& name, const LearnedModels& models) {
    if (name == "RND") {
        return std::make_unique<RandomPolicy>();
    }
    if (name == "MAX-INF") {
        return std::make_unique<MaxInfluence>();
    }
    if (name == "MAX-COV") {
        return std::make_unique<MaxCoverage>();
    }
    if (name == "NN") {
        return std::make_unique<RewardRegressor>(require(models.reward, name));
    }
    if (name == "DQN") {
        return std::make_unique<DqnPolicy>(require(models.q, name), nullptr);
    }
    if (name == "DQN-FSP") {
        return std::make_unique<DqnPolicy>(require(models.q, name), require(models.fsp, name));
    }
    if (name == "LTD") {
        return std::make_unique<FixedRandomDebunkers>();
    }
    if (name == "NONE") {
        return std::make_unique<NoMitigation>();
    }
    std::string valid;
    for (const auto& n : policy_names()) {
        valid += (valid.empty() ? "" : ", ") + n;
    }
    throw std::invalid_argument("unknown policy '" + name + "' (valid: " + valid + ")");
}

} // namespace debunk::agents
