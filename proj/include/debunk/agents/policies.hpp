#pragma once

#include "debunk/agents/dqn.hpp"
#include "debunk/agents/fsp.hpp"
#include "debunk/campaign.hpp"
#include "debunk/random.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace debunk::agents {

/// A debunker-selection rule run over one campaign at a time.
class Policy {
public:
    virtual ~Policy() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    /// Called before the first stage; `seed` drives the policy's own random stream.
    virtual void begin_campaign(const env::StagedEnvironment& env, std::uint64_t seed);
    [[nodiscard]] virtual env::Action act(const env::StagedEnvironment& env) = 0;
    /// Whether the policy is evaluated with the campaign budget split equally over stages.
    [[nodiscard]] virtual bool equal_split_budgets() const { return false; }

protected:
    Rng rng_{0};
};

/// Walks `order` and keeps every node that is legal and still fits the budget.
[[nodiscard]] env::Action greedy_fill(std::span<const std::size_t> order,
                                      std::span<const double> costs,
                                      std::span<const std::size_t> excluded, double budget);

/// Node indices sorted by descending score; ties keep the lower index first.
[[nodiscard]] std::vector<std::size_t> rank_descending(const Vector& scores);

/// Uniformly random affordable nodes, added one at a time until none fit.
[[nodiscard]] env::Action random_fill(std::span<const double> costs,
                                      std::span<const std::size_t> excluded, double budget,
                                      Rng& rng);

struct LearnedModels {
    std::shared_ptr<const QPolicy> q;
    std::shared_ptr<const FspModel> fsp;
    std::shared_ptr<const RewardModel> reward;
};

/// Policy names accepted by make_policy, in reporting order.
[[nodiscard]] const std::vector<std::string>& policy_names();

/// Builds a policy by name. Learned policies need the matching model in
/// `models`; unknown names throw std::invalid_argument listing the valid ones.
[[nodiscard]] std::unique_ptr<Policy> make_policy(const std::string& name,
                                                  const LearnedModels& models = {});

[[nodiscard]] bool policy_needs_models(const std::string& name);

} // namespace debunk::agents
