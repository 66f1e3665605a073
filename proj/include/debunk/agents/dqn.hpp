#pragma once

#include "debunk/agents/replay.hpp"
#include "debunk/campaign.hpp"
#include "debunk/nn/adam.hpp"
#include "debunk/nn/dense.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace debunk::agents {

using nn::Matrix;
using nn::Vector;

struct DqnOptions {
    std::vector<std::size_t> hidden{256, 256};
    double gamma{0.8};
    std::size_t sync_period{100};  // training steps between target-network syncs
    nn::AdamOptions adam{};
};

/// Nodes not in `excluded` or `selected` whose cost still fits: the cost of
/// `selected` (summed in order) plus the node's cost is at most `budget`.
[[nodiscard]] std::vector<std::size_t> legal_actions(std::span<const double> costs,
                                                     std::span<const std::size_t> excluded,
                                                     std::span<const std::size_t> selected,
                                                     double budget);

/// Arg-max of `scores` over `legal`; ties go to the lowest node index.
/// Throws std::invalid_argument for an empty legal set.
[[nodiscard]] std::size_t masked_argmax(const Vector& scores, std::span<const std::size_t> legal);

/// y = R + gamma * max_u' Q_target(s', u'), without the bootstrap on terminal stages.
[[nodiscard]] inline double dqn_target(double reward, double gamma, double max_next_q,
                                       bool terminal) {
    return terminal ? reward : reward + gamma * max_next_q;
}

/// Q-network with one output per node, plus its periodically synced target copy.
class QPolicy {
public:
    QPolicy() = default;
    QPolicy(std::size_t num_nodes, DqnOptions options, std::uint64_t init_seed);
    /// Inference-only policy around a loaded network.
    QPolicy(nn::DenseNet online, double gamma);

    [[nodiscard]] Vector q_values(const env::CampaignState& state) const;
    [[nodiscard]] Matrix q_values_batch(const Matrix& states) const;
    [[nodiscard]] Matrix target_values_batch(const Matrix& states) const;

    [[nodiscard]] const nn::DenseNet& online() const { return online_; }
    [[nodiscard]] nn::DenseNet& online() { return online_; }
    [[nodiscard]] const nn::DenseNet& target() const { return target_; }
    [[nodiscard]] nn::AdamOptimizer& optimizer() { return optimizer_; }

    [[nodiscard]] double gamma() const { return gamma_; }
    [[nodiscard]] std::size_t sync_period() const { return sync_period_; }
    [[nodiscard]] std::size_t train_steps() const { return train_steps_; }
    [[nodiscard]] std::size_t num_nodes() const { return online_.output_size(); }

    /// Nodes that can never be selected (fake-news spreaders); they are left
    /// out of the bootstrap maximum.
    void set_excluded(std::span<const std::size_t> excluded);
    [[nodiscard]] const std::vector<char>& selectable() const { return selectable_; }

    void sync_target() { target_ = online_; }
    void record_train_step();

private:
    nn::DenseNet online_;
    nn::DenseNet target_;
    nn::AdamOptimizer optimizer_;
    double gamma_{0.8};
    std::size_t sync_period_{100};
    std::size_t train_steps_{0};
    std::vector<char> selectable_;
};

/// Greedy arg-max over `legal`, or a uniformly random legal node with
/// probability `epsilon`.
[[nodiscard]] std::size_t q_select(const QPolicy& policy, const env::CampaignState& state,
                                   std::span<const std::size_t> legal, double epsilon, Rng& rng);

/// One minibatch gradient step on the squared TD error; returns the loss.
/// Throws std::invalid_argument if the buffer holds fewer than `batch_size` items.
double dqn_train_step(QPolicy& policy, const ReplayBuffer<Transition>& buffer,
                      std::size_t batch_size, Rng& rng);

/// Immediate-reward regressor behind the NN baseline: same architecture as the
/// Q-network, trained on (s, u, r) with no bootstrap.
class RewardModel {
public:
    RewardModel() = default;
    RewardModel(std::size_t num_nodes, const DqnOptions& options, std::uint64_t init_seed);
    explicit RewardModel(nn::DenseNet net);

    [[nodiscard]] Vector predict(const env::CampaignState& state) const;
    [[nodiscard]] const nn::DenseNet& network() const { return net_; }

    double train_step(const ReplayBuffer<Transition>& buffer, std::size_t batch_size, Rng& rng);

private:
    nn::DenseNet net_;
    nn::AdamOptimizer optimizer_;
};

} // namespace debunk::agents
