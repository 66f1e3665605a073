#include "debunk/agents/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace debunk::agents {

namespace {

std::vector<std::size_t> architecture(std::size_t num_nodes, const std::vector<std::size_t>& hidden) {
    std::vector<std::size_t> sizes{5 * num_nodes};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(num_nodes);
    return sizes;
}

Matrix stack_states(const ReplayBuffer<Transition>& buffer, std::span<const std::size_t> idx,
                    bool next) {
    const auto dim = static_cast<Eigen::Index>(buffer[idx.front()].state.dim());
    Matrix out(dim, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t b = 0; b < idx.size(); ++b) {
        const auto& t = buffer[idx[b]];
        out.col(static_cast<Eigen::Index>(b)) = next ? t.next_state.values : t.state.values;
    }
    return out;
}

} // namespace

std::vector<std::size_t> legal_actions(std::span<const double> costs,
                                       std::span<const std::size_t> excluded,
                                       std::span<const std::size_t> selected, double budget) {
    if (budget < 0.0) {
        throw std::invalid_argument("legal_actions: remaining budget must be nonnegative");
    }
    std::vector<char> blocked(costs.size(), 0);
    for (auto i : excluded) {
        if (i < blocked.size()) {
            blocked[i] = 1;
        }
    }
    double spent = 0.0;
    for (auto i : selected) {
        if (i < blocked.size()) {
            blocked[i] = 1;
            spent += costs[i];
        }
    }
    std::vector<std::size_t> legal;
    for (std::size_t i = 0; i < costs.size(); ++i) {
        if (!blocked[i] && spent + costs[i] <= budget) {
            legal.push_back(i);
        }
    }
    return legal;
}

std::size_t masked_argmax(const Vector& scores, std::span<const std::size_t> legal) {
    if (legal.empty()) {
        throw std::invalid_argument("masked_argmax: no legal action");
    }
    std::size_t best = legal.front();
    for (auto i : legal) {
        if (i >= static_cast<std::size_t>(scores.size())) {
            throw std::out_of_range("masked_argmax: node index out of range");
        }
        const double s = scores[static_cast<Eigen::Index>(i)];
        const double b = scores[static_cast<Eigen::Index>(best)];
        if (s > b || (s == b && i < best)) {
            best = i;
        }
    }
    return best;
}

QPolicy::QPolicy(std::size_t num_nodes, DqnOptions options, std::uint64_t init_seed)
    : online_(architecture(num_nodes, options.hidden)),
      gamma_(options.gamma),
      sync_period_(options.sync_period),
      selectable_(num_nodes, 1) {
    if (!(gamma_ >= 0.0 && gamma_ <= 1.0)) {
        throw std::invalid_argument("QPolicy: gamma must lie in [0, 1]");
    }
    if (sync_period_ == 0) {
        throw std::invalid_argument("QPolicy: sync period must be positive");
    }
    Rng rng(init_seed);
    online_.init_uniform(rng);
    target_ = online_;
    optimizer_ = nn::AdamOptimizer(online_.parameter_count(), options.adam);
}

QPolicy::QPolicy(nn::DenseNet online, double gamma)
    : online_(std::move(online)), gamma_(gamma), selectable_(online_.output_size(), 1) {
    target_ = online_;
    optimizer_ = nn::AdamOptimizer(online_.parameter_count());
}

Vector QPolicy::q_values(const env::CampaignState& state) const {
    return online_.forward(state.values);
}

Matrix QPolicy::q_values_batch(const Matrix& states) const { return online_.forward(states); }

Matrix QPolicy::target_values_batch(const Matrix& states) const {
    return target_.forward(states);
}

void QPolicy::set_excluded(std::span<const std::size_t> excluded) {
    selectable_.assign(num_nodes(), 1);
    for (auto i : excluded) {
        if (i < selectable_.size()) {
            selectable_[i] = 0;
        }
    }
}

void QPolicy::record_train_step() {
    ++train_steps_;
    if (train_steps_ % sync_period_ == 0) {
        sync_target();
    }
}

std::size_t q_select(const QPolicy& policy, const env::CampaignState& state,
                     std::span<const std::size_t> legal, double epsilon, Rng& rng) {
    if (legal.empty()) {
        throw std::invalid_argument("q_select: empty legal set");
    }
    if (epsilon > 0.0 && rng.uniform() < epsilon) {
        return legal[static_cast<std::size_t>(rng.below(legal.size()))];
    }
    return masked_argmax(policy.q_values(state), legal);
}

double dqn_train_step(QPolicy& policy, const ReplayBuffer<Transition>& buffer,
                      std::size_t batch_size, Rng& rng) {
    if (batch_size == 0 || buffer.size() < batch_size) {
        throw std::invalid_argument("dqn_train_step: replay buffer smaller than batch");
    }
    const auto idx = buffer.sample_indices(batch_size, rng);
    const Matrix states = stack_states(buffer, idx, false);
    const Matrix next_states = stack_states(buffer, idx, true);

    nn::DenseNet::Tape tape;
    const Matrix q = policy.online().forward(states, tape);
    const Matrix q_next = policy.target_values_batch(next_states);
    const auto& selectable = policy.selectable();

    const auto batch = static_cast<Eigen::Index>(batch_size);
    Matrix upstream = Matrix::Zero(q.rows(), batch);
    double loss = 0.0;
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto& t = buffer[idx[static_cast<std::size_t>(b)]];
        double best = -std::numeric_limits<double>::infinity();
        for (Eigen::Index u = 0; u < q_next.rows(); ++u) {
            if (selectable[static_cast<std::size_t>(u)]) {
                best = std::max(best, q_next(u, b));
            }
        }
        if (!std::isfinite(best)) {
            best = 0.0;
        }
        const double y = dqn_target(t.reward, policy.gamma(), best, t.terminal);
        if (!std::isfinite(y)) {
            throw std::domain_error("dqn_train_step: non-finite Q target");
        }
        const auto a = static_cast<Eigen::Index>(t.action);
        const double err = q(a, b) - y;
        loss += err * err;
        upstream(a, b) = 2.0 * err / static_cast<double>(batch);
    }
    loss /= static_cast<double>(batch);

    const Vector grad = policy.online().backward(tape, upstream);
    policy.optimizer().step(policy.online().parameters(), grad);
    policy.record_train_step();
    return loss;
}

RewardModel::RewardModel(std::size_t num_nodes, const DqnOptions& options,
                         std::uint64_t init_seed)
    : net_(architecture(num_nodes, options.hidden)) {
    Rng rng(init_seed);
    net_.init_uniform(rng);
    optimizer_ = nn::AdamOptimizer(net_.parameter_count(), options.adam);
}

RewardModel::RewardModel(nn::DenseNet net) : net_(std::move(net)) {
    optimizer_ = nn::AdamOptimizer(net_.parameter_count());
}

Vector RewardModel::predict(const env::CampaignState& state) const {
    return net_.forward(state.values);
}

double RewardModel::train_step(const ReplayBuffer<Transition>& buffer, std::size_t batch_size,
                               Rng& rng) {
    if (batch_size == 0 || buffer.size() < batch_size) {
        throw std::invalid_argument("RewardModel::train_step: replay buffer smaller than batch");
    }
    const auto idx = buffer.sample_indices(batch_size, rng);
    const Matrix states = stack_states(buffer, idx, false);
    nn::DenseNet::Tape tape;
    const Matrix out = net_.forward(states, tape);
    const auto batch = static_cast<Eigen::Index>(batch_size);
    Matrix upstream = Matrix::Zero(out.rows(), batch);
    double loss = 0.0;
    for (Eigen::Index b = 0; b < batch; ++b) {
        const auto& t = buffer[idx[static_cast<std::size_t>(b)]];
        const auto a = static_cast<Eigen::Index>(t.action);
        const double err = out(a, b) - t.reward;
        loss += err * err;
        upstream(a, b) = 2.0 * err / static_cast<double>(batch);
    }
    optimizer_.step(net_.parameters(), net_.backward(tape, upstream));
    return loss / static_cast<double>(batch);
}

} // namespace debunk::agents
