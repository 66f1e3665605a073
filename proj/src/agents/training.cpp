#include "debunk/agents/training.hpp"

#include "text_util.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace debunk::agents {

void TrainingOptions::validate() const {
    if (replay_capacity == 0) {
        throw std::invalid_argument("training: replay capacity must be positive");
    }
    if (batch_size == 0) {
        throw std::invalid_argument("training: batch size must be positive");
    }
    if (batch_size > replay_capacity) {
        throw std::invalid_argument("training: batch size exceeds replay capacity");
    }
    if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 &&
          epsilon_end <= 1.0)) {
        throw std::invalid_argument("training: epsilon must lie in [0, 1]");
    }
    if (!(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0)) {
        throw std::invalid_argument("training: epsilon decay fraction must lie in [0, 1]");
    }
}

double epsilon_at(const TrainingOptions& options, std::size_t episode) {
    const double span = options.epsilon_decay_fraction * static_cast<double>(options.episodes);
    if (span <= 0.0) {
        return options.epsilon_end;
    }
    const double progress = static_cast<double>(episode) / span;
    if (progress >= 1.0) {
        return options.epsilon_end;
    }
    return options.epsilon_start + (options.epsilon_end - options.epsilon_start) * progress;
}

env::Action select_multi_debunkers(const QPolicy& policy, const FspModel* fsp,
                                   const env::CampaignState& state,
                                   std::span<const double> costs,
                                   std::span<const std::size_t> excluded, double budget) {
    env::Action action;
    env::CampaignState working = state;
    FspModel::Cursor cursor;
    if (fsp != nullptr) {
        cursor = fsp->begin(state);
    }
    Vector scores = policy.q_values(working);
    for (;;) {
        const auto legal = legal_actions(costs, excluded, action.debunkers, budget);
        if (legal.empty()) {
            break;
        }
        const auto pick = masked_argmax(scores, legal);
        action.debunkers.push_back(pick);
        if (fsp != nullptr) {
            working.values = fsp->advance(cursor, pick);
            scores = policy.q_values(working);
        }
    }
    return action;
}

namespace {

struct Streams {
    Rng explore;
    Rng sample;
};

Streams make_streams(std::uint64_t seed, std::uint64_t phase) {
    return {Rng(derive_seed(seed, {phase, 1})), Rng(derive_seed(seed, {phase, 2}))};
}

} // namespace

TrainingResult train_single_debunker(const EnvironmentFactory& make_env,
                                     const TrainingOptions& options) {
    options.validate();
    if (options.episodes == 0) {
        throw std::invalid_argument("train_single_debunker: at least one episode is required");
    }
    auto probe = make_env(0);
    const std::size_t n = probe->num_nodes();

    TrainingResult result{
        QPolicy(n, options.dqn, derive_seed(options.seed, {3})),
        FspModel(n, options.fsp_adam, derive_seed(options.seed, {4})),
        RewardModel(n, options.dqn, derive_seed(options.seed, {5})),
        ReplayBuffer<Transition>(options.replay_capacity),
        ReplayBuffer<FspSample>(options.replay_capacity),
        {},
        {},
    };
    result.policy.set_excluded(probe->excluded());
    auto streams = make_streams(options.seed, 0);

    for (std::size_t episode = 0; episode < options.episodes; ++episode) {
        auto env = episode == 0 ? std::move(probe) : make_env(episode);
        const double eps = epsilon_at(options, episode);
        std::vector<double> rewards;
        double loss_sum = 0.0;
        double fsp_loss_sum = 0.0;
        std::size_t steps = 0;
        std::size_t fsp_steps = 0;

        while (!env->finished()) {
            const auto state = env->observe();
            const std::vector<std::size_t> none;
            const auto legal = legal_actions(env->costs(), env->excluded(), none, env->budget());
            env::Action action;
            if (!legal.empty()) {
                action.debunkers.push_back(
                    q_select(result.policy, state, legal, eps, streams.explore));
            }
            const double r = env->step(action);
            rewards.push_back(r);
            if (action.empty()) {
                continue;
            }
            const auto next = env->observe();
            const std::size_t u = action.debunkers.front();
            result.replay.push({state, u, r, next, env->finished()});
            result.fsp_memory.push({state, {u}, next});

            if (result.replay.size() >= options.batch_size) {
                loss_sum += dqn_train_step(result.policy, result.replay, options.batch_size,
                                           streams.sample);
                ++steps;
                if (options.train_reward_model) {
                    result.reward_model.train_step(result.replay, options.batch_size,
                                                   streams.sample);
                }
            }
            if (options.train_fsp && result.fsp_memory.size() >= options.batch_size) {
                fsp_loss_sum += fsp_train_step(result.fsp, result.fsp_memory, options.batch_size,
                                               streams.sample);
                ++fsp_steps;
            }
        }
        result.curve.push_back({episode, env::campaign_return(rewards, options.dqn.gamma),
                                steps ? loss_sum / static_cast<double>(steps) : 0.0, eps,
                                fsp_steps ? fsp_loss_sum / static_cast<double>(fsp_steps) : 0.0});
    }
    return result;
}

void refine_fsp(TrainingResult& result, const EnvironmentFactory& make_env,
                const TrainingOptions& options) {
    options.validate();
    auto streams = make_streams(options.seed, 1);
    for (std::size_t episode = 0; episode < options.refine_episodes; ++episode) {
        // Offset keeps refinement campaigns distinct from the single-debunker ones.
        auto env = make_env(options.episodes + episode);
        std::vector<double> rewards;
        while (!env->finished()) {
            const auto state = env->observe();
            auto action = select_multi_debunkers(result.policy, &result.fsp, state, env->costs(),
                                                 env->excluded(), env->budget());
            rewards.push_back(env->step(action));
            if (!action.empty()) {
                result.fsp_memory.push({state, std::move(action.debunkers), env->observe()});
            }
        }
        double fsp_loss_sum = 0.0;
        std::size_t fsp_steps = 0;
        if (result.fsp_memory.size() >= options.batch_size) {
            for (std::size_t i = 0; i < options.fsp_updates_per_refine_episode; ++i) {
                fsp_loss_sum += fsp_train_step(result.fsp, result.fsp_memory, options.batch_size,
                                               streams.sample);
                ++fsp_steps;
            }
        }
        result.refine_curve.push_back(
            {episode, env::campaign_return(rewards, options.dqn.gamma), 0.0, 0.0,
             fsp_steps ? fsp_loss_sum / static_cast<double>(fsp_steps) : 0.0});
    }
}

void write_curve(std::ostream& out, const std::vector<CurvePoint>& curve) {
    out << "episode,return,loss,epsilon,fsp_loss\n";
    for (const auto& p : curve) {
        out << p.episode << ',' << detail::format_double(p.campaign_return) << ','
            << detail::format_double(p.dqn_loss) << ',' << detail::format_double(p.epsilon) << ','
            << detail::format_double(p.fsp_loss) << '\n';
    }
}

} // namespace debunk::agents
