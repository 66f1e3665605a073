#pragma once

#include "debunk/agents/dqn.hpp"
#include "debunk/agents/fsp.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace debunk::agents {

using EnvironmentFactory =
    std::function<std::unique_ptr<env::StagedEnvironment>(std::size_t episode)>;

struct TrainingOptions {
    std::size_t episodes{100};
    std::size_t replay_capacity{10000};
    std::size_t batch_size{32};
    double epsilon_start{1.0};
    double epsilon_end{0.05};
    double epsilon_decay_fraction{0.5};  // share of episodes over which epsilon decays linearly
    DqnOptions dqn{};
    nn::AdamOptions fsp_adam{};
    bool train_fsp{true};
    bool train_reward_model{true};
    // Predictor refinement with the frozen Q-network and multi-debunker stages.
    std::size_t refine_episodes{50};
    std::size_t fsp_updates_per_refine_episode{10};
    std::uint64_t seed{1};

    void validate() const;
};

[[nodiscard]] double epsilon_at(const TrainingOptions& options, std::size_t episode);

/// Deterministic multi-debunker selection. The working state starts at
/// `state`; with a predictor, every pick feeds the LSTM and the working state
/// becomes its prediction. Without one the state stays fixed, so the picks
/// follow the Q ranking.
[[nodiscard]] env::Action select_multi_debunkers(const QPolicy& policy, const FspModel* fsp,
                                                 const env::CampaignState& state,
                                                 std::span<const double> costs,
                                                 std::span<const std::size_t> excluded,
                                                 double budget);

struct CurvePoint {
    std::size_t episode{0};
    double campaign_return{0.0};
    double dqn_loss{0.0};  // mean over the episode's training steps, 0 if none
    double epsilon{0.0};
    double fsp_loss{0.0};
};

struct TrainingResult {
    QPolicy policy;
    FspModel fsp;
    RewardModel reward_model;
    ReplayBuffer<Transition> replay{1};
    ReplayBuffer<FspSample> fsp_memory{1};
    std::vector<CurvePoint> curve;
    std::vector<CurvePoint> refine_curve;
};

/// One debunker per stage with epsilon-greedy exploration; each stage
/// transition is stored and followed by one DQN step (plus predictor and
/// reward-model steps) once the memory holds a full batch.
[[nodiscard]] TrainingResult train_single_debunker(const EnvironmentFactory& make_env,
                                                   const TrainingOptions& options);

/// Continues predictor training with the Q-network frozen: each stage picks a
/// debunker set via select_multi_debunkers and stores (s, H, s').
void refine_fsp(TrainingResult& result, const EnvironmentFactory& make_env,
                const TrainingOptions& options);

// `episode,return,loss,epsilon,fsp_loss`
void write_curve(std::ostream& out, const std::vector<CurvePoint>& curve);

} // namespace debunk::agents
