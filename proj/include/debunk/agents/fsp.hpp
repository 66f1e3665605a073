#pragma once

#include "debunk/agents/replay.hpp"
#include "debunk/nn/adam.hpp"
#include "debunk/nn/lstm.hpp"

#include <cstddef>
#include <cstdint>
#include <span>

namespace debunk::agents {

/// Future-state predictor: an LSTM whose hidden state starts as the observed
/// stage state s^k; each selected debunker is fed as a one-hot input and the
/// readout after the last one is the predicted next state.
class FspModel {
public:
    FspModel() = default;
    FspModel(std::size_t num_nodes, nn::AdamOptions options, std::uint64_t init_seed);
    explicit FspModel(nn::LstmCell cell);

    /// Recurrent state while debunkers are being chosen within one stage.
    struct Cursor {
        nn::Vector hidden;
        nn::Vector cell;
    };

    [[nodiscard]] Cursor begin(const env::CampaignState& state) const;
    /// Feeds one debunker and returns the predicted state (length 5n).
    [[nodiscard]] nn::Vector advance(Cursor& cursor, std::size_t debunker) const;
    [[nodiscard]] nn::Vector predict(const env::CampaignState& state,
                                     std::span<const std::size_t> debunkers) const;

    [[nodiscard]] std::size_t num_nodes() const { return cell_.input_size(); }
    [[nodiscard]] const nn::LstmCell& cell() const { return cell_; }
    [[nodiscard]] nn::LstmCell& cell() { return cell_; }
    [[nodiscard]] nn::AdamOptimizer& optimizer() { return optimizer_; }

private:
    nn::LstmCell cell_;
    nn::AdamOptimizer optimizer_;
};

/// One minibatch step on the mean squared error between predicted and observed
/// next states. Samples are grouped by sequence length for batched unrolls.
double fsp_train_step(FspModel& model, const ReplayBuffer<FspSample>& memory,
                      std::size_t batch_size, Rng& rng);

/// Mean squared prediction error over the given samples, without updating.
[[nodiscard]] double fsp_loss(const FspModel& model, const ReplayBuffer<FspSample>& memory,
                              std::span<const std::size_t> indices);

} // namespace debunk::agents
