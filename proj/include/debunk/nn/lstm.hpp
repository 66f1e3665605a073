#pragma once

#include "debunk/nn/dense.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace debunk::nn {

/// LSTM cell with a linear readout of the hidden state.
///
/// Gate pre-activations are W [x; h_prev] + b with the rows of W stacked as
/// input, forget, output and candidate blocks.
class LstmCell {
public:
    LstmCell() = default;
    LstmCell(std::size_t input_size, std::size_t hidden_size, std::size_t output_size);

    void init_uniform(Rng& rng);

    [[nodiscard]] std::size_t input_size() const { return input_; }
    [[nodiscard]] std::size_t hidden_size() const { return hidden_; }
    [[nodiscard]] std::size_t output_size() const { return output_; }
    [[nodiscard]] std::size_t parameter_count() const {
        return static_cast<std::size_t>(params_.size());
    }

    [[nodiscard]] Vector& parameters() { return params_; }
    [[nodiscard]] const Vector& parameters() const { return params_; }

    [[nodiscard]] Eigen::Map<const Matrix> gate_weight() const;
    [[nodiscard]] Eigen::Map<Matrix> gate_weight();
    [[nodiscard]] Eigen::Map<const Vector> gate_bias() const;
    [[nodiscard]] Eigen::Map<Vector> gate_bias();
    [[nodiscard]] Eigen::Map<const Matrix> readout_weight() const;
    [[nodiscard]] Eigen::Map<Matrix> readout_weight();
    [[nodiscard]] Eigen::Map<const Vector> readout_bias() const;
    [[nodiscard]] Eigen::Map<Vector> readout_bias();

    struct Step {
        Vector hidden;
        Vector cell;
        Vector readout;
    };

    [[nodiscard]] Step step(const Vector& hidden, const Vector& cell, const Vector& input) const;

    /// Intermediate values of a batched unroll, one sample per column.
    struct Trace {
        std::vector<Matrix> inputs;
        std::vector<Matrix> hidden;  // hidden[0] is the initial state
        std::vector<Matrix> cell;    // cell[0] is the initial state
        std::vector<Matrix> input_gate, forget_gate, output_gate, candidate;
        Matrix readout;              // readout of the final hidden state
    };

    /// Runs the recurrence over `inputs` and returns the readout of the last step.
    [[nodiscard]] Matrix forward_sequence(const Matrix& hidden0, const Matrix& cell0,
                                          std::span<const Matrix> inputs, Trace* trace) const;

    /// Gradient of sum <final readout, upstream> with respect to all parameters
    /// (backpropagation through time).
    [[nodiscard]] Vector backward_sequence(const Trace& trace, const Matrix& upstream) const;

    bool operator==(const LstmCell& other) const {
        return input_ == other.input_ && hidden_ == other.hidden_ && output_ == other.output_ &&
               params_ == other.params_;
    }

private:
    std::size_t input_{0};
    std::size_t hidden_{0};
    std::size_t output_{0};
    Vector params_;

    [[nodiscard]] std::size_t gate_rows() const { return 4 * hidden_; }
    [[nodiscard]] std::size_t gate_cols() const { return input_ + hidden_; }
    [[nodiscard]] std::size_t bias_offset() const { return gate_rows() * gate_cols(); }
    [[nodiscard]] std::size_t readout_offset() const { return bias_offset() + gate_rows(); }
    [[nodiscard]] std::size_t readout_bias_offset() const {
        return readout_offset() + output_ * hidden_;
    }
};

} // namespace debunk::nn
