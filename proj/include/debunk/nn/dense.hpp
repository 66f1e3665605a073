#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace debunk {
class Rng;
}

namespace debunk::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Fully connected network: rectifier hidden layers, linear output layer.
///
/// Parameters live in one flat vector (per layer: weights column-major, then
/// bias) so optimizers and checkpoints treat every network uniformly.
class DenseNet {
public:
    DenseNet() = default;
    /// Zero-initialized network. Needs at least an input and an output size.
    explicit DenseNet(std::vector<std::size_t> layer_sizes);

    /// Uniform in +-1/sqrt(fan_in) for weights and biases.
    void init_uniform(Rng& rng);

    [[nodiscard]] const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    [[nodiscard]] std::size_t num_layers() const { return sizes_.size() - 1; }
    [[nodiscard]] std::size_t input_size() const { return sizes_.front(); }
    [[nodiscard]] std::size_t output_size() const { return sizes_.back(); }
    [[nodiscard]] std::size_t parameter_count() const {
        return static_cast<std::size_t>(params_.size());
    }

    [[nodiscard]] Vector& parameters() { return params_; }
    [[nodiscard]] const Vector& parameters() const { return params_; }

    [[nodiscard]] Eigen::Map<const Matrix> weight(std::size_t layer) const;
    [[nodiscard]] Eigen::Map<Matrix> weight(std::size_t layer);
    [[nodiscard]] Eigen::Map<const Vector> bias(std::size_t layer) const;
    [[nodiscard]] Eigen::Map<Vector> bias(std::size_t layer);

    /// Post-activation outputs of every layer; activations[0] is the input batch.
    struct Tape {
        std::vector<Matrix> activations;
    };

    [[nodiscard]] Vector forward(const Vector& x) const;
    /// Batch forward, one sample per column.
    [[nodiscard]] Matrix forward(const Matrix& x) const;
    [[nodiscard]] Matrix forward(const Matrix& x, Tape& tape) const;

    /// Gradient of sum_b <output_b, upstream_b> with respect to all parameters,
    /// in the layout of parameters().
    [[nodiscard]] Vector backward(const Tape& tape, const Matrix& upstream) const;
    [[nodiscard]] Vector backward(const Vector& x, const Vector& upstream) const;

    bool operator==(const DenseNet& other) const {
        return sizes_ == other.sizes_ && params_.size() == other.params_.size() &&
               params_ == other.params_;
    }

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_;  // start of each layer's weights
    Vector params_;

    void check_input(Eigen::Index rows) const;
};

} // namespace debunk::nn
