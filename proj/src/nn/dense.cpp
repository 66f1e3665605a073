#include "debunk/nn/dense.hpp"

#include "debunk/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace debunk::nn {

DenseNet::DenseNet(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) {
        throw std::invalid_argument("DenseNet: need at least input and output sizes");
    }
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        if (sizes_[l] == 0 || sizes_[l + 1] == 0) {
            throw std::invalid_argument("DenseNet: layer sizes must be positive");
        }
        offsets_.push_back(total);
        total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    }
    params_ = Vector::Zero(static_cast<Eigen::Index>(total));
}

void DenseNet::init_uniform(Rng& rng) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const double limit = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
        auto w = weight(l);
        for (Eigen::Index j = 0; j < w.cols(); ++j) {
            for (Eigen::Index i = 0; i < w.rows(); ++i) {
                w(i, j) = rng.uniform(-limit, limit);
            }
        }
        auto b = bias(l);
        for (Eigen::Index i = 0; i < b.size(); ++i) {
            b[i] = rng.uniform(-limit, limit);
        }
    }
}

Eigen::Map<const Matrix> DenseNet::weight(std::size_t layer) const {
    return {params_.data() + offsets_.at(layer), static_cast<Eigen::Index>(sizes_[layer + 1]),
            static_cast<Eigen::Index>(sizes_[layer])};
}

Eigen::Map<Matrix> DenseNet::weight(std::size_t layer) {
    return {params_.data() + offsets_.at(layer), static_cast<Eigen::Index>(sizes_[layer + 1]),
            static_cast<Eigen::Index>(sizes_[layer])};
}

Eigen::Map<const Vector> DenseNet::bias(std::size_t layer) const {
    const auto offset = offsets_.at(layer) + sizes_[layer + 1] * sizes_[layer];
    return {params_.data() + offset, static_cast<Eigen::Index>(sizes_[layer + 1])};
}

Eigen::Map<Vector> DenseNet::bias(std::size_t layer) {
    const auto offset = offsets_.at(layer) + sizes_[layer + 1] * sizes_[layer];
    return {params_.data() + offset, static_cast<Eigen::Index>(sizes_[layer + 1])};
}

void DenseNet::check_input(Eigen::Index rows) const {
    if (sizes_.empty()) {
        throw std::logic_error("DenseNet: network has no layers");
    }
    if (static_cast<std::size_t>(rows) != input_size()) {
        throw std::invalid_argument("DenseNet: input dimension " + std::to_string(rows) +
                                    " does not match " + std::to_string(input_size()));
    }
}

Vector DenseNet::forward(const Vector& x) const {
    check_input(x.size());
    Vector a = x;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        Vector z = weight(l) * a + bias(l);
        if (l + 1 < num_layers()) {
            z = z.cwiseMax(0.0);
        }
        a = std::move(z);
    }
    return a;
}

Matrix DenseNet::forward(const Matrix& x) const {
    check_input(x.rows());
    Matrix a = x;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        Matrix z = weight(l) * a;
        z.colwise() += bias(l);
        if (l + 1 < num_layers()) {
            z = z.cwiseMax(0.0);
        }
        a = std::move(z);
    }
    return a;
}

Matrix DenseNet::forward(const Matrix& x, Tape& tape) const {
    check_input(x.rows());
    tape.activations.clear();
    tape.activations.reserve(num_layers() + 1);
    tape.activations.push_back(x);
    for (std::size_t l = 0; l < num_layers(); ++l) {
        Matrix z = weight(l) * tape.activations.back();
        z.colwise() += bias(l);
        if (l + 1 < num_layers()) {
            z = z.cwiseMax(0.0);
        }
        tape.activations.push_back(std::move(z));
    }
    return tape.activations.back();
}

Vector DenseNet::backward(const Tape& tape, const Matrix& upstream) const {
    if (tape.activations.size() != num_layers() + 1) {
        throw std::invalid_argument("DenseNet::backward: tape does not match network");
    }
    if (static_cast<std::size_t>(upstream.rows()) != output_size() ||
        upstream.cols() != tape.activations.back().cols()) {
        throw std::invalid_argument("DenseNet::backward: upstream gradient shape mismatch");
    }
    Vector grad = Vector::Zero(params_.size());
    Matrix delta = upstream;
    for (std::size_t l = num_layers(); l-- > 0;) {
        const Matrix& input = tape.activations[l];
        const auto rows = static_cast<Eigen::Index>(sizes_[l + 1]);
        const auto cols = static_cast<Eigen::Index>(sizes_[l]);
        Eigen::Map<Matrix> gw(grad.data() + offsets_[l], rows, cols);
        Eigen::Map<Vector> gb(grad.data() + offsets_[l] + sizes_[l + 1] * sizes_[l], rows);
        gw.noalias() = delta * input.transpose();
        gb = delta.rowwise().sum();
        if (l > 0) {
            Matrix back = weight(l).transpose() * delta;
            delta = back.cwiseProduct((input.array() > 0.0).cast<double>().matrix());
        }
    }
    return grad;
}

Vector DenseNet::backward(const Vector& x, const Vector& upstream) const {
    Tape tape;
    (void)forward(Matrix(x), tape);
    return backward(tape, Matrix(upstream));
}

} // namespace debunk::nn
