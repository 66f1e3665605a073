#include "debunk/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace debunk::nn {

AdamOptimizer::AdamOptimizer(std::size_t parameter_count, AdamOptions options)
    : options_(options),
      m_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count))),
      v_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameter_count))) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient) {
    if (params.size() != m_.size() || gradient.size() != m_.size()) {
        throw std::invalid_argument("AdamOptimizer: parameter/gradient size mismatch");
    }
    if (!gradient.allFinite()) {
        throw std::domain_error("AdamOptimizer: non-finite gradient");
    }
    ++steps_;
    const double b1 = options_.beta1;
    const double b2 = options_.beta2;
    m_ = b1 * m_ + (1.0 - b1) * gradient;
    v_ = b2 * v_ + (1.0 - b2) * gradient.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    params.array() -= options_.learning_rate * (m_.array() / c1) /
                      ((v_.array() / c2).sqrt() + options_.epsilon);
}

} // namespace debunk::nn
