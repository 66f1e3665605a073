#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace debunk::nn {

struct AdamOptions {
    double learning_rate{1e-3};
    double beta1{0.9};
    double beta2{0.999};
    double epsilon{1e-8};
};

/// Adaptive moment estimation over a flat parameter vector.
class AdamOptimizer {
public:
    AdamOptimizer() = default;
    AdamOptimizer(std::size_t parameter_count, AdamOptions options = {});

    /// Applies one bias-corrected update in place. Throws std::domain_error on
    /// non-finite gradients before touching any state.
    void step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient);

    [[nodiscard]] std::size_t steps() const { return steps_; }
    [[nodiscard]] const AdamOptions& options() const { return options_; }
    void set_learning_rate(double lr) { options_.learning_rate = lr; }
    [[nodiscard]] const Eigen::VectorXd& first_moment() const { return m_; }
    [[nodiscard]] const Eigen::VectorXd& second_moment() const { return v_; }

private:
    AdamOptions options_;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
    std::size_t steps_{0};
};

} // namespace debunk::nn
