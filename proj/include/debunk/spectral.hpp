#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace debunk {

struct PowerIterationOptions {
    double tolerance{1e-12};
    std::size_t max_iterations{10000};
};

/// Spectral radius of a nonnegative square matrix by power iteration.
///
/// The iteration runs on A + cI with c equal to the largest row sum. For a
/// nonnegative matrix the Perron root shifts exactly by c while every other
/// eigenvalue moves strictly inside that circle, so periodic (e.g. cyclic)
/// structure cannot stall convergence. Throws std::runtime_error when the
/// estimate fails to settle within the iteration budget.
[[nodiscard]] double spectral_radius(const Eigen::MatrixXd& A,
                                     const PowerIterationOptions& options = {});

/// Returns c * A with c chosen so the spectral radius equals `target`.
/// Throws std::invalid_argument for a zero spectral radius or target <= 0.
[[nodiscard]] Eigen::MatrixXd scale_to_spectral_radius(const Eigen::MatrixXd& A, double target,
                                                       const PowerIterationOptions& options = {});

} // namespace debunk
