#include "debunk/random.hpp"
#include "debunk/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

using namespace debunk;
using Eigen::MatrixXd;

namespace {

// Largest eigenvalue modulus from a full eigendecomposition.
double eigen_radius(const MatrixXd& A) {
    return Eigen::EigenSolver<MatrixXd>(A, false).eigenvalues().cwiseAbs().maxCoeff();
}

// Plain power iteration on a strictly positive matrix (no shift, no splitting).
double plain_power_iteration(const MatrixXd& A) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(A.rows());
    double estimate = 0.0;
    for (int it = 0; it < 100000; ++it) {
        const Eigen::VectorXd w = A * v;
        const double next = w.norm() / v.norm();
        v = w / w.norm();
        if (std::abs(next - estimate) < 1e-15 * next) {
            return next;
        }
        estimate = next;
    }
    return estimate;
}

MatrixXd random_nonnegative(std::size_t n, double density, Rng& rng) {
    MatrixXd A = MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < A.cols(); ++j) {
            if (rng.bernoulli(density)) {
                A(i, j) = rng.uniform();
            }
        }
    }
    return A;
}

} // namespace

TEST(SpectralRadius, DiagonalIsLargestEntry) {
    MatrixXd A = MatrixXd::Zero(2, 2);
    A.diagonal() << 0.5, 0.25;
    EXPECT_NEAR(spectral_radius(A), 0.5, 1e-12);
    const MatrixXd scaled = scale_to_spectral_radius(A, 0.8);
    EXPECT_NEAR(scaled(0, 0), 0.8, 1e-12);
    EXPECT_NEAR(scaled(1, 1), 0.4, 1e-12);
    EXPECT_DOUBLE_EQ(scaled(0, 1), 0.0);
}

TEST(SpectralRadius, AlreadyAtTargetIsUnchanged) {
    Rng rng(5);
    const MatrixXd A = random_nonnegative(6, 0.6, rng);
    const MatrixXd at_target = scale_to_spectral_radius(A, 0.8);
    const MatrixXd again = scale_to_spectral_radius(at_target, 0.8);
    EXPECT_TRUE(again.isApprox(at_target, 1e-10));
}

TEST(SpectralRadius, PositiveMatrixMatchesPlainPowerIteration) {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        MatrixXd A = MatrixXd::Zero(5, 5);
        for (Eigen::Index i = 0; i < 5; ++i) {
            for (Eigen::Index j = 0; j < 5; ++j) {
                A(i, j) = 0.01 + rng.uniform();
            }
        }
        const MatrixXd scaled = scale_to_spectral_radius(A, 0.8);
        EXPECT_NEAR(plain_power_iteration(scaled), 0.8, 1e-6 * 0.8);
    }
}

TEST(SpectralRadius, SparseAndReducibleMatchEigensolver) {
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + rng.below(30);
        const MatrixXd A = random_nonnegative(n, 0.1 + 0.3 * rng.uniform(), rng);
        const double expected = eigen_radius(A);
        EXPECT_NEAR(spectral_radius(A), expected, 1e-9 * std::max(1.0, expected));
    }
}

TEST(SpectralRadius, PeriodicCycleConverges) {
    MatrixXd A = MatrixXd::Zero(3, 3);
    A(0, 1) = 2.0;
    A(1, 2) = 0.5;
    A(2, 0) = 1.0;
    EXPECT_NEAR(spectral_radius(A), 1.0, 1e-12);
}

TEST(SpectralRadius, NilpotentHasZeroRadius) {
    MatrixXd A = MatrixXd::Zero(3, 3);
    A(0, 1) = 1.0;
    A(1, 2) = 1.0;
    EXPECT_DOUBLE_EQ(spectral_radius(A), 0.0);
    EXPECT_THROW((void)scale_to_spectral_radius(A, 0.8), std::invalid_argument);
}

TEST(SpectralRadius, RejectsInvalidInput) {
    EXPECT_THROW((void)scale_to_spectral_radius(MatrixXd::Zero(4, 4), 0.8), std::invalid_argument);
    EXPECT_THROW((void)scale_to_spectral_radius(MatrixXd::Identity(2, 2), 0.0),
                 std::invalid_argument);
    EXPECT_THROW((void)spectral_radius(MatrixXd::Zero(2, 3)), std::invalid_argument);
    MatrixXd negative = MatrixXd::Identity(2, 2);
    negative(0, 1) = -1.0;
    EXPECT_THROW((void)spectral_radius(negative), std::invalid_argument);
}
