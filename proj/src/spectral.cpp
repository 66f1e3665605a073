#include "debunk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace debunk {

namespace {

// Strongly connected components of the support graph (edge i -> j when A(i, j) != 0).
// Iterative Tarjan so large sparse matrices do not exhaust the call stack.
std::vector<std::vector<Eigen::Index>> strongly_connected_components(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    std::vector<std::vector<Eigen::Index>> adjacency(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (A(i, j) != 0.0) {
                adjacency[static_cast<std::size_t>(i)].push_back(j);
            }
        }
    }

    constexpr Eigen::Index kUnvisited = -1;
    std::vector<Eigen::Index> index(static_cast<std::size_t>(n), kUnvisited);
    std::vector<Eigen::Index> low(static_cast<std::size_t>(n), 0);
    std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack;
    std::vector<std::vector<Eigen::Index>> components;
    Eigen::Index counter = 0;

    struct Frame {
        Eigen::Index node;
        std::size_t next_edge;
    };

    for (Eigen::Index root = 0; root < n; ++root) {
        if (index[static_cast<std::size_t>(root)] != kUnvisited) {
            continue;
        }
        std::vector<Frame> call_stack{{root, 0}};
        while (!call_stack.empty()) {
            auto& frame = call_stack.back();
            const auto v = static_cast<std::size_t>(frame.node);
            if (frame.next_edge == 0 && index[v] == kUnvisited) {
                index[v] = low[v] = counter++;
                stack.push_back(frame.node);
                on_stack[v] = 1;
            }
            if (frame.next_edge < adjacency[v].size()) {
                const auto w = static_cast<std::size_t>(adjacency[v][frame.next_edge++]);
                if (index[w] == kUnvisited) {
                    call_stack.push_back({static_cast<Eigen::Index>(w), 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::vector<Eigen::Index> component;
                Eigen::Index w = 0;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[static_cast<std::size_t>(w)] = 0;
                    component.push_back(w);
                } while (w != frame.node);
                components.push_back(std::move(component));
            }
            const auto finished = frame.node;
            call_stack.pop_back();
            if (!call_stack.empty()) {
                const auto parent = static_cast<std::size_t>(call_stack.back().node);
                low[parent] = std::min(low[parent], low[static_cast<std::size_t>(finished)]);
            }
        }
    }
    return components;
}

// Perron root of an irreducible nonnegative block, bracketed by the
// Collatz-Wielandt bounds min_i (Mx)_i / x_i <= rho(M) <= max_i (Mx)_i / x_i.
double irreducible_radius(const Eigen::MatrixXd& block, const PowerIterationOptions& options) {
    const double row_bound = block.rowwise().sum().maxCoeff();
    const double col_bound = block.colwise().sum().maxCoeff();
    const double shift = std::min(row_bound, col_bound);
    Eigen::MatrixXd shifted = block;
    shifted.diagonal().array() += shift;

    Eigen::VectorXd x = Eigen::VectorXd::Ones(block.rows());
    for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
        Eigen::VectorXd y = shifted * x;
        const Eigen::ArrayXd ratios = y.array() / x.array();
        const double upper = ratios.maxCoeff();
        const double lower = ratios.minCoeff();
        if (upper - lower <= options.tolerance * upper) {
            return std::max(0.0, 0.5 * (upper + lower) - shift);
        }
        x = y / y.maxCoeff();
    }
    throw std::runtime_error("spectral_radius: power iteration did not converge");
}

} // namespace

double spectral_radius(const Eigen::MatrixXd& A, const PowerIterationOptions& options) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("spectral_radius: matrix must be square");
    }
    if ((A.array() < 0.0).any() || !A.allFinite()) {
        throw std::invalid_argument("spectral_radius: matrix must be finite and nonnegative");
    }
    double radius = 0.0;
    for (const auto& component : strongly_connected_components(A)) {
        const auto size = static_cast<Eigen::Index>(component.size());
        if (size == 1) {
            const auto v = component.front();
            radius = std::max(radius, A(v, v));
            continue;
        }
        Eigen::MatrixXd block(size, size);
        for (Eigen::Index r = 0; r < size; ++r) {
            for (Eigen::Index c = 0; c < size; ++c) {
                block(r, c) = A(component[static_cast<std::size_t>(r)],
                                component[static_cast<std::size_t>(c)]);
            }
        }
        radius = std::max(radius, irreducible_radius(block, options));
    }
    return radius;
}

Eigen::MatrixXd scale_to_spectral_radius(const Eigen::MatrixXd& A, double target,
                                         const PowerIterationOptions& options) {
    if (!(target > 0.0)) {
        throw std::invalid_argument("scale_to_spectral_radius: target must be positive");
    }
    const double radius = spectral_radius(A, options);
    if (radius <= 0.0) {
        throw std::invalid_argument(
            "scale_to_spectral_radius: spectral radius is zero, nothing to scale");
    }
    return A * (target / radius);
}

} // namespace debunk
