#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace debunk::graph {

/// Directed follower graph. follows(i, j) == 1 means user j follows user i.
struct SocialGraph {
    std::size_t n{0};
    Eigen::MatrixXd adjacency;       // b_ij in {0, 1}, zero diagonal
    std::vector<int> followers;      // e_i = sum_j b_ij
    std::vector<double> costs;       // mitigation cost per node; empty until assigned

    [[nodiscard]] bool follows(std::size_t i, std::size_t j) const {
        return adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) != 0.0;
    }
    [[nodiscard]] std::size_t edge_count() const;
    [[nodiscard]] bool has_costs() const { return costs.size() == n && n > 0; }
};

/// Builds a graph from (i, j) pairs meaning "j follows i". Self loops and
/// out-of-range indices are rejected.
[[nodiscard]] SocialGraph from_edges(std::size_t n,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& edges);

/// Independent Bernoulli(p) edge for every ordered pair i != j.
[[nodiscard]] SocialGraph erdos_renyi(std::size_t n, double p, std::uint64_t seed);

/// Affine map from follower count to [cost_min, cost_max]; the midpoint when
/// all follower counts coincide.
[[nodiscard]] SocialGraph assign_costs(SocialGraph graph, double cost_min, double cost_max);

// Text format: first line n, then one `i j` line per edge (j follows i),
// then an optional `[costs]` section with one value per node.
void write_graph(std::ostream& out, const SocialGraph& graph);
[[nodiscard]] SocialGraph read_graph(std::istream& in);
void save_graph(const std::string& path, const SocialGraph& graph);
[[nodiscard]] SocialGraph load_graph(const std::string& path);

} // namespace debunk::graph
