#include "debunk/graph.hpp"

#include "debunk/random.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace debunk::graph {

std::size_t SocialGraph::edge_count() const {
    return static_cast<std::size_t>((adjacency.array() != 0.0).count());
}

namespace {

void recount_followers(SocialGraph& graph) {
    graph.followers.assign(graph.n, 0);
    for (std::size_t i = 0; i < graph.n; ++i) {
        graph.followers[i] = static_cast<int>(
            (graph.adjacency.row(static_cast<Eigen::Index>(i)).array() != 0.0).count());
    }
}

} // namespace

SocialGraph from_edges(std::size_t n,
                       const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    SocialGraph graph;
    graph.n = n;
    const auto size = static_cast<Eigen::Index>(n);
    graph.adjacency = Eigen::MatrixXd::Zero(size, size);
    for (const auto& [i, j] : edges) {
        if (i >= n || j >= n) {
            throw std::out_of_range("edge endpoint out of range");
        }
        if (i == j) {
            throw std::invalid_argument("self-follow edges are not allowed");
        }
        graph.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    }
    recount_followers(graph);
    return graph;
}

SocialGraph erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
    if (n == 0) {
        throw std::invalid_argument("erdos_renyi: n must be at least 1");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("erdos_renyi: p must lie in [0, 1]");
    }
    SocialGraph graph;
    graph.n = n;
    const auto size = static_cast<Eigen::Index>(n);
    graph.adjacency = Eigen::MatrixXd::Zero(size, size);
    Rng rng(seed);
    for (Eigen::Index i = 0; i < size; ++i) {
        for (Eigen::Index j = 0; j < size; ++j) {
            if (i != j && rng.bernoulli(p)) {
                graph.adjacency(i, j) = 1.0;
            }
        }
    }
    recount_followers(graph);
    return graph;
}

SocialGraph assign_costs(SocialGraph graph, double cost_min, double cost_max) {
    if (!(cost_min > 0.0) || cost_min > cost_max) {
        throw std::invalid_argument("assign_costs: need 0 < cost_min <= cost_max");
    }
    graph.costs.assign(graph.n, 0.5 * (cost_min + cost_max));
    if (graph.n == 0) {
        return graph;
    }
    const auto [lo, hi] = std::minmax_element(graph.followers.begin(), graph.followers.end());
    if (*lo == *hi) {
        return graph;
    }
    const double span = static_cast<double>(*hi - *lo);
    for (std::size_t i = 0; i < graph.n; ++i) {
        graph.costs[i] =
            cost_min + (cost_max - cost_min) * static_cast<double>(graph.followers[i] - *lo) / span;
    }
    return graph;
}

void write_graph(std::ostream& out, const SocialGraph& graph) {
    out << graph.n << '\n';
    for (std::size_t i = 0; i < graph.n; ++i) {
        for (std::size_t j = 0; j < graph.n; ++j) {
            if (graph.follows(i, j)) {
                out << i << ' ' << j << '\n';
            }
        }
    }
    if (graph.has_costs()) {
        out << "[costs]\n";
        for (double c : graph.costs) {
            out << detail::format_double(c) << '\n';
        }
    }
}

SocialGraph read_graph(std::istream& in) {
    std::string line;
    std::size_t line_number = 0;
    auto fail = [&line_number](const std::string& what) {
        throw std::runtime_error("graph line " + std::to_string(line_number) + ": " + what);
    };

    std::size_t n = 0;
    bool have_header = false;
    bool in_costs = false;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::vector<double> costs;
    while (std::getline(in, line)) {
        ++line_number;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        try {
            if (!have_header) {
                n = detail::parse_index(text);
                have_header = true;
            } else if (text == "[costs]") {
                in_costs = true;
            } else if (in_costs) {
                costs.push_back(detail::parse_double(text));
            } else {
                const auto sep = text.find(' ');
                if (sep == std::string_view::npos) {
                    fail("expected `i j`");
                }
                edges.emplace_back(detail::parse_index(detail::trim(text.substr(0, sep))),
                                   detail::parse_index(detail::trim(text.substr(sep + 1))));
            }
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    if (!have_header) {
        throw std::runtime_error("graph: missing node count header");
    }
    SocialGraph graph = from_edges(n, edges);
    if (in_costs) {
        if (costs.size() != n) {
            throw std::runtime_error("graph: [costs] section must list exactly n values");
        }
        graph.costs = std::move(costs);
    }
    return graph;
}

void save_graph(const std::string& path, const SocialGraph& graph) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    write_graph(out, graph);
}

SocialGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return read_graph(in);
}

} // namespace debunk::graph
