#include "debunk/agents/fsp.hpp"

#include <map>
#include <stdexcept>

namespace debunk::agents {

using nn::Matrix;
using nn::Vector;

FspModel::FspModel(std::size_t num_nodes, nn::AdamOptions options, std::uint64_t init_seed)
    : cell_(num_nodes, 5 * num_nodes, 5 * num_nodes) {
    Rng rng(init_seed);
    cell_.init_uniform(rng);
    optimizer_ = nn::AdamOptimizer(cell_.parameter_count(), options);
}

FspModel::FspModel(nn::LstmCell cell) : cell_(std::move(cell)) {
    optimizer_ = nn::AdamOptimizer(cell_.parameter_count());
}

FspModel::Cursor FspModel::begin(const env::CampaignState& state) const {
    if (state.dim() != cell_.hidden_size()) {
        throw std::invalid_argument("FspModel: state dimension does not match the predictor");
    }
    return {state.values, Vector::Zero(state.values.size())};
}

Vector FspModel::advance(Cursor& cursor, std::size_t debunker) const {
    if (debunker >= num_nodes()) {
        throw std::out_of_range("FspModel: debunker index out of range");
    }
    Vector input = Vector::Zero(static_cast<Eigen::Index>(num_nodes()));
    input[static_cast<Eigen::Index>(debunker)] = 1.0;
    auto step = cell_.step(cursor.hidden, cursor.cell, input);
    cursor.hidden = std::move(step.hidden);
    cursor.cell = std::move(step.cell);
    return step.readout;
}

Vector FspModel::predict(const env::CampaignState& state,
                         std::span<const std::size_t> debunkers) const {
    auto cursor = begin(state);
    Vector out = state.values;
    for (auto d : debunkers) {
        out = advance(cursor, d);
    }
    return out;
}

namespace {

struct Group {
    Matrix hidden0;
    std::vector<Matrix> inputs;
    Matrix targets;
};

// Buckets the sampled indices by sequence length so each bucket unrolls as one batch.
std::map<std::size_t, Group> build_groups(const ReplayBuffer<FspSample>& memory,
                                          std::span<const std::size_t> indices,
                                          std::size_t num_nodes) {
    std::map<std::size_t, std::vector<std::size_t>> by_length;
    for (auto i : indices) {
        const auto& sample = memory[i];
        if (sample.actions.empty()) {
            continue;
        }
        by_length[sample.actions.size()].push_back(i);
    }
    std::map<std::size_t, Group> groups;
    for (const auto& [length, members] : by_length) {
        const auto dim = static_cast<Eigen::Index>(memory[members.front()].state.dim());
        const auto batch = static_cast<Eigen::Index>(members.size());
        Group g;
        g.hidden0.resize(dim, batch);
        g.targets.resize(dim, batch);
        g.inputs.assign(length, Matrix::Zero(static_cast<Eigen::Index>(num_nodes), batch));
        for (Eigen::Index b = 0; b < batch; ++b) {
            const auto& sample = memory[members[static_cast<std::size_t>(b)]];
            g.hidden0.col(b) = sample.state.values;
            g.targets.col(b) = sample.next_state.values;
            for (std::size_t t = 0; t < length; ++t) {
                g.inputs[t](static_cast<Eigen::Index>(sample.actions[t]), b) = 1.0;
            }
        }
        groups.emplace(length, std::move(g));
    }
    return groups;
}

} // namespace

double fsp_train_step(FspModel& model, const ReplayBuffer<FspSample>& memory,
                      std::size_t batch_size, Rng& rng) {
    if (batch_size == 0 || memory.size() < batch_size) {
        throw std::invalid_argument("fsp_train_step: memory smaller than batch");
    }
    const auto idx = memory.sample_indices(batch_size, rng);
    const auto groups = build_groups(memory, idx, model.num_nodes());
    const auto& cell = model.cell();

    Vector grad = Vector::Zero(static_cast<Eigen::Index>(cell.parameter_count()));
    double loss = 0.0;
    double elements = 0.0;
    for (const auto& [length, g] : groups) {
        elements += static_cast<double>(g.targets.size());
    }
    if (elements == 0.0) {
        return 0.0;
    }
    for (const auto& [length, g] : groups) {
        nn::LstmCell::Trace trace;
        const Matrix zero_cell = Matrix::Zero(g.hidden0.rows(), g.hidden0.cols());
        const Matrix pred = cell.forward_sequence(g.hidden0, zero_cell, g.inputs, &trace);
        const Matrix err = pred - g.targets;
        loss += err.squaredNorm();
        grad += cell.backward_sequence(trace, (2.0 / elements) * err);
    }
    model.optimizer().step(model.cell().parameters(), grad);
    return loss / elements;
}

double fsp_loss(const FspModel& model, const ReplayBuffer<FspSample>& memory,
                std::span<const std::size_t> indices) {
    const auto groups = build_groups(memory, indices, model.num_nodes());
    double loss = 0.0;
    double elements = 0.0;
    for (const auto& [length, g] : groups) {
        const Matrix zero_cell = Matrix::Zero(g.hidden0.rows(), g.hidden0.cols());
        const Matrix pred = model.cell().forward_sequence(g.hidden0, zero_cell, g.inputs, nullptr);
        loss += (pred - g.targets).squaredNorm();
        elements += static_cast<double>(g.targets.size());
    }
    return elements > 0.0 ? loss / elements : 0.0;
}

} // namespace debunk::agents
