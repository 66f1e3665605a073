#include "debunk/nn/lstm.hpp"

#include "debunk/random.hpp"

#include <cmath>
#include <stdexcept>

namespace debunk::nn {

namespace {

Matrix sigmoid(const Matrix& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

} // namespace

LstmCell::LstmCell(std::size_t input_size, std::size_t hidden_size, std::size_t output_size)
    : input_(input_size), hidden_(hidden_size), output_(output_size) {
    if (input_size == 0 || hidden_size == 0 || output_size == 0) {
        throw std::invalid_argument("LstmCell: sizes must be positive");
    }
    params_ = Vector::Zero(static_cast<Eigen::Index>(readout_bias_offset() + output_));
}

void LstmCell::init_uniform(Rng& rng) {
    const double gate_limit = 1.0 / std::sqrt(static_cast<double>(gate_cols()));
    const double readout_limit = 1.0 / std::sqrt(static_cast<double>(hidden_));
    for (std::size_t k = 0; k < readout_offset(); ++k) {
        params_[static_cast<Eigen::Index>(k)] = rng.uniform(-gate_limit, gate_limit);
    }
    for (std::size_t k = readout_offset(); k < parameter_count(); ++k) {
        params_[static_cast<Eigen::Index>(k)] = rng.uniform(-readout_limit, readout_limit);
    }
}

Eigen::Map<const Matrix> LstmCell::gate_weight() const {
    return {params_.data(), static_cast<Eigen::Index>(gate_rows()),
            static_cast<Eigen::Index>(gate_cols())};
}
Eigen::Map<Matrix> LstmCell::gate_weight() {
    return {params_.data(), static_cast<Eigen::Index>(gate_rows()),
            static_cast<Eigen::Index>(gate_cols())};
}
Eigen::Map<const Vector> LstmCell::gate_bias() const {
    return {params_.data() + bias_offset(), static_cast<Eigen::Index>(gate_rows())};
}
Eigen::Map<Vector> LstmCell::gate_bias() {
    return {params_.data() + bias_offset(), static_cast<Eigen::Index>(gate_rows())};
}
Eigen::Map<const Matrix> LstmCell::readout_weight() const {
    return {params_.data() + readout_offset(), static_cast<Eigen::Index>(output_),
            static_cast<Eigen::Index>(hidden_)};
}
Eigen::Map<Matrix> LstmCell::readout_weight() {
    return {params_.data() + readout_offset(), static_cast<Eigen::Index>(output_),
            static_cast<Eigen::Index>(hidden_)};
}
Eigen::Map<const Vector> LstmCell::readout_bias() const {
    return {params_.data() + readout_bias_offset(), static_cast<Eigen::Index>(output_)};
}
Eigen::Map<Vector> LstmCell::readout_bias() {
    return {params_.data() + readout_bias_offset(), static_cast<Eigen::Index>(output_)};
}

LstmCell::Step LstmCell::step(const Vector& hidden, const Vector& cell, const Vector& input) const {
    Trace trace;
    const Matrix x = input;
    const Matrix out = forward_sequence(hidden, cell, std::span<const Matrix>(&x, 1), &trace);
    return {trace.hidden.back().col(0), trace.cell.back().col(0), out.col(0)};
}

Matrix LstmCell::forward_sequence(const Matrix& hidden0, const Matrix& cell0,
                                  std::span<const Matrix> inputs, Trace* trace) const {
    const auto H = static_cast<Eigen::Index>(hidden_);
    const auto I = static_cast<Eigen::Index>(input_);
    if (hidden_ == 0) {
        throw std::logic_error("LstmCell: cell has no parameters");
    }
    if (hidden0.rows() != H || cell0.rows() != H || cell0.cols() != hidden0.cols()) {
        throw std::invalid_argument("LstmCell: state dimension mismatch");
    }
    if (inputs.empty()) {
        throw std::invalid_argument("LstmCell: empty input sequence");
    }
    const auto batch = hidden0.cols();
    Trace local;
    Trace& tr = trace ? *trace : local;
    tr = Trace{};
    tr.hidden.push_back(hidden0);
    tr.cell.push_back(cell0);

    const auto W = gate_weight();
    const auto b = gate_bias();
    Matrix stacked(I + H, batch);
    for (const auto& x : inputs) {
        if (x.rows() != I || x.cols() != batch) {
            throw std::invalid_argument("LstmCell: input dimension mismatch");
        }
        stacked.topRows(I) = x;
        stacked.bottomRows(H) = tr.hidden.back();
        Matrix z = W * stacked;
        z.colwise() += b;
        Matrix i = sigmoid(z.middleRows(0, H));
        Matrix f = sigmoid(z.middleRows(H, H));
        Matrix o = sigmoid(z.middleRows(2 * H, H));
        Matrix g = z.middleRows(3 * H, H).array().tanh().matrix();
        Matrix c = f.cwiseProduct(tr.cell.back()) + i.cwiseProduct(g);
        Matrix h = o.cwiseProduct(c.array().tanh().matrix());
        tr.inputs.push_back(x);
        tr.input_gate.push_back(std::move(i));
        tr.forget_gate.push_back(std::move(f));
        tr.output_gate.push_back(std::move(o));
        tr.candidate.push_back(std::move(g));
        tr.cell.push_back(std::move(c));
        tr.hidden.push_back(std::move(h));
    }
    tr.readout = readout_weight() * tr.hidden.back();
    tr.readout.colwise() += readout_bias();
    return tr.readout;
}

Vector LstmCell::backward_sequence(const Trace& trace, const Matrix& upstream) const {
    const auto H = static_cast<Eigen::Index>(hidden_);
    const auto I = static_cast<Eigen::Index>(input_);
    const std::size_t steps = trace.inputs.size();
    if (steps == 0 || upstream.rows() != static_cast<Eigen::Index>(output_) ||
        upstream.cols() != trace.readout.cols()) {
        throw std::invalid_argument("LstmCell::backward_sequence: shape mismatch");
    }
    Vector grad = Vector::Zero(params_.size());
    Eigen::Map<Matrix> gW(grad.data(), static_cast<Eigen::Index>(gate_rows()),
                          static_cast<Eigen::Index>(gate_cols()));
    Eigen::Map<Vector> gb(grad.data() + bias_offset(), static_cast<Eigen::Index>(gate_rows()));
    Eigen::Map<Matrix> gWr(grad.data() + readout_offset(), static_cast<Eigen::Index>(output_), H);
    Eigen::Map<Vector> gbr(grad.data() + readout_bias_offset(),
                           static_cast<Eigen::Index>(output_));

    gWr.noalias() = upstream * trace.hidden.back().transpose();
    gbr = upstream.rowwise().sum();

    const auto W = gate_weight();
    const auto batch = upstream.cols();
    Matrix dh = readout_weight().transpose() * upstream;
    Matrix dc = Matrix::Zero(H, batch);
    Matrix dz(4 * H, batch);
    Matrix stacked(I + H, batch);
    for (std::size_t t = steps; t-- > 0;) {
        const Matrix& i = trace.input_gate[t];
        const Matrix& f = trace.forget_gate[t];
        const Matrix& o = trace.output_gate[t];
        const Matrix& g = trace.candidate[t];
        const Matrix& c_prev = trace.cell[t];
        const Matrix tanh_c = trace.cell[t + 1].array().tanh().matrix();

        dc += dh.cwiseProduct(o).cwiseProduct((1.0 - tanh_c.array().square()).matrix());
        dz.middleRows(0, H) = dc.cwiseProduct(g).cwiseProduct(
            i.cwiseProduct((1.0 - i.array()).matrix()));
        dz.middleRows(H, H) = dc.cwiseProduct(c_prev).cwiseProduct(
            f.cwiseProduct((1.0 - f.array()).matrix()));
        dz.middleRows(2 * H, H) =
            dh.cwiseProduct(tanh_c).cwiseProduct(o.cwiseProduct((1.0 - o.array()).matrix()));
        dz.middleRows(3 * H, H) =
            dc.cwiseProduct(i).cwiseProduct((1.0 - g.array().square()).matrix());

        stacked.topRows(I) = trace.inputs[t];
        stacked.bottomRows(H) = trace.hidden[t];
        gW.noalias() += dz * stacked.transpose();
        gb += dz.rowwise().sum();

        dh = (W.transpose() * dz).bottomRows(H);
        dc = dc.cwiseProduct(f).eval();
    }
    return grad;
}

} // namespace debunk::nn
