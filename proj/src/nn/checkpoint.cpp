#include "debunk/nn/checkpoint.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace debunk::nn {

namespace {

constexpr std::array<char, 4> kMagic{'D', 'B', 'N', 'K'};
constexpr std::uint32_t kDenseKind = 1;
constexpr std::uint32_t kLstmKind = 2;

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) {
        throw std::runtime_error("checkpoint: truncated file");
    }
    return value;
}

void write_body(std::ostream& out, std::uint32_t kind, const std::vector<std::uint64_t>& sizes,
                const Vector& params) {
    out.write(kMagic.data(), kMagic.size());
    put(out, kCheckpointVersion);
    put(out, kind);
    put<std::uint64_t>(out, sizes.size());
    for (auto s : sizes) {
        put(out, s);
    }
    put<std::uint64_t>(out, static_cast<std::uint64_t>(params.size()));
    out.write(reinterpret_cast<const char*>(params.data()),
              static_cast<std::streamsize>(params.size() * sizeof(double)));
    if (!out) {
        throw std::runtime_error("checkpoint: write failed");
    }
}

std::vector<std::uint64_t> read_header(std::istream& in, std::uint32_t expected_kind) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw std::runtime_error("checkpoint: bad magic");
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kCheckpointVersion) {
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto kind = get<std::uint32_t>(in);
    if (kind != expected_kind) {
        throw std::runtime_error("checkpoint: wrong network kind");
    }
    const auto count = get<std::uint64_t>(in);
    if (count > 64) {
        throw std::runtime_error("checkpoint: implausible layer count");
    }
    std::vector<std::uint64_t> sizes(count);
    for (auto& s : sizes) {
        s = get<std::uint64_t>(in);
    }
    return sizes;
}

void read_params(std::istream& in, Vector& params) {
    const auto count = get<std::uint64_t>(in);
    if (count != static_cast<std::uint64_t>(params.size())) {
        throw std::runtime_error("checkpoint: parameter count does not match layer sizes");
    }
    in.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(double)));
    if (!in) {
        throw std::runtime_error("checkpoint: truncated parameters");
    }
}

} // namespace

void write_checkpoint(std::ostream& out, const DenseNet& net) {
    std::vector<std::uint64_t> sizes(net.layer_sizes().begin(), net.layer_sizes().end());
    write_body(out, kDenseKind, sizes, net.parameters());
}

void write_checkpoint(std::ostream& out, const LstmCell& cell) {
    write_body(out, kLstmKind, {cell.input_size(), cell.hidden_size(), cell.output_size()},
               cell.parameters());
}

DenseNet read_dense_checkpoint(std::istream& in) {
    const auto sizes = read_header(in, kDenseKind);
    DenseNet net(std::vector<std::size_t>(sizes.begin(), sizes.end()));
    read_params(in, net.parameters());
    return net;
}

LstmCell read_lstm_checkpoint(std::istream& in) {
    const auto sizes = read_header(in, kLstmKind);
    if (sizes.size() != 3) {
        throw std::runtime_error("checkpoint: LSTM needs three sizes");
    }
    LstmCell cell(sizes[0], sizes[1], sizes[2]);
    read_params(in, cell.parameters());
    return cell;
}

void save_checkpoint(const std::string& path, const DenseNet& net) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    write_checkpoint(out, net);
}

void save_checkpoint(const std::string& path, const LstmCell& cell) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    write_checkpoint(out, cell);
}

DenseNet load_dense_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return read_dense_checkpoint(in);
}

LstmCell load_lstm_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return read_lstm_checkpoint(in);
}

} // namespace debunk::nn
