#pragma once

#include "debunk/nn/dense.hpp"
#include "debunk/nn/lstm.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>

namespace debunk::nn {

// Binary checkpoint: magic "DBNK", format version, network kind, layer sizes
// and the raw parameter doubles. Loading reproduces forward outputs bit for bit.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const DenseNet& net);
void write_checkpoint(std::ostream& out, const LstmCell& cell);
[[nodiscard]] DenseNet read_dense_checkpoint(std::istream& in);
[[nodiscard]] LstmCell read_lstm_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const DenseNet& net);
void save_checkpoint(const std::string& path, const LstmCell& cell);
[[nodiscard]] DenseNet load_dense_checkpoint(const std::string& path);
[[nodiscard]] LstmCell load_lstm_checkpoint(const std::string& path);

} // namespace debunk::nn
