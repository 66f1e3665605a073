#pragma once

#include "debunk/hawkes.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace debunk::estimation {

struct IngestOptions {
    double horizon{500.0};
    bool rescale{true};  // map [first, last] timestamp onto [0, horizon]; otherwise only shift
    double tie_gap{1e-9};
};

/// Event logs read from `user_id,timestamp,label` records (label fake or true).
struct Dataset {
    hawkes::EventLog fake;
    hawkes::EventLog mitigation;
    std::vector<std::string> users;  // original id of each dense index
    double horizon{0.0};
    std::vector<std::string> warnings;

    [[nodiscard]] std::size_t n() const { return users.size(); }
};

/// Users are indexed by first appearance in time order. Equal timestamps are
/// separated by `tie_gap` so every output time is strictly increasing.
/// Malformed records throw std::runtime_error naming the line number.
[[nodiscard]] Dataset ingest(std::istream& in, const IngestOptions& options = {});
[[nodiscard]] Dataset ingest_file(const std::string& path, const IngestOptions& options = {});

/// Writes the dataset back as records with dense indices as user ids.
void serialize(std::ostream& out, const Dataset& data);

enum class FitMethod {
    // Squared error between per-bin counts and bin-integrated intensity.
    Binned,
    // Exact time-continuous contrast int lambda^2 dt - 2 sum lambda(t_l): the
    // zero-width limit of the binned criterion, free of within-bin bias.
    Continuous,
};

struct FitConfig {
    FitMethod method{FitMethod::Continuous};
    double omega{1.0};
    double bin_width{1.0};
    bool nonnegative{true};  // clip negative estimates to zero
    double ridge{1e-6};

    void validate() const;
};

/// One observed window: both kinds over [0, horizon].
struct Realization {
    hawkes::EventLog fake;
    hawkes::EventLog mitigation;
    double horizon{0.0};
};

struct FitResult {
    hawkes::HawkesParams params;
    // Criterion value of the unclipped solution: squared residual over the bins,
    // or the contrast value for the continuous method.
    double residual{0.0};
    std::size_t bins{0};  // regression rows (bins of both kinds; one per log when continuous)
};

/// Least-squares fit of (A, mu_fake, mu_mitigation) with one A shared by both
/// kinds. Binned: regresses per-bin counts of each user on the bin length (per
/// kind) and every user's decayed history carried over the bin. Zero events
/// give all-zero parameters; fewer than two bins (of `bin_width`) with events
/// throw std::invalid_argument.
[[nodiscard]] FitResult fit_least_squares(const std::vector<Realization>& data, std::size_t n,
                                          const FitConfig& config = {});

[[nodiscard]] Realization as_realization(const Dataset& data);

} // namespace debunk::estimation
