#pragma once

#include "debunk/campaign.hpp"
#include "debunk/random.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <unordered_set>
#include <vector>

namespace debunk::agents {

/// (s^k, u^k, R^k, s^{k+1}) from a single-debunker stage.
struct Transition {
    env::CampaignState state;
    std::size_t action{0};
    double reward{0.0};
    env::CampaignState next_state;
    bool terminal{false};  // last stage of the campaign: no bootstrap
};

/// (s^k, H^k, s^{k+1}) for the future-state predictor; H^k holds one node for
/// single-debunker stages and the ordered selection for multi-debunker ones.
struct FspSample {
    env::CampaignState state;
    std::vector<std::size_t> actions;
    env::CampaignState next_state;
};

/// Fixed-capacity ring buffer; the oldest entry is overwritten when full.
template <typename T>
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) {
            throw std::invalid_argument("ReplayBuffer: capacity must be positive");
        }
        items_.reserve(std::min<std::size_t>(capacity, 4096));
    }

    void push(T item) {
        if (items_.size() < capacity_) {
            items_.push_back(std::move(item));
        } else {
            items_[next_] = std::move(item);
        }
        next_ = (next_ + 1) % capacity_;
    }

    [[nodiscard]] std::size_t size() const { return items_.size(); }
    [[nodiscard]] std::size_t capacity() const { return capacity_; }
    [[nodiscard]] bool empty() const { return items_.empty(); }
    [[nodiscard]] const T& operator[](std::size_t i) const { return items_.at(i); }

    /// `batch` distinct indices, uniformly at random (Floyd's algorithm).
    [[nodiscard]] std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const {
        const std::size_t n = items_.size();
        if (batch > n) {
            throw std::invalid_argument("ReplayBuffer: batch larger than buffer");
        }
        std::vector<std::size_t> picked;
        picked.reserve(batch);
        std::unordered_set<std::size_t> seen;
        for (std::size_t j = n - batch; j < n; ++j) {
            const auto t = static_cast<std::size_t>(rng.below(j + 1));
            const auto chosen = seen.contains(t) ? j : t;
            seen.insert(chosen);
            picked.push_back(chosen);
        }
        return picked;
    }

private:
    std::size_t capacity_;
    std::size_t next_{0};
    std::vector<T> items_;
};

} // namespace debunk::agents
