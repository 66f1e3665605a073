#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace debunk::hawkes {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class NewsKind { Fake, Mitigation };

[[nodiscard]] char kind_code(NewsKind kind);
[[nodiscard]] NewsKind kind_from_code(char code);

struct Event {
    std::size_t user{0};
    double time{0.0};
    NewsKind kind{NewsKind::Fake};

    bool operator==(const Event&) const = default;
};

/// Time-ordered posting events over [0, horizon].
struct EventLog {
    std::vector<Event> events;
    double horizon{0.0};

    [[nodiscard]] bool empty() const { return events.empty(); }
    [[nodiscard]] std::size_t size() const { return events.size(); }

    bool operator==(const EventLog&) const = default;
};

class StabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Exponential-kernel multivariate Hawkes parameters shared by the fake and
/// mitigation processes: lambda_i(t) = mu_i + sum_j A_ij sum_{t_jl < t} exp(-omega (t - t_jl)).
struct HawkesParams {
    Matrix A;
    double omega{1.0};
    Vector mu_fake;
    Vector mu_mitigation;

    [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(A.rows()); }
    [[nodiscard]] const Vector& base(NewsKind kind) const {
        return kind == NewsKind::Fake ? mu_fake : mu_mitigation;
    }
    [[nodiscard]] Vector& base(NewsKind kind) {
        return kind == NewsKind::Fake ? mu_fake : mu_mitigation;
    }

    /// Throws std::invalid_argument on shape mismatch, negative entries or omega <= 0.
    void validate() const;

    /// Spectral radius of A / omega.
    [[nodiscard]] double branching_radius() const;

    bool operator==(const HawkesParams& other) const;
};

/// Per-user sum of exp(-omega (t - t_l)) over events of `kind` strictly before t.
[[nodiscard]] Vector decayed_counts(const EventLog& log, NewsKind kind, std::size_t n,
                                    double omega, double t);

/// Excited part of the intensity (base excluded) at time t.
[[nodiscard]] Vector excitation(const HawkesParams& params, NewsKind kind, const EventLog& log,
                                double t);

/// Conditional intensity lambda(t) of every user. Only events of `kind` with time < t count.
[[nodiscard]] Vector intensity(const HawkesParams& params, NewsKind kind, const EventLog& log,
                               double t);

/// Ogata thinning. Returns `seed_log` extended with events of `kind` in (t_start, t_end].
/// Throws StabilityError when the spectral radius of A / omega is >= 1.
[[nodiscard]] EventLog simulate(const HawkesParams& params, NewsKind kind,
                                const EventLog& seed_log, double t_start, double t_end,
                                std::uint64_t seed);

/// In-place variant of simulate(). With `check_stability` false the caller
/// vouches that the spectral radius of A / omega is below one.
void simulate_append(const HawkesParams& params, NewsKind kind, EventLog& log, double t_start,
                     double t_end, std::uint64_t seed, bool check_stability = true);

/// N_i(t): events by `user` with time <= t (all kinds present in the log).
[[nodiscard]] std::size_t count(const EventLog& log, std::size_t user, double t);

/// N(t) for every user, restricted to `kind`.
[[nodiscard]] Vector counts(const EventLog& log, NewsKind kind, std::size_t n, double t);

/// N(t1) - N(t0) for every user, restricted to `kind`, i.e. events in (t0, t1].
[[nodiscard]] Vector counts_between(const EventLog& log, NewsKind kind, std::size_t n, double t0,
                                    double t1);

[[nodiscard]] EventLog filter(const EventLog& log, NewsKind kind);

/// Merges two logs into one time-ordered log.
[[nodiscard]] EventLog merge(const EventLog& a, const EventLog& b);

// `user,time,kind` lines, kind in {F, M}. Times written in shortest round-trip form.
void write_event_log(std::ostream& out, const EventLog& log);
[[nodiscard]] EventLog read_event_log(std::istream& in);
void save_event_log(const std::string& path, const EventLog& log);
[[nodiscard]] EventLog load_event_log(const std::string& path);

} // namespace debunk::hawkes
