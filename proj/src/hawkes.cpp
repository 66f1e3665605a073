#include "debunk/hawkes.hpp"

#include "debunk/random.hpp"
#include "debunk/spectral.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace debunk::hawkes {

char kind_code(NewsKind kind) { return kind == NewsKind::Fake ? 'F' : 'M'; }

NewsKind kind_from_code(char code) {
    switch (code) {
    case 'F':
        return NewsKind::Fake;
    case 'M':
        return NewsKind::Mitigation;
    default:
        throw std::invalid_argument(std::string("unknown news kind code '") + code + "'");
    }
}

void HawkesParams::validate() const {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("HawkesParams: coefficient matrix must be square");
    }
    const auto size = A.rows();
    if (mu_fake.size() != size || mu_mitigation.size() != size) {
        throw std::invalid_argument("HawkesParams: base intensity length must equal n");
    }
    if (!(omega > 0.0) || !std::isfinite(omega)) {
        throw std::invalid_argument("HawkesParams: omega must be positive");
    }
    if (!A.allFinite() || (A.array() < 0.0).any()) {
        throw std::invalid_argument("HawkesParams: coefficients must be finite and nonnegative");
    }
    if (!mu_fake.allFinite() || !mu_mitigation.allFinite() || (mu_fake.array() < 0.0).any() ||
        (mu_mitigation.array() < 0.0).any()) {
        throw std::invalid_argument("HawkesParams: base intensities must be finite and nonnegative");
    }
}

double HawkesParams::branching_radius() const {
    if (A.size() == 0) {
        return 0.0;
    }
    return spectral_radius(A / omega);
}

bool HawkesParams::operator==(const HawkesParams& other) const {
    return omega == other.omega && A.rows() == other.A.rows() && A.cols() == other.A.cols() &&
           A == other.A && mu_fake.size() == other.mu_fake.size() && mu_fake == other.mu_fake &&
           mu_mitigation.size() == other.mu_mitigation.size() &&
           mu_mitigation == other.mu_mitigation;
}

namespace {

Vector decayed_sum(const EventLog& log, NewsKind kind, std::size_t n, double omega, double t,
                   bool inclusive) {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(n));
    for (const auto& event : log.events) {
        if (event.time > t || (!inclusive && event.time == t)) {
            break;
        }
        if (event.kind != kind) {
            continue;
        }
        if (event.user >= n) {
            throw std::out_of_range("event user index exceeds node count");
        }
        g[static_cast<Eigen::Index>(event.user)] += std::exp(-omega * (t - event.time));
    }
    return g;
}

} // namespace

Vector decayed_counts(const EventLog& log, NewsKind kind, std::size_t n, double omega, double t) {
    return decayed_sum(log, kind, n, omega, t, false);
}

Vector excitation(const HawkesParams& params, NewsKind kind, const EventLog& log, double t) {
    return params.A * decayed_counts(log, kind, params.n(), params.omega, t);
}

Vector intensity(const HawkesParams& params, NewsKind kind, const EventLog& log, double t) {
    return params.base(kind) + excitation(params, kind, log, t);
}

EventLog simulate(const HawkesParams& params, NewsKind kind, const EventLog& seed_log,
                  double t_start, double t_end, std::uint64_t seed) {
    EventLog out = seed_log;
    simulate_append(params, kind, out, t_start, t_end, seed);
    return out;
}

void simulate_append(const HawkesParams& params, NewsKind kind, EventLog& log, double t_start,
                     double t_end, std::uint64_t seed, bool check_stability) {
    params.validate();
    if (t_start > t_end) {
        throw std::invalid_argument("simulate: t_start must not exceed t_end");
    }
    if (!log.events.empty() && log.events.back().time > t_start) {
        throw std::invalid_argument("simulate: seed log has events after t_start");
    }
    if (check_stability) {
        const double radius = params.branching_radius();
        if (radius >= 1.0) {
            throw StabilityError("simulate: spectral radius of A/omega is " +
                                 std::to_string(radius) + " (must be < 1)");
        }
    }

    log.horizon = std::max(log.horizon, t_end);
    const std::size_t n = params.n();
    if (n == 0) {
        return;
    }

    const Vector& mu = params.base(kind);
    // Excitation just after t_start: events exactly at t_start already count.
    Vector ex = params.A * decayed_sum(log, kind, n, params.omega, t_start, true);
    const double base_total = mu.sum();

    Rng rng(seed);
    double t = t_start;
    for (;;) {
        // Exponential kernels only decay between events, so the intensity right
        // now bounds it until the next accepted event.
        const double bound = base_total + ex.sum();
        if (!(bound > 0.0)) {
            break;
        }
        double candidate = t + rng.exponential(bound);
        if (candidate > t_end) {
            break;
        }
        if (candidate <= t) {
            candidate = std::nextafter(t, std::numeric_limits<double>::infinity());
        }
        ex *= std::exp(-params.omega * (candidate - t));
        t = candidate;

        const double u = rng.uniform() * bound;
        const double total = base_total + ex.sum();
        if (u >= total) {
            continue;
        }
        double acc = 0.0;
        Eigen::Index chosen = static_cast<Eigen::Index>(n) - 1;
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
            acc += mu[i] + ex[i];
            if (u < acc) {
                chosen = i;
                break;
            }
        }
        log.events.push_back({static_cast<std::size_t>(chosen), t, kind});
        ex += params.A.col(chosen);
    }
}

std::size_t count(const EventLog& log, std::size_t user, double t) {
    std::size_t total = 0;
    for (const auto& event : log.events) {
        if (event.time > t) {
            break;
        }
        if (event.user == user) {
            ++total;
        }
    }
    return total;
}

Vector counts(const EventLog& log, NewsKind kind, std::size_t n, double t) {
    return counts_between(log, kind, n, -std::numeric_limits<double>::infinity(), t);
}

Vector counts_between(const EventLog& log, NewsKind kind, std::size_t n, double t0, double t1) {
    Vector c = Vector::Zero(static_cast<Eigen::Index>(n));
    for (const auto& event : log.events) {
        if (event.time > t1) {
            break;
        }
        if (event.time <= t0 || event.kind != kind) {
            continue;
        }
        if (event.user >= n) {
            throw std::out_of_range("event user index exceeds node count");
        }
        c[static_cast<Eigen::Index>(event.user)] += 1.0;
    }
    return c;
}

EventLog filter(const EventLog& log, NewsKind kind) {
    EventLog out;
    out.horizon = log.horizon;
    std::copy_if(log.events.begin(), log.events.end(), std::back_inserter(out.events),
                 [kind](const Event& e) { return e.kind == kind; });
    return out;
}

EventLog merge(const EventLog& a, const EventLog& b) {
    EventLog out;
    out.horizon = std::max(a.horizon, b.horizon);
    out.events.reserve(a.size() + b.size());
    std::merge(a.events.begin(), a.events.end(), b.events.begin(), b.events.end(),
               std::back_inserter(out.events),
               [](const Event& x, const Event& y) { return x.time < y.time; });
    return out;
}

void write_event_log(std::ostream& out, const EventLog& log) {
    for (const auto& event : log.events) {
        out << event.user << ',' << detail::format_double(event.time) << ','
            << kind_code(event.kind) << '\n';
    }
}

EventLog read_event_log(std::istream& in) {
    EventLog log;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto fields = detail::split(line, ',');
        if (fields.size() != 3 || fields[2].size() != 1) {
            throw std::runtime_error("event log line " + std::to_string(line_number) +
                                     ": expected user,time,kind");
        }
        Event event;
        try {
            event.user = detail::parse_index(fields[0]);
            event.time = detail::parse_double(fields[1]);
            event.kind = kind_from_code(fields[2].front());
        } catch (const std::exception& e) {
            throw std::runtime_error("event log line " + std::to_string(line_number) + ": " +
                                     e.what());
        }
        if (event.time < 0.0) {
            throw std::runtime_error("event log line " + std::to_string(line_number) +
                                     ": negative time");
        }
        if (!log.events.empty() && event.time <= log.events.back().time) {
            throw std::runtime_error("event log line " + std::to_string(line_number) +
                                     ": times must be strictly increasing");
        }
        log.events.push_back(event);
    }
    log.horizon = log.events.empty() ? 0.0 : log.events.back().time;
    return log;
}

void save_event_log(const std::string& path, const EventLog& log) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    write_event_log(out, log);
}

EventLog load_event_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return read_event_log(in);
}

} // namespace debunk::hawkes
