#include "debunk/estimation.hpp"

#include "text_util.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace debunk::estimation {

using hawkes::Event;
using hawkes::EventLog;
using hawkes::NewsKind;

namespace {

struct Record {
    std::string user;
    double time;
    NewsKind kind;
};

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

void separate_ties(std::vector<double>& times, double gap) {
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i] <= times[i - 1]) {
            times[i] = times[i - 1] + gap;
        }
    }
}

void rescale_onto(std::vector<double>& times, double horizon) {
    const double first = times.front();
    const double span = times.back() - first;
    if (span <= 0.0 || (first == 0.0 && times.back() == horizon)) {
        for (auto& t : times) {
            t -= first;
        }
        return;
    }
    for (auto& t : times) {
        t = (t - first) / span * horizon;
    }
    times.back() = horizon;
}

} // namespace

Dataset ingest(std::istream& in, const IngestOptions& options) {
    if (!(options.horizon > 0.0)) {
        throw std::invalid_argument("ingest: horizon must be positive");
    }
    std::vector<Record> records;
    std::string line;
    std::size_t line_number = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++line_number;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') {
            continue;
        }
        const auto fields = detail::split(text, ',');
        if (first_content && !fields.empty() && lower(detail::trim(fields[0])) == "user_id") {
            first_content = false;
            continue;
        }
        first_content = false;
        if (fields.size() != 3) {
            fail_line(line_number, "expected user_id,timestamp,label");
        }
        Record r;
        r.user = std::string(detail::trim(fields[0]));
        if (r.user.empty()) {
            fail_line(line_number, "empty user id");
        }
        try {
            r.time = detail::parse_double(detail::trim(fields[1]));
        } catch (const std::exception&) {
            fail_line(line_number, "unparseable timestamp '" + std::string(fields[1]) + "'");
        }
        if (!std::isfinite(r.time)) {
            fail_line(line_number, "timestamp must be finite");
        }
        const auto label = lower(detail::trim(fields[2]));
        if (label == "fake") {
            r.kind = NewsKind::Fake;
        } else if (label == "true") {
            r.kind = NewsKind::Mitigation;
        } else {
            fail_line(line_number, "label must be fake or true, got '" + std::string(fields[2]) + "'");
        }
        records.push_back(std::move(r));
    }

    Dataset data;
    if (records.empty()) {
        data.warnings.emplace_back("no records in input");
        data.horizon = options.rescale ? options.horizon : 0.0;
        data.fake.horizon = data.mitigation.horizon = data.horizon;
        return data;
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const Record& a, const Record& b) { return a.time < b.time; });

    std::vector<double> times;
    times.reserve(records.size());
    for (const auto& r : records) {
        times.push_back(r.time);
    }
    if (options.rescale) {
        rescale_onto(times, options.horizon);
    } else {
        const double first = times.front();
        for (auto& t : times) {
            t -= first;
        }
    }
    separate_ties(times, options.tie_gap);
    if (options.rescale && times.back() > options.horizon) {
        const double factor = options.horizon / times.back();
        for (auto& t : times) {
            t *= factor;
        }
        times.back() = options.horizon;
    }

    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        auto [it, inserted] = index.emplace(r.user, data.users.size());
        if (inserted) {
            data.users.push_back(r.user);
        }
        Event e{it->second, times[k], r.kind};
        (r.kind == NewsKind::Fake ? data.fake : data.mitigation).events.push_back(e);
    }
    data.horizon = options.rescale ? options.horizon : times.back();
    data.fake.horizon = data.mitigation.horizon = data.horizon;
    return data;
}

Dataset ingest_file(const std::string& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return ingest(in, options);
}

void serialize(std::ostream& out, const Dataset& data) {
    out << "user_id,timestamp,label\n";
    const auto merged = hawkes::merge(data.fake, data.mitigation);
    for (const auto& e : merged.events) {
        out << data.users.at(e.user) << ',' << detail::format_double(e.time) << ','
            << (e.kind == NewsKind::Fake ? "fake" : "true") << '\n';
    }
}

void FitConfig::validate() const {
    if (!(omega > 0.0)) {
        throw std::invalid_argument("fit: omega must be positive");
    }
    if (!(bin_width > 0.0)) {
        throw std::invalid_argument("fit: bin width must be positive");
    }
    if (!(ridge >= 0.0)) {
        throw std::invalid_argument("fit: ridge must be nonnegative");
    }
}

namespace {

struct NormalEquations {
    Eigen::MatrixXd gram;  // sum of x x^T
    Eigen::MatrixXd cross; // sum of x y^T
    double target_sq{0.0};
    std::size_t rows{0};
    std::size_t rows_with_events{0};
    std::size_t events{0};
};

// Adds one row per bin of `log`. Columns: bin length for the fake base, bin
// length for the mitigation base, then each user's decayed history at the bin
// start carried over the bin, g_j(start) (1 - exp(-omega len)) / omega. Only
// events before the bin enter the features, so they never see the counts.
void accumulate(NormalEquations& eq, const EventLog& log, NewsKind kind, double horizon,
                std::size_t n, const FitConfig& config) {
    const auto dim = static_cast<Eigen::Index>(n + 2);
    const auto users = static_cast<Eigen::Index>(n);
    const double w = config.bin_width;
    const double omega = config.omega;
    const auto bins = static_cast<std::size_t>(std::ceil(horizon / w - 1e-12));

    Eigen::VectorXd decayed = Eigen::VectorXd::Zero(users);  // history at time `now`
    Eigen::VectorXd x(dim);
    Eigen::VectorXd y(users);
    double now = 0.0;
    std::size_t next = 0;
    const auto& events = log.events;

    for (std::size_t b = 0; b < bins; ++b) {
        const double start = static_cast<double>(b) * w;
        const double end = std::min(horizon, start + w);
        const double length = end - start;
        const bool last = b + 1 == bins;

        decayed *= std::exp(-omega * (start - now));
        now = start;
        x[0] = kind == NewsKind::Fake ? length : 0.0;
        x[1] = kind == NewsKind::Fake ? 0.0 : length;
        x.tail(users) = decayed * (-std::expm1(-omega * length) / omega);

        y.setZero();
        std::size_t in_bin = 0;
        while (next < events.size() &&
               (events[next].time < end || (last && events[next].time <= end))) {
            const auto& e = events[next];
            if (e.user >= n) {
                throw std::invalid_argument("fit: event user index out of range");
            }
            decayed *= std::exp(-omega * (e.time - now));
            now = e.time;
            decayed[static_cast<Eigen::Index>(e.user)] += 1.0;
            y[static_cast<Eigen::Index>(e.user)] += 1.0;
            ++in_bin;
            ++next;
        }
        eq.gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
        eq.cross += x * y.transpose();
        eq.target_sq += y.squaredNorm();
        ++eq.rows;
        eq.events += in_bin;
        if (in_bin > 0) {
            ++eq.rows_with_events;
        }
    }
    if (next != events.size()) {
        throw std::invalid_argument("fit: events beyond the realization horizon");
    }
}

// Exact integrals for the continuous-time contrast sum_i (int lambda_i^2 - 2 sum_l lambda_i(t_l)):
// gram += int phi phi^T dt and cross(:, i) += phi(t_l-) for every event of user i,
// with phi(t) = (kind indicator, decayed history strictly before t).
void accumulate_continuous(NormalEquations& eq, const EventLog& log, NewsKind kind,
                           double horizon, std::size_t n, const FitConfig& config) {
    const auto users = static_cast<Eigen::Index>(n);
    const double omega = config.omega;
    const Eigen::Index base = kind == NewsKind::Fake ? 0 : 1;
    Eigen::VectorXd decayed = Eigen::VectorXd::Zero(users);
    double now = 0.0;
    std::size_t last_bin = std::numeric_limits<std::size_t>::max();

    auto integrate_to = [&](double t) {
        const double dt = t - now;
        if (dt <= 0.0) {
            return;
        }
        const double first = -std::expm1(-omega * dt) / omega;
        const double second = -std::expm1(-2.0 * omega * dt) / (2.0 * omega);
        eq.gram(base, base) += dt;
        eq.gram.block(2, base, users, 1) += decayed * first;
        eq.gram.bottomRightCorner(users, users).selfadjointView<Eigen::Lower>().rankUpdate(
            decayed, second);
        decayed *= std::exp(-omega * dt);
        now = t;
    };

    for (const auto& e : log.events) {
        if (e.user >= n) {
            throw std::invalid_argument("fit: event user index out of range");
        }
        if (e.time > horizon) {
            throw std::invalid_argument("fit: events beyond the realization horizon");
        }
        integrate_to(e.time);
        const auto u = static_cast<Eigen::Index>(e.user);
        eq.cross(base, u) += 1.0;
        eq.cross.block(2, u, users, 1) += decayed;
        decayed[u] += 1.0;
        ++eq.events;
        const auto bin = static_cast<std::size_t>(e.time / config.bin_width);
        if (bin != last_bin) {
            ++eq.rows_with_events;
            last_bin = bin;
        }
    }
    integrate_to(horizon);
    ++eq.rows;
}

} // namespace

FitResult fit_least_squares(const std::vector<Realization>& data, std::size_t n,
                            const FitConfig& config) {
    config.validate();
    const auto dim = static_cast<Eigen::Index>(n + 2);
    const auto users = static_cast<Eigen::Index>(n);
    NormalEquations eq;
    eq.gram = Eigen::MatrixXd::Zero(dim, dim);
    eq.cross = Eigen::MatrixXd::Zero(dim, users);
    for (const auto& r : data) {
        if (config.method == FitMethod::Continuous) {
            accumulate_continuous(eq, r.fake, NewsKind::Fake, r.horizon, n, config);
            accumulate_continuous(eq, r.mitigation, NewsKind::Mitigation, r.horizon, n, config);
        } else {
            accumulate(eq, r.fake, NewsKind::Fake, r.horizon, n, config);
            accumulate(eq, r.mitigation, NewsKind::Mitigation, r.horizon, n, config);
        }
    }
    eq.gram = eq.gram.selfadjointView<Eigen::Lower>();

    FitResult result;
    result.bins = eq.rows;
    auto& p = result.params;
    p.omega = config.omega;
    p.A = Eigen::MatrixXd::Zero(users, users);
    p.mu_fake = Eigen::VectorXd::Zero(users);
    p.mu_mitigation = Eigen::VectorXd::Zero(users);
    if (eq.events == 0) {
        return result;
    }
    if (eq.rows_with_events < 2) {
        throw std::invalid_argument("fit: at least two bins with events are required");
    }

    Eigen::MatrixXd system = eq.gram;
    system.diagonal().array() += config.ridge;
    if (config.ridge == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system);
        if (qr.rank() < dim) {
            throw std::invalid_argument(
                "fit: singular design matrix; use a positive ridge weight");
        }
    }
    const Eigen::MatrixXd theta = system.ldlt().solve(eq.cross);  // column i: user i
    const double fit_term = (theta.transpose() * eq.gram * theta).trace() -
                            2.0 * (theta.transpose() * eq.cross).trace();
    result.residual = config.method == FitMethod::Continuous
                          ? fit_term
                          : std::max(0.0, eq.target_sq + fit_term);

    p.mu_fake = theta.row(0).transpose();
    p.mu_mitigation = theta.row(1).transpose();
    p.A = theta.bottomRows(users).transpose();
    if (config.nonnegative) {
        p.A = p.A.cwiseMax(0.0);
        p.mu_fake = p.mu_fake.cwiseMax(0.0);
        p.mu_mitigation = p.mu_mitigation.cwiseMax(0.0);
    }
    return result;
}

Realization as_realization(const Dataset& data) {
    return {data.fake, data.mitigation, data.horizon};
}

} // namespace debunk::estimation
