#include "debunk/experiment.hpp"

#include "debunk/nn/checkpoint.hpp"
#include "debunk/spectral.hpp"
#include "text_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace debunk::experiment {

using nlohmann::json;

namespace {

constexpr std::uint64_t kGraphStream = 10;
constexpr std::uint64_t kParamsStream = 11;
constexpr std::uint64_t kTrainingStream = 20;
constexpr std::uint64_t kTestStream = 30;
constexpr std::uint64_t kPolicyStream = 40;
constexpr std::uint64_t kModelStream = 50;

void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) {
        throw std::invalid_argument("config: " + field + " " + what);
    }
}

// Copies `section.key` into `target` when present; type errors name the field.
template <typename T>
void read_field(const json& section, const std::string& section_name, const std::string& key,
                T& target) {
    if (!section.contains(key)) {
        return;
    }
    try {
        target = section.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config: " + section_name + "." + key + " has the wrong type");
    }
}

void reject_unknown(const json& section, const std::string& name,
                    std::initializer_list<const char*> known) {
    if (!section.is_object()) {
        throw std::invalid_argument("config: section " + name + " must be an object");
    }
    for (const auto& [key, value] : section.items()) {
        const bool found = std::any_of(known.begin(), known.end(),
                                       [&](const char* k) { return key == k; });
        if (!found) {
            throw std::invalid_argument("config: unknown key " + name + "." + key);
        }
    }
}

json to_json(const ExperimentConfig& c) {
    return json{
        {"network",
         {{"n", c.network.n},
          {"density", c.network.density},
          {"cost_min", c.network.cost_min},
          {"cost_max", c.network.cost_max}}},
        {"hawkes",
         {{"omega", c.hawkes.omega},
          {"alpha_max", c.hawkes.alpha_max},
          {"spectral_radius", c.hawkes.spectral_radius},
          {"mu_fake_max", c.hawkes.mu_fake_max},
          {"mu_mitigation_max", c.hawkes.mu_mitigation_max},
          {"spreaders", c.hawkes.spreaders},
          {"boost", c.hawkes.boost},
          {"excite_followers", c.hawkes.excite_followers}}},
        {"campaign",
         {{"horizon", c.campaign.horizon},
          {"stages", c.campaign.stages},
          {"budget_min", c.campaign.budget_min},
          {"budget_max", c.campaign.budget_max},
          {"delta_T", c.campaign.delta_T},
          {"gamma", c.campaign.gamma},
          {"exposure_transpose", c.campaign.exposure_transpose},
          {"normalize_followers", c.campaign.normalize_followers}}},
        {"training",
         {{"episodes", c.training.episodes},
          {"replay_capacity", c.training.replay_capacity},
          {"batch_size", c.training.batch_size},
          {"sync_period", c.training.sync_period},
          {"epsilon_start", c.training.epsilon_start},
          {"epsilon_end", c.training.epsilon_end},
          {"epsilon_decay_fraction", c.training.epsilon_decay_fraction},
          {"learning_rate", c.training.learning_rate},
          {"hidden", c.training.hidden},
          {"refine_episodes", c.training.refine_episodes},
          {"fsp_updates_per_refine_episode", c.training.fsp_updates_per_refine_episode}}},
        {"evaluation",
         {{"policies", c.evaluation.policies},
          {"test_campaigns", c.evaluation.test_campaigns},
          {"runs", c.evaluation.runs},
          {"threads", c.evaluation.threads},
          {"budget_scale", c.evaluation.budget_scale}}},
        {"seed", c.seed},
    };
}

void from_json_into(const json& j, ExperimentConfig& c) {
    reject_unknown(j, "config",
                   {"network", "hawkes", "campaign", "training", "evaluation", "seed"});
    if (j.contains("network")) {
        const auto& s = j.at("network");
        reject_unknown(s, "network", {"n", "density", "cost_min", "cost_max"});
        read_field(s, "network", "n", c.network.n);
        read_field(s, "network", "density", c.network.density);
        read_field(s, "network", "cost_min", c.network.cost_min);
        read_field(s, "network", "cost_max", c.network.cost_max);
    }
    if (j.contains("hawkes")) {
        const auto& s = j.at("hawkes");
        reject_unknown(s, "hawkes",
                       {"omega", "alpha_max", "spectral_radius", "mu_fake_max",
                        "mu_mitigation_max", "spreaders", "boost", "excite_followers"});
        read_field(s, "hawkes", "omega", c.hawkes.omega);
        read_field(s, "hawkes", "alpha_max", c.hawkes.alpha_max);
        read_field(s, "hawkes", "spectral_radius", c.hawkes.spectral_radius);
        read_field(s, "hawkes", "mu_fake_max", c.hawkes.mu_fake_max);
        read_field(s, "hawkes", "mu_mitigation_max", c.hawkes.mu_mitigation_max);
        read_field(s, "hawkes", "spreaders", c.hawkes.spreaders);
        read_field(s, "hawkes", "boost", c.hawkes.boost);
        read_field(s, "hawkes", "excite_followers", c.hawkes.excite_followers);
    }
    if (j.contains("campaign")) {
        const auto& s = j.at("campaign");
        reject_unknown(s, "campaign",
                       {"horizon", "stages", "budget_min", "budget_max", "delta_T", "gamma",
                        "exposure_transpose", "normalize_followers"});
        read_field(s, "campaign", "horizon", c.campaign.horizon);
        read_field(s, "campaign", "stages", c.campaign.stages);
        read_field(s, "campaign", "budget_min", c.campaign.budget_min);
        read_field(s, "campaign", "budget_max", c.campaign.budget_max);
        read_field(s, "campaign", "delta_T", c.campaign.delta_T);
        read_field(s, "campaign", "gamma", c.campaign.gamma);
        read_field(s, "campaign", "exposure_transpose", c.campaign.exposure_transpose);
        read_field(s, "campaign", "normalize_followers", c.campaign.normalize_followers);
    }
    if (j.contains("training")) {
        const auto& s = j.at("training");
        reject_unknown(s, "training",
                       {"episodes", "replay_capacity", "batch_size", "sync_period",
                        "epsilon_start", "epsilon_end", "epsilon_decay_fraction",
                        "learning_rate", "hidden", "refine_episodes",
                        "fsp_updates_per_refine_episode"});
        read_field(s, "training", "episodes", c.training.episodes);
        read_field(s, "training", "replay_capacity", c.training.replay_capacity);
        read_field(s, "training", "batch_size", c.training.batch_size);
        read_field(s, "training", "sync_period", c.training.sync_period);
        read_field(s, "training", "epsilon_start", c.training.epsilon_start);
        read_field(s, "training", "epsilon_end", c.training.epsilon_end);
        read_field(s, "training", "epsilon_decay_fraction", c.training.epsilon_decay_fraction);
        read_field(s, "training", "learning_rate", c.training.learning_rate);
        read_field(s, "training", "hidden", c.training.hidden);
        read_field(s, "training", "refine_episodes", c.training.refine_episodes);
        read_field(s, "training", "fsp_updates_per_refine_episode",
                   c.training.fsp_updates_per_refine_episode);
    }
    if (j.contains("evaluation")) {
        const auto& s = j.at("evaluation");
        reject_unknown(s, "evaluation",
                       {"policies", "test_campaigns", "runs", "threads", "budget_scale"});
        read_field(s, "evaluation", "policies", c.evaluation.policies);
        read_field(s, "evaluation", "test_campaigns", c.evaluation.test_campaigns);
        read_field(s, "evaluation", "runs", c.evaluation.runs);
        read_field(s, "evaluation", "threads", c.evaluation.threads);
        read_field(s, "evaluation", "budget_scale", c.evaluation.budget_scale);
    }
    read_field(j, "config", "seed", c.seed);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
}

json vector_json(const Eigen::VectorXd& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from(const json& j, const std::string& field) {
    if (!j.is_array()) {
        throw std::invalid_argument("params: " + field + " must be an array");
    }
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace

void ExperimentConfig::validate() const {
    require(network.n >= 1, "network.n", "must be at least 1");
    require(network.density >= 0.0 && network.density <= 1.0, "network.density",
            "must lie in [0, 1]");
    require(network.cost_min > 0.0, "network.cost_min", "must be positive");
    require(network.cost_max >= network.cost_min, "network.cost_max",
            "must be at least network.cost_min");
    require(hawkes.omega > 0.0, "hawkes.omega", "must be positive");
    require(hawkes.alpha_max >= 0.0, "hawkes.alpha_max", "must be nonnegative");
    require(hawkes.spectral_radius > 0.0 && hawkes.spectral_radius < 1.0,
            "hawkes.spectral_radius", "must lie in (0, 1)");
    require(hawkes.mu_fake_max >= 0.0, "hawkes.mu_fake_max", "must be nonnegative");
    require(hawkes.mu_mitigation_max >= 0.0, "hawkes.mu_mitigation_max", "must be nonnegative");
    require(hawkes.spreaders <= network.n, "hawkes.spreaders", "must not exceed network.n");
    require(hawkes.boost >= 0.0, "hawkes.boost", "must be nonnegative");
    require(campaign.horizon > 0.0, "campaign.horizon", "must be positive");
    require(campaign.stages >= 1, "campaign.stages", "must be at least 1");
    require(campaign.budget_min > 0.0, "campaign.budget_min", "must be positive");
    require(campaign.budget_max >= campaign.budget_min, "campaign.budget_max",
            "must be at least campaign.budget_min");
    require(campaign.delta_T > 0.0, "campaign.delta_T", "must be positive");
    require(campaign.gamma >= 0.0 && campaign.gamma <= 1.0, "campaign.gamma",
            "must lie in [0, 1]");
    require(training.replay_capacity >= 1, "training.replay_capacity", "must be positive");
    require(training.batch_size >= 1 && training.batch_size <= training.replay_capacity,
            "training.batch_size", "must lie in [1, training.replay_capacity]");
    require(training.sync_period >= 1, "training.sync_period", "must be positive");
    require(training.epsilon_start >= 0.0 && training.epsilon_start <= 1.0,
            "training.epsilon_start", "must lie in [0, 1]");
    require(training.epsilon_end >= 0.0 && training.epsilon_end <= 1.0, "training.epsilon_end",
            "must lie in [0, 1]");
    require(training.epsilon_decay_fraction >= 0.0 && training.epsilon_decay_fraction <= 1.0,
            "training.epsilon_decay_fraction", "must lie in [0, 1]");
    require(training.learning_rate > 0.0, "training.learning_rate", "must be positive");
    require(std::all_of(training.hidden.begin(), training.hidden.end(),
                        [](std::size_t h) { return h > 0; }),
            "training.hidden", "entries must be positive");
    require(evaluation.runs >= 1, "evaluation.runs", "must be at least 1");
    require(evaluation.budget_scale > 0.0, "evaluation.budget_scale", "must be positive");
    const auto& names = agents::policy_names();
    for (const auto& p : evaluation.policies) {
        if (std::find(names.begin(), names.end(), p) == names.end()) {
            std::string valid;
            for (const auto& name : names) {
                valid += (valid.empty() ? "" : ", ") + name;
            }
            require(false, "evaluation.policies",
                    "contains unknown policy '" + p + "' (valid: " + valid + ")");
        }
    }
}

env::CampaignConfig ExperimentConfig::campaign_config() const {
    env::CampaignConfig c;
    c.horizon = campaign.horizon;
    c.num_stages = campaign.stages;
    c.budget_min = campaign.budget_min * evaluation.budget_scale;
    c.budget_max = campaign.budget_max * evaluation.budget_scale;
    c.boost = hawkes.boost;
    c.delta_T = campaign.delta_T;
    c.gamma = campaign.gamma;
    c.exposure_transpose = campaign.exposure_transpose;
    c.normalize_followers = campaign.normalize_followers;
    return c;
}

agents::TrainingOptions ExperimentConfig::training_options() const {
    agents::TrainingOptions o;
    o.episodes = training.episodes;
    o.replay_capacity = training.replay_capacity;
    o.batch_size = training.batch_size;
    o.epsilon_start = training.epsilon_start;
    o.epsilon_end = training.epsilon_end;
    o.epsilon_decay_fraction = training.epsilon_decay_fraction;
    o.dqn.hidden = training.hidden;
    o.dqn.gamma = campaign.gamma;
    o.dqn.sync_period = training.sync_period;
    o.dqn.adam.learning_rate = training.learning_rate;
    o.fsp_adam.learning_rate = training.learning_rate;
    o.refine_episodes = training.refine_episodes;
    o.fsp_updates_per_refine_episode = training.fsp_updates_per_refine_episode;
    o.seed = derive_seed(seed, {kModelStream});
    return o;
}

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    from_json_into(j, c);
    c.validate();
    return c;
}

std::string config_to_json(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

ExperimentConfig load_config(const std::string& path) { return config_from_json(read_text(path)); }

void apply_override(ExperimentConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw std::invalid_argument("override '" + assignment + "' must look like section.key=value");
    }
    const std::string path = std::string(detail::trim(assignment.substr(0, eq)));
    const std::string raw = std::string(detail::trim(assignment.substr(eq + 1)));
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) {
        value = raw;
    }
    json patch;
    const auto dot = path.find('.');
    if (dot == std::string::npos) {
        patch[path] = value;
    } else {
        patch[path.substr(0, dot)][path.substr(dot + 1)] = value;
    }
    ExperimentConfig updated = config;
    from_json_into(patch, updated);
    updated.validate();
    config = updated;
}

env::Scenario generate_scenario(const ExperimentConfig& config) {
    config.validate();
    const auto& net = config.network;
    const auto& hk = config.hawkes;
    env::Scenario s;
    s.graph = graph::assign_costs(
        graph::erdos_renyi(net.n, net.density, derive_seed(config.seed, {kGraphStream})),
        net.cost_min, net.cost_max);

    Rng rng(derive_seed(config.seed, {kParamsStream}));
    const auto n = static_cast<Eigen::Index>(net.n);
    hawkes::HawkesParams& p = s.params;
    p.omega = hk.omega;
    p.A = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double draw = rng.uniform(0.0, hk.alpha_max);
            const double edge =
                hk.excite_followers ? s.graph.adjacency(j, i) : s.graph.adjacency(i, j);
            if (edge != 0.0) {
                p.A(i, j) = draw;
            }
        }
    }
    if (spectral_radius(p.A) > 0.0) {
        p.A = scale_to_spectral_radius(p.A, hk.spectral_radius * hk.omega);
    }
    p.mu_mitigation.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p.mu_mitigation[i] = rng.uniform(0.0, hk.mu_mitigation_max);
    }
    std::vector<std::size_t> nodes(net.n);
    std::iota(nodes.begin(), nodes.end(), 0);
    for (std::size_t i = 0; i < hk.spreaders; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(net.n - i));
        std::swap(nodes[i], nodes[j]);
    }
    s.spreaders.assign(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(hk.spreaders));
    std::sort(s.spreaders.begin(), s.spreaders.end());
    p.mu_fake = Eigen::VectorXd::Zero(n);
    for (auto i : s.spreaders) {
        p.mu_fake[static_cast<Eigen::Index>(i)] = rng.uniform(0.0, hk.mu_fake_max);
    }
    s.validate();
    return s;
}

std::string params_to_json(const hawkes::HawkesParams& params,
                           const std::vector<std::size_t>& spreaders) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < params.A.rows(); ++i) {
        const Eigen::VectorXd row = params.A.row(i).transpose();
        rows.push_back(vector_json(row));
    }
    const json j{{"n", params.n()},
                 {"omega", params.omega},
                 {"mu_fake", vector_json(params.mu_fake)},
                 {"mu_mitigation", vector_json(params.mu_mitigation)},
                 {"A", rows},
                 {"spreaders", spreaders}};
    return j.dump(2) + "\n";
}

hawkes::HawkesParams params_from_json(const std::string& text,
                                      std::vector<std::size_t>* spreaders) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("params: not valid JSON: ") + e.what());
    }
    for (const char* key : {"n", "omega", "mu_fake", "mu_mitigation", "A"}) {
        if (!j.contains(key)) {
            throw std::invalid_argument(std::string("params: missing field ") + key);
        }
    }
    hawkes::HawkesParams p;
    const auto n = j.at("n").get<std::size_t>();
    p.omega = j.at("omega").get<double>();
    p.mu_fake = vector_from(j.at("mu_fake"), "mu_fake");
    p.mu_mitigation = vector_from(j.at("mu_mitigation"), "mu_mitigation");
    const auto& rows = j.at("A");
    if (!rows.is_array() || rows.size() != n) {
        throw std::invalid_argument("params: A must have n rows");
    }
    p.A.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = vector_from(rows[i], "A");
        if (static_cast<std::size_t>(row.size()) != n) {
            throw std::invalid_argument("params: A row " + std::to_string(i) + " must have n entries");
        }
        p.A.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    p.validate();
    if (spreaders != nullptr) {
        spreaders->clear();
        if (j.contains("spreaders")) {
            *spreaders = j.at("spreaders").get<std::vector<std::size_t>>();
        }
    }
    return p;
}

void save_scenario(const std::string& directory, const env::Scenario& scenario) {
    std::filesystem::create_directories(directory);
    const std::filesystem::path dir(directory);
    graph::save_graph((dir / "graph.txt").string(), scenario.graph);
    write_text(dir / "params.json", params_to_json(scenario.params, scenario.spreaders));
}

env::Scenario load_scenario(const std::string& directory) {
    const std::filesystem::path dir(directory);
    env::Scenario s;
    s.graph = graph::load_graph((dir / "graph.txt").string());
    s.params = params_from_json(read_text((dir / "params.json").string()), &s.spreaders);
    s.validate();
    return s;
}

std::uint64_t training_campaign_seed(std::uint64_t seed, std::size_t episode) {
    return derive_seed(seed, {kTrainingStream, episode});
}

std::uint64_t test_campaign_seed(std::uint64_t seed, std::size_t run, std::size_t campaign) {
    return derive_seed(seed, {kTestStream, run, campaign});
}

std::uint64_t policy_seed(std::uint64_t campaign_seed) {
    return derive_seed(campaign_seed, {kPolicyStream});
}

agents::EnvironmentFactory training_environments(const env::Scenario& scenario,
                                                 const ExperimentConfig& config) {
    const auto campaign = config.campaign_config();
    const auto seed = config.seed;
    return [&scenario, campaign, seed](std::size_t episode) {
        return std::make_unique<env::Campaign>(scenario, campaign,
                                               training_campaign_seed(seed, episode));
    };
}

agents::TrainingResult train_models(const env::Scenario& scenario, const ExperimentConfig& config) {
    config.validate();
    const auto options = config.training_options();
    const auto factory = training_environments(scenario, config);
    auto result = agents::train_single_debunker(factory, options);
    agents::refine_fsp(result, factory, options);
    return result;
}

agents::LearnedModels shared_models(const agents::TrainingResult& result) {
    return {std::make_shared<const agents::QPolicy>(result.policy),
            std::make_shared<const agents::FspModel>(result.fsp),
            std::make_shared<const agents::RewardModel>(result.reward_model)};
}

void save_models(const std::string& directory, const agents::TrainingResult& result) {
    std::filesystem::create_directories(directory);
    const std::filesystem::path dir(directory);
    nn::save_checkpoint((dir / "q_network.bin").string(), result.policy.online());
    nn::save_checkpoint((dir / "fsp.bin").string(), result.fsp.cell());
    nn::save_checkpoint((dir / "reward_model.bin").string(), result.reward_model.network());
    std::ofstream curve(dir / "training_curve.csv");
    agents::write_curve(curve, result.curve);
    std::ofstream refine(dir / "fsp_refine_curve.csv");
    agents::write_curve(refine, result.refine_curve);
}

agents::LearnedModels load_models(const std::string& directory, double gamma) {
    const std::filesystem::path dir(directory);
    agents::LearnedModels m;
    m.q = std::make_shared<const agents::QPolicy>(
        nn::load_dense_checkpoint((dir / "q_network.bin").string()), gamma);
    m.fsp = std::make_shared<const agents::FspModel>(
        nn::load_lstm_checkpoint((dir / "fsp.bin").string()));
    m.reward = std::make_shared<const agents::RewardModel>(
        nn::load_dense_checkpoint((dir / "reward_model.bin").string()));
    return m;
}

env::Campaign run_campaign(const env::Scenario& scenario, const env::CampaignConfig& campaign_config,
                           agents::Policy& policy, std::uint64_t campaign_seed) {
    auto cfg = campaign_config;
    cfg.equal_split_budgets = cfg.equal_split_budgets || policy.equal_split_budgets();
    env::Campaign campaign(scenario, cfg, campaign_seed);
    policy.begin_campaign(campaign, policy_seed(campaign_seed));
    while (!campaign.finished()) {
        campaign.step(policy.act(campaign));
    }
    return campaign;
}

EvaluationResult evaluate(const env::Scenario& scenario, const ExperimentConfig& config,
                          const agents::LearnedModels& models,
                          const std::vector<std::string>& policies) {
    config.validate();
    for (const auto& name : policies) {
        (void)agents::make_policy(name, models);  // fail fast on unknown names or missing models
    }
    const auto campaign_config = config.campaign_config();
    const std::size_t runs = config.evaluation.runs;
    const std::size_t per_run = config.evaluation.test_campaigns;
    const std::size_t total = policies.size() * runs * per_run;

    EvaluationResult result;
    result.campaigns.resize(total);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        std::vector<std::unique_ptr<agents::Policy>> local;
        for (const auto& name : policies) {
            local.push_back(agents::make_policy(name, models));
        }
        for (;;) {
            const std::size_t job = next.fetch_add(1);
            if (job >= total) {
                return;
            }
            const std::size_t p = job / (runs * per_run);
            const std::size_t run = (job / per_run) % runs;
            const std::size_t c = job % per_run;
            try {
                const auto seed = test_campaign_seed(config.seed, run, c);
                const auto campaign = run_campaign(scenario, campaign_config, *local[p], seed);
                CampaignOutcome& out = result.campaigns[job];
                out.policy = policies[p];
                out.run = run;
                out.campaign = c;
                out.campaign_return = campaign.discounted_return();
                for (const auto& rec : campaign.records()) {
                    out.cost_spent += rec.cost_spent;
                    if (rec.cost_spent > rec.budget) {
                        ++out.budget_violations;
                    }
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(total);
                return;
            }
        }
    };

    std::size_t threads = config.evaluation.threads;
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, std::max<std::size_t>(total, 1));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    const auto rnd = std::find(policies.begin(), policies.end(), "RND");
    for (std::size_t p = 0; p < policies.size(); ++p) {
        for (std::size_t run = 0; run < runs; ++run) {
            auto stats = [&](std::size_t policy_index) {
                double sum = 0.0;
                double sq = 0.0;
                for (std::size_t c = 0; c < per_run; ++c) {
                    const double v =
                        result.campaigns[(policy_index * runs + run) * per_run + c].campaign_return;
                    sum += v;
                    sq += v * v;
                }
                const double count = static_cast<double>(per_run);
                const double mean = per_run ? sum / count : 0.0;
                const double var = per_run > 1 ? (sq - count * mean * mean) / (count - 1.0) : 0.0;
                return std::pair{mean, std::sqrt(std::max(0.0, var))};
            };
            const auto [mean, sd] = stats(p);
            double ratio = std::numeric_limits<double>::quiet_NaN();
            if (rnd != policies.end()) {
                const double base = stats(static_cast<std::size_t>(rnd - policies.begin())).first;
                ratio = mean / base;
            }
            result.summaries.push_back({policies[p], run, mean, sd, ratio});
        }
    }
    return result;
}

double mean_return(const EvaluationResult& result, const std::string& policy) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& c : result.campaigns) {
        if (c.policy == policy) {
            sum += c.campaign_return;
            ++count;
        }
    }
    if (count == 0) {
        throw std::invalid_argument("no campaigns recorded for policy " + policy);
    }
    return sum / static_cast<double>(count);
}

double mean_ratio(const EvaluationResult& result, const std::string& policy) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& s : result.summaries) {
        if (s.policy == policy) {
            sum += s.ratio_vs_rnd;
            ++count;
        }
    }
    if (count == 0) {
        throw std::invalid_argument("no summary recorded for policy " + policy);
    }
    return sum / static_cast<double>(count);
}

void write_metrics(std::ostream& out, const EvaluationResult& result) {
    out << "policy,run,mean,std,ratio_vs_RND\n";
    for (const auto& s : result.summaries) {
        out << s.policy << ',' << s.run << ',' << detail::format_double(s.mean) << ','
            << detail::format_double(s.stddev) << ','
            << (std::isnan(s.ratio_vs_rnd) ? std::string("nan")
                                            : detail::format_double(s.ratio_vs_rnd))
            << '\n';
    }
}

void write_campaigns(std::ostream& out, const EvaluationResult& result) {
    out << "policy,run,campaign,return,cost_spent\n";
    for (const auto& c : result.campaigns) {
        out << c.policy << ',' << c.run << ',' << c.campaign << ','
            << detail::format_double(c.campaign_return) << ','
            << detail::format_double(c.cost_spent) << '\n';
    }
}

std::vector<ScatterPoint> exposure_scatter(const env::Scenario& scenario,
                                           const env::CampaignLogs& logs,
                                           std::span<const double> times, double horizon,
                                           bool transpose) {
    std::vector<char> is_spreader(scenario.n(), 0);
    for (auto i : scenario.spreaders) {
        is_spreader.at(i) = 1;
    }
    std::vector<ScatterPoint> points;
    for (double t : times) {
        if (!(t >= 0.0 && t <= horizon)) {
            throw std::invalid_argument("scatter: time " + detail::format_double(t) +
                                        " lies outside [0, " + detail::format_double(horizon) +
                                        "]");
        }
        const auto fake = env::cumulative_exposure(scenario.graph, logs.fake,
                                                   hawkes::NewsKind::Fake, t, transpose);
        const auto truth = env::cumulative_exposure(scenario.graph, logs.mitigation,
                                                    hawkes::NewsKind::Mitigation, t, transpose);
        for (std::size_t i = 0; i < scenario.n(); ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            points.push_back({t, i, fake[k], truth[k], is_spreader[i] != 0});
        }
    }
    return points;
}

std::size_t count_above_diagonal(std::span<const ScatterPoint> points, double time) {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [&](const auto& p) {
        return p.time == time && !p.spreader && p.true_exposure > p.fake_exposure;
    }));
}

void write_scatter(std::ostream& out, std::span<const ScatterPoint> points) {
    out << "time,node,fake_exposure,true_exposure,spreader\n";
    for (const auto& p : points) {
        out << detail::format_double(p.time) << ',' << p.node << ','
            << detail::format_double(p.fake_exposure) << ','
            << detail::format_double(p.true_exposure) << ',' << (p.spreader ? 1 : 0) << '\n';
    }
}

} // namespace debunk::experiment
