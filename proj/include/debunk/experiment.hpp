#pragma once

#include "debunk/agents/policies.hpp"
#include "debunk/agents/training.hpp"
#include "debunk/campaign.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace debunk::experiment {

struct NetworkSection {
    std::size_t n{100};
    double density{0.02};   // per ordered pair
    double cost_min{1.0};
    double cost_max{5.0};
};

struct HawkesSection {
    double omega{1.0};
    double alpha_max{0.5};          // entries of A drawn from U[0, alpha_max] on edges, then scaled
    double spectral_radius{0.8};    // target for A / omega
    double mu_fake_max{0.2};        // spreaders only
    double mu_mitigation_max{0.1};
    std::size_t spreaders{5};
    double boost{3.0};
    // Support of A is B^T: a post excites the poster's followers.
    bool excite_followers{true};
};

struct CampaignSection {
    double horizon{500.0};
    std::size_t stages{10};
    double budget_min{5.0};
    double budget_max{50.0};
    double delta_T{25.0};
    double gamma{0.8};
    // Exposure flows along B^T, matching excite_followers.
    bool exposure_transpose{true};
    bool normalize_followers{false};
};

struct TrainingSection {
    std::size_t episodes{100};
    std::size_t replay_capacity{10000};
    std::size_t batch_size{32};
    std::size_t sync_period{100};
    double epsilon_start{1.0};
    double epsilon_end{0.05};
    double epsilon_decay_fraction{0.5};
    double learning_rate{1e-3};
    std::vector<std::size_t> hidden{256, 256};
    std::size_t refine_episodes{50};
    std::size_t fsp_updates_per_refine_episode{10};
};

struct EvaluationSection {
    std::vector<std::string> policies{"RND", "MAX-INF", "MAX-COV", "NN", "DQN", "DQN-FSP", "LTD"};
    std::size_t test_campaigns{100};
    std::size_t runs{1};
    std::size_t threads{0};  // 0: hardware concurrency
    double budget_scale{1.0};
};

struct ExperimentConfig {
    NetworkSection network;
    HawkesSection hawkes;
    CampaignSection campaign;
    TrainingSection training;
    EvaluationSection evaluation;
    std::uint64_t seed{1};

    /// Throws std::invalid_argument naming the offending `section.key`.
    void validate() const;

    [[nodiscard]] env::CampaignConfig campaign_config() const;
    [[nodiscard]] agents::TrainingOptions training_options() const;
};

[[nodiscard]] ExperimentConfig config_from_json(const std::string& text);
[[nodiscard]] std::string config_to_json(const ExperimentConfig& config);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);
/// Applies `section.key=value`; the value is parsed as JSON when possible and
/// as a plain string otherwise.
void apply_override(ExperimentConfig& config, const std::string& assignment);

/// Random graph, costs, coefficient matrix scaled to the target radius, base
/// intensities and spreaders, all derived from the config seed.
[[nodiscard]] env::Scenario generate_scenario(const ExperimentConfig& config);

// Parameters file: JSON with n, omega, mu_fake, mu_mitigation, A (rows) and spreaders.
[[nodiscard]] std::string params_to_json(const hawkes::HawkesParams& params,
                                         const std::vector<std::size_t>& spreaders);
[[nodiscard]] hawkes::HawkesParams params_from_json(const std::string& text,
                                                    std::vector<std::size_t>* spreaders = nullptr);
void save_scenario(const std::string& directory, const env::Scenario& scenario);
[[nodiscard]] env::Scenario load_scenario(const std::string& directory);

/// Seeds of training campaign `episode` and test campaign `campaign` of `run`.
[[nodiscard]] std::uint64_t training_campaign_seed(std::uint64_t seed, std::size_t episode);
[[nodiscard]] std::uint64_t test_campaign_seed(std::uint64_t seed, std::size_t run,
                                               std::size_t campaign);
[[nodiscard]] std::uint64_t policy_seed(std::uint64_t campaign_seed);

[[nodiscard]] agents::EnvironmentFactory training_environments(const env::Scenario& scenario,
                                                               const ExperimentConfig& config);

/// Single-debunker DQN training followed by predictor refinement.
[[nodiscard]] agents::TrainingResult train_models(const env::Scenario& scenario,
                                                  const ExperimentConfig& config);

[[nodiscard]] agents::LearnedModels shared_models(const agents::TrainingResult& result);
void save_models(const std::string& directory, const agents::TrainingResult& result);
[[nodiscard]] agents::LearnedModels load_models(const std::string& directory, double gamma);

struct CampaignOutcome {
    std::string policy;
    std::size_t run{0};
    std::size_t campaign{0};
    double campaign_return{0.0};
    double cost_spent{0.0};
    std::size_t budget_violations{0};
};

struct PolicySummary {
    std::string policy;
    std::size_t run{0};
    double mean{0.0};
    double stddev{0.0};
    double ratio_vs_rnd{0.0};  // NaN when RND was not evaluated
};

struct EvaluationResult {
    std::vector<CampaignOutcome> campaigns;  // ordered by policy, run, campaign
    std::vector<PolicySummary> summaries;    // ordered by policy, run
};

/// Runs one campaign with `policy`; the environment stream depends only on
/// `campaign_seed`, so every policy sees the same schedule, budgets and noise.
[[nodiscard]] env::Campaign run_campaign(const env::Scenario& scenario,
                                         const env::CampaignConfig& campaign_config,
                                         agents::Policy& policy, std::uint64_t campaign_seed);

/// Evaluates each named policy on the same test campaigns, spread over threads.
[[nodiscard]] EvaluationResult evaluate(const env::Scenario& scenario,
                                        const ExperimentConfig& config,
                                        const agents::LearnedModels& models,
                                        const std::vector<std::string>& policies);

[[nodiscard]] double mean_return(const EvaluationResult& result, const std::string& policy);
[[nodiscard]] double mean_ratio(const EvaluationResult& result, const std::string& policy);

// metrics.csv: `policy,run,mean,std,ratio_vs_RND`.
void write_metrics(std::ostream& out, const EvaluationResult& result);
// campaigns.csv: `policy,run,campaign,return,cost_spent`.
void write_campaigns(std::ostream& out, const EvaluationResult& result);

struct ScatterPoint {
    double time{0.0};
    std::size_t node{0};
    double fake_exposure{0.0};
    double true_exposure{0.0};
    bool spreader{false};
};

/// Cumulative exposure of every node to each kind at the requested times.
/// Throws std::invalid_argument for a time outside [0, horizon].
[[nodiscard]] std::vector<ScatterPoint> exposure_scatter(const env::Scenario& scenario,
                                                         const env::CampaignLogs& logs,
                                                         std::span<const double> times,
                                                         double horizon, bool transpose);

/// Non-spreader nodes whose true exposure exceeds their fake exposure at `time`.
[[nodiscard]] std::size_t count_above_diagonal(std::span<const ScatterPoint> points, double time);

// `time,node,fake_exposure,true_exposure,spreader`
void write_scatter(std::ostream& out, std::span<const ScatterPoint> points);

} // namespace debunk::experiment
