#include "debunk/estimation.hpp"
#include "debunk/experiment.hpp"
#include "debunk/spectral.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace debunk;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    std::string out_dir{"."};
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config (JSON)");
    cmd->add_option("--seed", opts.seed, "master seed");
    cmd->add_option("--set", opts.overrides, "override, e.g. --set campaign.stages=5");
    cmd->add_option("--out-dir", opts.out_dir, "output directory");
}

experiment::ExperimentConfig resolve(const CommonOptions& opts) {
    auto config = opts.config_path.empty() ? experiment::ExperimentConfig{}
                                           : experiment::load_config(opts.config_path);
    for (const auto& o : opts.overrides) {
        experiment::apply_override(config, o);
    }
    if (opts.seed) {
        config.seed = *opts.seed;
    }
    config.validate();
    return config;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            items.push_back(item);
        }
    }
    return items;
}

void cmd_generate(const CommonOptions& opts) {
    const auto config = resolve(opts);
    const auto scenario = experiment::generate_scenario(config);
    experiment::save_scenario(opts.out_dir, scenario);
    open_out(fs::path(opts.out_dir) / "config.json") << experiment::config_to_json(config);
    std::cout << "nodes " << scenario.n() << ", edges " << scenario.graph.edge_count()
              << ", spectral radius of A " << spectral_radius(scenario.params.A) << '\n';
}

void cmd_train(const CommonOptions& opts, const std::string& scenario_dir,
               std::optional<std::size_t> episodes) {
    auto config = resolve(opts);
    if (episodes) {
        config.training.episodes = *episodes;
    }
    const auto scenario =
        experiment::load_scenario(scenario_dir.empty() ? opts.out_dir : scenario_dir);
    const auto result = experiment::train_models(scenario, config);
    experiment::save_models(opts.out_dir, result);
    open_out(fs::path(opts.out_dir) / "train_config.json") << experiment::config_to_json(config);
    std::cout << "trained " << config.training.episodes << " episodes, final return "
              << result.curve.back().campaign_return << '\n';
}

void cmd_evaluate(const CommonOptions& opts, const std::string& scenario_dir,
                  const std::string& models_dir, const std::string& policies,
                  std::optional<double> budget_scale, bool traces) {
    auto config = resolve(opts);
    if (budget_scale) {
        config.evaluation.budget_scale = *budget_scale;
    }
    if (!policies.empty()) {
        config.evaluation.policies = split_list(policies);
    }
    config.validate();
    const auto scenario =
        experiment::load_scenario(scenario_dir.empty() ? opts.out_dir : scenario_dir);
    bool learned = false;
    for (const auto& p : config.evaluation.policies) {
        learned = learned || agents::policy_needs_models(p);
    }
    agents::LearnedModels models;
    if (learned) {
        models = experiment::load_models(models_dir.empty() ? opts.out_dir : models_dir,
                                         config.campaign.gamma);
    }
    const auto result =
        experiment::evaluate(scenario, config, models, config.evaluation.policies);
    fs::create_directories(opts.out_dir);
    auto metrics = open_out(fs::path(opts.out_dir) / "metrics.csv");
    experiment::write_metrics(metrics, result);
    auto campaigns = open_out(fs::path(opts.out_dir) / "campaigns.csv");
    experiment::write_campaigns(campaigns, result);
    if (traces) {
        const auto campaign_config = config.campaign_config();
        for (const auto& name : config.evaluation.policies) {
            auto policy = agents::make_policy(name, models);
            const auto campaign = experiment::run_campaign(
                scenario, campaign_config, *policy, experiment::test_campaign_seed(config.seed, 0, 0));
            env::save_trace((fs::path(opts.out_dir) / "traces" / name).string(), campaign);
        }
    }
    experiment::write_metrics(std::cout, result);
}

void cmd_scatter(const CommonOptions& opts, const std::string& scenario_dir,
                 const std::string& trace_dir, const std::string& times_text) {
    const auto config = resolve(opts);
    const auto scenario =
        experiment::load_scenario(scenario_dir.empty() ? opts.out_dir : scenario_dir);
    env::CampaignLogs logs;
    logs.fake = hawkes::load_event_log((fs::path(trace_dir) / "fake_events.csv").string());
    logs.mitigation =
        hawkes::load_event_log((fs::path(trace_dir) / "mitigation_events.csv").string());
    std::vector<double> times;
    if (times_text.empty()) {
        const auto records =
            [&] {
                std::ifstream in(fs::path(trace_dir) / "stages.csv");
                if (!in) {
                    throw std::runtime_error("cannot open stages.csv in " + trace_dir);
                }
                return env::read_stage_records(in);
            }();
        for (const auto& r : records) {
            times.push_back(r.t_end);
        }
    } else {
        for (const auto& t : split_list(times_text)) {
            times.push_back(std::stod(t));
        }
    }
    const auto points = experiment::exposure_scatter(scenario, logs, times,
                                                     config.campaign.horizon,
                                                     config.campaign.exposure_transpose);
    fs::create_directories(opts.out_dir);
    auto out = open_out(fs::path(opts.out_dir) / "scatter.csv");
    experiment::write_scatter(out, points);
    for (double t : times) {
        std::cout << "t=" << t << " above diagonal: "
                  << experiment::count_above_diagonal(points, t) << '\n';
    }
}

struct FitOptions {
    std::string input;
    std::string method{"continuous"};
    double omega{1.0};
    double bin_width{1.0};
    double ridge{1e-6};
    bool keep_negative{false};
    bool no_rescale{false};
    double horizon{500.0};
    double radius{0.8};
    bool allow_empty{false};
};

void cmd_fit(const CommonOptions& opts, const FitOptions& f) {
    estimation::IngestOptions ingest_options;
    ingest_options.horizon = f.horizon;
    ingest_options.rescale = !f.no_rescale;
    const auto data = estimation::ingest_file(f.input, ingest_options);
    for (const auto& w : data.warnings) {
        std::cerr << "warning: " << w << '\n';
    }
    if (data.n() == 0 && !f.allow_empty) {
        throw std::runtime_error("no events in " + f.input + " (pass --allow-empty for zero params)");
    }
    estimation::FitConfig config;
    if (f.method == "continuous") {
        config.method = estimation::FitMethod::Continuous;
    } else if (f.method == "binned") {
        config.method = estimation::FitMethod::Binned;
    } else {
        throw std::invalid_argument("--method must be continuous or binned");
    }
    config.omega = f.omega;
    config.bin_width = f.bin_width;
    config.ridge = f.ridge;
    config.nonnegative = !f.keep_negative;
    auto fit = estimation::fit_least_squares({estimation::as_realization(data)}, data.n(), config);
    if (f.radius > 0.0 && data.n() > 0 && spectral_radius(fit.params.A) > 0.0) {
        fit.params.A = scale_to_spectral_radius(fit.params.A, f.radius * fit.params.omega);
    }
    fs::create_directories(opts.out_dir);
    open_out(fs::path(opts.out_dir) / "params.json") << experiment::params_to_json(fit.params, {});
    auto users = open_out(fs::path(opts.out_dir) / "users.txt");
    for (const auto& u : data.users) {
        users << u << '\n';
    }
    std::cout << "users " << data.n() << ", fake events " << data.fake.events.size()
              << ", true events " << data.mitigation.events.size() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-stage fake-news mitigation: simulation, training and evaluation"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string scenario_dir;
    std::string models_dir;
    std::string policies;
    std::string trace_dir;
    std::string times;
    std::optional<std::size_t> episodes;
    std::optional<double> budget_scale;
    bool traces = false;
    FitOptions fit;

    auto* generate = app.add_subcommand("generate", "write a random graph and Hawkes parameters");
    add_common(generate, common);

    auto* train = app.add_subcommand("train", "train the Q-network, predictor and reward model");
    add_common(train, common);
    train->add_option("--scenario", scenario_dir, "directory written by generate (default: out-dir)");
    train->add_option("--episodes", episodes, "training campaigns");

    auto* evaluate = app.add_subcommand("evaluate", "run policies on matched test campaigns");
    add_common(evaluate, common);
    evaluate->add_option("--scenario", scenario_dir, "directory written by generate (default: out-dir)");
    evaluate->add_option("--models", models_dir, "directory written by train (default: out-dir)");
    evaluate->add_option("--policies", policies, "comma-separated policy names");
    evaluate->add_option("--budget-scale", budget_scale, "multiplier on the stage budget range");
    evaluate->add_flag("--traces", traces, "also export the first test campaign of each policy");

    auto* scatter = app.add_subcommand("scatter", "per-node fake/true exposure from a campaign trace");
    add_common(scatter, common);
    scatter->add_option("--scenario", scenario_dir, "directory written by generate (default: out-dir)");
    scatter->add_option("--trace", trace_dir, "campaign trace directory")->required();
    scatter->add_option("--times", times, "comma-separated times (default: stage ends)");

    auto* fit_cmd = app.add_subcommand("fit", "fit Hawkes parameters to user_id,timestamp,label records");
    add_common(fit_cmd, common);
    fit_cmd->add_option("--input", fit.input, "event records")->required();
    fit_cmd->add_option("--method", fit.method, "continuous or binned");
    fit_cmd->add_option("--omega", fit.omega, "kernel decay");
    fit_cmd->add_option("--bin-width", fit.bin_width, "bin width for the binned method");
    fit_cmd->add_option("--ridge", fit.ridge, "ridge weight");
    fit_cmd->add_flag("--keep-negative", fit.keep_negative, "do not clip negative estimates");
    fit_cmd->add_flag("--no-rescale", fit.no_rescale, "keep original time units (shifted to 0)");
    fit_cmd->add_option("--horizon", fit.horizon, "rescaled time window");
    fit_cmd->add_option("--radius", fit.radius, "target spectral radius of A/omega (0: keep)");
    fit_cmd->add_flag("--allow-empty", fit.allow_empty, "write zero parameters for empty input");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (generate->parsed()) {
            cmd_generate(common);
        } else if (train->parsed()) {
            cmd_train(common, scenario_dir, episodes);
        } else if (evaluate->parsed()) {
            cmd_evaluate(common, scenario_dir, models_dir, policies, budget_scale, traces);
        } else if (scatter->parsed()) {
            cmd_scatter(common, scenario_dir, trace_dir, times);
        } else if (fit_cmd->parsed()) {
            cmd_fit(common, fit);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
