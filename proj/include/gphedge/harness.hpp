#pragma once

// Experiment orchestration: declarative JSON configs, paired multi-trial
// execution on a thread pool, CSV / JSON emission.

#include <gphedge/bo_loop.hpp>
#include <gphedge/metrics.hpp>
#include <gphedge/objectives.hpp>
#include <gphedge/synthetic_io.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gphedge {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Portfolios

inline std::vector<AcquisitionSpec> default_portfolio3() {
    return {AcquisitionSpec::pi(0.01), AcquisitionSpec::ei(0.01), AcquisitionSpec::ucb(0.2)};
}

/// The three defaults plus {PI, EI} x {xi = 0.1, 1.0} and UCB x {nu = 0.1, 1.0}.
inline std::vector<AcquisitionSpec> default_portfolio9() {
    auto p = default_portfolio3();
    for (double xi : {0.1, 1.0})
        p.push_back(AcquisitionSpec::pi(xi));
    for (double xi : {0.1, 1.0})
        p.push_back(AcquisitionSpec::ei(xi));
    for (double nu : {0.1, 1.0})
        p.push_back(AcquisitionSpec::ucb(nu));
    return p;
}

struct StrategyConfig {
    std::string name;
    Strategy strategy = Strategy::Single;
    std::vector<AcquisitionSpec> acquisitions;
    PortfolioOptions portfolio;
};

struct ModelConfig {
    std::size_t offline_samples = 0; // 0 -> min(30 d, 100)
    HyperSearch search;
    std::optional<Eigen::VectorXd> lengthscales; // skip the offline fit
    double noise_variance = 1e-6;
};

struct ExperimentConfig {
    std::string id = "experiment";
    json objective = {{"name", "branin"}};
    std::vector<StrategyConfig> strategies;
    std::size_t trials = 25;
    std::size_t iterations = 100;
    std::size_t init_samples = 2;
    std::uint64_t base_seed = 1;
    std::string output_dir = "results";
    unsigned jobs = 1;
    ModelConfig model;
    std::optional<MaximizerConfig> maximizer;
    IncumbentMode incumbent = IncumbentMode::PosteriorMean;
    double delta = 0.1;
    std::optional<std::uint64_t> cardinality;
    json source; // effective config, hashed into output filenames
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline AcquisitionSpec parse_acquisition(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "PI") return AcquisitionSpec::pi();
        if (s == "EI") return AcquisitionSpec::ei();
        if (s == "UCB") return AcquisitionSpec::ucb();
        throw ArgumentError("config: unknown acquisition '" + s + "'");
    }
    const auto kind = j.at("kind").get<std::string>();
    AcquisitionSpec a;
    if (kind == "PI")
        a = AcquisitionSpec::pi(j.value("xi", 0.01));
    else if (kind == "EI")
        a = AcquisitionSpec::ei(j.value("xi", 0.01));
    else if (kind == "UCB")
        a = AcquisitionSpec::ucb(j.value("nu", 0.2));
    else
        throw ArgumentError("config: unknown acquisition kind '" + kind + "'");
    if (j.contains("label"))
        a.label = j.at("label").get<std::string>();
    a.validate();
    return a;
}

inline std::vector<AcquisitionSpec> parse_portfolio(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "default3") return default_portfolio3();
        if (s == "default9") return default_portfolio9();
        throw ArgumentError("config: unknown portfolio '" + s + "'");
    }
    std::vector<AcquisitionSpec> out;
    for (const auto& a : j)
        out.push_back(parse_acquisition(a));
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t k = 0; k < i; ++k)
            if (out[i].label == out[k].label)
                throw ArgumentError("config: duplicate acquisition label " + out[i].label);
    return out;
}

inline Strategy parse_strategy_kind(const std::string& s) {
    if (s == "single") return Strategy::Single;
    if (s == "hedge") return Strategy::Hedge;
    if (s == "exp3") return Strategy::Exp3;
    if (s == "normalhedge") return Strategy::NormalHedge;
    if (s == "uniform") return Strategy::Uniform;
    throw ArgumentError("config: unknown strategy kind '" + s + "'");
}

inline StrategyConfig parse_strategy(const json& j) {
    StrategyConfig sc;
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        sc.name = s;
        if (s == "PI" || s == "EI" || s == "UCB") {
            sc.strategy = Strategy::Single;
            sc.acquisitions = {parse_acquisition(j)};
        } else if (s == "GP-Hedge-3") {
            sc.strategy = Strategy::Hedge;
            sc.acquisitions = default_portfolio3();
        } else if (s == "GP-Hedge-9" || s == "GP-Hedge") {
            sc.strategy = Strategy::Hedge;
            sc.acquisitions = default_portfolio9();
        } else if (s == "Exp3" || s == "NormalHedge" || s == "Uniform") {
            std::string lower = s;
            std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
            sc.strategy = parse_strategy_kind(lower);
            sc.acquisitions = default_portfolio9();
        } else {
            throw ArgumentError("config: unknown strategy '" + s + "'");
        }
        return sc;
    }
    sc.name = j.at("name").get<std::string>();
    sc.strategy = parse_strategy_kind(j.value("strategy", std::string("hedge")));
    if (sc.strategy == Strategy::Single)
        sc.acquisitions = {parse_acquisition(j.at("acquisition"))};
    else
        sc.acquisitions = parse_portfolio(j.value("portfolio", json("default9")));
    if (j.contains("eta")) {
        const auto& e = j.at("eta");
        if (e.is_number()) {
            sc.portfolio.eta_rule = EtaRule::Constant;
            sc.portfolio.eta_value = e.get<double>();
        } else if (e.get<std::string>() == "fixed-horizon") {
            sc.portfolio.eta_rule = EtaRule::FixedHorizon;
        } else if (e.get<std::string>() == "time-varying") {
            sc.portfolio.eta_rule = EtaRule::TimeVarying;
        } else {
            throw ArgumentError("config: eta must be a number, \"time-varying\" or \"fixed-horizon\"");
        }
    }
    sc.portfolio.exp3_gamma = j.value("gamma", sc.portfolio.exp3_gamma);
    if (j.contains("scaling")) {
        const auto& s = j.at("scaling");
        if (s.is_array()) {
            sc.portfolio.scaling = RewardScaling::Fixed;
            sc.portfolio.reward_lower = s.at(0).get<double>();
            sc.portfolio.reward_upper = s.at(1).get<double>();
        } else if (s.get<std::string>() == "raw") {
            sc.portfolio.scaling = RewardScaling::Raw;
        } else if (s.get<std::string>() == "running") {
            sc.portfolio.scaling = RewardScaling::Running;
        } else {
            throw ArgumentError("config: scaling must be \"running\", \"raw\" or [lower, upper]");
        }
    }
    return sc;
}

} // namespace detail

/// Reads an experiment from JSON. `overrides` (if non-null) replaces top-level keys first.
inline ExperimentConfig parse_experiment(json j) {
    ExperimentConfig c;
    c.id = j.value("id", c.id);
    if (c.id.empty() || c.id.find_first_of("/\\") != std::string::npos)
        throw ArgumentError("config: id must be a non-empty file-name-safe string");
    c.objective = j.at("objective");
    if (c.objective.is_string())
        c.objective = json{{"name", c.objective.get<std::string>()}};
    c.trials = j.value("trials", c.trials);
    c.iterations = j.value("iterations", c.iterations);
    c.init_samples = j.value("init_samples", c.init_samples);
    c.base_seed = j.value("seed", c.base_seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.jobs = j.value("jobs", c.jobs);
    c.delta = j.value("delta", c.delta);
    if (j.contains("cardinality"))
        c.cardinality = j.at("cardinality").get<std::uint64_t>();
    if (j.value("incumbent", std::string("posterior-mean")) == "best-sample")
        c.incumbent = IncumbentMode::BestSample;

    const json strategies = j.value("strategies", json::array({"PI", "EI", "UCB", "GP-Hedge-3", "GP-Hedge-9"}));
    for (const auto& s : strategies)
        c.strategies.push_back(detail::parse_strategy(s));
    if (c.strategies.empty())
        throw ArgumentError("config: at least one strategy required");
    for (std::size_t i = 0; i < c.strategies.size(); ++i)
        for (std::size_t k = 0; k < i; ++k)
            if (c.strategies[i].name == c.strategies[k].name)
                throw ArgumentError("config: duplicate strategy name " + c.strategies[i].name);

    if (j.contains("model")) {
        const auto& m = j.at("model");
        c.model.offline_samples = m.value("offline_samples", c.model.offline_samples);
        c.model.search.starts = m.value("starts", c.model.search.starts);
        c.model.search.steps = m.value("steps", c.model.search.steps);
        c.model.noise_variance = m.value("noise_variance", c.model.noise_variance);
        if (m.contains("lengthscales")) {
            const auto v = m.at("lengthscales").get<std::vector<double>>();
            c.model.lengthscales = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
    }
    if (j.contains("maximizer")) {
        const auto& m = j.at("maximizer");
        MaximizerConfig mc;
        mc.direct_budget = m.at("direct_budget").get<std::size_t>();
        mc.multistart_count = m.value("multistart_count", mc.multistart_count);
        mc.local_steps = m.value("local_steps", mc.local_steps);
        mc.validate();
        c.maximizer = mc;
    }
    if (c.trials < 1 || c.iterations < 1 || c.init_samples < 1)
        throw ArgumentError("config: trials, iterations and init_samples must be >= 1");
    c.source = std::move(j);
    return c;
}

inline ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("cannot open config " + path);
    json j;
    try {
        j = json::parse(is, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ArgumentError("config " + path + ": " + e.what());
    }
    return parse_experiment(std::move(j));
}

/// Digest of everything that influences results (not output location or parallelism).
inline std::string config_hash(const ExperimentConfig& c) {
    json j = c.source;
    j.erase("output_dir");
    j.erase("jobs");
    j["trials"] = c.trials;
    j["iterations"] = c.iterations;
    j["seed"] = c.base_seed;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
    return buf;
}

// ---------------------------------------------------------------------------
// Objectives

struct ResolvedObjective {
    ObjectiveSpec spec;
    std::optional<OfflineModel> model; // fixed model; otherwise fit offline
};

struct ObjectiveInfo {
    std::string name;
    std::string dimension;
    std::string known_optimum;
    std::string description;
};

inline std::vector<ObjectiveInfo> list_objectives() {
    auto fmt = [](double v) {
        char b[32];
        std::snprintf(b, sizeof b, "%.6f", v);
        return std::string(b);
    };
    return {
        {"branin", "2", fmt(kBraninOptimum), "negated Branin-Hoo on [-5,10]x[0,15]"},
        {"hartman3", "3", fmt(kHartman3Optimum), "negated Hartman 3 on [0,1]^3"},
        {"hartman6", "6", fmt(kHartman6Optimum), "negated Hartman 6 on [0,1]^6"},
        {"synthetic", "d", "computed", "posterior mean of a GP prior draw, ARD lengthscales ~ U(0,2]^d"},
        {"repeller", "9", "unknown", "particle steered by 3 repellers through a reward field (stochastic)"},
    };
}

namespace detail {

inline RepellerParams parse_repeller(const json& j) {
    RepellerParams p;
    p.horizon = j.value("horizon", p.horizon);
    p.dt = j.value("dt", p.dt);
    p.friction = j.value("friction", p.friction);
    p.start_std = j.value("start_std", p.start_std);
    p.goal_width = j.value("goal_width", p.goal_width);
    p.max_strength = j.value("max_strength", p.max_strength);
    p.evaluation_rollouts = j.value("evaluation_rollouts", p.evaluation_rollouts);
    if (j.contains("gravity")) {
        const auto g = j.at("gravity").get<std::vector<double>>();
        p.gravity = Eigen::Vector2d(g.at(0), g.at(1));
    }
    if (j.contains("goals")) {
        p.goals.clear();
        for (const auto& g : j.at("goals"))
            p.goals.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
    }
    return p;
}

inline ResolvedObjective synthetic_resolved(const SyntheticObjective& s, double obs_noise) {
    OfflineModel m;
    m.kernel = s.gp().kernel();
    return {s.to_spec(obs_noise), m};
}

} // namespace detail

/// True when every trial draws its own objective (synthetic generation).
inline bool objective_per_trial(const ExperimentConfig& c) {
    return c.objective.value("name", std::string()) == "synthetic" && !c.objective.contains("file") &&
           c.objective.value("per_trial", true);
}

inline ResolvedObjective resolve_objective(const ExperimentConfig& c, std::size_t trial) {
    const json& o = c.objective;
    const std::string name = o.at("name").get<std::string>();
    const double noise = o.value("noise_variance", 0.0);
    if (name == "branin")
        return {make_branin(noise), std::nullopt};
    if (name == "hartman3")
        return {make_hartman3(noise), std::nullopt};
    if (name == "hartman6")
        return {make_hartman6(noise), std::nullopt};
    if (name == "repeller")
        return {make_repeller(detail::parse_repeller(o)), std::nullopt};
    if (name == "synthetic") {
        if (o.contains("file"))
            return detail::synthetic_resolved(load_synthetic(o.at("file").get<std::string>()), noise);
        const auto d = o.at("dimension").get<Eigen::Index>();
        const std::uint64_t base = o.value("seed", c.base_seed);
        const std::uint64_t seed = objective_per_trial(c) ? mix_seed({base, 0x5e7, trial}) : base;
        SyntheticOptions opt;
        opt.optimum_probes = o.value("optimum_probes", opt.optimum_probes);
        return detail::synthetic_resolved(sample_synthetic_objective(d, seed, opt), noise);
    }
    throw ArgumentError("config: unknown objective '" + name + "'");
}

// ---------------------------------------------------------------------------
// Execution

struct ResultRow {
    std::string experiment;
    std::string strategy;
    std::size_t trial = 0;
    std::size_t iteration = 0;
    std::optional<double> gap;
    std::optional<double> regret;
    std::size_t chosen_arm = 0;
    std::string chosen_label;
    std::vector<double> probabilities;
    double y = 0.0;
    double true_value = 0.0;
    double incumbent = 0.0;
    std::vector<double> x;
};

struct ResultTable {
    std::vector<ResultRow> rows;
};

struct StrategyResult {
    StrategyConfig config;
    std::vector<std::optional<TrialRecord>> trials;
    std::vector<std::string> errors; // one per trial, empty on success
};

struct ExperimentResult {
    ExperimentConfig config;
    std::string hash;
    std::vector<StrategyResult> strategies;
    std::vector<std::optional<double>> f_star; // per trial
    std::vector<OfflineModel> models;          // per trial
    ResultTable table;
    std::size_t failures = 0;
};

inline TrialSeeds trial_seeds(std::uint64_t base_seed, const std::string& strategy, std::size_t trial) {
    return {mix_seed({base_seed, 0xde51, trial}), mix_seed({base_seed, 0x0153, trial}),
            mix_seed({base_seed, fnv1a(strategy), trial})};
}

namespace detail {

template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, n))));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++)
                fn(i);
        });
    for (auto& th : pool)
        th.join();
}

} // namespace detail

/// Runs every (strategy, trial) pair. Trial k of every strategy shares the
/// initial design, the noise stream and (for generated objectives) the
/// objective itself; results are assembled in (strategy, trial) order.
inline ExperimentResult run_experiment(const ExperimentConfig& c) {
    ExperimentResult res;
    res.config = c;
    res.hash = config_hash(c);

    // Objectives and offline models, one per trial (shared when not per-trial).
    std::vector<std::optional<ResolvedObjective>> objectives(c.trials);
    std::vector<std::string> objective_errors(c.trials);
    res.models.resize(c.trials);
    auto build = [&](std::size_t k) {
        try {
            ResolvedObjective r = resolve_objective(c, k);
            if (c.model.lengthscales) {
                OfflineModel m;
                m.kernel = KernelParams{*c.model.lengthscales, 1.0};
                if (m.kernel.dimension() != r.spec.dimension())
                    throw ArgumentError("config: model.lengthscales has the wrong dimension");
                r.model = m;
            } else if (!r.model) {
                const auto d = static_cast<std::size_t>(r.spec.dimension());
                const std::size_t n = c.model.offline_samples ? c.model.offline_samples : std::min<std::size_t>(30 * d, 100);
                r.model = fit_offline_model(r.spec, n, c.model.noise_variance, mix_seed({c.base_seed, 0x0ff}),
                                            c.model.search);
            }
            objectives[k] = std::move(r);
        } catch (const std::exception& e) {
            objective_errors[k] = e.what();
        }
    };
    if (objective_per_trial(c)) {
        detail::parallel_for(c.trials, c.jobs, build);
    } else {
        build(0);
        for (std::size_t k = 1; k < c.trials; ++k) {
            objectives[k] = objectives[0];
            objective_errors[k] = objective_errors[0];
        }
    }
    res.f_star.resize(c.trials);
    for (std::size_t k = 0; k < c.trials; ++k)
        if (objectives[k]) {
            res.f_star[k] = objectives[k]->spec.known_optimum;
            res.models[k] = *objectives[k]->model;
        }

    const std::size_t S = c.strategies.size();
    res.strategies.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
        res.strategies[s].config = c.strategies[s];
        res.strategies[s].trials.resize(c.trials);
        res.strategies[s].errors.resize(c.trials);
    }

    detail::parallel_for(S * c.trials, c.jobs, [&](std::size_t task) {
        const std::size_t s = task / c.trials, k = task % c.trials;
        auto& sr = res.strategies[s];
        if (!objectives[k]) {
            sr.errors[k] = "objective: " + objective_errors[k];
            return;
        }
        try {
            RunConfig rc;
            rc.objective = objectives[k]->spec;
            rc.iterations = c.iterations;
            rc.init_samples = c.init_samples;
            rc.acquisitions = sr.config.acquisitions;
            rc.strategy = sr.config.strategy;
            rc.portfolio = sr.config.portfolio;
            rc.portfolio.horizon = c.iterations;
            rc.maximizer = c.maximizer;
            rc.seeds = trial_seeds(c.base_seed, sr.config.name, k);
            rc.noise_variance = c.model.noise_variance;
            rc.kernel = objectives[k]->model->kernel;
            rc.output_scaling = objectives[k]->model->scaling;
            rc.incumbent = c.incumbent;
            rc.schedule = BetaSchedule{
                c.delta, c.cardinality.value_or(static_cast<std::uint64_t>(10000 * rc.objective.dimension()))};
            sr.trials[k] = run(rc);
        } catch (const std::exception& e) {
            sr.errors[k] = e.what();
        }
    });

    for (std::size_t s = 0; s < S; ++s) {
        const auto& sr = res.strategies[s];
        for (std::size_t k = 0; k < c.trials; ++k) {
            if (!sr.trials[k]) {
                ++res.failures;
                continue;
            }
            const auto& rec = *sr.trials[k];
            for (const auto& row : rec.rows) {
                ResultRow r;
                r.experiment = c.id;
                r.strategy = sr.config.name;
                r.trial = k;
                r.iteration = row.iteration;
                r.gap = row.gap;
                r.regret = row.regret;
                r.chosen_arm = row.chosen;
                r.chosen_label = rec.arm_labels[row.chosen];
                r.probabilities.assign(row.probabilities.data(), row.probabilities.data() + row.probabilities.size());
                r.y = row.y;
                r.true_value = row.true_value;
                r.incumbent = row.incumbent;
                r.x.assign(row.x.data(), row.x.data() + row.x.size());
                res.table.rows.push_back(std::move(r));
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Emission

namespace detail {

inline std::string num(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

inline std::string join(const std::vector<double>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s.push_back(sep);
        s += num(v[i]);
    }
    return s;
}

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"')
            q.push_back('"');
        q.push_back(ch);
    }
    q.push_back('"');
    return q;
}

} // namespace detail

inline std::string to_csv(const ResultTable& table) {
    std::ostringstream os;
    os << "experiment,strategy,trial,iteration,gap,regret,chosen_arm,chosen_label,arm_probabilities,y,true_value,"
          "incumbent,x\r\n";
    for (const auto& r : table.rows) {
        using detail::csv_field;
        os << csv_field(r.experiment) << ',' << csv_field(r.strategy) << ',' << r.trial << ',' << r.iteration << ','
           << (r.gap ? detail::num(*r.gap) : "") << ',' << (r.regret ? detail::num(*r.regret) : "") << ','
           << r.chosen_arm << ',' << csv_field(r.chosen_label) << ',' << csv_field(detail::join(r.probabilities, ';'))
           << ',' << detail::num(r.y) << ',' << detail::num(r.true_value) << ',' << detail::num(r.incumbent) << ','
           << csv_field(detail::join(r.x, ';')) << "\r\n";
    }
    return os.str();
}

inline json summary_json(const ExperimentResult& res) {
    const auto& c = res.config;
    json j;
    j["experiment"] = c.id;
    j["config_hash"] = res.hash;
    j["metadata"] = {
        {"trials", c.trials},
        {"iterations", c.iterations},
        {"init_samples", c.init_samples},
        {"base_seed", c.base_seed},
        {"objective", c.objective},
        {"seed_pairing", "trial k of every strategy shares its initial design, observation-noise stream and "
                         "objective draw; the inner-maximizer and arm-selection streams depend on the strategy"},
        {"failures", res.failures},
    };
    json models = json::array();
    for (std::size_t k = 0; k < res.models.size() && k < (objective_per_trial(c) ? res.models.size() : 1); ++k) {
        const auto& m = res.models[k];
        std::vector<double> ls(m.kernel.lengthscales.data(), m.kernel.lengthscales.data() + m.kernel.lengthscales.size());
        models.push_back({{"lengthscales", ls},
                          {"output_offset", m.scaling.offset},
                          {"output_scale", m.scaling.scale},
                          {"degenerate_fit", m.degenerate}});
    }
    j["metadata"]["models"] = models;

    j["strategies"] = json::array();
    for (const auto& sr : res.strategies) {
        json s;
        s["name"] = sr.config.name;
        s["strategy"] = to_string(sr.config.strategy);
        std::vector<std::string> labels;
        for (const auto& a : sr.config.acquisitions)
            labels.push_back(a.label);
        s["arms"] = labels;
        json errors = json::array();
        std::vector<TrialRecord> ok;
        std::optional<double> f_star;
        for (std::size_t k = 0; k < sr.trials.size(); ++k) {
            if (!sr.errors[k].empty())
                errors.push_back({{"trial", k}, {"error", sr.errors[k]}});
            if (sr.trials[k]) {
                ok.push_back(*sr.trials[k]);
                if (res.f_star[k] && !f_star)
                    f_star = res.f_star[k];
            }
        }
        s["failed_trials"] = errors;

        if (!ok.empty()) {
            const std::size_t T = ok.front().rows.size();
            const std::size_t N = sr.config.acquisitions.size();
            // Gap is computed per trial against that trial's optimum.
            std::vector<std::vector<double>> gaps, avg_regret;
            std::vector<std::vector<double>> incumbents;
            for (std::size_t k = 0, idx = 0; k < sr.trials.size(); ++k) {
                if (!sr.trials[k])
                    continue;
                const auto& rec = ok[idx++];
                std::vector<double> inc;
                for (const auto& row : rec.rows)
                    inc.push_back(row.incumbent);
                incumbents.push_back(std::move(inc));
                if (res.f_star[k]) {
                    auto g = gap(rec, *res.f_star[k]);
                    if (g.defined)
                        gaps.push_back(g.values);
                    avg_regret.push_back(regret_series(rec, *res.f_star[k]).average);
                }
            }
            auto mean_var = [T](const std::vector<std::vector<double>>& series) {
                std::vector<double> m(T, 0.0), v(T, 0.0);
                if (series.empty())
                    return std::pair{m, v};
                for (std::size_t t = 0; t < T; ++t) {
                    for (const auto& x : series)
                        m[t] += x[t];
                    m[t] /= static_cast<double>(series.size());
                    for (const auto& x : series)
                        v[t] += (x[t] - m[t]) * (x[t] - m[t]);
                    v[t] = series.size() > 1 ? v[t] / static_cast<double>(series.size() - 1) : 0.0;
                }
                return std::pair{m, v};
            };
            auto [inc_mean, inc_var] = mean_var(incumbents);
            s["incumbent_mean"] = inc_mean;
            s["incumbent_variance"] = inc_var;
            if (!gaps.empty()) {
                auto [gm, gv] = mean_var(gaps);
                s["gap_mean"] = gm;
                s["gap_variance"] = gv;
                s["final_gap_mean"] = gm.back();
                s["final_gap_variance"] = gv.back();
                s["average_regret_mean"] = mean_var(avg_regret).first;
            }
            // Arm probability evolution: mean over trials, plus trial 0 alone.
            std::vector<std::vector<double>> pmean(T, std::vector<double>(N, 0.0));
            std::vector<std::size_t> counts(N, 0);
            for (const auto& rec : ok)
                for (std::size_t t = 0; t < T; ++t) {
                    for (std::size_t i = 0; i < N; ++i)
                        pmean[t][i] += rec.rows[t].probabilities[static_cast<Eigen::Index>(i)] /
                                       static_cast<double>(ok.size());
                    ++counts[rec.rows[t].chosen];
                }
            std::vector<std::vector<double>> pfirst;
            for (const auto& row : ok.front().rows)
                pfirst.emplace_back(row.probabilities.data(), row.probabilities.data() + row.probabilities.size());
            s["arm_probability_mean"] = pmean;
            s["arm_probability_first_trial"] = pfirst;
            s["chosen_counts"] = counts;
        }
        j["strategies"].push_back(std::move(s));
    }
    return j;
}

struct EmittedFiles {
    std::string csv;
    std::string json;
};

inline EmittedFiles emit(const ExperimentResult& res, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string stem = res.config.id + "-" + res.hash;
    EmittedFiles files{(fs::path(out_dir) / (stem + ".csv")).string(),
                       (fs::path(out_dir) / (stem + "-summary.json")).string()};
    auto write = [](const std::string& path, const std::string& content) {
        std::ofstream os(path, std::ios::binary | std::ios::trunc);
        if (!os)
            throw std::runtime_error("cannot open " + path + " for writing");
        os << content;
        if (!os)
            throw std::runtime_error("write failed: " + path);
    };
    write(files.csv, to_csv(res.table));
    write(files.json, summary_json(res).dump(2) + "\n");
    return files;
}

} // namespace gphedge
