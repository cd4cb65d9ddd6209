#pragma once

#include <gphedge/acq_maximizer.hpp>
#include <gphedge/acquisitions.hpp>
#include <gphedge/errors.hpp>
#include <gphedge/gp_core.hpp>
#include <gphedge/metrics.hpp>
#include <gphedge/objectives.hpp>
#include <gphedge/portfolio.hpp>
#include <gphedge/random.hpp>
#include <gphedge/trial_record.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gphedge {

/// Affine map from raw objective values to GP targets: (y - offset) / scale.
struct OutputScaling {
    double offset = 0.0;
    double scale = 1.0;

    double apply(double y) const { return (y - offset) / scale; }
};

enum class RewardTiming {
    AfterUpdate,  // r_t^i = mu_t(x_t^i), the portfolio default
    BeforeUpdate, // r_t^i = mu_{t-1}(x_t^i)
};

/// Independent RNG streams of one trial. The design and noise streams are
/// shared by all strategies of a paired experiment.
struct TrialSeeds {
    std::uint64_t design = 1;
    std::uint64_t noise = 2;
    std::uint64_t search = 3; // inner maximizer and arm selection

    static TrialSeeds from(std::uint64_t seed) {
        return {mix_seed({seed, 0xde51}), mix_seed({seed, 0x0153}), mix_seed({seed, 0x5ea7})};
    }
};

struct RunConfig {
    ObjectiveSpec objective;
    std::size_t iterations = 100;
    std::size_t init_samples = 2;
    std::vector<AcquisitionSpec> acquisitions;
    Strategy strategy = Strategy::Single;
    PortfolioOptions portfolio;
    std::optional<MaximizerConfig> maximizer; // seed field ignored; derived per iteration
    TrialSeeds seeds;
    double noise_variance = 1e-6; // GP observation noise, normalized units
    std::optional<KernelParams> kernel; // normalized inputs; default isotropic 0.25
    OutputScaling output_scaling;
    IncumbentMode incumbent = IncumbentMode::PosteriorMean;
    std::optional<BetaSchedule> schedule; // default delta 0.1, |A| = 10000 d
    RewardTiming reward_timing = RewardTiming::AfterUpdate;

    BetaSchedule beta_schedule() const {
        if (schedule)
            return *schedule;
        return {0.1, static_cast<std::uint64_t>(10000 * objective.dimension())};
    }

    MaximizerConfig maximizer_config() const {
        return maximizer.value_or(MaximizerConfig::defaults_for(objective.dimension()));
    }

    void validate() const {
        objective.domain.validate();
        if (!objective.truth)
            throw ArgumentError("run: objective has no evaluation function");
        if (iterations < 1 || init_samples < 1)
            throw ArgumentError("run: iterations and init_samples must be >= 1");
        if (acquisitions.empty())
            throw ArgumentError("run: at least one acquisition required");
        if (strategy == Strategy::Single && acquisitions.size() != 1)
            throw ArgumentError("run: strategy Single requires exactly one acquisition");
        for (const auto& a : acquisitions)
            a.validate();
        if (kernel && kernel->dimension() != objective.dimension())
            throw ArgumentError("run: kernel dimension does not match the objective");
        beta_schedule().validate();
        maximizer_config().validate();
    }
};

/// Latin-hypercube initial design in box coordinates.
inline std::vector<Point> initial_design(const BoxDomain& domain, std::size_t count, std::uint64_t seed) {
    return latin_hypercube(domain, count, seed);
}

namespace detail {

inline TrialRecord run_loop(const RunConfig& config) {
    config.validate();
    const ObjectiveSpec& obj = config.objective;
    const BoxDomain& box = obj.domain;
    const Eigen::Index d = obj.dimension();
    const BoxDomain unit = BoxDomain::unit(d);
    const BetaSchedule schedule = config.beta_schedule();
    const MaximizerConfig mcfg = config.maximizer_config();
    const KernelParams kernel = config.kernel.value_or(KernelParams::isotropic(d, 0.25));
    const std::size_t N = config.acquisitions.size();

    Rng noise_rng(config.seeds.noise);
    Rng select_rng(mix_seed({config.seeds.search, 0x5e1ec7}));

    TrialRecord rec;
    rec.objective = obj.name;
    rec.strategy = config.strategy;
    rec.f_star = obj.known_optimum;
    rec.gp_noise_variance = config.noise_variance;
    rec.schedule = schedule;
    for (const auto& a : config.acquisitions)
        rec.arm_labels.push_back(a.label.empty() ? to_string(a.kind) : a.label);

    std::vector<Point> init_unit;
    std::vector<double> init_targets;
    rec.initial_points = initial_design(box, config.init_samples, config.seeds.design);
    for (const auto& x : rec.initial_points) {
        const double y = obj.observe(x, noise_rng);
        rec.initial_observations.push_back(y);
        rec.initial_true.push_back(obj.truth(x));
        init_unit.push_back(box.to_unit(x).cwiseMax(0.0).cwiseMin(1.0));
        init_targets.push_back(config.output_scaling.apply(y));
    }
    rec.f_x1 = *std::max_element(rec.initial_true.begin(), rec.initial_true.end());
    double incumbent_true = rec.f_x1;
    double best_observed = *std::max_element(rec.initial_observations.begin(), rec.initial_observations.end());

    GpState gp = GpState::fit(init_unit, init_targets, kernel, config.noise_variance);
    PortfolioState portfolio = PortfolioState::make(config.strategy, N, config.portfolio);

    std::optional<std::size_t> ucb_arm;
    for (std::size_t i = 0; i < N; ++i)
        if (config.acquisitions[i].kind == AcquisitionKind::UCB) {
            ucb_arm = i;
            break;
        }

    for (std::size_t t = 1; t <= config.iterations; ++t) {
        try {
            IterationRow row;
            row.iteration = t;
            const double mu_plus = incumbent_value(gp, config.incumbent);

            std::vector<Point> nominees_unit;
            for (std::size_t i = 0; i < N; ++i) {
                const auto& spec = config.acquisitions[i];
                auto u = [&](const Point& x) { return acquisition_value(spec, gp.predict(x), mu_plus, t, schedule); };
                MaximizerConfig mc = mcfg;
                mc.seed = mix_seed({config.seeds.search, t, i});
                MaxResult best = maximize(u, unit, mc);
                const Prediction pre = gp.predict(best.point);
                row.rewards_prior.push_back(pre.mean);
                row.nominee_stddev.push_back(pre.stddev());
                row.nominees.push_back(box.from_unit(best.point));
                nominees_unit.push_back(std::move(best.point));
            }
            if (ucb_arm)
                row.ucb_stddev = row.nominee_stddev[*ucb_arm];

            row.probabilities = probabilities(portfolio);
            row.chosen = config.strategy == Strategy::Single ? 0 : select_arm(portfolio, select_rng);
            const Point& u_t = nominees_unit[row.chosen];
            row.x = row.nominees[row.chosen];

            const Prediction pre = gp.predict(u_t);
            row.pre_mean = pre.mean;
            row.pre_variance = pre.variance;

            row.y = obj.observe(row.x, noise_rng);
            row.true_value = obj.truth(row.x);
            incumbent_true = std::max(incumbent_true, row.true_value);
            best_observed = std::max(best_observed, row.y);
            row.incumbent = incumbent_true;
            row.best_observed = best_observed;
            if (rec.f_star) {
                row.gap = gap_value(rec.f_x1, incumbent_true, *rec.f_star);
                row.regret = *rec.f_star - row.true_value;
            }

            gp = gp.update(u_t, config.output_scaling.apply(row.y));
            row.gp_size = static_cast<std::size_t>(gp.size());

            for (std::size_t i = 0; i < N; ++i)
                row.rewards.push_back(reward_from_gp(gp, nominees_unit[i]));
            const auto& rewards =
                config.reward_timing == RewardTiming::AfterUpdate ? row.rewards : row.rewards_prior;
            portfolio = update(std::move(portfolio), rewards, row.chosen);
            row.gains = portfolio.gains;
            rec.rows.push_back(std::move(row));
        } catch (const NumericError& e) {
            throw NumericError("iteration " + std::to_string(t) + ": " + e.what());
        } catch (const ArgumentError& e) {
            throw ArgumentError("iteration " + std::to_string(t) + ": " + e.what());
        }
    }
    return rec;
}

} // namespace detail

/// Plain Bayesian optimization with a single acquisition function.
inline TrialRecord run_single(const RunConfig& config) {
    if (config.strategy != Strategy::Single)
        throw ArgumentError("run_single: strategy must be Single");
    return detail::run_loop(config);
}

/// GP-Hedge: every acquisition nominates, the portfolio picks one nominee, and
/// all arms are rewarded by the updated posterior mean at their nominee.
inline TrialRecord run_gp_hedge(const RunConfig& config) {
    if (config.strategy == Strategy::Single)
        throw ArgumentError("run_gp_hedge: strategy must be a portfolio strategy");
    return detail::run_loop(config);
}

inline TrialRecord run(const RunConfig& config) { return detail::run_loop(config); }

/// Offline model: ARD lengthscales fit by maximum marginal likelihood on a
/// Latin-hypercube sample, plus the output standardization of that sample.
struct OfflineModel {
    KernelParams kernel;
    OutputScaling scaling;
    double log_likelihood = 0.0;
    bool degenerate = false;
};

inline OfflineModel fit_offline_model(const ObjectiveSpec& obj, std::size_t samples, double noise_variance,
                                      std::uint64_t seed, HyperSearch search = {}) {
    const auto pts = latin_hypercube(obj.domain, samples, mix_seed({seed, 0x0ff1}));
    Rng rng(mix_seed({seed, 0x0ff2}));
    std::vector<Point> unit;
    std::vector<double> y;
    for (const auto& x : pts) {
        unit.push_back(obj.domain.to_unit(x).cwiseMax(0.0).cwiseMin(1.0));
        y.push_back(obj.observe(x, rng));
    }
    OfflineModel m;
    double mean = 0.0;
    for (double v : y)
        mean += v;
    mean /= static_cast<double>(y.size());
    double var = 0.0;
    for (double v : y)
        var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size() > 1 ? y.size() - 1 : 1);
    m.scaling = {mean, var > 0.0 ? std::sqrt(var) : 1.0};
    for (double& v : y)
        v = m.scaling.apply(v);
    search.seed = mix_seed({seed, 0x0ff3});
    HyperFit fit = fit_hyperparameters(unit, y, noise_variance, search);
    m.kernel = fit.params;
    m.log_likelihood = fit.log_likelihood;
    m.degenerate = fit.degenerate;
    return m;
}

} // namespace gphedge
