#pragma once

#include <gphedge/errors.hpp>
#include <gphedge/gp_core.hpp>
#include <gphedge/random.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace gphedge {

enum class Strategy { Single, Hedge, Exp3, NormalHedge, Uniform };

inline std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::Single: return "Single";
    case Strategy::Hedge: return "Hedge";
    case Strategy::Exp3: return "Exp3";
    case Strategy::NormalHedge: return "NormalHedge";
    case Strategy::Uniform: return "Uniform";
    }
    return "?";
}

enum class EtaRule {
    TimeVarying,  // eta_t = sqrt(8 ln N / t)
    FixedHorizon, // eta = sqrt(8 ln N / T)
    Constant,     // eta = eta_value
};

enum class RewardScaling {
    Running, // affine map into [0,1] using the running min/max of seen rewards
    Fixed,   // affine map from [reward_lower, reward_upper] into [0,1]
    Raw,     // no rescaling
};

struct PortfolioOptions {
    EtaRule eta_rule = EtaRule::TimeVarying;
    double eta_value = 1.0;      // Constant rule
    std::size_t horizon = 100;   // FixedHorizon rule
    double exp3_gamma = 0.1;
    double exp3_eta = -1.0;      // < 0 selects gamma / N
    RewardScaling scaling = RewardScaling::Running;
    double reward_lower = 0.0;
    double reward_upper = 1.0;
};

/// Bandit state over N arms. All update functions return a new state.
struct PortfolioState {
    Strategy strategy = Strategy::Hedge;
    PortfolioOptions options;
    Eigen::VectorXd gains;       // full-information cumulative (rescaled) rewards
    Eigen::VectorXd exp3_gains;  // importance-weighted gains driving Exp3
    Eigen::VectorXd nh_regrets;  // NormalHedge cumulative regrets
    std::size_t t = 0;           // completed updates
    double seen_min = std::numeric_limits<double>::infinity();
    double seen_max = -std::numeric_limits<double>::infinity();

    static PortfolioState make(Strategy strategy, std::size_t arms, PortfolioOptions options = {}) {
        if (arms < 1)
            throw ArgumentError("portfolio: need at least one arm");
        if (strategy == Strategy::Exp3 && !(options.exp3_gamma > 0.0 && options.exp3_gamma <= 1.0))
            throw ArgumentError("portfolio: exp3 gamma must lie in (0,1]");
        PortfolioState s;
        s.strategy = strategy;
        s.options = options;
        const auto n = static_cast<Eigen::Index>(arms);
        s.gains = Eigen::VectorXd::Zero(n);
        s.exp3_gains = Eigen::VectorXd::Zero(n);
        s.nh_regrets = Eigen::VectorXd::Zero(n);
        return s;
    }

    std::size_t arms() const { return static_cast<std::size_t>(gains.size()); }

    /// Learning rate for the upcoming round (round index t + 1).
    double eta() const {
        const double lnN = std::log(static_cast<double>(arms()));
        switch (options.eta_rule) {
        case EtaRule::TimeVarying: return std::sqrt(8.0 * lnN / static_cast<double>(t + 1));
        case EtaRule::FixedHorizon: return std::sqrt(8.0 * lnN / static_cast<double>(std::max<std::size_t>(1, options.horizon)));
        case EtaRule::Constant: return options.eta_value;
        }
        return 0.0;
    }

    double exp3_learning_rate() const {
        return options.exp3_eta >= 0.0 ? options.exp3_eta : options.exp3_gamma / static_cast<double>(arms());
    }
};

/// Softmax with max subtraction.
inline Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
    const double m = scores.maxCoeff();
    Eigen::VectorXd e = (scores.array() - m).exp();
    return e / e.sum();
}

namespace detail {

/// NormalHedge weights: w_i ∝ (R_i+/c) exp(R_i+^2 / 2c) where c solves
/// mean_i exp(R_i+^2 / 2c) = e. Computed in log space.
inline Eigen::VectorXd normalhedge_weights(const Eigen::VectorXd& regrets) {
    const Eigen::Index n = regrets.size();
    const Eigen::VectorXd rp = regrets.cwiseMax(0.0);
    const double rmax = rp.maxCoeff();
    if (!(rmax > 0.0))
        return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));

    const Eigen::ArrayXd sq = rp.array().square();
    const double logn = std::log(static_cast<double>(n));
    // log of mean_i exp(sq_i / 2c), decreasing in c
    auto log_potential = [&](double c) {
        const Eigen::ArrayXd a = sq / (2.0 * c);
        const double m = a.maxCoeff();
        return m + std::log((a - m).exp().sum()) - logn;
    };
    double lo = rmax * rmax / (2.0 * (1.0 + logn)); // potential >= 1 here
    double hi = rmax * rmax / 2.0;                   // potential <= 1 here
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (log_potential(mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    const double c = hi;

    Eigen::VectorXd logw = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < n; ++i)
        if (rp[i] > 0.0)
            logw[i] = std::log(rp[i] / c) + sq[i] / (2.0 * c);
    const double m = logw.maxCoeff();
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i)
        w[i] = std::isfinite(logw[i]) ? std::exp(logw[i] - m) : 0.0;
    return w / w.sum();
}

inline void check_rewards(const PortfolioState& s, std::span<const double> rewards) {
    if (rewards.size() != s.arms())
        throw ArgumentError("portfolio: expected " + std::to_string(s.arms()) + " rewards, got " +
                            std::to_string(rewards.size()));
    for (double r : rewards)
        if (!std::isfinite(r))
            throw ArgumentError("portfolio: non-finite reward");
}

} // namespace detail

/// Hedge softmax over the importance-weighted Exp3 gains (before mixing).
inline Eigen::VectorXd exp3_hedge_probabilities(const PortfolioState& s) {
    return softmax(s.exp3_learning_rate() * s.exp3_gains);
}

inline Eigen::VectorXd probabilities(const PortfolioState& s) {
    const auto n = static_cast<Eigen::Index>(s.arms());
    switch (s.strategy) {
    case Strategy::Single:
    case Strategy::Uniform: return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    case Strategy::Hedge: return softmax(s.eta() * s.gains);
    case Strategy::Exp3: {
        const double g = s.options.exp3_gamma;
        return ((1.0 - g) * exp3_hedge_probabilities(s).array() + g / static_cast<double>(n)).matrix();
    }
    case Strategy::NormalHedge: return detail::normalhedge_weights(s.nh_regrets);
    }
    return Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
}

/// Inverse-CDF draw from the arm distribution using one uniform variate.
inline std::size_t sample_index(const Eigen::VectorXd& p, double u) {
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0)
            last_positive = static_cast<std::size_t>(i);
        acc += p[i];
        if (u < acc && p[i] > 0.0)
            return static_cast<std::size_t>(i);
    }
    return last_positive;
}

inline std::size_t select_arm(const PortfolioState& s, Rng& rng) {
    if (s.arms() == 1)
        return 0;
    return sample_index(probabilities(s), uniform01(rng));
}

/// Maps raw rewards into the bandit's reward range; updates running bounds.
inline std::vector<double> rescale_rewards(PortfolioState& s, std::span<const double> rewards) {
    std::vector<double> out(rewards.begin(), rewards.end());
    switch (s.options.scaling) {
    case RewardScaling::Raw: break;
    case RewardScaling::Fixed: {
        const double a = s.options.reward_lower, b = s.options.reward_upper;
        for (double& r : out)
            r = std::clamp((r - a) / (b - a), 0.0, 1.0);
        break;
    }
    case RewardScaling::Running: {
        for (double r : rewards) {
            s.seen_min = std::min(s.seen_min, r);
            s.seen_max = std::max(s.seen_max, r);
        }
        const double span = s.seen_max - s.seen_min;
        for (double& r : out)
            r = span > 0.0 ? (r - s.seen_min) / span : 0.5;
        break;
    }
    }
    return out;
}

/// Full-information update: every arm's gain grows by its (rescaled) reward.
inline PortfolioState update_hedge(PortfolioState s, std::span<const double> rewards) {
    detail::check_rewards(s, rewards);
    const auto r = rescale_rewards(s, rewards);
    for (std::size_t i = 0; i < r.size(); ++i)
        s.gains[static_cast<Eigen::Index>(i)] += r[i];
    ++s.t;
    return s;
}

/// Partial-information update: only the chosen arm is credited, with its reward
/// divided by the (mixed) probability it was drawn with.
inline PortfolioState update_exp3(PortfolioState s, std::size_t chosen, double reward) {
    if (chosen >= s.arms())
        throw ArgumentError("update_exp3: arm index out of range");
    if (!std::isfinite(reward))
        throw ArgumentError("update_exp3: non-finite reward");
    const double p = probabilities(s)[static_cast<Eigen::Index>(chosen)];
    assert(p >= s.options.exp3_gamma / static_cast<double>(s.arms()) * (1.0 - 1e-12));
    const double single[1] = {reward};
    const double r = rescale_rewards(s, single).front();
    s.exp3_gains[static_cast<Eigen::Index>(chosen)] += r / p;
    ++s.t;
    return s;
}

/// NormalHedge: regret of each arm against the chosen arm accumulates.
inline PortfolioState update_normalhedge(PortfolioState s, std::span<const double> rewards, std::size_t chosen) {
    detail::check_rewards(s, rewards);
    if (chosen >= s.arms())
        throw ArgumentError("update_normalhedge: arm index out of range");
    const auto r = rescale_rewards(s, rewards);
    for (std::size_t i = 0; i < r.size(); ++i)
        s.nh_regrets[static_cast<Eigen::Index>(i)] += r[i] - r[chosen];
    ++s.t;
    return s;
}

/// One bandit round for any strategy. Record-keeping `gains` are always
/// updated with full information so runs can be compared across strategies.
inline PortfolioState update(PortfolioState s, std::span<const double> rewards, std::size_t chosen) {
    detail::check_rewards(s, rewards);
    switch (s.strategy) {
    case Strategy::Single:
    case Strategy::Uniform:
    case Strategy::Hedge: return update_hedge(std::move(s), rewards);
    case Strategy::Exp3: {
        // Scaling is applied once over the full reward vector so the
        // record-keeping gains and the Exp3 credit share the same bounds.
        const double p = probabilities(s)[static_cast<Eigen::Index>(chosen)];
        const auto r = rescale_rewards(s, rewards);
        for (std::size_t i = 0; i < r.size(); ++i)
            s.gains[static_cast<Eigen::Index>(i)] += r[i];
        s.exp3_gains[static_cast<Eigen::Index>(chosen)] += r[chosen] / p;
        ++s.t;
        return s;
    }
    case Strategy::NormalHedge: {
        const auto r = rescale_rewards(s, rewards);
        for (std::size_t i = 0; i < r.size(); ++i) {
            s.gains[static_cast<Eigen::Index>(i)] += r[i];
            s.nh_regrets[static_cast<Eigen::Index>(i)] += r[i] - r[chosen];
        }
        ++s.t;
        return s;
    }
    }
    return s;
}

/// Algorithm-2 reward: posterior mean at the nominee under the updated GP.
inline double reward_from_gp(const GpState& gp_after_update, const Point& nominee) {
    return gp_after_update.predict_mean(nominee);
}

} // namespace gphedge
