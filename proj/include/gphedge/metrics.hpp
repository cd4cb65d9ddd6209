#pragma once

#include <gphedge/acquisitions.hpp>
#include <gphedge/errors.hpp>
#include <gphedge/trial_record.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gphedge {

/// G = (f(x+) - f(x1)) / (f(x*) - f(x1)), clamped into [0,1]; nullopt when
/// the trial is degenerate (f(x*) <= f(x1)).
inline std::optional<double> gap_value(double f_x1, double f_incumbent, double f_star) {
    if (!(f_star > f_x1))
        return std::nullopt;
    return std::clamp((f_incumbent - f_x1) / (f_star - f_x1), 0.0, 1.0);
}

struct GapSeries {
    std::vector<double> values;
    double f_x1 = 0.0;
    double f_star = 0.0;
    bool defined = true;
};

/// Gap from the noiseless values of the sampled points.
inline GapSeries gap(const TrialRecord& record, double f_star) {
    GapSeries g;
    g.f_x1 = record.f_x1;
    g.f_star = f_star;
    if (!(f_star > record.f_x1)) {
        g.defined = false;
        return g;
    }
    double best = record.f_x1;
    g.values.reserve(record.rows.size());
    for (const auto& row : record.rows) {
        best = std::max(best, row.true_value);
        g.values.push_back(*gap_value(record.f_x1, best, f_star));
    }
    return g;
}

struct RegretSeries {
    std::vector<double> instantaneous;
    std::vector<double> cumulative;
    std::vector<double> average;
    double minimum = 0.0;
    double simple = 0.0;        // f(x*) - max_t f(x_t)
    bool average_bounds_simple = true;

    double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

inline RegretSeries regret_series(const TrialRecord& record, double f_star) {
    RegretSeries r;
    double sum = 0.0, best = -std::numeric_limits<double>::infinity();
    r.minimum = std::numeric_limits<double>::infinity();
    for (const auto& row : record.rows) {
        const double inst = f_star - row.true_value;
        sum += inst;
        best = std::max(best, row.true_value);
        r.instantaneous.push_back(inst);
        r.cumulative.push_back(sum);
        r.average.push_back(sum / static_cast<double>(r.cumulative.size()));
        r.minimum = std::min(r.minimum, inst);
    }
    if (record.rows.empty()) {
        r.minimum = 0.0;
        return r;
    }
    r.simple = f_star - best;
    // max >= mean, so the simple regret never exceeds the average regret;
    // the slack only absorbs summation round-off.
    const double slack = 1e-12 * std::max(1.0, std::abs(f_star) + std::abs(best));
    r.average_bounds_simple = r.simple <= r.average.back() + slack;
    return r;
}

namespace detail {
inline void require_noise(double noise_variance, const char* where) {
    if (!(noise_variance > 0.0))
        throw ArgumentError(std::string(where) + ": requires a positive noise variance");
}
} // namespace detail

/// Running I_t = 1/2 sum_{s<=t} log(1 + sigma^-2 sigma^2_{s-1}(x_s)).
inline std::vector<double> information_gain_series(const TrialRecord& record, double noise_variance) {
    detail::require_noise(noise_variance, "information_gain");
    std::vector<double> out;
    double acc = 0.0;
    for (const auto& row : record.rows) {
        acc += 0.5 * std::log1p(row.pre_variance / noise_variance);
        out.push_back(acc);
    }
    return out;
}

inline double information_gain(const TrialRecord& record, double noise_variance) {
    const auto s = information_gain_series(record, noise_variance);
    return s.empty() ? 0.0 : s.back();
}

inline double c1_constant(double noise_variance) {
    detail::require_noise(noise_variance, "C1");
    return 2.0 / std::log1p(1.0 / noise_variance);
}

struct VarianceSumCheck {
    double lhs = 0.0; // sum beta_t sigma^2_{t-1}(x_t)
    double rhs = 0.0; // C1 beta_T I_T
    bool holds = true;
};

inline VarianceSumCheck variance_sum_check(const TrialRecord& record, const BetaSchedule& schedule,
                                           double noise_variance) {
    VarianceSumCheck c;
    const double c1 = c1_constant(noise_variance);
    const double info = information_gain(record, noise_variance);
    for (const auto& row : record.rows)
        c.lhs += beta_t(schedule, row.iteration) * row.pre_variance;
    const std::size_t T = record.rows.empty() ? 1 : record.rows.back().iteration;
    c.rhs = c1 * beta_t(schedule, T) * info;
    c.holds = c.lhs <= c.rhs + 1e-9;
    return c;
}

/// Computable pieces of the cumulative-regret decomposition. I_T stands in
/// for the kernel constant gamma_T; no inequality is asserted.
struct Theorem1Report {
    std::size_t T = 0;
    double c1 = 0.0;
    double beta_T = 0.0;
    double information_gain = 0.0;
    double sampled_term = 0.0;  // sqrt(T C1 beta_T I_T)
    double ucb_term = 0.0;      // sum sqrt(beta_t) sigma_{t-1}(x_t^UCB)
    std::optional<double> cumulative_regret;
};

inline Theorem1Report theorem1_decomposition(const TrialRecord& record, const BetaSchedule& schedule,
                                             double noise_variance) {
    Theorem1Report rep;
    rep.c1 = c1_constant(noise_variance);
    rep.T = record.rows.size();
    for (const auto& row : record.rows) {
        if (!row.ucb_stddev)
            throw ArgumentError("theorem1_decomposition: iteration " + std::to_string(row.iteration) +
                                " has no UCB nominee logged");
        rep.ucb_term += std::sqrt(beta_t(schedule, row.iteration)) * *row.ucb_stddev;
    }
    if (rep.T == 0)
        return rep;
    rep.beta_T = beta_t(schedule, record.rows.back().iteration);
    rep.information_gain = information_gain(record, noise_variance);
    rep.sampled_term = std::sqrt(static_cast<double>(rep.T) * rep.c1 * rep.beta_T * rep.information_gain);
    if (record.f_star)
        rep.cumulative_regret = regret_series(record, *record.f_star).total();
    return rep;
}

/// Per-iteration statistics across trials.
struct AggregateSummary {
    std::size_t trials = 0;
    std::size_t degenerate_trials = 0;
    std::vector<double> gap_mean;
    std::vector<double> gap_variance;   // unbiased (n - 1)
    std::vector<double> average_regret_mean;
};

inline AggregateSummary aggregate(std::span<const TrialRecord> trials, double f_star) {
    if (trials.size() < 2)
        throw ArgumentError("aggregate: needs at least two trials");
    AggregateSummary s;
    s.trials = trials.size();
    std::size_t T = trials.front().rows.size();
    for (const auto& t : trials)
        T = std::min(T, t.rows.size());
    std::vector<std::vector<double>> gaps;
    std::vector<std::vector<double>> avg;
    for (const auto& t : trials) {
        auto g = gap(t, f_star);
        if (!g.defined) {
            ++s.degenerate_trials;
        } else {
            gaps.push_back(std::move(g.values));
        }
        avg.push_back(regret_series(t, f_star).average);
    }
    s.gap_mean.assign(T, 0.0);
    s.gap_variance.assign(T, 0.0);
    s.average_regret_mean.assign(T, 0.0);
    for (std::size_t i = 0; i < T; ++i) {
        if (!gaps.empty()) {
            double m = 0.0;
            for (const auto& g : gaps)
                m += g[i];
            m /= static_cast<double>(gaps.size());
            double v = 0.0;
            for (const auto& g : gaps)
                v += (g[i] - m) * (g[i] - m);
            s.gap_mean[i] = m;
            s.gap_variance[i] = gaps.size() > 1 ? v / static_cast<double>(gaps.size() - 1) : 0.0;
        }
        double r = 0.0;
        for (const auto& a : avg)
            r += a[i];
        s.average_regret_mean[i] = r / static_cast<double>(avg.size());
    }
    return s;
}

} // namespace gphedge
