#pragma once

#include <gphedge/acquisitions.hpp>
#include <gphedge/gp_core.hpp>
#include <gphedge/portfolio.hpp>

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gphedge {

/// One optimizer iteration. Points are in original (box) coordinates; means and
/// variances are in the GP's normalized output units.
struct IterationRow {
    std::size_t iteration = 0; // 1-based
    std::vector<Point> nominees;
    Eigen::VectorXd probabilities;
    std::size_t chosen = 0;
    Point x;
    double y = 0.0;          // observation seen by the optimizer
    double true_value = 0.0; // noiseless objective value (metrics only)
    double incumbent = 0.0;  // best noiseless value sampled so far, initial design included
    double best_observed = 0.0;
    std::optional<double> gap;
    std::optional<double> regret;
    std::vector<double> rewards;          // mu_t(x_t^i), after the update
    std::vector<double> rewards_prior;    // mu_{t-1}(x_t^i), before the update
    std::vector<double> nominee_stddev;   // sigma_{t-1}(x_t^i)
    Eigen::VectorXd gains;
    double pre_mean = 0.0;      // mu_{t-1}(x_t)
    double pre_variance = 0.0;  // sigma^2_{t-1}(x_t)
    std::optional<double> ucb_stddev; // sigma_{t-1}(x_t^UCB) when a UCB arm exists
    std::size_t gp_size = 0;    // observations in the GP after this iteration
};

struct TrialRecord {
    std::string objective;
    Strategy strategy = Strategy::Single;
    std::vector<std::string> arm_labels;
    std::vector<Point> initial_points;
    std::vector<double> initial_observations;
    std::vector<double> initial_true;
    double f_x1 = 0.0; // best noiseless value of the initial design
    std::optional<double> f_star;
    double gp_noise_variance = 0.0;
    BetaSchedule schedule;
    std::vector<IterationRow> rows;

    std::size_t iterations() const { return rows.size(); }
};

} // namespace gphedge
