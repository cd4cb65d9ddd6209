#pragma once

#include <gphedge/acq_maximizer.hpp>
#include <gphedge/errors.hpp>
#include <gphedge/gp_core.hpp>
#include <gphedge/random.hpp>

#include <Eigen/Core>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace gphedge {

/// A maximization target on a box.
///
/// `truth` is the noiseless value used by metrics. `observe` is what the
/// optimizer sees: either `stochastic` (intrinsically noisy objectives) or
/// `truth` plus additive Gaussian noise of variance `noise_variance`.
struct ObjectiveSpec {
    std::string name;
    BoxDomain domain;
    std::optional<double> known_optimum;
    std::function<double(const Point&)> truth;
    std::function<double(const Point&, Rng&)> stochastic;
    double noise_variance = 0.0;

    Eigen::Index dimension() const { return domain.dimension(); }

    double observe(const Point& x, Rng& rng) const {
        if (stochastic)
            return stochastic(x, rng);
        double v = truth(x);
        if (noise_variance > 0.0)
            v += std::sqrt(noise_variance) * standard_normal(rng);
        return v;
    }
};

namespace detail {
inline void require_in_box(const Point& x, const BoxDomain& box, const char* name) {
    if (!box.contains(x))
        throw ArgumentError(std::string(name) + ": point " + format_point(x) + " outside the domain");
}
} // namespace detail

// ---------------------------------------------------------------------------
// Classical benchmarks, negated so that all objectives are maximized.

inline BoxDomain branin_domain() { return {Eigen::Vector2d(-5.0, 0.0), Eigen::Vector2d(10.0, 15.0)}; }

/// Negated Branin-Hoo on [-5,10] x [0,15]. Maximum -5/(4 pi) ~ -0.397887 at
/// (-pi, 12.275), (pi, 2.275), (3 pi, 2.475).
inline double branin(const Point& x) {
    detail::require_in_box(x, branin_domain(), "branin");
    constexpr double pi = std::numbers::pi;
    const double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, t = 1.0 / (8.0 * pi);
    const double u = x[1] - b * x[0] * x[0] + c * x[0] - 6.0;
    return -(u * u + 10.0 * (1.0 - t) * std::cos(x[0]) + 10.0);
}

inline constexpr double kBraninOptimum = -0.39788735772973816;
inline constexpr double kHartman3Optimum = 3.8627797869493365;
inline constexpr double kHartman6Optimum = 3.3223680114155147;

namespace detail {

template <std::size_t D>
double hartman(const Point& x, const std::array<std::array<double, D>, 4>& A,
               const std::array<std::array<double, D>, 4>& P, const char* name) {
    detail::require_in_box(x, BoxDomain::unit(static_cast<Eigen::Index>(D)), name);
    constexpr std::array<double, 4> alpha{1.0, 1.2, 3.0, 3.2};
    double s = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < D; ++j) {
            const double diff = x[static_cast<Eigen::Index>(j)] - P[i][j];
            inner += A[i][j] * diff * diff;
        }
        s += alpha[i] * std::exp(-inner);
    }
    return s; // negated standard form (-sum)
}

} // namespace detail

/// Negated Hartman 3 on [0,1]^3.
inline double hartman3(const Point& x) {
    static constexpr std::array<std::array<double, 3>, 4> A{{{3.0, 10.0, 30.0},
                                                             {0.1, 10.0, 35.0},
                                                             {3.0, 10.0, 30.0},
                                                             {0.1, 10.0, 35.0}}};
    static constexpr std::array<std::array<double, 3>, 4> P{{{0.3689, 0.1170, 0.2673},
                                                             {0.4699, 0.4387, 0.7470},
                                                             {0.1091, 0.8732, 0.5547},
                                                             {0.0381, 0.5743, 0.8828}}};
    return detail::hartman<3>(x, A, P, "hartman3");
}

/// Negated Hartman 6 on [0,1]^6.
inline double hartman6(const Point& x) {
    static constexpr std::array<std::array<double, 6>, 4> A{{{10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
                                                             {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
                                                             {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
                                                             {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}}};
    static constexpr std::array<std::array<double, 6>, 4> P{{{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                                             {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                                             {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                                             {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}}};
    return detail::hartman<6>(x, A, P, "hartman6");
}

inline ObjectiveSpec make_branin(double noise_variance = 0.0) {
    return {"branin", branin_domain(), kBraninOptimum, [](const Point& x) { return branin(x); }, {}, noise_variance};
}

inline ObjectiveSpec make_hartman3(double noise_variance = 0.0) {
    return {"hartman3", BoxDomain::unit(3), kHartman3Optimum, [](const Point& x) { return hartman3(x); }, {},
            noise_variance};
}

inline ObjectiveSpec make_hartman6(double noise_variance = 0.0) {
    return {"hartman6", BoxDomain::unit(6), kHartman6Optimum, [](const Point& x) { return hartman6(x); }, {},
            noise_variance};
}

// ---------------------------------------------------------------------------
// Synthetic objectives: posterior mean of a GP conditioned on a draw from its prior.

struct SyntheticOptions {
    std::size_t points_per_dim = 100;   // initial m = 100 d, grown by the same amount
    std::size_t plateau_probes = 500;
    std::size_t plateau_limit = 25;     // reject if more than this many probes are ~0
    double plateau_zero = 1e-9;
    bool compute_optimum = true;
    std::size_t optimum_probes = 100000;
    int max_rounds = 50;
};

/// Immutable synthetic objective; cheap to copy (shares the GP).
class SyntheticObjective {
public:
    SyntheticObjective() = default;
    SyntheticObjective(std::shared_ptr<const GpState> gp, std::uint64_t seed, std::optional<double> optimum,
                       std::optional<Point> argmax)
        : gp_(std::move(gp)), seed_(seed), optimum_(optimum), argmax_(std::move(argmax)) {}

    double operator()(const Point& x) const {
        detail::require_in_box(x, BoxDomain::unit(dimension()), "synthetic");
        return gp_->predict_mean(x);
    }

    Eigen::Index dimension() const { return gp_->dimension(); }
    Eigen::Index point_count() const { return gp_->size(); }
    const GpState& gp() const { return *gp_; }
    std::uint64_t seed() const { return seed_; }
    const std::optional<double>& known_optimum() const { return optimum_; }
    const std::optional<Point>& argmax() const { return argmax_; }

    ObjectiveSpec to_spec(double noise_variance = 0.0) const {
        auto self = *this;
        return {"synthetic" + std::to_string(dimension()) + "d", BoxDomain::unit(dimension()), optimum_,
                [self](const Point& x) { return self(x); }, {}, noise_variance};
    }

private:
    std::shared_ptr<const GpState> gp_;
    std::uint64_t seed_ = 0;
    std::optional<double> optimum_;
    std::optional<Point> argmax_;
};

/// Counts probes whose value is indistinguishable from the zero prior mean.
inline std::size_t count_plateau(const GpState& gp, std::span<const Point> probes, double zero) {
    std::size_t n = 0;
    for (const auto& p : probes)
        if (std::abs(gp.predict_mean(p)) < zero)
            ++n;
    return n;
}

/// Approximate global maximum of a synthetic mean: 10x the default inner
/// maximizer budget plus uniform random probes.
inline MaxResult synthetic_optimum(const GpState& gp, std::size_t probes, std::uint64_t seed) {
    const Eigen::Index d = gp.dimension();
    auto f = [&](const Point& x) { return gp.predict_mean(x); };
    MaximizerConfig cfg = MaximizerConfig::defaults_for(d, mix_seed({seed, 0x0917}));
    cfg.direct_budget *= 10;
    cfg.multistart_count *= 10;
    MaxResult best = maximize(f, BoxDomain::unit(d), cfg);
    Rng rng(mix_seed({seed, 0x9a0be}));
    Point x(d);
    for (std::size_t i = 0; i < probes; ++i) {
        for (Eigen::Index j = 0; j < d; ++j)
            x[j] = uniform01(rng);
        const double v = f(x);
        if (better(v, x, best.value, best.point)) {
            best.value = v;
            best.point = x;
        }
    }
    return best;
}

/// Draws lengthscales from U(0,2]^d, m = 100 d uniform points and y ~ N(0, K);
/// the objective is the resulting posterior mean. Plateau test: if more than 25 of
/// 500 random probes are ~0, redraw with 100 d more points.
inline SyntheticObjective sample_synthetic_objective(Eigen::Index d, std::uint64_t seed,
                                                     const SyntheticOptions& opt = {}) {
    if (d < 1)
        throw ArgumentError("sample_synthetic_objective: dimension must be >= 1");
    Rng rng(seed);
    KernelParams kernel{Eigen::VectorXd(d), 1.0};
    for (Eigen::Index j = 0; j < d; ++j) {
        double v = 0.0;
        while (!(v > 0.0))
            v = 2.0 * uniform01(rng);
        kernel.lengthscales[j] = v;
    }

    std::size_t m = opt.points_per_dim * static_cast<std::size_t>(d);
    for (int round = 0; round < opt.max_rounds; ++round, m += opt.points_per_dim * static_cast<std::size_t>(d)) {
        std::vector<Point> pts(m, Point(d));
        for (auto& p : pts)
            for (Eigen::Index j = 0; j < d; ++j)
                p[j] = uniform01(rng);

        // Factor the prior Gram once (zero observation noise) and reuse its jitter.
        GpState prior = GpState::fit(pts, std::vector<double>(m, 0.0), kernel, 0.0);
        Eigen::VectorXd z(static_cast<Eigen::Index>(m));
        for (Eigen::Index i = 0; i < z.size(); ++i)
            z[i] = standard_normal(rng);
        const Eigen::VectorXd yv = prior.cholesky().triangularView<Eigen::Lower>() * z;
        std::vector<double> y(yv.data(), yv.data() + yv.size());
        auto gp = std::make_shared<const GpState>(GpState::fit_with_jitter(pts, y, kernel, 0.0, prior.jitter()));

        std::vector<Point> probes(opt.plateau_probes, Point(d));
        for (auto& p : probes)
            for (Eigen::Index j = 0; j < d; ++j)
                p[j] = uniform01(rng);
        if (count_plateau(*gp, probes, opt.plateau_zero) > opt.plateau_limit)
            continue;

        std::optional<double> optimum;
        std::optional<Point> argmax;
        if (opt.compute_optimum) {
            MaxResult best = synthetic_optimum(*gp, opt.optimum_probes, seed);
            optimum = best.value;
            argmax = best.point;
        }
        return SyntheticObjective(std::move(gp), seed, optimum, std::move(argmax));
    }
    throw NumericError("sample_synthetic_objective: plateau test failed after " + std::to_string(opt.max_rounds) +
                       " rounds");
}

// ---------------------------------------------------------------------------
// Repeller particle control.
//
// The particle lives in [0,1]^2 (inelastic walls), falls under gravity, feels
// linear friction and the repulsion of three point sources. Parameter vector
// layout: x = (w1, a1, b1, w2, a2, b2, w3, a3, b3).

struct RepellerParams {
    int repellers = 3;
    int horizon = 100;
    double dt = 0.05;
    double friction = 0.05;
    Eigen::Vector2d gravity{0.0, -1.0};
    Eigen::Vector2d start_mean{0.5, 0.95};
    double start_std = 0.01;
    Eigen::Vector2d start_velocity{0.0, 0.0};
    std::vector<Eigen::Vector2d> goals{Eigen::Vector2d(0.2, 0.2), Eigen::Vector2d(0.8, 0.4)};
    double goal_width = 0.05;
    double max_strength = 5.0;
    double min_distance = 1e-6;
    bool walls = true;
    int evaluation_rollouts = 200; // rollouts averaged for the noiseless value

    Eigen::Index dimension() const { return 3 * repellers; }

    BoxDomain domain() const {
        BoxDomain b{Eigen::VectorXd::Zero(dimension()), Eigen::VectorXd::Ones(dimension())};
        for (int i = 0; i < repellers; ++i)
            b.upper[3 * i] = max_strength;
        return b;
    }
};

inline double repeller_reward(const RepellerParams& params, const Eigen::Vector2d& p) {
    double r = 0.0;
    const double denom = 2.0 * params.goal_width * params.goal_width;
    for (const auto& g : params.goals)
        r += std::exp(-(p - g).squaredNorm() / denom);
    return r;
}

/// Sum of w_i (p - c_i) / |p - c_i|^2, distances clamped below at min_distance.
inline Eigen::Vector2d repeller_force(const RepellerParams& params, const Point& x, const Eigen::Vector2d& p) {
    Eigen::Vector2d f = Eigen::Vector2d::Zero();
    for (int i = 0; i < params.repellers; ++i) {
        const double w = x[3 * i];
        const Eigen::Vector2d c(x[3 * i + 1], x[3 * i + 2]);
        const Eigen::Vector2d diff = p - c;
        const double dist = std::max(diff.norm(), params.min_distance);
        f += w * diff / (dist * dist);
    }
    return f;
}

struct ParticleState {
    Eigen::Vector2d position;
    Eigen::Vector2d velocity;
};

/// Semi-implicit Euler trajectory p_0 .. p_H.
inline std::vector<ParticleState> repeller_trajectory(const RepellerParams& params, const Point& x, Rng& rng) {
    detail::require_in_box(x, params.domain(), "repeller");
    ParticleState s{params.start_mean, params.start_velocity};
    if (params.start_std > 0.0) {
        s.position[0] += params.start_std * standard_normal(rng);
        s.position[1] += params.start_std * standard_normal(rng);
    }
    std::vector<ParticleState> traj;
    traj.reserve(static_cast<std::size_t>(params.horizon) + 1);
    traj.push_back(s);
    for (int n = 0; n < params.horizon; ++n) {
        const Eigen::Vector2d accel =
            repeller_force(params, x, s.position) + params.gravity - params.friction * s.velocity;
        s.velocity += params.dt * accel;
        s.position += params.dt * s.velocity;
        if (params.walls) {
            for (int j = 0; j < 2; ++j) {
                if (s.position[j] < 0.0) {
                    s.position[j] = 0.0;
                    s.velocity[j] = 0.0;
                } else if (s.position[j] > 1.0) {
                    s.position[j] = 1.0;
                    s.velocity[j] = 0.0;
                }
            }
        }
        traj.push_back(s);
    }
    return traj;
}

inline double repeller_rollout(const RepellerParams& params, const Point& x, Rng& rng) {
    double total = 0.0;
    for (const auto& s : repeller_trajectory(params, x, rng))
        total += repeller_reward(params, s.position);
    return total;
}

/// Single rollout (rollouts = 1) or the mean of `rollouts` independent rollouts.
inline double repeller_objective(const RepellerParams& params, const Point& x, Rng& rng, int rollouts = 1) {
    if (rollouts < 1)
        throw ArgumentError("repeller_objective: rollouts must be >= 1");
    double sum = 0.0;
    for (int k = 0; k < rollouts; ++k)
        sum += repeller_rollout(params, x, rng);
    return sum / rollouts;
}

/// Stochastic observation = one rollout; noiseless value = mean over
/// `evaluation_rollouts` rollouts with a stream seeded from the point's bits.
inline ObjectiveSpec make_repeller(const RepellerParams& params = {}) {
    ObjectiveSpec spec;
    spec.name = "repeller" + std::to_string(params.dimension()) + "d";
    spec.domain = params.domain();
    spec.stochastic = [params](const Point& x, Rng& rng) { return repeller_objective(params, x, rng, 1); };
    spec.truth = [params](const Point& x) {
        std::uint64_t h = 0x5eed;
        for (Eigen::Index j = 0; j < x.size(); ++j)
            h = mix_seed({h, std::bit_cast<std::uint64_t>(x[j])});
        Rng rng(h);
        return repeller_objective(params, x, rng, params.evaluation_rollouts);
    };
    return spec;
}

} // namespace gphedge
