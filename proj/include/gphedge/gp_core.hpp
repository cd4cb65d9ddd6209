#pragma once

#include <gphedge/errors.hpp>
#include <gphedge/random.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gphedge {

using Point = Eigen::VectorXd;

/// ARD squared-exponential kernel hyperparameters.
struct KernelParams {
    Eigen::VectorXd lengthscales;
    double signal_variance = 1.0;

    static KernelParams isotropic(Eigen::Index dim, double lengthscale, double signal_variance = 1.0) {
        return {Eigen::VectorXd::Constant(dim, lengthscale), signal_variance};
    }

    Eigen::Index dimension() const { return lengthscales.size(); }

    void validate() const {
        if (lengthscales.size() == 0)
            throw ArgumentError("kernel: at least one lengthscale required");
        for (Eigen::Index j = 0; j < lengthscales.size(); ++j)
            if (!(lengthscales[j] > 0.0) || !std::isfinite(lengthscales[j]))
                throw ArgumentError("kernel: lengthscales must be positive and finite");
        if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
            throw ArgumentError("kernel: signal variance must be positive");
    }
};

inline double kernel_eval(const Point& a, const Point& b, const KernelParams& params) {
    if (a.size() != params.dimension() || b.size() != params.dimension())
        throw ArgumentError("kernel_eval: dimension mismatch (got " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()) + ", kernel has " +
                            std::to_string(params.dimension()) + ")");
    const double r2 = ((a - b).array() / params.lengthscales.array()).square().sum();
    return params.signal_variance * std::exp(-0.5 * r2);
}

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;       // latent f, clamped at 0
    double noisy_variance = 0.0; // variance + observation noise

    double stddev() const { return std::sqrt(variance); }
};

namespace detail {
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-4;
} // namespace detail

/// Exact GP posterior over a zero-mean prior. Immutable: update() returns a new state.
///
/// Inputs are stored column-wise (d x t). The cache holds the lower Cholesky
/// factor of K + (noise + jitter) I and alpha = (K + (noise + jitter) I)^-1 y.
class GpState {
public:
    GpState() = default;

    /// Builds the posterior with jitter escalation: jitter starts at
    /// 1e-10 * signal variance and grows x10 up to 1e-4 * signal variance.
    static GpState fit(std::span<const Point> inputs, std::span<const double> outputs, KernelParams kernel,
                       double noise_variance) {
        return fit_impl(inputs, outputs, std::move(kernel), noise_variance, -1.0);
    }

    /// Same as fit() but with a fixed jitter level (no escalation). Used to
    /// replay serialized objectives with the exact factorization they were built with.
    static GpState fit_with_jitter(std::span<const Point> inputs, std::span<const double> outputs,
                                   KernelParams kernel, double noise_variance, double jitter) {
        return fit_impl(inputs, outputs, std::move(kernel), noise_variance, jitter);
    }

    static GpState empty(KernelParams kernel, double noise_variance) {
        return fit(std::span<const Point>{}, std::span<const double>{}, std::move(kernel), noise_variance);
    }

    GpState update(const Point& x, double y) const {
        check_dim(x, "update");
        if (!std::isfinite(y))
            throw ArgumentError("update: non-finite observation");
        const Eigen::Index t = size();
        if (t == 0) {
            std::vector<Point> in{x};
            std::vector<double> out{y};
            return fit(in, out, kernel_, noise_variance_);
        }

        Eigen::VectorXd k = cross_covariance(x);
        Eigen::VectorXd l = chol_.topLeftCorner(t, t).triangularView<Eigen::Lower>().solve(k);
        const double diag2 = kernel_.signal_variance + noise_variance_ + jitter_ - l.squaredNorm();
        if (!(diag2 > 0.0)) {
            // Rank-1 extension broke down; refactorize from scratch with escalation.
            std::vector<Point> in = inputs();
            in.push_back(x);
            std::vector<double> out(outputs_.data(), outputs_.data() + t);
            out.push_back(y);
            return fit(in, out, kernel_, noise_variance_);
        }

        GpState next;
        next.kernel_ = kernel_;
        next.noise_variance_ = noise_variance_;
        next.jitter_ = jitter_;
        next.inputs_.resize(dimension(), t + 1);
        next.inputs_.leftCols(t) = inputs_;
        next.inputs_.col(t) = x;
        next.scaled_.resize(dimension(), t + 1);
        next.scaled_.leftCols(t) = scaled_;
        next.scaled_.col(t) = x.cwiseQuotient(kernel_.lengthscales);
        next.outputs_.resize(t + 1);
        next.outputs_.head(t) = outputs_;
        next.outputs_[t] = y;
        next.chol_ = Eigen::MatrixXd::Zero(t + 1, t + 1);
        next.chol_.topLeftCorner(t, t) = chol_;
        next.chol_.block(t, 0, 1, t) = l.transpose();
        next.chol_(t, t) = std::sqrt(diag2);
        next.solve_alpha();
        return next;
    }

    Prediction predict(const Point& x) const {
        check_dim(x, "posterior_predict");
        const double prior = kernel_.signal_variance;
        if (size() == 0)
            return {0.0, prior, prior + noise_variance_};
        Eigen::VectorXd k = cross_covariance(x);
        const double mean = k.dot(alpha_);
        chol_.triangularView<Eigen::Lower>().solveInPlace(k);
        const double var = std::max(0.0, prior - k.squaredNorm());
        return {mean, var, var + noise_variance_};
    }

    /// Posterior mean only; skips the triangular solve.
    double predict_mean(const Point& x) const {
        check_dim(x, "posterior_predict");
        if (size() == 0)
            return 0.0;
        return cross_covariance(x).dot(alpha_);
    }

    /// mu at every observed input. Uses K alpha = y - (noise + jitter) alpha.
    Eigen::VectorXd mean_at_observations() const {
        return outputs_ - (noise_variance_ + jitter_) * alpha_;
    }

    double log_marginal_likelihood() const {
        if (size() == 0)
            throw ArgumentError("log_marginal_likelihood: needs at least one observation");
        const double quad = outputs_.dot(alpha_);
        const double half_logdet = chol_.diagonal().array().log().sum();
        return -0.5 * quad - half_logdet - 0.5 * static_cast<double>(size()) * std::log(2.0 * std::numbers::pi);
    }

    Eigen::Index size() const { return outputs_.size(); }
    Eigen::Index dimension() const { return kernel_.dimension(); }
    const KernelParams& kernel() const { return kernel_; }
    double noise_variance() const { return noise_variance_; }
    double jitter() const { return jitter_; }
    const Eigen::MatrixXd& input_matrix() const { return inputs_; }
    const Eigen::VectorXd& outputs() const { return outputs_; }
    const Eigen::MatrixXd& cholesky() const { return chol_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }

    std::vector<Point> inputs() const {
        std::vector<Point> pts;
        pts.reserve(static_cast<std::size_t>(size()));
        for (Eigen::Index i = 0; i < size(); ++i)
            pts.emplace_back(inputs_.col(i));
        return pts;
    }

    /// Noise-free Gram matrix K (without noise or jitter).
    Eigen::MatrixXd gram() const {
        const Eigen::Index t = size();
        Eigen::MatrixXd K(t, t);
        for (Eigen::Index i = 0; i < t; ++i) {
            K(i, i) = kernel_.signal_variance;
            for (Eigen::Index j = 0; j < i; ++j) {
                const double v =
                    kernel_.signal_variance * std::exp(-0.5 * (scaled_.col(i) - scaled_.col(j)).squaredNorm());
                K(i, j) = v;
                K(j, i) = v;
            }
        }
        return K;
    }

private:
    static GpState fit_impl(std::span<const Point> inputs, std::span<const double> outputs, KernelParams kernel,
                            double noise_variance, double fixed_jitter) {
        kernel.validate();
        if (inputs.size() != outputs.size())
            throw ArgumentError("fit: inputs and outputs differ in length");
        if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
            throw ArgumentError("fit: noise variance must be non-negative");
        GpState s;
        s.kernel_ = std::move(kernel);
        s.noise_variance_ = noise_variance;
        const auto t = static_cast<Eigen::Index>(inputs.size());
        const Eigen::Index d = s.kernel_.dimension();
        s.inputs_.resize(d, t);
        s.outputs_.resize(t);
        for (Eigen::Index i = 0; i < t; ++i) {
            s.check_dim(inputs[static_cast<std::size_t>(i)], "fit");
            s.inputs_.col(i) = inputs[static_cast<std::size_t>(i)];
            s.outputs_[i] = outputs[static_cast<std::size_t>(i)];
            if (!std::isfinite(s.outputs_[i]))
                throw ArgumentError("fit: non-finite output");
        }
        s.scaled_ = s.inputs_.array().colwise() / s.kernel_.lengthscales.array();
        const Eigen::MatrixXd K = s.gram();
        const double sv = s.kernel_.signal_variance;

        if (t == 0) {
            s.jitter_ = fixed_jitter >= 0.0 ? fixed_jitter : detail::kJitterStart * sv;
            return s;
        }

        auto attempt = [&](double jitter) {
            Eigen::MatrixXd A = K;
            A.diagonal().array() += noise_variance + jitter;
            Eigen::LLT<Eigen::MatrixXd> llt(A);
            if (llt.info() != Eigen::Success)
                return false;
            s.chol_ = llt.matrixL();
            s.jitter_ = jitter;
            return true;
        };

        if (fixed_jitter >= 0.0) {
            if (!attempt(fixed_jitter))
                throw NumericError("fit: Gram matrix not positive definite at jitter " + std::to_string(fixed_jitter));
        } else {
            bool ok = false;
            for (double rel = detail::kJitterStart; rel <= detail::kJitterMax * (1.0 + 1e-9); rel *= 10.0)
                if ((ok = attempt(rel * sv)))
                    break;
            if (!ok)
                throw NumericError("fit: Gram matrix not positive definite after jitter escalation to 1e-4 (t=" +
                                   std::to_string(t) + ")");
        }
        s.solve_alpha();
        return s;
    }

    void solve_alpha() {
        alpha_ = chol_.triangularView<Eigen::Lower>().solve(outputs_);
        chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
    }

    Eigen::VectorXd cross_covariance(const Point& x) const {
        const Eigen::VectorXd xs = x.cwiseQuotient(kernel_.lengthscales);
        return kernel_.signal_variance * (-0.5 * (scaled_.colwise() - xs).colwise().squaredNorm().array()).exp().matrix().transpose();
    }

    void check_dim(const Point& x, const char* where) const {
        if (x.size() != dimension())
            throw ArgumentError(std::string(where) + ": point has dimension " + std::to_string(x.size()) +
                                ", expected " + std::to_string(dimension()));
    }

    KernelParams kernel_;
    double noise_variance_ = 0.0;
    double jitter_ = 0.0;
    Eigen::MatrixXd inputs_;  // d x t
    Eigen::MatrixXd scaled_;  // inputs divided by lengthscales
    Eigen::VectorXd outputs_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd alpha_;
};

inline GpState fit(std::span<const Point> inputs, std::span<const double> outputs, const KernelParams& kernel,
                   double noise_variance) {
    return GpState::fit(inputs, outputs, kernel, noise_variance);
}

inline Prediction posterior_predict(const GpState& state, const Point& x) { return state.predict(x); }

inline double log_marginal_likelihood(const GpState& state) { return state.log_marginal_likelihood(); }

// ---------------------------------------------------------------------------
// Offline hyperparameter fitting

struct HyperSearch {
    int starts = 5;
    int steps = 60;
    std::uint64_t seed = 0;
};

struct HyperFit {
    KernelParams params;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    bool degenerate = false; // outputs constant: defaults returned
};

/// Multistart compass search on log-lengthscales, bounded to [1e-3, 1e3].
/// Signal variance stays at 1. The first start is the isotropic unit lengthscale.
inline HyperFit fit_hyperparameters(std::span<const Point> inputs, std::span<const double> outputs,
                                    double noise_variance, const HyperSearch& search = {}) {
    if (inputs.size() < 2 || inputs.size() != outputs.size())
        throw ArgumentError("fit_hyperparameters: need at least two paired observations");
    const Eigen::Index d = inputs.front().size();
    HyperFit best;
    best.params = KernelParams::isotropic(d, 1.0);

    const auto [lo_it, hi_it] = std::minmax_element(outputs.begin(), outputs.end());
    if (*hi_it - *lo_it <= 1e-12 * std::max(1.0, std::abs(*hi_it))) {
        best.degenerate = true;
        return best;
    }

    const double log_lo = std::log(1e-3), log_hi = std::log(1e3);
    auto score = [&](const Eigen::VectorXd& logs) {
        KernelParams kp{logs.array().exp().matrix(), 1.0};
        try {
            const double v = GpState::fit(inputs, outputs, kp, noise_variance).log_marginal_likelihood();
            return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
        } catch (const NumericError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    Rng rng(search.seed);
    for (int s = 0; s < std::max(1, search.starts); ++s) {
        Eigen::VectorXd cur = Eigen::VectorXd::Zero(d);
        if (s > 0)
            for (Eigen::Index j = 0; j < d; ++j)
                cur[j] = std::log(1e-2) + uniform01(rng) * (std::log(1e1) - std::log(1e-2));
        double val = score(cur);
        double step = 1.0;
        for (int it = 0; it < search.steps && step > 1e-3; ++it) {
            bool moved = false;
            for (Eigen::Index j = 0; j < d; ++j) {
                for (double dir : {1.0, -1.0}) {
                    Eigen::VectorXd cand = cur;
                    cand[j] = std::clamp(cand[j] + dir * step, log_lo, log_hi);
                    if (cand[j] == cur[j])
                        continue;
                    const double v = score(cand);
                    if (v > val) {
                        val = v;
                        cur = std::move(cand);
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved)
                step *= 0.5;
        }
        if (val > best.log_likelihood) {
            best.log_likelihood = val;
            best.params = KernelParams{cur.array().exp().matrix(), 1.0};
        }
    }
    return best;
}

} // namespace gphedge
