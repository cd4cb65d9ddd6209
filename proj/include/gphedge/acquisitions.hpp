#pragma once

#include <gphedge/errors.hpp>
#include <gphedge/gp_core.hpp>
#include <gphedge/normal.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

namespace gphedge {

enum class AcquisitionKind { PI, EI, UCB };

inline std::string to_string(AcquisitionKind k) {
    switch (k) {
    case AcquisitionKind::PI: return "PI";
    case AcquisitionKind::EI: return "EI";
    case AcquisitionKind::UCB: return "UCB";
    }
    return "?";
}

struct AcquisitionSpec {
    AcquisitionKind kind = AcquisitionKind::EI;
    double xi = 0.01; // PI / EI trade-off
    double nu = 0.2;  // UCB scaling of beta_t
    std::string label;

    static AcquisitionSpec pi(double xi = 0.01) { return {AcquisitionKind::PI, xi, 0.2, "PI(xi=" + fmt(xi) + ")"}; }
    static AcquisitionSpec ei(double xi = 0.01) { return {AcquisitionKind::EI, xi, 0.2, "EI(xi=" + fmt(xi) + ")"}; }
    static AcquisitionSpec ucb(double nu = 0.2) { return {AcquisitionKind::UCB, 0.01, nu, "UCB(nu=" + fmt(nu) + ")"}; }

    void validate() const {
        if (kind != AcquisitionKind::UCB && !(xi >= 0.0))
            throw ArgumentError("acquisition " + label + ": xi must be >= 0");
        if (kind == AcquisitionKind::UCB && !(nu > 0.0))
            throw ArgumentError("acquisition " + label + ": nu must be > 0");
    }

private:
    static std::string fmt(double v) {
        std::string s = std::to_string(v);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.')
            s.push_back('0');
        return s;
    }
};

/// beta_t = 2 log(|A| pi_t / delta) with pi_t = pi^2 t^2 / 6.
struct BetaSchedule {
    double delta = 0.1;
    std::uint64_t cardinality = 10000;

    void validate() const {
        if (!(delta > 0.0 && delta < 1.0 + 1e-12))
            throw ArgumentError("beta schedule: delta must lie in (0,1]");
        if (cardinality == 0)
            throw ArgumentError("beta schedule: cardinality must be positive");
    }
};

inline double beta_t(const BetaSchedule& schedule, std::uint64_t t) {
    if (t < 1)
        throw ArgumentError("beta_t: t must be >= 1");
    const double td = static_cast<double>(t);
    const double pi_t = std::numbers::pi * std::numbers::pi * td * td / 6.0;
    return 2.0 * std::log(static_cast<double>(schedule.cardinality) * pi_t / schedule.delta);
}

inline double acq_pi(const Prediction& pred, double incumbent_mu_plus, double xi) {
    const double d = pred.mean - incumbent_mu_plus - xi;
    const double sigma = pred.stddev();
    if (sigma <= 0.0)
        return d > 0.0 ? 1.0 : 0.0;
    return normal_cdf(d / sigma);
}

inline double acq_ei(const Prediction& pred, double incumbent_mu_plus, double xi) {
    const double sigma = pred.stddev();
    if (sigma <= 0.0)
        return 0.0;
    const double d = pred.mean - incumbent_mu_plus - xi;
    const double z = d / sigma;
    return d * normal_cdf(z) + sigma * normal_pdf(z);
}

inline double acq_ucb(const Prediction& pred, std::uint64_t t, double nu, const BetaSchedule& schedule) {
    return pred.mean + std::sqrt(nu * beta_t(schedule, t)) * pred.stddev();
}

/// Dispatch on spec.kind. `t` is the 1-based iteration index used by UCB.
inline double acquisition_value(const AcquisitionSpec& spec, const Prediction& pred, double incumbent,
                                std::uint64_t t, const BetaSchedule& schedule) {
    switch (spec.kind) {
    case AcquisitionKind::PI: return acq_pi(pred, incumbent, spec.xi);
    case AcquisitionKind::EI: return acq_ei(pred, incumbent, spec.xi);
    case AcquisitionKind::UCB: return acq_ucb(pred, t, spec.nu, schedule);
    }
    return 0.0;
}

enum class IncumbentMode {
    PosteriorMean, // mu+ = max_t mu(x_t)
    BestSample,    // best noisy observation y
};

inline double incumbent_value(const GpState& gp, IncumbentMode mode) {
    if (gp.size() == 0)
        return 0.0;
    return mode == IncumbentMode::PosteriorMean ? gp.mean_at_observations().maxCoeff() : gp.outputs().maxCoeff();
}

} // namespace gphedge
