#pragma once

#include <gphedge/errors.hpp>
#include <gphedge/gp_core.hpp>
#include <gphedge/random.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <vector>

namespace gphedge {

struct BoxDomain {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    static BoxDomain unit(Eigen::Index d) { return {Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d)}; }

    Eigen::Index dimension() const { return lower.size(); }

    void validate() const {
        if (lower.size() == 0 || lower.size() != upper.size())
            throw ArgumentError("box: lower and upper must have equal, positive dimension");
        for (Eigen::Index j = 0; j < lower.size(); ++j)
            if (!(lower[j] < upper[j]) || !std::isfinite(lower[j]) || !std::isfinite(upper[j]))
                throw ArgumentError("box: lower < upper required in every dimension");
    }

    bool contains(const Point& x, double tol = 0.0) const {
        if (x.size() != dimension())
            return false;
        for (Eigen::Index j = 0; j < x.size(); ++j)
            if (x[j] < lower[j] - tol || x[j] > upper[j] + tol)
                return false;
        return true;
    }

    /// Unit-cube coordinates to box coordinates, clamped into the box.
    Point from_unit(const Point& u) const {
        Point x = lower.array() + u.array() * (upper - lower).array();
        return x.cwiseMax(lower).cwiseMin(upper);
    }

    Point to_unit(const Point& x) const { return ((x - lower).array() / (upper - lower).array()).matrix(); }
};

struct MaximizerConfig {
    std::size_t direct_budget = 1000;
    int multistart_count = 10;
    int local_steps = 50;
    std::uint64_t seed = 0;

    /// 500 d DIRECT evaluations, 10 starts, 50 local sweeps.
    static MaximizerConfig defaults_for(Eigen::Index d, std::uint64_t seed = 0) {
        return {static_cast<std::size_t>(500 * d), 10, 50, seed};
    }

    void validate() const {
        if (direct_budget < 1 || multistart_count < 1 || local_steps < 1)
            throw ArgumentError("maximizer: all budgets must be positive");
    }
};

struct MaxResult {
    Point point;
    double value = -std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
};

/// Lexicographic order on points; breaks value ties deterministically.
inline bool lex_less(const Point& a, const Point& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

inline bool better(double va, const Point& a, double vb, const Point& b) {
    return va > vb || (va == vb && lex_less(a, b));
}

namespace detail {

inline std::string format_point(const Point& x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index j = 0; j < x.size(); ++j)
        os << (j ? ", " : "") << x[j];
    os << ')';
    return os.str();
}

/// Evaluates f on unit-cube coordinates, mapping into the box and checking finiteness.
template <class F>
class UnitObjective {
public:
    UnitObjective(F& f, const BoxDomain& domain) : f_(f), domain_(domain) {}

    double operator()(const Point& u) {
        Point x = domain_.from_unit(u);
        const double v = f_(x);
        ++evaluations;
        if (!std::isfinite(v))
            throw NumericError("maximize: non-finite objective value at " + format_point(x));
        return v;
    }

    std::size_t evaluations = 0;

private:
    F& f_;
    const BoxDomain& domain_;
};

struct DirectRect {
    Point center;
    std::vector<int> level; // side_j = 3^-level_j
    double value;
    double size;
};

inline double rect_size(const std::vector<int>& level) {
    std::vector<int> sorted = level;
    std::sort(sorted.begin(), sorted.end());
    double s = 0.0;
    for (int l : sorted)
        s += std::pow(9.0, -l);
    return 0.5 * std::sqrt(s);
}

inline constexpr int kMaxDirectLevel = 25;
inline constexpr double kDirectEpsilon = 1e-4;

} // namespace detail

struct DirectResult {
    MaxResult best;                   // unit-cube coordinates
    std::vector<detail::DirectRect> rects; // final partition
};

/// Deterministic DIRECT on the unit cube (maximization). Stops before a division
/// that would exceed `budget` evaluations, so a larger budget always replays the
/// smaller run's evaluation sequence as a prefix.
template <class F>
DirectResult direct_search_unit(F&& f_unit, Eigen::Index d, std::size_t budget) {
    using detail::DirectRect;
    DirectResult out;
    std::size_t evals = 0;
    auto eval = [&](const Point& u) {
        ++evals;
        return f_unit(u);
    };

    std::vector<DirectRect> rects;
    {
        Point c = Point::Constant(d, 0.5);
        std::vector<int> lv(static_cast<std::size_t>(d), 0);
        const double v = eval(c);
        rects.push_back({c, lv, v, detail::rect_size(lv)});
    }
    auto track = [&](const DirectRect& r) {
        if (out.best.point.size() == 0 || better(r.value, r.center, out.best.value, out.best.point)) {
            out.best.point = r.center;
            out.best.value = r.value;
        }
    };
    track(rects.front());

    bool exhausted = false;
    while (!exhausted) {
        // Best divisible rectangle per size class.
        std::map<double, std::size_t> best_of_size;
        double fmax = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rects.size(); ++i) {
            const auto& r = rects[i];
            fmax = std::max(fmax, r.value);
            if (*std::min_element(r.level.begin(), r.level.end()) >= detail::kMaxDirectLevel)
                continue;
            auto [it, inserted] = best_of_size.try_emplace(r.size, i);
            if (!inserted) {
                const auto& cur = rects[it->second];
                if (better(r.value, r.center, cur.value, cur.center))
                    it->second = i;
            }
        }
        if (best_of_size.empty())
            break;

        std::vector<std::pair<double, std::size_t>> classes(best_of_size.begin(), best_of_size.end());
        std::vector<std::size_t> chosen;
        const double target = fmax + detail::kDirectEpsilon * std::abs(fmax);
        for (std::size_t a = 0; a < classes.size(); ++a) {
            const double dj = classes[a].first;
            const double fj = rects[classes[a].second].value;
            double k_low = 0.0, k_high = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < classes.size(); ++b) {
                if (b == a)
                    continue;
                const double di = classes[b].first;
                const double fi = rects[classes[b].second].value;
                if (di < dj)
                    k_low = std::max(k_low, (fi - fj) / (dj - di));
                else
                    k_high = std::min(k_high, (fj - fi) / (di - dj));
            }
            if (k_high <= 0.0 || k_low > k_high)
                continue;
            if (std::isfinite(k_high) && fj + k_high * dj < target)
                continue;
            chosen.push_back(classes[a].second);
        }
        // The largest class is always eligible, so `chosen` is never empty.
        if (chosen.empty())
            chosen.push_back(classes.back().second);

        for (std::size_t idx : chosen) {
            const int min_level = *std::min_element(rects[idx].level.begin(), rects[idx].level.end());
            std::vector<Eigen::Index> dims;
            for (Eigen::Index j = 0; j < d; ++j)
                if (rects[idx].level[static_cast<std::size_t>(j)] == min_level)
                    dims.push_back(j);
            if (evals + 2 * dims.size() > budget) {
                exhausted = true;
                break;
            }
            const double delta = std::pow(3.0, -(min_level + 1));
            struct Probe {
                Eigen::Index dim;
                Point plus, minus;
                double vplus, vminus;
            };
            std::vector<Probe> probes;
            for (Eigen::Index j : dims) {
                Probe p{j, rects[idx].center, rects[idx].center, 0.0, 0.0};
                p.plus[j] += delta;
                p.minus[j] -= delta;
                p.vplus = eval(p.plus);
                p.vminus = eval(p.minus);
                probes.push_back(std::move(p));
            }
            std::stable_sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) {
                return std::max(a.vplus, a.vminus) > std::max(b.vplus, b.vminus);
            });
            for (const auto& p : probes) {
                rects[idx].level[static_cast<std::size_t>(p.dim)] += 1;
                const auto lv = rects[idx].level;
                const double sz = detail::rect_size(lv);
                rects.push_back({p.plus, lv, p.vplus, sz});
                track(rects.back());
                rects.push_back({p.minus, lv, p.vminus, sz});
                track(rects.back());
            }
            rects[idx].size = detail::rect_size(rects[idx].level);
        }
    }
    out.best.evaluations = evals;
    out.rects = std::move(rects);
    return out;
}

/// Compass search from `start` on the unit cube with step halving.
template <class F>
MaxResult pattern_search_unit(F&& f_unit, Point start, double start_value, double step, int max_sweeps) {
    MaxResult r{std::move(start), start_value, 0};
    for (int sweep = 0; sweep < max_sweeps && step > 1e-9; ++sweep) {
        bool moved = false;
        for (Eigen::Index j = 0; j < r.point.size(); ++j) {
            for (double dir : {1.0, -1.0}) {
                Point cand = r.point;
                cand[j] = std::clamp(cand[j] + dir * step, 0.0, 1.0);
                if (cand[j] == r.point[j])
                    continue;
                const double v = f_unit(cand);
                ++r.evaluations;
                if (v > r.value) {
                    r.point = std::move(cand);
                    r.value = v;
                    moved = true;
                    break;
                }
            }
        }
        if (!moved)
            step *= 0.5;
    }
    return r;
}

/// DIRECT phase on [0,1]^d mapped into `domain`.
template <class F>
MaxResult direct_search(F&& f, const BoxDomain& domain, std::size_t budget) {
    domain.validate();
    detail::UnitObjective<std::remove_reference_t<F>> fu(f, domain);
    DirectResult dr = direct_search_unit(fu, domain.dimension(), budget);
    dr.best.point = domain.from_unit(dr.best.point);
    return dr.best;
}

/// Global maximization: DIRECT followed by multistart pattern search from the
/// best DIRECT rectangles (half of the starts) and uniform random points.
template <class F>
MaxResult maximize(F&& f, const BoxDomain& domain, const MaximizerConfig& config) {
    domain.validate();
    config.validate();
    const Eigen::Index d = domain.dimension();
    detail::UnitObjective<std::remove_reference_t<F>> fu(f, domain);

    DirectResult dr = direct_search_unit(fu, d, config.direct_budget);
    MaxResult best = dr.best;

    std::vector<std::size_t> order(dr.rects.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return better(dr.rects[a].value, dr.rects[a].center, dr.rects[b].value, dr.rects[b].center);
    });

    const int from_direct = std::min<int>((config.multistart_count + 1) / 2, static_cast<int>(order.size()));
    Rng rng(config.seed);
    for (int s = 0; s < config.multistart_count; ++s) {
        Point start;
        double value, step;
        if (s < from_direct) {
            const auto& r = dr.rects[order[static_cast<std::size_t>(s)]];
            start = r.center;
            value = r.value;
            step = 0.5 * std::pow(3.0, -*std::min_element(r.level.begin(), r.level.end()));
        } else {
            start.resize(d);
            for (Eigen::Index j = 0; j < d; ++j)
                start[j] = uniform01(rng);
            value = fu(start);
            step = 0.1;
        }
        MaxResult local = pattern_search_unit(fu, std::move(start), value, step, config.local_steps);
        if (better(local.value, local.point, best.value, best.point))
            best = std::move(local);
    }
    best.point = domain.from_unit(best.point);
    best.evaluations = fu.evaluations;
    return best;
}

/// Latin-hypercube sample in the box: one point per stratum in every dimension.
inline std::vector<Point> latin_hypercube(const BoxDomain& domain, std::size_t count, std::uint64_t seed) {
    domain.validate();
    if (count < 1)
        throw ArgumentError("latin_hypercube: count must be >= 1");
    const Eigen::Index d = domain.dimension();
    Rng rng(seed);
    std::vector<Point> unit(count, Point(d));
    std::vector<std::size_t> perm(count);
    for (Eigen::Index j = 0; j < d; ++j) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = count; i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(perm[i - 1], perm[pick(rng)]);
        }
        for (std::size_t i = 0; i < count; ++i)
            unit[i][j] = (static_cast<double>(perm[i]) + uniform01(rng)) / static_cast<double>(count);
    }
    std::vector<Point> pts;
    pts.reserve(count);
    for (auto& u : unit)
        pts.push_back(domain.from_unit(u));
    return pts;
}

/// Finite candidate set for diagnostics (stratified, deterministic in seed).
inline std::vector<Point> grid_candidates(const BoxDomain& domain, std::size_t count, std::uint64_t seed) {
    return latin_hypercube(domain, count, seed);
}

} // namespace gphedge
