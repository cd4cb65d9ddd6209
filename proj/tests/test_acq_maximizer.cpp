#include <gphedge/acq_maximizer.hpp>
#include <gphedge/objectives.hpp>

#include <gtest/gtest.h>

using namespace gphedge;

TEST(Maximize, QuadraticBowl2d) {
    auto f = [](const Point& x) { return -(x.array() - 0.5).square().sum(); };
    const auto r = maximize(f, BoxDomain::unit(2), MaximizerConfig::defaults_for(2, 1));
    EXPECT_LE((r.point - Point::Constant(2, 0.5)).norm(), 1e-3);
}

TEST(Maximize, ConstantObjective) {
    auto f = [](const Point&) { return 4.25; };
    const BoxDomain box{Eigen::Vector2d(-1, 2), Eigen::Vector2d(3, 5)};
    const auto r = maximize(f, box, MaximizerConfig::defaults_for(2, 3));
    EXPECT_EQ(r.value, 4.25);
    EXPECT_TRUE(box.contains(r.point));
}

TEST(Maximize, BraninAgainstRandomSearch) {
    // Dense random-search oracle (10^6 uniform points).
    Rng rng(99);
    const BoxDomain box = branin_domain();
    double oracle_best = -1e300;
    Point x(2);
    for (int i = 0; i < 1000000; ++i) {
        for (int j = 0; j < 2; ++j)
            x[j] = box.lower[j] + uniform01(rng) * (box.upper[j] - box.lower[j]);
        oracle_best = std::max(oracle_best, branin(x));
    }
    const auto r = maximize([](const Point& p) { return branin(p); }, box, MaximizerConfig::defaults_for(2, 5));
    EXPECT_GE(r.value, oracle_best - 1e-2);
}

TEST(Maximize, RandomQuadraticBowls) {
    Rng rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::Index d = 1 + rep % 6;
        Point c(d), w(d);
        for (Eigen::Index j = 0; j < d; ++j) {
            c[j] = 0.05 + 0.9 * uniform01(rng);
            w[j] = 0.5 + 2.0 * uniform01(rng);
        }
        const double top = standard_normal(rng);
        auto f = [&](const Point& x) { return top - (w.array() * (x - c).array().square()).sum(); };
        const auto r = maximize(f, BoxDomain::unit(d), MaximizerConfig::defaults_for(d, rep));
        EXPECT_GE(r.value, top - 1e-3) << "d=" << d;
    }
}

TEST(Maximize, StaysInsideBox) {
    // Maximum outside the box: the result must be clamped to the boundary.
    const BoxDomain box{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2)};
    auto f = [](const Point& x) { return x[0] + x[1]; };
    const auto r = maximize(f, box, MaximizerConfig::defaults_for(2, 0));
    EXPECT_TRUE(box.contains(r.point));
    EXPECT_NEAR(r.value, 3.0, 1e-9);
}

TEST(Maximize, DirectBudgetMonotone) {
    auto f = [](const Point& x) { return std::sin(7.0 * x[0]) * std::cos(5.0 * x[1]) + 0.3 * x[2]; };
    double prev = -1e300;
    for (std::size_t b = 10; b <= 5120; b *= 2) {
        const auto r = direct_search(f, BoxDomain::unit(3), b);
        EXPECT_GE(r.value, prev);
        EXPECT_LE(r.evaluations, b);
        prev = r.value;
    }
}

TEST(Maximize, Deterministic) {
    auto f = [](const Point& x) { return std::sin(9.0 * x[0]) + std::cos(4.0 * x[1]); };
    const auto a = maximize(f, BoxDomain::unit(2), MaximizerConfig::defaults_for(2, 17));
    const auto b = maximize(f, BoxDomain::unit(2), MaximizerConfig::defaults_for(2, 17));
    EXPECT_TRUE(a.point == b.point);
    EXPECT_EQ(a.value, b.value);
}

TEST(Maximize, TieBreakLexicographic) {
    // Two flat maximal plateaus of equal height: the smaller coordinate wins.
    auto f = [](const Point& x) { return std::abs(x[0] - 0.5) > 0.3 ? 1.0 : 0.0; };
    const auto r = maximize(f, BoxDomain::unit(1), MaximizerConfig::defaults_for(1, 4));
    EXPECT_LT(r.point[0], 0.5);
}

TEST(Maximize, NonFiniteIsNumericError) {
    auto f = [](const Point& x) { return x[0] > 0.6 ? std::nan("") : x[0]; };
    try {
        maximize(f, BoxDomain::unit(1), MaximizerConfig::defaults_for(1, 0));
        FAIL() << "expected NumericError";
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("("), std::string::npos);
    }
}

TEST(Maximize, InvalidArguments) {
    auto f = [](const Point&) { return 0.0; };
    EXPECT_THROW(maximize(f, BoxDomain{Eigen::Vector2d(0, 1), Eigen::Vector2d(1, 1)}, MaximizerConfig{}), ArgumentError);
    EXPECT_THROW(maximize(f, BoxDomain::unit(2), MaximizerConfig{0, 1, 1, 0}), ArgumentError);
}

TEST(LatinHypercube, OnePointPerStratum) {
    const BoxDomain box{Eigen::Vector3d(-1, 0, 10), Eigen::Vector3d(1, 5, 20)};
    const std::size_t n = 37;
    const auto pts = latin_hypercube(box, n, 8);
    ASSERT_EQ(pts.size(), n);
    for (Eigen::Index j = 0; j < 3; ++j) {
        std::vector<int> hits(n, 0);
        for (const auto& p : pts) {
            ASSERT_TRUE(box.contains(p));
            const double u = (p[j] - box.lower[j]) / (box.upper[j] - box.lower[j]);
            ++hits[std::min<std::size_t>(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)))];
        }
        for (int h : hits)
            EXPECT_EQ(h, 1);
    }
    const auto again = latin_hypercube(box, n, 8);
    for (std::size_t i = 0; i < n; ++i)
        EXPECT_TRUE(pts[i] == again[i]);
}
