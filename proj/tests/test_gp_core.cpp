#include "oracles.hpp"

#include <gphedge/gp_core.hpp>
#include <gphedge/random.hpp>

#include <gtest/gtest.h>

#include <numbers>

using namespace gphedge;

namespace {

Point random_point(Rng& rng, Eigen::Index d) {
    Point p(d);
    for (Eigen::Index j = 0; j < d; ++j)
        p[j] = uniform01(rng);
    return p;
}

struct Dataset {
    std::vector<Point> x;
    std::vector<double> y;
    KernelParams kernel;
    double noise;
};

Dataset random_dataset(std::uint64_t seed, Eigen::Index d, std::size_t t) {
    Rng rng(seed);
    Dataset ds;
    ds.kernel = KernelParams{Eigen::VectorXd(d), 0.5 + uniform01(rng)};
    for (Eigen::Index j = 0; j < d; ++j)
        ds.kernel.lengthscales[j] = 0.2 + uniform01(rng);
    ds.noise = 0.01 + 0.1 * uniform01(rng);
    for (std::size_t i = 0; i < t; ++i) {
        ds.x.push_back(random_point(rng, d));
        ds.y.push_back(standard_normal(rng));
    }
    return ds;
}

oracle::DenseGp dense(const Dataset& ds, double jitter) {
    oracle::DenseGp g;
    g.x = ds.x;
    g.y = Eigen::Map<const Eigen::VectorXd>(ds.y.data(), static_cast<Eigen::Index>(ds.y.size()));
    g.ls = ds.kernel.lengthscales;
    g.sv = ds.kernel.signal_variance;
    g.noise = ds.noise;
    g.jitter = jitter;
    return g;
}

} // namespace

TEST(Kernel, Examples) {
    EXPECT_DOUBLE_EQ(kernel_eval(Point::Constant(3, 0.7), Point::Constant(3, 0.7), KernelParams::isotropic(3, 0.3)), 1.0);
    EXPECT_NEAR(kernel_eval(Point::Constant(1, 0.0), Point::Constant(1, 1.0), KernelParams::isotropic(1, 1.0)),
                0.606530659, 1e-9);
    EXPECT_NEAR(kernel_eval(Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), KernelParams::isotropic(2, 1.0)), 0.135335283,
                1e-9);
}

TEST(Kernel, SymmetricAndBounded) {
    Rng rng(11);
    for (int rep = 0; rep < 200; ++rep) {
        const Eigen::Index d = 1 + rep % 6;
        KernelParams kp{Eigen::VectorXd::Constant(d, 0.1 + uniform01(rng)), 0.1 + 3.0 * uniform01(rng)};
        const Point a = random_point(rng, d), b = random_point(rng, d);
        EXPECT_EQ(kernel_eval(a, b, kp), kernel_eval(b, a, kp));
        EXPECT_LE(kernel_eval(a, b, kp), kp.signal_variance);
    }
}

TEST(Kernel, InvalidArguments) {
    EXPECT_THROW(kernel_eval(Point::Zero(2), Point::Zero(3), KernelParams::isotropic(2, 1.0)), ArgumentError);
    EXPECT_THROW(KernelParams::isotropic(2, 0.0).validate(), ArgumentError);
    EXPECT_THROW((KernelParams{Eigen::VectorXd::Ones(2), -1.0}).validate(), ArgumentError);
    EXPECT_THROW(KernelParams::isotropic(2, std::numeric_limits<double>::infinity()).validate(), ArgumentError);
}

TEST(GpState, EmptyStateIsPrior) {
    const auto gp = GpState::empty(KernelParams::isotropic(2, 0.5), 0.1);
    const auto p = gp.predict(Eigen::Vector2d(0.3, 0.2));
    EXPECT_EQ(p.mean, 0.0);
    EXPECT_EQ(p.variance, 1.0);
    EXPECT_THROW(gp.log_marginal_likelihood(), ArgumentError);
}

TEST(GpState, NoiselessInterpolation) {
    std::vector<Point> x{Eigen::Vector2d(0.2, 0.4)};
    std::vector<double> y{1.7};
    const auto gp = GpState::fit(x, y, KernelParams::isotropic(2, 0.3), 0.0);
    const auto p = gp.predict(x[0]);
    EXPECT_NEAR(p.mean, 1.7, 1e-8);
    EXPECT_NEAR(p.variance, 0.0, 1e-8);
}

TEST(GpState, SingleObservationLml) {
    std::vector<Point> x{Point::Constant(1, 0.0)};
    std::vector<double> y{0.0};
    const auto gp = GpState::fit(x, y, KernelParams::isotropic(1, 1.0), 0.0);
    EXPECT_NEAR(gp.log_marginal_likelihood(), -0.918938533, 1e-8);
}

TEST(GpState, FivePointsMatchDenseInverse) {
    auto ds = random_dataset(5, 2, 5);
    ds.noise = 0.01;
    ds.kernel = KernelParams::isotropic(2, 0.4);
    const auto gp = GpState::fit(ds.x, ds.y, ds.kernel, ds.noise);
    const auto ref = dense(ds, gp.jitter());
    Rng rng(6);
    for (int q = 0; q < 20; ++q) {
        const Point x = random_point(rng, 2);
        const auto [m, v] = ref.predict(x);
        const auto p = gp.predict(x);
        EXPECT_LE(oracle::rel_err(p.mean, m), 1e-8);
        EXPECT_LE(oracle::rel_err(p.variance, v), 1e-8);
    }
    EXPECT_LE(oracle::rel_err(gp.log_marginal_likelihood(), ref.lml()), 1e-8);
}

TEST(GpState, RandomStatesMatchDenseInverse) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto ds = random_dataset(100 + s, 1 + static_cast<Eigen::Index>(s % 6), 1 + s % 20);
        const auto gp = GpState::fit(ds.x, ds.y, ds.kernel, ds.noise);
        const auto ref = dense(ds, gp.jitter());
        Rng rng(s);
        const Point q = random_point(rng, gp.dimension());
        const auto [m, v] = ref.predict(q);
        const auto p = gp.predict(q);
        ASSERT_LE(oracle::rel_err(p.mean, m), 1e-8) << "seed " << s;
        ASSERT_LE(oracle::rel_err(p.variance, v), 1e-8) << "seed " << s;
        ASSERT_LE(oracle::rel_err(gp.log_marginal_likelihood(), ref.lml()), 1e-8) << "seed " << s;
    }
}

TEST(GpState, CholeskyReconstructsGram) {
    const auto ds = random_dataset(3, 3, 15);
    const auto gp = GpState::fit(ds.x, ds.y, ds.kernel, ds.noise);
    Eigen::MatrixXd K = gp.gram();
    K.diagonal().array() += ds.noise + gp.jitter();
    const Eigen::MatrixXd L = gp.cholesky();
    EXPECT_LE((L * L.transpose() - K).norm() / K.norm(), 1e-8);
}

TEST(GpState, IncrementalMatchesBatch) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto ds = random_dataset(200 + s, 1 + static_cast<Eigen::Index>(s % 4), 12);
        auto inc = GpState::empty(ds.kernel, ds.noise);
        for (std::size_t i = 0; i < ds.x.size(); ++i)
            inc = inc.update(ds.x[i], ds.y[i]);
        const auto batch = GpState::fit(ds.x, ds.y, ds.kernel, ds.noise);
        ASSERT_EQ(inc.size(), batch.size());
        EXPECT_TRUE(inc.input_matrix() == batch.input_matrix());
        EXPECT_TRUE(inc.outputs() == batch.outputs());
        EXPECT_LE((inc.cholesky() - batch.cholesky()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((inc.alpha() - batch.alpha()).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, batch.alpha().norm()));
    }
}

TEST(GpState, UpdateLeavesOriginalUntouched) {
    const auto ds = random_dataset(9, 2, 4);
    const auto gp = GpState::fit(ds.x, ds.y, ds.kernel, ds.noise);
    const auto before = gp.alpha();
    const auto next = gp.update(Eigen::Vector2d(0.5, 0.5), 0.3);
    EXPECT_EQ(gp.size(), 4);
    EXPECT_EQ(next.size(), 5);
    EXPECT_TRUE(gp.alpha() == before);
}

TEST(GpState, VarianceNonIncreasingNoiseless) {
    for (std::uint64_t s = 0; s < 30; ++s) {
        auto ds = random_dataset(300 + s, 2, 15);
        Rng rng(s);
        const Point q = random_point(rng, 2);
        auto gp = GpState::empty(ds.kernel, 0.0);
        double prev = gp.predict(q).variance;
        for (std::size_t i = 0; i < ds.x.size(); ++i) {
            gp = gp.update(ds.x[i], ds.y[i]);
            const double v = gp.predict(q).variance;
            ASSERT_LE(v, prev + 1e-10);
            ASSERT_GE(v, 0.0);
            ASSERT_LE(v, ds.kernel.signal_variance + 1e-8);
            prev = v;
        }
    }
}

TEST(GpState, PositiveDefiniteWithJitter) {
    for (std::uint64_t s = 0; s < 200; ++s) {
        Rng rng(400 + s);
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(s % 5);
        std::vector<Point> x;
        for (int i = 0; i < 30; ++i)
            x.push_back(random_point(rng, d));
        std::vector<double> y(x.size(), 0.0);
        EXPECT_NO_THROW(GpState::fit(x, y, KernelParams::isotropic(d, 0.5 + uniform01(rng)), 0.0));
    }
}

TEST(GpState, DuplicatePointsNoiselessEscalateJitter) {
    std::vector<Point> x{Eigen::Vector2d(0.3, 0.3), Eigen::Vector2d(0.3, 0.3)};
    std::vector<double> y{1.0, 1.0};
    const auto gp = GpState::fit(x, y, KernelParams::isotropic(2, 0.5), 0.0);
    EXPECT_GT(gp.jitter(), 0.0);
    EXPECT_LE(gp.jitter(), 1e-4);
    EXPECT_NEAR(gp.predict(x[0]).mean, 1.0, 1e-3);
}

TEST(GpState, MeanAtObservationsMatchesPredict) {
    const auto ds = random_dataset(21, 3, 10);
    const auto gp = GpState::fit(ds.x, ds.y, ds.kernel, ds.noise);
    const auto mu = gp.mean_at_observations();
    for (std::size_t i = 0; i < ds.x.size(); ++i)
        EXPECT_NEAR(mu[static_cast<Eigen::Index>(i)], gp.predict_mean(ds.x[i]), 1e-10);
}

TEST(GpState, ZeroOutputsLmlIsLogDetOnly) {
    auto ds = random_dataset(31, 2, 6);
    std::fill(ds.y.begin(), ds.y.end(), 0.0);
    const auto gp = GpState::fit(ds.x, ds.y, ds.kernel, ds.noise);
    Eigen::MatrixXd K = gp.gram();
    K.diagonal().array() += ds.noise + gp.jitter();
    const double expected = -0.5 * std::log(K.determinant()) - 3.0 * std::log(2.0 * std::numbers::pi);
    EXPECT_NEAR(gp.log_marginal_likelihood(), expected, 1e-9);
}

TEST(GpState, ErrorsOnBadInput) {
    const auto k = KernelParams::isotropic(2, 0.5);
    std::vector<Point> x{Eigen::Vector2d(0.1, 0.2)};
    std::vector<double> y2{1.0, 2.0};
    EXPECT_THROW(GpState::fit(x, y2, k, 0.0), ArgumentError);
    std::vector<double> y{std::nan("")};
    EXPECT_THROW(GpState::fit(x, y, k, 0.0), ArgumentError);
    std::vector<double> y1{1.0};
    EXPECT_THROW(GpState::fit(x, y1, k, -1.0), ArgumentError);
    const auto gp = GpState::fit(x, y1, k, 0.0);
    EXPECT_THROW(gp.predict(Point::Zero(3)), ArgumentError);
    EXPECT_THROW(gp.update(Point::Zero(3), 1.0), ArgumentError);
}

TEST(HyperFit, RecoversLengthscaleScale) {
    // Data from a GP with long lengthscale along x0 and short along x1.
    Rng rng(77);
    const KernelParams truth{Eigen::Vector2d(1.0, 0.1), 1.0};
    std::vector<Point> x;
    for (int i = 0; i < 60; ++i)
        x.push_back(random_point(rng, 2));
    const auto prior = GpState::fit(x, std::vector<double>(x.size(), 0.0), truth, 0.0);
    Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
    for (auto& v : z)
        v = standard_normal(rng);
    const Eigen::VectorXd yv = prior.cholesky().triangularView<Eigen::Lower>() * z;
    std::vector<double> y(yv.data(), yv.data() + yv.size());
    const auto fit = fit_hyperparameters(x, y, 1e-4, {5, 60, 1});
    EXPECT_FALSE(fit.degenerate);
    EXPECT_GT(fit.params.lengthscales[0], fit.params.lengthscales[1]);
    const double at_truth = GpState::fit(x, y, truth, 1e-4).log_marginal_likelihood();
    EXPECT_GE(fit.log_likelihood, at_truth - 1.0);
    for (Eigen::Index j = 0; j < 2; ++j) {
        EXPECT_GE(fit.params.lengthscales[j], 1e-3);
        EXPECT_LE(fit.params.lengthscales[j], 1e3);
    }
}

TEST(HyperFit, ConstantOutputsAreDegenerate) {
    std::vector<Point> x{Eigen::Vector2d(0.1, 0.1), Eigen::Vector2d(0.9, 0.2)};
    std::vector<double> y{2.0, 2.0};
    const auto fit = fit_hyperparameters(x, y, 1e-6);
    EXPECT_TRUE(fit.degenerate);
    EXPECT_EQ(fit.params.lengthscales, Eigen::VectorXd::Ones(2));
}
