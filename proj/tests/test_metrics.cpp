#include <gphedge/bo_loop.hpp>
#include <gphedge/metrics.hpp>

#include <gtest/gtest.h>

using namespace gphedge;

namespace {

TrialRecord handmade(double f_x1, std::vector<double> truths) {
    TrialRecord r;
    r.f_x1 = f_x1;
    std::size_t t = 1;
    for (double v : truths) {
        IterationRow row;
        row.iteration = t++;
        row.true_value = v;
        row.pre_variance = 0.5;
        row.ucb_stddev = 0.5;
        r.rows.push_back(row);
    }
    return r;
}

TrialRecord short_run(std::uint64_t seed, double noise = 0.01) {
    RunConfig c;
    c.objective = make_hartman3(noise);
    c.iterations = 15;
    c.acquisitions = {AcquisitionSpec::ucb()};
    c.seeds = TrialSeeds::from(seed);
    c.noise_variance = noise;
    c.maximizer = MaximizerConfig{150, 4, 20, 0};
    return run(c);
}

} // namespace

TEST(Gap, Examples) {
    const auto none = gap(handmade(0.0, {-1.0, -0.5, 0.0}), 1.0);
    for (double g : none.values)
        EXPECT_EQ(g, 0.0);
    const auto found = gap(handmade(0.0, {0.2, 1.0, 0.3}), 1.0);
    EXPECT_EQ(found.values, (std::vector<double>{0.2, 1.0, 1.0}));
    EXPECT_EQ(*gap_value(0.0, 0.5, 1.0), 0.5);
    EXPECT_FALSE(gap_value(1.0, 2.0, 1.0));
    EXPECT_FALSE(gap(handmade(2.0, {1.0}), 1.0).defined);
    EXPECT_EQ(*gap_value(0.0, 1.5, 1.0), 1.0);
}

TEST(Regret, Series) {
    const auto r = regret_series(handmade(0.0, {0.5, 1.0, 0.0}), 1.0);
    EXPECT_EQ(r.instantaneous, (std::vector<double>{0.5, 0.0, 1.0}));
    EXPECT_EQ(r.total(), 1.5);
    EXPECT_EQ(r.average.back(), 0.5);
    EXPECT_EQ(r.minimum, 0.0);
    EXPECT_EQ(r.simple, 0.0);
    EXPECT_TRUE(r.average_bounds_simple);
}

TEST(InformationGain, Examples) {
    EXPECT_EQ(information_gain(handmade(0.0, {}), 1.0), 0.0);
    auto one = handmade(0.0, {0.0});
    one.rows[0].pre_variance = 1.0;
    EXPECT_NEAR(information_gain(one, 1.0), 0.5 * std::log(2.0), 1e-15);
    EXPECT_NEAR(information_gain(one, 1.0), 0.3466, 1e-4);
    EXPECT_THROW(information_gain(one, 0.0), ArgumentError);
    EXPECT_THROW(c1_constant(0.0), ArgumentError);
    EXPECT_GT(c1_constant(0.01), 0.0);
}

TEST(Metrics, PropertiesOnRealRuns) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto rec = short_run(seed);
        const auto series = information_gain_series(rec, 0.01);
        for (std::size_t i = 1; i < series.size(); ++i)
            EXPECT_GE(series[i], series[i - 1]);
        EXPECT_TRUE(variance_sum_check(rec, rec.schedule, 0.01).holds);
        const auto g = gap(rec, kHartman3Optimum);
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            EXPECT_GE(g.values[i], 0.0);
            EXPECT_LE(g.values[i], 1.0);
            if (i) {
                EXPECT_GE(g.values[i], g.values[i - 1]);
            }
        }
        EXPECT_TRUE(regret_series(rec, kHartman3Optimum).average_bounds_simple);
        const auto rep = theorem1_decomposition(rec, rec.schedule, 0.01);
        EXPECT_EQ(rep.T, 15u);
        EXPECT_GT(rep.sampled_term, 0.0);
        EXPECT_GT(rep.ucb_term, 0.0);
        ASSERT_TRUE(rep.cumulative_regret);
    }
}

TEST(Theorem1, MissingUcbIsError) {
    auto rec = handmade(0.0, {0.1, 0.2});
    rec.rows[1].ucb_stddev.reset();
    EXPECT_THROW(theorem1_decomposition(rec, BetaSchedule{}, 0.01), ArgumentError);
}

TEST(Aggregate, MeanAndVariance) {
    std::vector<TrialRecord> trials{handmade(0.0, {0.5, 1.0}), handmade(0.0, {0.0, 0.5})};
    const auto s = aggregate(trials, 1.0);
    EXPECT_EQ(s.gap_mean, (std::vector<double>{0.25, 0.75}));
    EXPECT_EQ(s.gap_variance, (std::vector<double>{0.125, 0.125}));
    EXPECT_EQ(s.average_regret_mean[0], 0.75);
    EXPECT_THROW(aggregate(std::span<const TrialRecord>(trials.data(), 1), 1.0), ArgumentError);
}
