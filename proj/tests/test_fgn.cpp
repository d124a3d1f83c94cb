#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "pfou/errors.hpp"
#include "pfou/fgn.hpp"

using namespace pfou;

namespace {

double sample_autocov(const std::vector<double>& v, std::size_t lag) {
    double s = 0.0;
    const std::size_t n = v.size() - lag;
    for (std::size_t i = 0; i < n; ++i) s += v[i] * v[i + lag];
    return s / static_cast<double>(n);
}

}  // namespace

TEST(Hurst, RejectsOutsideLongMemoryRegime) {
    EXPECT_THROW(Hurst(0.5), DomainError);
    EXPECT_THROW(Hurst(0.4), DomainError);
    EXPECT_THROW(Hurst(1.0), DomainError);
    EXPECT_THROW(Hurst(std::nan("")), DomainError);
    EXPECT_DOUBLE_EQ(Hurst(0.7).kernel_exponent(), -0.6);
}

TEST(FbmCovariance, Examples) {
    EXPECT_NEAR(fbm_covariance(Hurst(0.75), 1.0, 1.0), 1.0, 1e-15);
    EXPECT_NEAR(fbm_covariance(Hurst(0.7), 1.0, 2.0), 1.31951, 1e-5);
    EXPECT_NEAR(fbm_covariance(Hurst(0.7), 1.0, 2.0), 0.5 * std::pow(2.0, 1.4), 1e-14);
    EXPECT_THROW(fbm_covariance(Hurst(0.7), -1.0, 2.0), DomainError);
}

TEST(FgnAutocovariance, Examples) {
    for (double h : {0.55, 0.7, 0.9}) EXPECT_NEAR(fgn_autocovariance(Hurst(h), 0, 1.0), 1.0, 1e-15);
    EXPECT_NEAR(fgn_autocovariance(Hurst(0.75), 1, 1.0), 0.414214, 1e-6);
    // self-similarity: c_step(k) = step^{2H} c_1(k)
    EXPECT_NEAR(fgn_autocovariance(Hurst(0.7), 5, 0.01), std::pow(0.01, 1.4) * fgn_autocovariance(Hurst(0.7), 5, 1.0),
                1e-16);
}

TEST(FgnAutocovariance, AsymptoticPowerLaw) {
    const Hurst H(0.8);
    const double k = 1e6;
    const double asym = H.value() * (2 * H.value() - 1) * std::pow(k, 2 * H.value() - 2);
    EXPECT_NEAR(fgn_autocovariance(H, 1000000, 1.0) / asym, 1.0, 1e-6);
}

TEST(FbmCovariance, BilinearConsistencyWithIncrements) {
    const Hurst H(0.7);
    for (int i = 1; i <= 10; ++i) {
        for (int j = 1; j <= 10; ++j) {
            double s = 0.0;
            for (int k = 0; k < i; ++k)
                for (int l = 0; l < j; ++l) s += fgn_autocovariance(H, static_cast<std::size_t>(std::abs(k - l)), 1.0);
            EXPECT_NEAR(s, fbm_covariance(H, i, j), 1e-10);
        }
    }
}

TEST(FbmIncrementCovariance, MatchesSecondDifference) {
    const Hurst H(0.65);
    const auto raw = [&](double s1, double s2, double t1, double t2) {
        return fbm_covariance(H, s2, t2) - fbm_covariance(H, s2, t1) - fbm_covariance(H, s1, t2) +
               fbm_covariance(H, s1, t1);
    };
    EXPECT_NEAR(fbm_increment_covariance(H, 0.0, 1.0, 3.0, 4.5), raw(0.0, 1.0, 3.0, 4.5), 1e-13);
    EXPECT_NEAR(fbm_increment_covariance(H, 1.0, 2.0, 1.5, 2.5), raw(1.0, 2.0, 1.5, 2.5), 1e-13);
    EXPECT_NEAR(fbm_increment_covariance(H, 2.0, 3.0, 2.0, 3.0), 1.0, 1e-13);
    // far-apart tiny increments: compare with the density H(2H-1)|t-s|^{2H-2} dt ds
    const double d = 1e-6;
    const double v = fbm_increment_covariance(H, 100.0, 100.0 + d, 300.0, 300.0 + d);
    const double approx = 0.65 * 0.3 * std::pow(200.0, -0.7) * d * d;
    EXPECT_NEAR(v / approx, 1.0, 1e-6);
}

TEST(TimeGrid, Validation) {
    TimeGrid g{{0.0, 0.5, 0.5}, std::nullopt};
    EXPECT_THROW(g.validate(), DomainError);
    TimeGrid neg{{-0.1, 0.5}, std::nullopt};
    EXPECT_THROW(neg.validate(), DomainError);
    TimeGrid u = TimeGrid::uniform(0.0, 0.25, 5);
    EXPECT_NO_THROW(u.validate());
    EXPECT_DOUBLE_EQ(u.points.back(), 1.0);
}

TEST(CirculantSampler, DeterministicGivenSeed) {
    const auto a = sample_fgn_uniform(Hurst(0.7), 4096, 0.01, 42);
    const auto b = sample_fgn_uniform(Hurst(0.7), 4096, 0.01, 42);
    const auto c = sample_fgn_uniform(Hurst(0.7), 4096, 0.01, 43);
    EXPECT_EQ(a.values, b.values);
    EXPECT_NE(a.values, c.values);
    EXPECT_EQ(a.values.size(), 4096u);
    EXPECT_EQ(a.grid.size(), 4097u);
}

TEST(CirculantSampler, SampleMeanWithinLongMemoryBound) {
    // the mean of n unit fGn increments is B_n / n, with standard deviation n^{H-1}
    const double h = 0.7;
    const auto v = sample_fgn_uniform(Hurst(h), 100000, 1.0, 7).values;
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    EXPECT_LT(std::abs(mean), 4.0 * std::pow(n, h - 1.0));
    int outside = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto w = sample_fgn_uniform(Hurst(h), 1000, 1.0, seed).values;
        const double m = std::accumulate(w.begin(), w.end(), 0.0) / 1000.0;
        if (std::abs(m) > 2.0 * std::pow(1000.0, h - 1.0)) ++outside;
    }
    EXPECT_LT(outside, 20);  // expected 9.1 of 200
}

TEST(CirculantSampler, LagOneAutocovariance) {
    const auto v = sample_fgn_uniform(Hurst(0.75), 1000000, 1.0, 11).values;
    EXPECT_NEAR(sample_autocov(v, 1), 0.414214, 0.01);
    EXPECT_NEAR(sample_autocov(v, 0), 1.0, 0.02);
}

TEST(CirculantSampler, NoClampingForFgn) {
    const Hurst H(0.9);
    CirculantSampler s([H](std::size_t k) { return fgn_autocovariance(H, k, 1.0); }, 10000);
    EXPECT_GE(s.embedding_size(), 2u * 9999u);
}

TEST(CirculantSampler, FailsWhenEmbeddingCannotBeMadeNonnegative) {
    // c(0) = 1, c(1) = 0.9, else 0 is not a valid covariance for large counts
    CirculantSampler::Autocovariance bad = [](std::size_t k) { return k == 0 ? 1.0 : (k == 1 ? 0.9 : 0.0); };
    EXPECT_THROW(CirculantSampler(bad, 64, 1024), NumericalError);
}

TEST(CholeskySampler, ReproducesCovariance) {
    Eigen::MatrixXd c(2, 2);
    c << 4.0, 1.0, 1.0, 1.0;
    CholeskySampler s(c);
    Rng rng(3);
    double s00 = 0, s01 = 0, s11 = 0;
    const int reps = 200000;
    for (int r = 0; r < reps; ++r) {
        auto x = s.sample(rng);
        s00 += x[0] * x[0];
        s01 += x[0] * x[1];
        s11 += x[1] * x[1];
    }
    EXPECT_NEAR(s00 / reps, 4.0, 0.06);
    EXPECT_NEAR(s01 / reps, 1.0, 0.03);
    EXPECT_NEAR(s11 / reps, 1.0, 0.015);
}

TEST(CholeskySampler, SingularMatrixFailsWithDiagnostics) {
    Eigen::MatrixXd c(2, 2);
    c << 1.0, 2.0, 2.0, 1.0;
    try {
        CholeskySampler s(c);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("eigenvalue"), std::string::npos);
    }
}

TEST(NonuniformFbm, OriginOnly) {
    TimeGrid g{{0.0}, std::nullopt};
    const auto v = sample_fbm_nonuniform(Hurst(0.7), g, 1);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0], 0.0);
}

TEST(NonuniformFbm, DuplicatePointRejected) {
    TimeGrid g{{0.0, 1.0, 1.0, 2.0}, std::nullopt};
    EXPECT_THROW(sample_fbm_nonuniform(Hurst(0.7), g, 1), DomainError);
}

TEST(NonuniformFbm, CapEnforced) {
    TimeGrid g = TimeGrid::uniform(0.0, 1.0, 20);
    EXPECT_THROW(NonuniformFbmSampler(Hurst(0.7), g, 10), DomainError);
}

TEST(NonuniformFbm, EmpiricalCovarianceAtOneAndTwo) {
    TimeGrid g{{0.0, 1.0, 2.0}, std::nullopt};
    NonuniformFbmSampler s(Hurst(0.7), g);
    double acc = 0.0;
    const int reps = 100000;
    for (int r = 0; r < reps; ++r) {
        Rng rng(static_cast<std::uint64_t>(r));
        const auto v = s.sample_values(rng);
        ASSERT_EQ(v[0], 0.0);
        acc += v[1] * v[2];
    }
    EXPECT_NEAR(acc / reps, 1.31951, 0.02);
}

TEST(NonuniformFbm, ExponentialGridIncrementsStayPositiveDefinite) {
    // the time-change grid H e^{s/H} with fine spacing
    TimeGrid g;
    for (int j = 0; j <= 400; ++j) g.points.push_back(0.7 * std::exp(j * 0.005 / 0.7));
    NonuniformFbmSampler s(Hurst(0.7), g);
    Rng rng(1);
    EXPECT_EQ(s.sample_increments(rng).size(), 401u);  // includes [0, g_0]
}
