#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "pfou/basis.hpp"
#include "pfou/errors.hpp"

using namespace pfou;

namespace {

DriftParams params(std::vector<double> mu, double alpha, double h = 0.7) {
    return DriftParams{Eigen::Map<Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size())), alpha,
                       Hurst(h)};
}

}  // namespace

TEST(Basis, FourierValues) {
    const BasisSpec b = BasisSpec::fourier(5);
    EXPECT_EQ(b.evaluate(0, 0.37), 1.0);
    EXPECT_NEAR(b.evaluate(1, 0.0), 1.414214, 1e-6);
    EXPECT_NEAR(b.evaluate(2, 0.25), std::numbers::sqrt2, 1e-15);
    EXPECT_NEAR(b.evaluate(3, 0.25), -std::numbers::sqrt2, 1e-14);  // cos(4 pi t)
    EXPECT_NEAR(b.evaluate(4, 0.125), std::numbers::sqrt2, 1e-14);  // sin(4 pi t)
    EXPECT_NEAR(b.evaluate(2, 3.1), b.evaluate(2, 0.1), 1e-12);
    EXPECT_THROW(b.evaluate(5, 0.0), DomainError);
    EXPECT_THROW(BasisSpec::fourier(0), DomainError);
}

TEST(Basis, OrthogonalityByFineMidpointRule) {
    const BasisSpec b = BasisSpec::fourier(3);
    const int K = 10000;
    double s = 0.0;
    for (int k = 0; k < K; ++k) {
        const double t = (k + 0.5) / K;
        s += b.evaluate(1, t) * b.evaluate(2, t);
    }
    EXPECT_NEAR(s / K, 0.0, 1e-8);
}

TEST(Basis, GramMatrices) {
    EXPECT_TRUE(gram_check(BasisSpec::fourier(3)).isIdentity(1e-8));
    const Eigen::MatrixXd g1 = gram_check(BasisSpec::fourier(1));
    ASSERT_EQ(g1.rows(), 1);
    EXPECT_NEAR(g1(0, 0), 1.0, 1e-14);
    const BasisSpec twos = BasisSpec::custom({std::vector<double>(16, 2.0)});
    EXPECT_NEAR(gram_check(twos)(0, 0), 4.0, 1e-12);
    EXPECT_THROW(twos.require_orthonormal(), DomainError);
}

TEST(Basis, CustomTableInterpolatesPeriodically) {
    const BasisSpec b = BasisSpec::custom({{0.0, 1.0, 0.0, -1.0}});
    EXPECT_NEAR(b.evaluate(0, 0.125), 0.5, 1e-15);
    EXPECT_NEAR(b.evaluate(0, 0.875), -0.5, 1e-15);
    EXPECT_NEAR(b.evaluate(0, 1.25), 1.0, 1e-15);
    EXPECT_EQ(b.breakpoints().size(), 4u);
    // triangle wave: \int phi^2 = 1/3
    EXPECT_NEAR(gram_check(b)(0, 0), 1.0 / 3.0, 1e-12);
}

TEST(Basis, CustomTableValidation) {
    EXPECT_THROW(BasisSpec::custom({{1.0}}), DomainError);
    EXPECT_THROW(BasisSpec::custom({{1.0, 1.0}, {1.0, 1.0, 1.0}}), DomainError);
    EXPECT_THROW(BasisSpec::custom({{1.0, std::nan("")}}), DomainError);
}

TEST(Basis, LoadTables) {
    const auto dir = std::filesystem::temp_directory_path() / "pfou_basis_test";
    std::filesystem::create_directories(dir);
    const auto good = dir / "one.csv";
    {
        std::ofstream out(good);
        out << "# constant\n0,1\n0.25,1\n0.5,1\n0.75,1\n";
    }
    const BasisSpec b = BasisSpec::load_tables({good});
    EXPECT_EQ(b.size(), 1u);
    EXPECT_NO_THROW(b.require_orthonormal());
    const auto bad = dir / "bad.csv";
    {
        std::ofstream out(bad);
        out << "0,1\n0.3,1\n";
    }
    EXPECT_THROW(BasisSpec::load_tables({bad}), DomainError);
    EXPECT_THROW(BasisSpec::load_tables({dir / "missing.csv"}), DomainError);
}

TEST(DriftParams, Validation) {
    const BasisSpec b = BasisSpec::fourier(2);
    EXPECT_THROW(params({1.0, 2.0}, 0.0).validate(b), DomainError);
    EXPECT_THROW(params({1.0}, 1.0).validate(b), DomainError);
    EXPECT_NO_THROW(params({1.0, 2.0}, 1.0).validate(b));
    const Eigen::VectorXd th = params({1.0, 2.0}, 3.0).theta();
    EXPECT_EQ(th.size(), 3);
    EXPECT_EQ(th(2), 3.0);
}

TEST(Drift, ConstantBasisClosedForms) {
    const BasisSpec b = BasisSpec::fourier(1);
    const DriftParams p = params({2.0}, 0.5);
    EXPECT_NEAR(htilde_of_t(p, b, 0.3), 4.0, 1e-13);
    EXPECT_NEAR(h_of_t(p, b, 1.0), 1.57388, 1e-5);
    EXPECT_NEAR(h_of_t(p, b, 1.0), 4.0 * (1.0 - std::exp(-0.5)), 1e-13);
    EXPECT_EQ(h_of_t(p, b, 0.0), 0.0);
    EXPECT_THROW(h_of_t(p, b, -1.0), DomainError);
}

TEST(Drift, ZeroMeanGivesZero) {
    const BasisSpec b = BasisSpec::fourier(3);
    const DriftParams p = params({0.0, 0.0, 0.0}, 1.3);
    for (double t : {0.0, 0.4, 7.2}) {
        EXPECT_EQ(h_of_t(p, b, t), 0.0);
        EXPECT_EQ(htilde_of_t(p, b, t), 0.0);
    }
}

TEST(Drift, FourierModeClosedForm) {
    // mu_2 sqrt2 cos(2 pi t) -> sqrt2 mu_2 (alpha cos + 2 pi sin) / (alpha^2 + 4 pi^2)
    const BasisSpec b = BasisSpec::fourier(3);
    const double alpha = 0.8;
    const DriftParams p = params({0.0, 1.5, -0.5}, alpha);
    const double w = 2.0 * std::numbers::pi;
    for (double t : {0.0, 0.1, 0.77}) {
        const double c = std::cos(w * t), s = std::sin(w * t);
        const double expected = std::numbers::sqrt2 *
                                (1.5 * (alpha * c + w * s) - 0.5 * (alpha * s - w * c)) / (alpha * alpha + w * w);
        EXPECT_NEAR(htilde_of_t(p, b, t), expected, 1e-13);
    }
}

TEST(Drift, HtildeSolvesTheOde) {
    const BasisSpec b = BasisSpec::custom({{1.0, 2.0, 0.0, 1.0, -1.0, 3.0}});
    const DriftParams p = params({0.7}, 1.2);
    const double eps = 1e-5;
    for (double t : {0.05, 0.4, 0.9}) {
        const double deriv = (htilde_of_t(p, b, t + eps) - htilde_of_t(p, b, t - eps)) / (2 * eps);
        EXPECT_NEAR(deriv, mean_drift(p, b, t) - 1.2 * htilde_of_t(p, b, t), 1e-6);
    }
    EXPECT_NEAR(htilde_of_t(p, b, 0.0), htilde_of_t(p, b, 1.0), 1e-13);
}

TEST(DriftProfile, MatchesDirectEvaluation) {
    const BasisSpec b = BasisSpec::fourier(5);
    const DriftParams p = params({1.0, 0.5, -0.3, 0.2, 0.9}, 0.7);
    const DriftProfile prof(p, b);
    for (double t : {0.0, 0.123, 0.5, 0.999, 3.33}) {
        EXPECT_NEAR(prof.htilde(t), htilde_of_t(p, b, t), 1e-11);
        EXPECT_NEAR(prof.h(t), h_of_t(p, b, t), 1e-11);
        EXPECT_NEAR(prof.mean_drift(t), mean_drift(p, b, t), 1e-14);
    }
}
