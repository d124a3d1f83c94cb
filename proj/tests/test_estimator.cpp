#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pfou/errors.hpp"
#include "pfou/estimator.hpp"
#include "pfou/quadrature.hpp"

using namespace pfou;

namespace {

ModelSpec model(std::vector<double> mu, double alpha, double h, ModelKind kind, BasisSpec basis) {
    Eigen::VectorXd m = Eigen::Map<Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
    return ModelSpec{DriftParams{m, alpha, Hurst(h)}, std::move(basis), kind};
}

ModelSpec constant_model(double mu, double alpha, double h, ModelKind kind = ModelKind::first_kind) {
    return model({mu}, alpha, h, kind, BasisSpec::fourier(1));
}

}  // namespace

TEST(IntegrateAgainstDx, Telescoping) {
    const SamplePath path = simulate_first_kind(constant_model(1.0, 1.0, 0.7), 3, 20, 5);
    EXPECT_NEAR(integrate_against_dx(path, [](double) { return 1.0; }), path.x.back(), 1e-12);
    EXPECT_EQ(integrate_x_dx(path), 0.5 * path.x.back() * path.x.back());
    // left sum + half the quadratic variation = X_n^2 / 2
    double qv = 0.0;
    for (std::size_t k = 0; k + 1 < path.x.size(); ++k) qv += std::pow(path.x[k + 1] - path.x[k], 2);
    EXPECT_NEAR(left_sum_x_dx(path) + 0.5 * qv, integrate_x_dx(path), 1e-10);
}

TEST(IntegrateAgainstDx, ZeroNoiseMatchesQuadrature) {
    const ModelSpec mdl = model({0.5, 1.0, -0.7}, 0.8, 0.7, ModelKind::first_kind, BasisSpec::fourier(3));
    const SamplePath path = PathSimulator(mdl, 2, 4000, {NoiseMode::off}).simulate(0);
    const DriftProfile prof(mdl.drift, mdl.basis);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto phi = [&](double t) { return mdl.basis.evaluate(i, t); };
        const double lhs = integrate_against_dx(path, phi);
        double rhs = 0.0;
        for (int period = 0; period < 2; ++period)
            rhs += quad::composite_gauss([&](double t) { return phi(t) * (prof.mean_drift(t) - 0.8 * prof.h(t)); },
                                         period, period + 1.0, 16, 32);
        EXPECT_NEAR(lhs, rhs, 2e-3) << i;
    }
}

TEST(Design, OrthonormalBasisGivesExactG) {
    const SamplePath path = simulate_first_kind(model({1.0, 0.5, 0.2}, 1.0, 0.7, ModelKind::first_kind,
                                                      BasisSpec::fourier(3)),
                                                7, 30, 1);
    const DesignMatrices d = assemble_design(path, BasisSpec::fourier(3));
    EXPECT_EQ(d.G, 7.0 * Eigen::MatrixXd::Identity(3, 3));
    EXPECT_GE(d.b, 0.0);
    EXPECT_TRUE((d.Lambda - d.a / 7.0).isZero(0.0));
    EXPECT_NEAR(d.gamma, 1.0 / (d.b / 7.0 - d.Lambda.squaredNorm()), 1e-12 * d.gamma);
}

TEST(Design, ZeroPathIsDegenerate) {
    SamplePath path = simulate_first_kind(constant_model(0.0, 1.0, 0.7), 2, 10, 1, NoiseMode::off);
    ASSERT_TRUE(std::all_of(path.x.begin(), path.x.end(), [](double v) { return v == 0.0; }));
    try {
        assemble_design(path, BasisSpec::fourier(1));
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("gamma undefined"), std::string::npos);
    }
}

TEST(Design, RejectsPartialPeriods) {
    SamplePath path = simulate_first_kind(constant_model(1.0, 1.0, 0.7), 2, 10, 1);
    path.x.pop_back();
    path.grid.points.pop_back();
    EXPECT_THROW(assemble_design(path, BasisSpec::fourier(1)), DomainError);
}

TEST(Design, BlockInverseIsExactInverse) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ModelSpec mdl = model({1.0, -0.5, 0.3}, 1.5, 0.65, seed % 2 ? ModelKind::second_kind : ModelKind::first_kind,
                                    BasisSpec::fourier(3));
        const SamplePath path = PathSimulator(mdl, 5, 20).simulate(seed);
        const DesignMatrices d = assemble_design(path, mdl.basis);
        const Eigen::MatrixXd prod = d.Q_inverse() * d.Q();
        EXPECT_TRUE(prod.isIdentity(1e-8)) << prod;
        // with G = n I the inverse has the closed form (1/n)[[I + g LL^T, g L], [g L^T, g]]
        Eigen::MatrixXd closed(4, 4);
        const double g = d.gamma;
        closed.topLeftCorner(3, 3) = Eigen::MatrixXd::Identity(3, 3) + g * d.Lambda * d.Lambda.transpose();
        closed.topRightCorner(3, 1) = g * d.Lambda;
        closed.bottomLeftCorner(1, 3) = g * d.Lambda.transpose();
        closed(3, 3) = g;
        EXPECT_TRUE((d.Q_inverse() * d.n).isApprox(closed, 1e-10));
    }
}

TEST(Design, CustomBasisUsesTrapezoid) {
    // sqrt2 cos sampled on 8 points is orthonormal under the periodic trapezoid on a 16-point grid
    std::vector<double> table(8);
    for (int j = 0; j < 8; ++j) table[static_cast<std::size_t>(j)] = 1.0;
    const BasisSpec b = BasisSpec::custom({table});
    const SamplePath path = simulate_first_kind(constant_model(1.0, 1.0, 0.7), 3, 16, 2);
    const DesignMatrices d = assemble_design(path, b);
    EXPECT_NEAR(d.G(0, 0), 3.0, 1e-12);
    EXPECT_TRUE(d.warnings.empty());
}

TEST(Estimate, ZeroNoiseRecoversTheta) {
    const SamplePath path = PathSimulator(constant_model(2.0, 0.5, 0.7), 10, 2000, {NoiseMode::off}).simulate(0);
    Eigen::VectorXd theta(2);
    theta << 2.0, 0.5;
    EstimatorOptions opt;
    opt.true_theta = theta;
    const Estimate est = estimate(path, BasisSpec::fourier(1), opt);
    EXPECT_LT((est.theta_hat - theta).cwiseAbs().maxCoeff(), 1e-2);
    ASSERT_TRUE(est.residual.has_value());
    // residual P - Q theta is pure discretization error on noise-free paths
    EXPECT_LT(est.residual->cwiseAbs().maxCoeff(), 1e-2 * 10);
    EXPECT_LT(est.crosscheck, 1e-8);
    // decomposition theta_hat = theta + Q^{-1} R
    EXPECT_TRUE((est.theta_hat - theta - est.design.Q_inverse() * *est.residual).isZero(1e-10));
}

TEST(Estimate, SolvesNormalEquations) {
    const ModelSpec mdl = model({1.0, 0.4, -0.2}, 1.0, 0.7, ModelKind::first_kind, BasisSpec::fourier(3));
    const SamplePath path = PathSimulator(mdl, 30, 40).simulate(8);
    for (auto integral : {StochasticIntegral::pathwise, StochasticIntegral::divergence}) {
        EstimatorOptions opt;
        opt.integral = integral;
        const Estimate est = estimate(path, mdl.basis, opt);
        const Eigen::VectorXd r = est.design.Q() * est.theta_hat - est.P;
        EXPECT_LT(r.norm(), 1e-10 * est.P.norm());
        EXPECT_TRUE(est.warnings.empty());
    }
}

TEST(Estimate, PermutingBasisPermutesMu) {
    std::vector<double> f1(32), f2(32);
    for (int j = 0; j < 32; ++j) {
        f1[static_cast<std::size_t>(j)] = 1.0;
        f2[static_cast<std::size_t>(j)] = std::sqrt(2.0) * std::cos(2.0 * M_PI * j / 32.0);
    }
    const BasisSpec b12 = BasisSpec::custom({f1, f2});
    const BasisSpec b21 = BasisSpec::custom({f2, f1});
    const ModelSpec mdl = model({1.0, 0.5}, 1.0, 0.7, ModelKind::first_kind, BasisSpec::fourier(2));
    const SamplePath path = PathSimulator(mdl, 20, 32).simulate(4);
    const Estimate e12 = estimate(path, b12);
    const Estimate e21 = estimate(path, b21);
    EXPECT_NEAR(e12.theta_hat(0), e21.theta_hat(1), 1e-10);
    EXPECT_NEAR(e12.theta_hat(1), e21.theta_hat(0), 1e-10);
    EXPECT_NEAR(e12.theta_hat(2), e21.theta_hat(2), 1e-10);
}

TEST(Estimate, DivergenceTraceMatchesExpectedLeftSum) {
    // E[sum x_k dN_k] over noise only equals the discrete trace
    const double h = 0.7, alpha = 1.0;
    const int n = 20, m = 20;
    const ModelSpec mdl = constant_model(0.0, alpha, h);
    const PathSimulator sim(mdl, n, m);
    const NoiseCovarianceTable table(ModelKind::first_kind, Hurst(h), 1.0 / m, static_cast<std::size_t>(n * m));
    double acc = 0.0;
    const int reps = 4000;
    double sq = 0.0;
    for (int r = 0; r < reps; ++r) {
        const SamplePath p = sim.simulate(static_cast<std::uint64_t>(r));
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < p.x.size(); ++k) s += p.x[k] * p.noise_increments[k];
        acc += s;
        sq += s * s;
    }
    const double mean = acc / reps;
    const double se = std::sqrt((sq / reps - mean * mean) / reps);
    EXPECT_NEAR(mean, table.trace(alpha, static_cast<std::size_t>(n * m)), 4.0 * se);
}

TEST(Estimate, SelfConsistentTraceIsAFixedPoint) {
    const ModelSpec mdl = constant_model(1.0, 1.0, 0.7, ModelKind::second_kind);
    const SamplePath path = PathSimulator(mdl, 40, 25).simulate(3);
    EstimatorOptions opt;
    opt.integral = StochasticIntegral::divergence;
    const Estimate est = estimate(path, mdl.basis, opt);
    EXPECT_NEAR(est.trace_alpha, est.theta_hat(1), 1e-9 * std::max(1.0, est.theta_hat(1)));
    opt.trace_alpha = 1.0;
    const Estimate oracle = estimate(path, mdl.basis, opt);
    EXPECT_EQ(oracle.trace_alpha, 1.0);
    EXPECT_THROW(
        {
            EstimatorOptions bad;
            bad.integral = StochasticIntegral::divergence;
            bad.noise_table = std::make_shared<NoiseCovarianceTable>(ModelKind::first_kind, Hurst(0.7), 0.04, 1000);
            estimate(path, mdl.basis, bad);
        },
        DomainError);
}

TEST(Estimate, ConsistencyMonteCarlo) {
    // first kind, H = 0.6, alpha = 1, mu = 1, 500 paths; divergence form with the true alpha in the trace
    const ModelSpec mdl = constant_model(1.0, 1.0, 0.6);
    const PathSimulator sim(mdl, 400, 50);
    auto table = std::make_shared<NoiseCovarianceTable>(ModelKind::first_kind, Hurst(0.6), 0.02, 20000);
    EstimatorOptions opt;
    opt.integral = StochasticIntegral::divergence;
    opt.trace_alpha = 1.0;
    opt.noise_table = table;
    const Eigen::Vector2d theta(1.0, 1.0);
    double err200 = 0.0, err400 = 0.0;
    const int reps = 500;
    for (int r = 0; r < reps; ++r) {
        const SamplePath p = sim.simulate(static_cast<std::uint64_t>(r));
        err200 += (estimate(p.prefix(200), mdl.basis, opt).theta_hat - theta).cwiseAbs().maxCoeff();
        err400 += (estimate(p, mdl.basis, opt).theta_hat - theta).cwiseAbs().maxCoeff();
    }
    err200 /= reps;
    err400 /= reps;
    RecordProperty("mean_err_200", std::to_string(err200));
    RecordProperty("mean_err_400", std::to_string(err400));
    EXPECT_LT(err400, err200);
    // errors shrink at the n^{H-1} rate: the scaled means agree to within 25%
    const double scaled200 = err200 * std::pow(200.0, 0.4), scaled400 = err400 * std::pow(400.0, 0.4);
    EXPECT_NEAR(scaled200 / scaled400, 1.0, 0.25);
    // the limit law of the mu error is N(0, n^{2H-2}), so the mean max-error is at least
    // E|N(0,1)| n^{H-1} = 0.798 n^{H-1} (0.096 at n = 200)
    EXPECT_GT(err200, std::sqrt(2.0 / M_PI) * std::pow(200.0, -0.4));
}
