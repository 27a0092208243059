#include "girsanov/dirichlet.hpp"
#include "girsanov/errors.hpp"
#include "girsanov/montecarlo.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace girsanov;

namespace {

McOptions options(std::uint64_t seed, std::size_t paths, unsigned workers = 0)
{
    McOptions o;
    o.rng = {seed, 0};
    o.paths = paths;
    o.workers = workers;
    return o;
}

double semigroup_oracle(const Eigen::MatrixXd& generator, const Eigen::VectorXd& f, int x, double t)
{
    return (oracle::expm(generator, t) * f)(x);
}

} // namespace

TEST(Sampler, FrozenChainStaysPut)
{
    const FiniteSymmetricModel frozen(Eigen::VectorXd::Ones(2), Eigen::MatrixXd::Zero(2, 2),
                                      Eigen::VectorXd::Zero(2));
    PathRng rng(RngSpec{1, 0}, 0);
    const auto p = sample_finite_path(frozen, 1, 5.0, rng);
    EXPECT_TRUE(p.events().empty());
    EXPECT_FALSE(p.killed_at());
}

TEST(Sampler, HoldingTimeIsExponential)
{
    const auto model = oracle::chain3();
    const auto paths = sample_finite_paths(model, 1, 50.0, options(2, 20000));
    std::vector<double> holds;
    for (const auto& p : paths)
        holds.push_back(p.events().front().time);
    const auto r = EstimatorResult::from_samples(holds);
    EXPECT_NEAR(r.mean, 1.0 / 3.0, 4 * r.std_error);
}

TEST(Sampler, HeavyKillingDiesImmediately)
{
    const auto model = oracle::chain3(Eigen::Vector3d(1e3, 0, 0));
    const auto paths = sample_finite_paths(model, 0, 1.0, options(3, 10000));
    std::size_t dead = 0;
    for (const auto& p : paths)
        if (p.killed_at() && p.events().empty())
            ++dead;
    EXPECT_GT(static_cast<double>(dead) / 10000.0, 0.99);
}

TEST(Sampler, DeterministicAcrossWorkers)
{
    const auto model = oracle::chain3_killed();
    const auto a = sample_finite_paths(model, 0, 2.0, options(4, 3000, 1));
    const auto b = sample_finite_paths(model, 0, 2.0, options(4, 3000, 4));
    EXPECT_EQ(a, b);
}

TEST(Sampler, BrownianIncrements)
{
    const JumpDiffusionModel brownian(1, 1.0, 0.0);
    const std::vector<double> x0{0.0};
    PathRng rng(RngSpec{5, 0}, 0);
    const double dt = 1e-3;
    const auto p = sample_jump_diffusion_path(brownian, x0, 100.0, dt, 0.1, rng);
    ASSERT_EQ(p.jump_count(), 0u);
    const auto& c = p.continuous();
    std::vector<double> inc, sq;
    for (std::size_t i = 1; i < c.size(); ++i) {
        inc.push_back(c[i] - c[i - 1]);
        sq.push_back(inc.back() * inc.back());
    }
    ASSERT_EQ(inc.size(), 100000u);
    const auto m = EstimatorResult::from_samples(inc);
    EXPECT_NEAR(m.mean, 0.0, 4 * m.std_error);
    const auto v = EstimatorResult::from_samples(sq);
    EXPECT_NEAR(v.mean, dt, 4 * v.std_error);
}

TEST(Sampler, StableJumpIntensity)
{
    const JumpDiffusionModel model(1, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(model.jump_intensity(0.1), 20.0);
    const auto r = estimate_continuum_jump_rate(model, 1.0, 0.01, 0.1, options(6, 10000));
    EXPECT_NEAR(r.mean, 20.0, 4 * r.std_error);
}

TEST(Sampler, UnderpoweredWarning)
{
    const JumpDiffusionModel model(1, 1.0, 1.0);
    EXPECT_TRUE(jump_check_underpowered(model, 1e7, 1.0));
    EXPECT_FALSE(jump_check_underpowered(model, 0.1, 1.0));
}

TEST(Semigroup, RhoTransformMatchesExponential)
{
    const auto model = oracle::chain3();
    const Eigen::Vector3d f(0, 1, 0);
    const auto q_hat = transformed_generator(model, oracle::rho121());
    const auto r = estimate_transformed_semigroup(model, RhoTransform(oracle::rho121()), f, 0, 1.0,
                                                  options(7, 100000));
    EXPECT_TRUE(r.covers(semigroup_oracle(q_hat, f, 0, 1.0)));
}

TEST(Semigroup, IdentityTransformIsBaseSemigroup)
{
    const auto model = oracle::chain3();
    const Eigen::Vector3d f(0.5, 1, -1);
    const auto r = estimate_transformed_semigroup(model, RhoTransform(Eigen::VectorXd::Ones(3)), f, 2, 0.5,
                                                  options(8, 100000));
    EXPECT_NEAR(r.mean, semigroup_oracle(oracle::dense_generator(model.q(), model.k()), f, 2, 0.5),
                4 * r.std_error);
}

TEST(Semigroup, ZeroPhiKeepsKilling)
{
    const auto model = oracle::chain3_killed();
    const Eigen::Vector3d f(0.5, 1, -1);
    const auto r = estimate_transformed_semigroup(model, PureJumpPhi(Eigen::MatrixXd::Zero(3, 3)), f, 2, 0.5,
                                                  options(8, 100000));
    EXPECT_NEAR(r.mean, semigroup_oracle(oracle::dense_generator(model.q(), model.k()), f, 2, 0.5),
                4 * r.std_error);
}

TEST(Semigroup, UnitRhoRemovesKilling)
{
    // Q rho = -k for rho = 1, so Z = exp(int k) on survival and the killing disappears.
    const auto model = oracle::chain3_killed();
    const Eigen::Vector3d f(0.5, 1, -1);
    const auto r = estimate_transformed_semigroup(model, RhoTransform(Eigen::VectorXd::Ones(3)), f, 2, 0.5,
                                                  options(8, 100000));
    EXPECT_NEAR(r.mean, semigroup_oracle(oracle::dense_generator(model.q(), Eigen::VectorXd::Zero(3)), f, 2, 0.5),
                4 * r.std_error);
}

TEST(Semigroup, PhiTransformMatchesExponential)
{
    const auto model = oracle::chain3();
    const Eigen::Vector3d f(0, 1, 0);
    const Eigen::MatrixXd ny = (1.0 + oracle::phi3().array()) * model.q().array();
    for (int x = 0; x < 3; ++x) {
        const auto r = estimate_transformed_semigroup(model, PureJumpPhi(oracle::phi3()), f, x, 1.0,
                                                      options(9, 100000));
        EXPECT_NEAR(r.mean, semigroup_oracle(oracle::dense_generator(ny, model.k()), f, x, 1.0), 4 * r.std_error);
    }
}

TEST(Semigroup, Coverage)
{
    const auto model = oracle::chain3();
    const Eigen::Vector3d f(0, 1, 0);
    const double exact = semigroup_oracle(transformed_generator(model, oracle::rho121()), f, 0, 0.5);
    const auto covered = coverage_count(
        100, exact,
        [&](const RngSpec& spec) {
            McOptions o;
            o.rng = spec;
            o.paths = 2000;
            return estimate_transformed_semigroup(model, RhoTransform(oracle::rho121()), f, 0, 0.5, o);
        },
        RngSpec{10, 0});
    EXPECT_GE(covered, 88u);
}

TEST(Semigroup, DeterministicAcrossWorkers)
{
    const auto model = oracle::chain3();
    const Eigen::Vector3d f(0, 1, 0);
    const auto a = estimate_transformed_semigroup(model, RhoTransform(oracle::rho121()), f, 0, 1.0,
                                                  options(11, 5000, 1));
    const auto b = estimate_transformed_semigroup(model, RhoTransform(oracle::rho121()), f, 0, 1.0,
                                                  options(11, 5000, 3));
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(SymmetryGap, EqualFunctionsGiveExactZero)
{
    const Eigen::Vector3d f(0, 1, 0);
    const auto r = estimate_symmetry_gap(oracle::chain3(), RhoTransform(oracle::rho121()), f, f, 0.7,
                                         options(12, 1000));
    EXPECT_EQ(r.mean, 0.0);
    EXPECT_EQ(r.std_error, 0.0);
}

TEST(SymmetryGap, ExactGapIsZero)
{
    const auto model = oracle::chain3();
    const Eigen::Vector3d f(0, 1, 0), g(1, 0, 0), mu(1, 4, 1);
    const auto p = oracle::expm(transformed_generator(model, oracle::rho121()), 0.7);
    const double gap = ((p * f).array() * g.array() * mu.array()).sum() -
                       ((p * g).array() * f.array() * mu.array()).sum();
    EXPECT_LE(std::abs(gap), 1e-12);
}

TEST(SymmetryGap, MonteCarloCoversZero)
{
    const auto model = oracle::chain3();
    const Eigen::Vector3d f(0, 1, 0), g(1, 0, 0);
    EXPECT_TRUE(estimate_symmetry_gap(model, RhoTransform(oracle::rho121()), f, g, 0.7, options(13, 100000))
                    .covers(0.0));
    EXPECT_TRUE(estimate_symmetry_gap(model, PureJumpPhi(oracle::phi3()), f, g, 0.7, options(14, 100000))
                    .covers(0.0));
}

TEST(QuadraticForm, ConstantFunctionIsZero)
{
    const auto r = estimate_quadratic_form(oracle::chain3(), RhoTransform(oracle::rho121()),
                                           Eigen::VectorXd::Ones(3), 0.1, options(15, 1000));
    EXPECT_EQ(r.mean, 0.0);
}

TEST(QuadraticForm, MatchesFiniteTimeExpectation)
{
    // (1/t)(f - P_t f, f)_mu is what the statistic estimates without bias
    const auto model = oracle::chain3();
    const Eigen::Vector3d f(0, 1, 0), mu(1, 4, 1);
    const double t = 0.2;
    const auto p = oracle::expm(transformed_generator(model, oracle::rho121()), t);
    const double exact = ((f - p * f).array() * f.array() * mu.array()).sum() / t;
    const auto r = estimate_quadratic_form(model, RhoTransform(oracle::rho121()), f, t, options(16, 100000));
    EXPECT_NEAR(r.mean, exact, 4 * r.std_error);
}

TEST(QuadraticForm, KillingTermUnbiased)
{
    const auto model = oracle::chain3_killed();
    const Eigen::Vector3d f(0, 1, 0);
    const double t = 0.2;
    const auto p = oracle::expm(oracle::dense_generator(model.q(), model.k()), t);
    const double exact = ((f - p * f).array() * f.array() * model.m().array()).sum() / t;
    const auto r = estimate_quadratic_form(model, PureJumpPhi(Eigen::MatrixXd::Zero(3, 3)), f, t,
                                           options(17, 100000));
    EXPECT_NEAR(r.mean, exact, 4 * r.std_error);
}

TEST(QuadraticForm, PhiTrendTowardsThree)
{
    const auto model = oracle::chain3();
    const Eigen::Vector3d f(0, 1, 0);
    const std::vector<double> ts{0.2, 0.1, 0.05};
    const auto trend = quadratic_form_trend(model, PureJumpPhi(oracle::phi3()), f, ts, 3.0, options(18, 100000));
    ASSERT_EQ(trend.points.size(), 3u);
    EXPECT_TRUE(trend.monotone);
    // each point is unbiased for (1/t)(f - P^Y_t f, f)_m, which rises to 3 as t -> 0
    const Eigen::MatrixXd ny = (1.0 + oracle::phi3().array()) * model.q().array();
    const auto q_y = oracle::dense_generator(ny, model.k());
    double previous = 0.0;
    for (const auto& p : trend.points) {
        const double exact = ((f - oracle::expm(q_y, p.t) * f).array() * f.array()).sum() / p.t;
        EXPECT_NEAR(p.estimate.mean, exact, 4 * p.estimate.std_error) << "t = " << p.t;
        EXPECT_GT(exact, previous);
        EXPECT_LT(exact, 3.0);
        previous = exact;
    }
}

TEST(JumpRatio, TransformedKernel)
{
    const auto model = oracle::chain3();
    EXPECT_TRUE(estimate_jump_intensity_ratio(model, RhoTransform(oracle::rho121()), 0, 1, 1.0,
                                              options(19, 100000))
                    .covers(2.0));
    EXPECT_TRUE(estimate_jump_intensity_ratio(model, RhoTransform(Eigen::VectorXd::Ones(3)), 1, 2, 1.0,
                                              options(20, 100000))
                    .covers(2.0));
    EXPECT_TRUE(estimate_jump_intensity_ratio(model, PureJumpPhi(oracle::phi3()), 1, 2, 1.0,
                                              options(21, 100000))
                    .covers(1.0));
}

TEST(JumpRatio, UnreachablePairHasNoTransitions)
{
    const auto r = estimate_jump_intensity_ratio(oracle::chain3(), RhoTransform(oracle::rho121()), 0, 2, 1.0,
                                                 options(22, 2000));
    EXPECT_EQ(r.mean, 0.0);
}

TEST(Mass, ExactlyOneWithoutTransform)
{
    const auto r = estimate_mass(oracle::chain3(), RhoTransform(Eigen::VectorXd::Ones(3)), 0, 1.0,
                                 options(23, 1000));
    EXPECT_EQ(r.mean, 1.0);
    EXPECT_EQ(r.std_error, 0.0);
}

TEST(Mass, ConservedUnderRhoTransform)
{
    EXPECT_TRUE(estimate_mass(oracle::chain3(), RhoTransform(oracle::rho121()), 0, 1.0, options(24, 100000))
                    .covers(1.0));
    EXPECT_TRUE(estimate_mass(oracle::chain3_killed(), RhoTransform(oracle::rho121()), 0, 1.0,
                              options(25, 100000))
                    .covers(1.0));
}

TEST(WeightedFunctional, MatchesDirectSamplingOfTransformedChain)
{
    // E_x[Z_t G] under X equals E_x[G] under the transformed chain, G = number of jumps
    const auto model = oracle::chain3();
    const RhoTransform rho(oracle::rho121());
    const auto y = transformed_model(model, rho);
    const auto jumps = [](const ChainPath& p) { return static_cast<double>(p.events().size()); };
    const auto weighted = estimate_weighted_path_functional(model, rho, 0, 1.0, jumps, options(26, 100000));
    const auto direct = estimate_path_functional(y, 0, 1.0, jumps, options(27, 100000));
    const double se = std::hypot(weighted.std_error, direct.std_error);
    EXPECT_NEAR(weighted.mean, direct.mean, 4 * se);
}

TEST(Estimator, FromSamples)
{
    const std::vector<double> xs{1, 2, 3, 4};
    const auto r = EstimatorResult::from_samples(xs);
    EXPECT_DOUBLE_EQ(r.mean, 2.5);
    EXPECT_NEAR(r.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_EQ(r.n, 4u);
    EXPECT_NEAR(r.ci95[0], 2.5 - 1.96 * r.std_error, 1e-2 * r.std_error);
}

TEST(ContinuumMass, CloseToOne)
{
    const JumpDiffusionModel model(1, 1.0, 1.0);
    ContinuumRhoTransform tr(model, [](double x) { return 1 + 0.5 * std::exp(-x * x); }, 0.1);
    tr.tabulate({-12, 12}, 4801);
    const auto r = estimate_continuum_mass(tr, 0.0, 0.5, 1e-3, options(28, 4000));
    EXPECT_NEAR(r.mean, 1.0, std::max(4 * r.std_error, 0.01));
}
