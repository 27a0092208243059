#include "girsanov/dirichlet.hpp"
#include "girsanov/errors.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace girsanov;

namespace {

double mu_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& mu)
{
    return (a.array() * b.array() * mu.array()).sum();
}

JumpDiffusionModel stable1() { return JumpDiffusionModel(1, 1.0, 1.0); }

} // namespace

TEST(BaseForm, Chain3)
{
    const Eigen::Vector3d f(0, 1, 0);
    const auto v = base_form(oracle::chain3(), f);
    EXPECT_DOUBLE_EQ(v.jump_part, 3.0);
    EXPECT_DOUBLE_EQ(v.total, 3.0);
    EXPECT_DOUBLE_EQ(v.killing_part, 0.0);
    const auto model = oracle::chain3();
    EXPECT_NEAR(generator_energy(model.generator(), model.m(), f), 3.0, 1e-14);
    EXPECT_EQ(base_form(model, Eigen::VectorXd::Constant(3, 4.0)).total, 0.0);
    const auto killed = base_form(oracle::chain3_killed(), f);
    EXPECT_DOUBLE_EQ(killed.killing_part, 1.0);
    EXPECT_DOUBLE_EQ(killed.total, 4.0);
}

TEST(BaseForm, MatchesOracleEnergy)
{
    std::mt19937_64 gen(101);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + trial % 6;
        const auto model = oracle::random_model(gen, n, trial % 2 == 1);
        const auto f = oracle::random_vector(gen, n, -2.0, 2.0);
        const double expected = oracle::chain_energy(model.m(), model.q(), model.k(), f);
        EXPECT_LE(oracle::rel_diff(base_form(model, f).total, expected), 1e-12);
    }
}

TEST(TransformedGenerator, Chain3)
{
    const auto model = oracle::chain3();
    Eigen::Matrix3d expected;
    expected << -2, 2, 0,
                0.5, -1.5, 1,
                0, 4, -4;
    const auto q_hat = transformed_generator(model, oracle::rho121());
    EXPECT_LE((q_hat - expected).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((q_hat * Eigen::VectorXd::Ones(3)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((transformed_generator(model, Eigen::VectorXd::Ones(3)) - model.generator()).cwiseAbs().maxCoeff(),
              1e-15);
    EXPECT_THROW(transformed_generator(model, Eigen::Vector3d(1, 0, 1)), InvalidTransform);
}

TEST(TransformedGenerator, AgreesWithStructureRoute)
{
    std::mt19937_64 gen(202);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + trial % 6;
        const auto model = oracle::random_model(gen, n, trial % 2 == 0);
        const auto rho = oracle::random_vector(gen, n, 0.2, 3.0);
        const auto direct = transformed_generator(model, rho);
        const auto structural = transformed_generator(model, TransformSpec{RhoTransform(rho)});
        const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
        EXPECT_LE((direct - structural).cwiseAbs().maxCoeff(), 1e-12 * scale);
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                if (x != y)
                    EXPECT_LE(oracle::rel_diff(direct(x, y), rho(y) / rho(x) * model.q()(x, y)), 1e-12);
    }
}

TEST(TransformedGenerator, SelfAdjointInRhoSquaredM)
{
    std::mt19937_64 gen(303);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + trial % 6;
        const auto model = oracle::random_model(gen, n, trial % 2 == 0);
        const auto rho = oracle::random_vector(gen, n, 0.2, 3.0);
        const Eigen::VectorXd mu = rho.array().square() * model.m().array();
        const Eigen::MatrixXd flux = mu.asDiagonal() * transformed_generator(model, rho);
        EXPECT_LE((flux - flux.transpose()).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, flux.cwiseAbs().maxCoeff()));
    }
}

TEST(SymmetricSemigroup, MatchesPade)
{
    std::mt19937_64 gen(404);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial % 6;
        const auto model = oracle::random_model(gen, n, trial % 2 == 0);
        const auto q = oracle::dense_generator(model.q(), model.k());
        for (double t : {0.1, 1.0, 3.0})
            EXPECT_LE((symmetric_semigroup(q, model.m(), t) - oracle::expm(q, t)).cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(TransformedForm, Chain3Rho)
{
    const auto model = oracle::chain3();
    const Eigen::Vector3d f(0, 1, 0);
    const auto v = transformed_form_rho(model, oracle::rho121(), f);
    EXPECT_NEAR(v.total, 6.0, 1e-14);
    EXPECT_EQ(v.killing_part, 0.0);
    const Eigen::Vector3d mu(1, 4, 1);
    EXPECT_NEAR(generator_energy(transformed_generator(model, oracle::rho121()), mu, f), 6.0, 1e-14);
    EXPECT_NEAR(transformed_form(model, RhoTransform(oracle::rho121()), f).total, 6.0, 1e-14);
    EXPECT_EQ(transformed_form_rho(model, Eigen::VectorXd::Ones(3), f).total, base_form(model, f).total);
    EXPECT_NEAR(transformed_form_rho(model, oracle::rho121(), Eigen::VectorXd::Constant(3, 2.0)).total, 0.0, 1e-15);
}

TEST(TransformedForm, Chain3Phi)
{
    const auto model = oracle::chain3();
    const Eigen::Vector3d f(0, 1, 0);
    EXPECT_NEAR(transformed_form_phi(model, PureJumpPhi(oracle::phi3()), f).total, 3.0, 1e-14);
    EXPECT_NEAR(transformed_form(model, PureJumpPhi(oracle::phi3()), f).total, 3.0, 1e-14);
    EXPECT_NEAR(generator_energy(transformed_generator(model, PureJumpPhi(oracle::phi3())), model.m(), f), 3.0,
                1e-14);
    EXPECT_EQ(transformed_form_phi(model, PureJumpPhi(Eigen::MatrixXd::Zero(3, 3)), f).total,
              base_form(model, f).total);
}

TEST(TransformedForm, ConstantPhiScales)
{
    std::mt19937_64 gen(505);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + trial % 6;
        const auto model = oracle::random_model(gen, n, false);
        const auto f = oracle::random_vector(gen, n, -1.0, 1.0);
        const double c0 = 0.7;
        Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(n, n, c0);
        phi.diagonal().setZero();
        EXPECT_LE(oracle::rel_diff(transformed_form_phi(model, PureJumpPhi(phi), f).total,
                                   (1 + c0) * base_form(model, f).total),
                  1e-12);
    }
}

TEST(TransformedForm, RhoIdentityOnRandomFunctions)
{
    std::mt19937_64 gen(606);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + trial % 6;
        const auto model = oracle::random_model(gen, n, trial % 2 == 0);
        const auto rho = oracle::random_vector(gen, n, 0.2, 3.0);
        const Eigen::VectorXd mu = rho.array().square() * model.m().array();
        const auto q_hat = transformed_generator(model, rho);
        for (int j = 0; j < 200; ++j) {
            const auto f = oracle::random_vector(gen, n, -3.0, 3.0);
            const double e = transformed_form_rho(model, rho, f).total;
            EXPECT_LE(std::abs(e + mu_inner(q_hat * f, f, mu)), 1e-12 * std::max(1.0, std::abs(e)));
        }
    }
}

TEST(TransformedForm, PhiIdentityOnRandomFunctions)
{
    std::mt19937_64 gen(707);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + trial % 6;
        const auto model = oracle::random_model(gen, n, trial % 2 == 0);
        const PureJumpPhi phi(oracle::random_phi(gen, n, -0.9, 3.0));
        // generator of Y written out from its kernel (1 + phi) q and unchanged killing
        const Eigen::MatrixXd ny = (1.0 + phi.phi().array()) * model.q().array();
        const auto q_y = oracle::dense_generator(ny, model.k());
        for (int j = 0; j < 20; ++j) {
            const auto f = oracle::random_vector(gen, n, -3.0, 3.0);
            const double e = transformed_form_phi(model, phi, f).total;
            EXPECT_LE(std::abs(e + mu_inner(q_y * f, f, model.m())), 1e-12 * std::max(1.0, std::abs(e)));
            EXPECT_LE(std::abs(e - transformed_form(model, phi, f).total), 1e-12 * std::max(1.0, std::abs(e)));
        }
    }
}

TEST(TransformedForm, ParallelogramAndBounds)
{
    std::mt19937_64 gen(808);
    const auto model = oracle::random_model(gen, 6, true);
    const auto rho = oracle::random_vector(gen, 6, 0.5, 2.0);
    const double lo = rho.minCoeff(), hi = rho.maxCoeff();
    for (int j = 0; j < 50; ++j) {
        const auto f = oracle::random_vector(gen, 6, -1.0, 1.0);
        const auto g = oracle::random_vector(gen, 6, -1.0, 1.0);
        auto e = [&](const Eigen::VectorXd& h) { return transformed_form_rho(model, rho, h).total; };
        EXPECT_NEAR(e(f + g) + e(f - g), 2 * e(f) + 2 * e(g), 1e-12 * (1 + e(f) + e(g)));
        // rho(x) rho(y) lies between min^2 and max^2 on every charged pair
        const double jump = base_form(model, f).jump_part;
        EXPECT_GE(e(f), lo * lo * jump * (1 - 1e-12));
        EXPECT_LE(e(f), hi * hi * jump * (1 + 1e-12));
    }
}

TEST(Conservativeness, Chain3)
{
    const auto plain = conservativeness_check(oracle::chain3(), oracle::rho121());
    EXPECT_TRUE(plain.ok());
    EXPECT_LE(plain.max_row_sum, 1e-14);
    EXPECT_TRUE(conservativeness_check(oracle::chain3_killed(), oracle::rho121()).ok());
    EXPECT_TRUE(conservativeness_check(oracle::chain3(), Eigen::VectorXd::Ones(3)).ok());
}

TEST(Conservativeness, RandomModelsWithKilling)
{
    std::mt19937_64 gen(909);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 3 + trial % 6;
        const auto model = oracle::random_model(gen, n, trial < 25);
        const auto rho = oracle::random_vector(gen, n, 0.2, 3.0);
        const auto report = conservativeness_check(model, rho);
        EXPECT_LE(report.max_row_sum, 1e-12);
        EXPECT_LE(report.energy_of_one, 1e-12);
    }
}

TEST(ContinuumForm, ConstantFunctionIsZero)
{
    const RealFunction rho = [](double x) { return 1 + 0.5 * std::exp(-x * x); };
    const auto r = continuum_form_quadrature(rho, [](double) { return 0.0; }, stable1(), {-8, 8}, 0.05);
    EXPECT_EQ(r.fine.total, 0.0);
    EXPECT_EQ(r.coarse.total, 0.0);
}

TEST(ContinuumForm, DiffusionPartClosedForm)
{
    // 1/2 int (f')^2 dx = 1/2 * 4 int x^2 e^{-2x^2} dx = sqrt(pi/2) / 2
    const RealFunction one = [](double) { return 1.0; };
    const RealFunction f = [](double x) { return std::exp(-x * x); };
    const auto v = continuum_form_at(one, f, stable1(), {-8, 8}, 0.01);
    EXPECT_NEAR(v.continuous_part, 0.5 * std::sqrt(M_PI / 2) , 1e-6);
}

TEST(ContinuumForm, JumpPartClosedFormForRhoOne)
{
    // alpha = 1, c = 1: 1/2 int int (f(y)-f(x))^2 / |x-y|^2 = 1/2 * 2 pi int |xi| |f^(xi)|^2 dxi / (2 pi)
    // with f = e^{-x^2}: int (f(x+z)-f(x))^2 dx = 2 sqrt(pi/2) (1 - e^{-z^2/2}),
    // so the part is sqrt(pi/2) int (1 - e^{-z^2/2}) / z^2 dz = sqrt(pi/2) sqrt(2 pi) = pi.
    const RealFunction one = [](double) { return 1.0; };
    const RealFunction f = [](double x) { return std::exp(-x * x); };
    const auto r = continuum_form_quadrature(one, f, stable1(), {-8, 8}, 0.02);
    EXPECT_NEAR(r.extrapolated - r.fine.continuous_part, M_PI, 2e-3 * M_PI);
}

TEST(ContinuumForm, MeshStability)
{
    const RealFunction rho = [](double x) { return 1 + 0.5 * std::exp(-x * x); };
    const RealFunction f = [](double x) { return std::exp(-x * x); };
    const auto r = continuum_form_quadrature(rho, f, stable1(), {-8, 8}, 0.02);
    EXPECT_TRUE(r.converged);
    EXPECT_LT(r.relative_change, 0.01);
    EXPECT_GT(r.fine.total, 0.0);
    EXPECT_GT(r.fine.jump_part, r.fine.continuous_part);
}

TEST(ContinuumForm, RejectsBadAlpha)
{
    EXPECT_THROW(JumpDiffusionModel(1, 2.0, 1.0), InvalidModel);
}

TEST(Domain, Chain)
{
    const Eigen::Vector3d f(0, 1, 0);
    EXPECT_TRUE(domain_membership(oracle::chain3(), RhoTransform(oracle::rho121()), f).in_domain());
    const auto killed = domain_membership(oracle::chain3_killed(), PureJumpPhi(oracle::phi3()), f);
    EXPECT_TRUE(killed.in_domain());
    EXPECT_DOUBLE_EQ(killed.witnesses[2], 1.0);
    EXPECT_TRUE(std::isfinite(killed.witnesses[1]));
}

TEST(Domain, Continuum)
{
    const RealFunction rho = [](double x) { return 1 + 0.5 * std::exp(-x * x); };
    const RealFunction f = [](double x) { return std::abs(x) < 1 ? std::pow(1 - x * x, 3) : 0.0; };
    const auto report = domain_membership(rho, f, stable1(), {-4, 4}, 0.02);
    EXPECT_TRUE(report.in_domain());
    for (double w : report.witnesses)
        EXPECT_TRUE(std::isfinite(w));
    EXPECT_GT(report.l2_norm, 0.0);
}
