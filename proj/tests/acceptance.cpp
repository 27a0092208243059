// Acceptance suite: one PASS/FAIL line per criterion.

#include "girsanov/continuum.hpp"
#include "girsanov/dirichlet.hpp"
#include "girsanov/montecarlo.hpp"
#include "girsanov/path.hpp"
#include "girsanov/transform.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace girsanov;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const char* title, double budget_seconds, const std::function<void(Outcome&)>& body)
{
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(out);
    } catch (const std::exception& e) {
        out.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.require(seconds < budget_seconds, "runtime budget");
    if (!out.pass)
        ++failures;
    std::printf("%s %d %s:%s (%.2f s, budget %.0f s)\n", out.pass ? "PASS" : "FAIL", id, title,
                out.detail.str().c_str(), seconds, budget_seconds);
    std::fflush(stdout);
}

McOptions mc(std::uint64_t seed, std::size_t paths)
{
    McOptions o;
    o.rng = {seed, 0};
    o.paths = paths;
    return o;
}

struct RandomCase {
    FiniteSymmetricModel model;
    Eigen::VectorXd rho;
};

// 50 models, n in 3..8, the first 25 with killing.
std::vector<RandomCase> random_cases()
{
    std::mt19937_64 gen(20240601);
    std::vector<RandomCase> cases;
    for (int i = 0; i < 50; ++i) {
        const int n = 3 + i % 6;
        auto model = oracle::random_model(gen, n, i < 25);
        auto rho = oracle::random_vector(gen, n, 0.2, 3.0);
        cases.push_back({std::move(model), std::move(rho)});
    }
    return cases;
}

Eigen::VectorXd rho_measure(const RandomCase& c) { return c.rho.array().square() * c.model.m().array(); }

std::string ci_text(const EstimatorResult& r)
{
    std::ostringstream s;
    s.precision(6);
    s << r.mean << " [" << r.ci95[0] << ", " << r.ci95[1] << "]";
    return s.str();
}

} // namespace

int main()
{
    const auto cases = random_cases();
    const auto chain3 = oracle::chain3();
    const auto chain3_killed = oracle::chain3_killed();
    const RhoTransform rho121(oracle::rho121());
    const Eigen::Vector3d f010(0, 1, 0);

    criterion(1, "transformed generator consistency", 1.0, [&](Outcome& out) {
        double worst = 0.0;
        for (const auto& c : cases) {
            const auto q_hat = transformed_generator(c.model, c.rho);
            for (int x = 0; x < c.model.size(); ++x)
                for (int y = 0; y < c.model.size(); ++y) {
                    if (x == y)
                        continue;
                    const double expected = c.rho(y) / c.rho(x) * c.model.q()(x, y);
                    const double err = std::abs(q_hat(x, y) - expected);
                    worst = std::max(worst, expected == 0.0 ? err : err / std::abs(expected));
                }
        }
        out.detail << " worst relative error " << worst;
        out.require(worst <= 1e-12, "entrywise 1e-12");
    });

    criterion(2, "symmetry of the transformed process", 30.0, [&](Outcome& out) {
        double worst = 0.0;
        for (const auto& c : cases) {
            const Eigen::MatrixXd flux = rho_measure(c).asDiagonal() * transformed_generator(c.model, c.rho);
            worst = std::max(worst, (flux - flux.transpose()).cwiseAbs().maxCoeff() /
                                        std::max(1.0, flux.cwiseAbs().maxCoeff()));
        }
        const auto gap = estimate_symmetry_gap(chain3, rho121, f010, Eigen::Vector3d(1, 0, 0), 0.7,
                                               mc(2, 100000));
        out.detail << " worst asymmetry " << worst << "; MC gap " << ci_text(gap);
        out.require(worst <= 1e-12, "rho^2 m symmetry");
        out.require(gap.covers(0.0), "gap CI contains 0");
    });

    criterion(3, "Dirichlet form identity", 1.0, [&](Outcome& out) {
        std::mt19937_64 gen(33);
        double worst = 0.0;
        for (const auto& c : cases) {
            const auto q_hat = transformed_generator(c.model, c.rho);
            const Eigen::VectorXd mu = rho_measure(c);
            for (int j = 0; j < 200; ++j) {
                const auto f = oracle::random_vector(gen, c.model.size(), -3.0, 3.0);
                const double e = transformed_form_rho(c.model, c.rho, f).total;
                const double g = -((q_hat * f).array() * f.array() * mu.array()).sum();
                worst = std::max(worst, std::abs(e - g) / std::max(1.0, std::abs(e)));
            }
        }
        const double witness = transformed_form_rho(chain3, rho121.rho(), f010).total;
        out.detail << " worst scaled residual " << worst << "; CHAIN3 witness " << witness;
        out.require(worst <= 1e-12, "form vs generator 1e-12");
        out.require(std::abs(witness - 6.0) <= 1e-12, "witness 6");
    });

    criterion(4, "conservativeness", 30.0, [&](Outcome& out) {
        double row = 0.0, energy = 0.0, killing = 0.0;
        int killed = 0;
        for (const auto& c : cases) {
            const auto r = conservativeness_check(c.model, c.rho);
            row = std::max(row, r.max_row_sum);
            energy = std::max(energy, r.energy_of_one);
            killing = std::max(killing, transformed_killing(c.model, RhoTransform(c.rho)).cwiseAbs().maxCoeff());
            killed += c.model.k().maxCoeff() > 0.0 ? 1 : 0;
        }
        const auto mass = estimate_mass(chain3_killed, rho121, 0, 1.0, mc(4, 100000));
        out.detail << " max|Q^1| " << row << ", E^(1,1) " << energy << ", max kappa^ " << killing
                   << " over " << killed << " killed models; mass " << ci_text(mass);
        out.require(row <= 1e-12 && energy <= 1e-12, "row sums and E^(1,1)");
        out.require(killing == 0.0, "kappa^ = 0");
        out.require(killed >= 25, "25 models with killing");
        out.require(mass.covers(1.0), "mass CI contains 1");
    });

    criterion(5, "pure-jump transform identities", 10.0, [&](Outcome& out) {
        std::mt19937_64 gen(55);
        double form = 0.0, gam = 0.0, split = 0.0, round = 0.0;
        for (const auto& c : cases) {
            const int n = c.model.size();
            const PureJumpPhi phi(oracle::random_phi(gen, n, -0.9, 3.0));
            const Eigen::MatrixXd ny = (1.0 + phi.phi().array()) * c.model.q().array();
            const auto q_y = oracle::dense_generator(ny, c.model.k());
            for (int j = 0; j < 20; ++j) {
                const auto f = oracle::random_vector(gen, n, -3.0, 3.0);
                const double e = transformed_form_phi(c.model, phi, f).total;
                const double g = -((q_y * f).array() * f.array() * c.model.m().array()).sum();
                form = std::max(form, std::abs(e - g) / std::max(1.0, std::abs(e)));
            }
            const auto spec = general_from_rho(c.model, RhoTransform(c.rho));
            const auto gm = gamma(c.model, c.rho, spec.phi());
            const auto j = jump_measure(c.model);
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    if (j(x, y) > 0.0)
                        gam = std::max(gam, std::abs(gm(x, y) - gm(y, x)));
            const auto back = inverse_transform(inverse_transform(phi.phi()));
            round = std::max(round, (back - phi.phi()).cwiseAbs().maxCoeff());
        }
        const PureJumpPhi phi(oracle::phi3());
        const auto paths = sample_finite_paths(chain3, 0, 1.0, mc(5, 1000));
        for (const auto& p : paths) {
            const auto z = pure_jump_mf(p, phi, chain3, 1.0);
            const auto s = split_mf(p, phi, chain3, 1.0);
            for (std::size_t i = 0; i < z.size(); ++i)
                split = std::max(split, std::abs(s.plus.z(i) * s.minus.z(i) - z.z(i)) / std::max(1.0, z.z(i)));
        }
        out.detail << " (a) " << form << " (b) " << gam << " (c) " << split << " (d) " << round;
        out.require(form <= 1e-12, "(a) E^Y identity");
        out.require(gam <= 1e-10, "(b) gamma symmetry");
        out.require(split <= 1e-12, "(c) Z+ Z- = Z");
        out.require(round <= 1e-14, "(d) inverse round trip");
    });

    criterion(6, "pathwise time-reversal identities", 5.0, [&](Outcome& out) {
        std::mt19937_64 gen(66);
        const auto paths = sample_finite_paths(chain3, 0, 1.0, mc(6, 1000));
        double reversal = 0.0, even = 0.0, lz = 0.0, lz_int = 0.0;
        std::uniform_int_distribution<int> small(-5, 5);
        for (const auto& p : paths) {
            reversal = std::max(reversal, reversal_identity_residual(p, rho121, chain3, 1.0));
            const auto f = oracle::random_vector(gen, 3, -2.0, 2.0);
            even = std::max(even, evenness_residual(p, f, 1.0));
            lz = std::max(lz, lyons_zheng_residual(p, f, chain3, 1.0));
            // integer-valued u: every partial sum is exact, so the residual is exactly 0
            const Eigen::Vector3d u(small(gen), small(gen), small(gen));
            lz_int = std::max(lz_int, lyons_zheng_residual(p, u, chain3, 1.0));
        }
        out.detail << " reversal " << reversal << ", evenness " << even << ", forward-backward " << lz
                   << " (integer u: " << lz_int << ")";
        out.require(reversal <= 1e-12, "reversal identity");
        out.require(even <= 1e-12, "evenness");
        out.require(lz <= 1e-12, "forward-backward residual 0 up to rounding");
        out.require(lz_int == 0.0, "forward-backward residual exactly 0 for integer u");
    });

    criterion(7, "semigroup Monte Carlo vs matrix exponential", 300.0, [&](Outcome& out) {
        const PureJumpPhi phi(oracle::phi3());
        const auto q_rho = transformed_generator(chain3, rho121.rho());
        const Eigen::MatrixXd ny = (1.0 + phi.phi().array()) * chain3.q().array();
        const auto q_phi = oracle::dense_generator(ny, chain3.k());
        struct Case {
            const char* name;
            TransformSpec transform;
            Eigen::MatrixXd generator;
        };
        const std::vector<Case> all{{"rho", rho121, q_rho}, {"phi", phi, q_phi}};
        std::uint64_t seed = 70;
        for (const auto& c : all)
            for (double t : {0.5, 1.0}) {
                const double exact = (oracle::expm(c.generator, t) * f010)(0);
                const auto r = estimate_transformed_semigroup(chain3, c.transform, f010, 0, t, mc(seed++, 100000));
                out.detail << " " << c.name << "@" << t << ": " << ci_text(r) << " vs " << exact << ";";
                out.require(r.covers(exact), std::string(c.name) + " CI");
            }
        for (const auto& c : all) {
            const double exact = (oracle::expm(c.generator, 1.0) * f010)(0);
            const auto covered = coverage_count(
                100, exact,
                [&](const RngSpec& spec) {
                    McOptions o;
                    o.rng = spec;
                    o.paths = 10000;
                    return estimate_transformed_semigroup(chain3, c.transform, f010, 0, 1.0, o);
                },
                RngSpec{seed++, 0});
            out.detail << " " << c.name << " coverage " << covered << "/100;";
            out.require(covered >= 90, std::string(c.name) + " coverage >= 90");
        }
    });

    criterion(8, "quadratic-form limit", 300.0, [&](Outcome& out) {
        const std::vector<double> ts{0.2, 0.1, 0.05};
        const double target = transformed_form_rho(chain3, rho121.rho(), f010).total;
        const auto trend = quadratic_form_trend(chain3, rho121, f010, ts, target, mc(8, 1000000));
        for (const auto& p : trend.points)
            out.detail << " t=" << p.t << ": " << ci_text(p.estimate) << ";";
        const auto& last = trend.points.back().estimate;
        const double extrapolated = 2.0 * last.mean - trend.points[1].estimate.mean;
        out.detail << " linear extrapolation to t=0 from the last two: " << extrapolated;
        out.require(trend.monotone, "monotone towards 6");
        out.require(last.ci95[0] >= 0.9 * target && last.ci95[1] <= 1.1 * target, "t=0.05 CI within 10% of 6");
    });

    criterion(9, "continuum smoke test", 600.0, [&](Outcome& out) {
        const JumpDiffusionModel model(1, 1.0, 1.0);
        const auto rate = estimate_continuum_jump_rate(model, 1.0, 1e-3, 0.1, mc(91, 10000));
        const double lambda = model.jump_intensity(0.1);
        out.detail << " (a) " << ci_text(rate) << " vs " << lambda << ";";
        out.require(std::abs(rate.mean - lambda) <= 4.0 * rate.std_error, "(a) jump intensity within 4 sigma");

        const RealFunction rho = [](double x) { return 1.0 + 0.5 * std::exp(-x * x); };
        const RealFunction f = [](double x) { return std::exp(-x * x); };
        const Interval region{-8.0, 8.0};
        const auto q = continuum_form_quadrature(rho, f, model, region, 0.02);
        out.detail << " (b) mesh " << q.coarse.total << ", mesh/2 " << q.fine.total << ", change "
                   << q.relative_change << ";";
        out.require(q.relative_change <= 0.01, "(b) mesh halving within 1%");

        ContinuumRhoTransform transform(model, rho, 0.01);
        transform.tabulate({-12.0, 12.0}, 4801);
        const auto est = estimate_continuum_quadratic_form(transform, f, region, 0.05, 1e-3, mc(93, 100000));
        const double rel = std::abs(est.mean - q.extrapolated) / q.extrapolated;
        out.detail << " (c) " << ci_text(est) << " vs quadrature " << q.extrapolated << ", relative " << rel;
        out.require(rel <= 0.15, "(c) within 15% of the quadrature value");
    });

    std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "SOME FAILED", failures);
    return failures == 0 ? 0 : 1;
}
