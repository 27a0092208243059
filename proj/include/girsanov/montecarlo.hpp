#pragma once

#include "girsanov/continuum.hpp"
#include "girsanov/model.hpp"
#include "girsanov/path.hpp"
#include "girsanov/rng.hpp"
#include "girsanov/transform.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace girsanov {

struct EstimatorResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    std::array<double, 2> ci95{};

    static EstimatorResult from_samples(std::span<const double> samples);
    static EstimatorResult from_moments(double mean, double std_error, std::size_t n);

    bool covers(double value) const { return ci95[0] <= value && value <= ci95[1]; }
};

struct McOptions {
    RngSpec rng;
    std::size_t paths = 100000;
    unsigned workers = 0; // 0 = hardware concurrency
};

/// Gillespie simulation: exponential holding times with rate sum_y q(x,y) + k(x).
ChainPath sample_finite_path(const FiniteSymmetricModel& model, int x0, double horizon,
                             PathRng& rng);

/// Paths for indices [0, count) of the stream, in index order.
std::vector<ChainPath> sample_finite_paths(const FiniteSymmetricModel& model, int x0,
                                           double horizon, const McOptions& options);

/**
 * Euler grid with N(0, (1 + sigma^2(eps)) dt) increments per coordinate
 * plus compound-Poisson jumps of intensity Lambda(eps), radius law
 * proportional to r^{-1-alpha} on (eps, inf) and uniform direction.
 * The grid has ceil(horizon/dt) steps of width dt.
 */
DiffusionPath sample_jump_diffusion_path(const JumpDiffusionModel& model,
                                         std::span<const double> x0, double horizon, double dt,
                                         double eps, PathRng& rng);

/// True when Lambda(eps) * horizon < 1e-6 (a jump check would be underpowered).
bool jump_check_underpowered(const JumpDiffusionModel& model, double eps, double horizon);

/// E_x[Z_t f(X_t); t < zeta]
EstimatorResult estimate_transformed_semigroup(const FiniteSymmetricModel& model,
                                               const TransformSpec& transform,
                                               const Eigen::VectorXd& f, int x, double t,
                                               const McOptions& options);

/// (P_hat_t f, g)_mu - (f, P_hat_t g)_mu with initial states drawn from mu / mu(E);
/// both terms are evaluated on the same paths.
EstimatorResult estimate_symmetry_gap(const FiniteSymmetricModel& model,
                                      const TransformSpec& transform, const Eigen::VectorXd& f,
                                      const Eigen::VectorXd& g, double t,
                                      const McOptions& options);

/**
 * mu(E)/(2t) E_{mu/mu(E)}[Z_t ((f(X_t) - f(X_0))^2 + f(X_0)^2 1{X_t = Delta})].
 *
 * The killing indicator makes the statistic unbiased for (1/t)(f - P_t f, f)_mu
 * on chains with killing; it does not contribute under a rho-transform (Z = 0
 * after killing).
 */
EstimatorResult estimate_quadratic_form(const FiniteSymmetricModel& model,
                                        const TransformSpec& transform,
                                        const Eigen::VectorXd& f, double t,
                                        const McOptions& options);

struct TrendPoint {
    double t = 0.0;
    EstimatorResult estimate;
};

struct QuadraticFormTrend {
    std::vector<TrendPoint> points; // in the order of the requested t values
    bool monotone = false;          // estimates move monotonically towards `target`
};

QuadraticFormTrend quadratic_form_trend(const FiniteSymmetricModel& model,
                                        const TransformSpec& transform,
                                        const Eigen::VectorXd& f, std::span<const double> ts,
                                        double target, const McOptions& options);

/// Z-weighted x->y transition count over Z-weighted occupation time at x,
/// paths started at x. Ratio estimator with delta-method standard error.
EstimatorResult estimate_jump_intensity_ratio(const FiniteSymmetricModel& model,
                                              const TransformSpec& transform, int x, int y,
                                              double horizon, const McOptions& options);

/// E_x[Z_t; t < zeta]
EstimatorResult estimate_mass(const FiniteSymmetricModel& model, const TransformSpec& transform,
                              int x, double t, const McOptions& options);

/// E_x[G(path)] for paths sampled directly from a chain (used to compare
/// against the Z-weighted estimate under the original chain).
EstimatorResult estimate_path_functional(
    const FiniteSymmetricModel& model, int x, double t,
    const std::function<double(const ChainPath&)>& functional, const McOptions& options);

/// E_x[Z_t G(path)] under the original chain.
EstimatorResult estimate_weighted_path_functional(
    const FiniteSymmetricModel& model, const TransformSpec& transform, int x, double t,
    const std::function<double(const ChainPath&)>& functional, const McOptions& options);

/// Number of replications (each with its own stream) whose 95% CI covers `oracle`.
std::size_t coverage_count(std::size_t replications, double oracle,
                           const std::function<EstimatorResult(const RngSpec&)>& run,
                           const RngSpec& base);

/// Jumps per unit time of the stable sampler, one count per path.
EstimatorResult estimate_continuum_jump_rate(const JumpDiffusionModel& model, double horizon,
                                             double dt, double eps, const McOptions& options);

/**
 * Quadratic-form estimate of the rho-transformed continuum form (d = 1):
 *   |B|/(2t) E[rho(X_0)^2 Z_t ((f(X_t) - f(X_0))^2 + f(X_0)^2 1{X_t not in B})]
 * with X_0 uniform on B = region. The second term replaces the starting
 * points outside B by reversibility, so f must vanish outside B.
 */
EstimatorResult estimate_continuum_quadratic_form(const ContinuumRhoTransform& transform,
                                                  const RealFunction& f, Interval region,
                                                  double t, double dt,
                                                  const McOptions& options);

/// E_x[Z_t] for the continuum rho-transform (should be 1).
EstimatorResult estimate_continuum_mass(const ContinuumRhoTransform& transform, double x,
                                        double t, double dt, const McOptions& options);

} // namespace girsanov
