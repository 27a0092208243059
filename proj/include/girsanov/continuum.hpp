#pragma once

#include "girsanov/model.hpp"
#include "girsanov/numeric.hpp"
#include "girsanov/path.hpp"
#include "girsanov/transform.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace girsanov {

using RealFunction = std::function<double(double)>;

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Central-difference derivatives with a step scaled to |x|.
double derivative(const RealFunction& f, double x);
double second_derivative(const RealFunction& f, double x);

/**
 * int_{|z| > eps} g(z) c / |z|^{1+alpha} dz for a bounded g on R (d = 1).
 *
 * The substitution u = |z|^{-alpha} turns the kernel into the constant
 * c / alpha on (0, eps^{-alpha}], so only g has to be resolved.
 */
double kernel_integral(const RealFunction& g, const JumpDiffusionModel& model, double eps);

/**
 * Girsanov transform of the one-dimensional jump diffusion by a strictly
 * positive smooth rho.
 *
 * The sampler realises the process with generator
 *   L_eps = (1 + sigma^2(eps))/2 d^2/dx^2 + int_{|z|>eps} [f(x+z) - f(x)] N(dz),
 * so the drift (L_eps rho)/rho is computed for that generator; this makes
 * Z^rho an exact martingale for the simulated law.
 */
class ContinuumRhoTransform {
public:
    ContinuumRhoTransform(const JumpDiffusionModel& model, RealFunction rho, double eps);

    /// Tabulates the drift on [lo, hi] for fast path evaluation.
    void tabulate(Interval range, std::size_t points);

    double rho(double x) const { return rho_(x); }
    double log_gradient(double x) const; // rho'/rho
    double drift(double x) const;        // (L_eps rho)/rho
    double jump_compensator(double x) const; // int_{|z|>eps} (rho(x+z)/rho(x) - 1) N(dz)

    const JumpDiffusionModel& model() const { return model_; }
    double eps() const { return eps_; }
    const RealFunction& rho_function() const { return rho_; }

private:
    double drift_direct(double x) const;

    JumpDiffusionModel model_;
    RealFunction rho_;
    double eps_;
    double diffusion_; // (1 + sigma^2(eps)) / 2
    std::shared_ptr<TabulatedFunction> table_;
};

/// Z^rho along a d = 1 diffusion path by the telescoping closed form.
MFTrace continuum_rho_mf(const DiffusionPath& path, const ContinuumRhoTransform& transform,
                         double t);

/**
 * Z^rho along a d = 1 diffusion path by Exp(M):
 *   exp(M_t - <M^c>_t / 2) prod (1 + dM) e^{-dM},
 * with M^c the Ito sum of rho'/rho against the continuous component,
 * <M^c> accumulated as (rho'/rho)^2 (1 + sigma^2) dt, and the compensated
 * jump sum of rho(X_s)/rho(X_{s-}) - 1.
 */
MFTrace continuum_rho_mf_incremental(const DiffusionPath& path,
                                     const ContinuumRhoTransform& transform, double t);

/// log Z^rho_t only (closed form), without building a trace.
double continuum_log_weight(const DiffusionPath& path, const ContinuumRhoTransform& transform,
                            double t);

enum class IntegrabilityStatus { finite, infinite, inconclusive };

struct IntegrabilityResult {
    IntegrabilityStatus status = IntegrabilityStatus::inconclusive;
    double worst_rate = 0.0;     // sup over sampled x of int |phi(x,y)| N(x,dy)
    double worst_estimate = 0.0; // t * worst_rate
    std::vector<double> worst_point;

    bool finite() const { return status == IntegrabilityStatus::finite; }
};

/**
 * Integrability gate for a jump transform on the stable model:
 *   int_{y != x} |phi(x,y)| c / |x-y|^{d+alpha} dy < infinity
 * at sample points of the box [lo, hi]^d, by adaptive quadrature over
 * dyadic radial shells along 2d axis directions (both ends of the radius
 * range are refined until the shell contributions decay or clearly do not).
 */
IntegrabilityResult integrability_check(const JumpDiffusionModel& model, const PairFunction& phi,
                                        std::span<const double> lo, std::span<const double> hi,
                                        double t, int samples_per_axis = 5);

} // namespace girsanov
