#pragma once

#include "girsanov/continuum.hpp"
#include "girsanov/model.hpp"
#include "girsanov/transform.hpp"

#include <Eigen/Dense>

#include <array>

namespace girsanov {

/// Beurling-Deny parts of E(f,f).
struct FormValue {
    double continuous_part = 0.0;
    double jump_part = 0.0;
    double killing_part = 0.0;
    double total = 0.0;

    static FormValue from_parts(double continuous, double jump, double killing);
};

/// -(Q f, f)_mu, the generator side of every form identity.
double generator_energy(const Eigen::MatrixXd& generator, const Eigen::VectorXd& mu,
                        const Eigen::VectorXd& f);

/**
 * E(f,f) = sum over ORDERED pairs (f(y)-f(x))^2 J(x,y) + sum_x kappa(x) f(x)^2
 * with J = m q / 2, i.e. each unordered pair counts m(x) q(x,y) (f(y)-f(x))^2 once.
 */
FormValue base_form(const FiniteSymmetricModel& model, const Eigen::VectorXd& f);

/// Q_hat f = rho^{-1} [Q(rho f) - f Q rho], assembled column by column.
Eigen::MatrixXd transformed_generator(const FiniteSymmetricModel& model, const Eigen::VectorXd& rho);

/// Generator of the transformed chain built from N^Y and kappa^Y.
Eigen::MatrixXd transformed_generator(const FiniteSymmetricModel& model,
                                      const TransformSpec& transform);

/// e^{tQ} for a generator symmetric in L^2(mu), through the eigenvectors
/// of D^{1/2} Q D^{-1/2} with D = diag(mu).
Eigen::MatrixXd symmetric_semigroup(const Eigen::MatrixXd& generator, const Eigen::VectorXd& mu,
                                    double t);

/// E_hat(f,f) = sum over ordered pairs (f(x)-f(y))^2 rho(x) rho(y) J(x,y); no killing part.
FormValue transformed_form_rho(const FiniteSymmetricModel& model, const Eigen::VectorXd& rho,
                               const Eigen::VectorXd& f);

/// E^Y(f,f) = E(f,f) + int (f(y)-f(x))^2 nu(dx,dy), nu = phi J.
FormValue transformed_form_phi(const FiniteSymmetricModel& model, const PureJumpPhi& phi,
                               const Eigen::VectorXd& f);

/// E^Y(f,f) = int (f(x)-f(y))^2 J^Y + int f^2 kappa^Y for any transform.
FormValue transformed_form(const FiniteSymmetricModel& model, const TransformSpec& transform,
                           const Eigen::VectorXd& f);

struct ConservativenessReport {
    double max_row_sum = 0.0; // max |Q_hat 1|
    double energy_of_one = 0.0; // E_hat(1,1)

    bool ok(double tolerance = kExactTolerance) const
    {
        return max_row_sum <= tolerance && energy_of_one <= tolerance;
    }
};

ConservativenessReport conservativeness_check(const FiniteSymmetricModel& model,
                                              const Eigen::VectorXd& rho);

struct ContinuumFormResult {
    FormValue fine;    // mesh / 2
    FormValue coarse;  // mesh
    double relative_change = 0.0; // |fine - coarse| / |fine|
    double extrapolated = 0.0;    // Richardson, second order
    double error_estimate = 0.0;  // |extrapolated - fine|
    bool converged = false;
};

/**
 * E_hat(f,f) = 1/2 int |f'|^2 rho^2 dx
 *            + 1/2 int int (f(y)-f(x))^2 rho(x) rho(y) c / |x-y|^{1+alpha} dx dy
 * for d = 1 at mesh widths `mesh` and `mesh/2`.
 *
 * The jump part uses J = m N / 2. f must vanish outside `region`; rho may
 * not, the part of the y-integral outside the region is integrated along
 * the kernel substitution. Below |x-y| < 2 mesh the integrand is replaced
 * by f'(x)^2 rho(x)^2 |x-y|^2 c / |x-y|^{1+alpha}.
 *
 * converged is relative_change <= tolerance.
 */
ContinuumFormResult continuum_form_quadrature(const RealFunction& rho, const RealFunction& f,
                                              const JumpDiffusionModel& model, Interval region,
                                              double mesh, double tolerance = 1e-2);

/// Single-level evaluation behind continuum_form_quadrature.
FormValue continuum_form_at(const RealFunction& rho, const RealFunction& f,
                            const JumpDiffusionModel& model, Interval region, double mesh);

enum class DomainStatus { in_domain, not_in_domain, inconclusive };

struct DomainReport {
    DomainStatus status = DomainStatus::inconclusive;
    // continuous energy int rho^2 mu^c_<f>, jump energy against gamma J,
    // and the zero-order witness (L^2(kappa^Y) on chains, L^2(rho^2 m) on the continuum).
    std::array<double, 3> witnesses{};
    double l2_norm = 0.0; // int f^2 rho^2 dm

    bool in_domain() const { return status == DomainStatus::in_domain; }
};

DomainReport domain_membership(const FiniteSymmetricModel& model, const TransformSpec& transform,
                               const Eigen::VectorXd& f);

DomainReport domain_membership(const RealFunction& rho, const RealFunction& f,
                               const JumpDiffusionModel& model, Interval region, double mesh);

} // namespace girsanov
