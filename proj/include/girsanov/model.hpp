#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace girsanov {

/// Index of the cemetery state. Every state function evaluates to 0 there.
inline constexpr int kCemetery = -1;

/// Absolute tolerance for exact identities on finite models.
inline constexpr double kExactTolerance = 1e-12;

/**
 * Reversible continuous-time Markov chain with killing.
 *
 * m is the symmetry measure, q the off-diagonal jump rates (the diagonal is
 * implied by the row sums and must be stored as zero), k the killing rate.
 * The Levy system is (q, H_t = t) and the killing measure is k*m.
 *
 * Construction checks structure and signs only; detailed balance is
 * reported by validate_symmetry() so asymmetric inputs can be diagnosed.
 */
class FiniteSymmetricModel {
public:
    FiniteSymmetricModel(Eigen::VectorXd m, Eigen::MatrixXd q, Eigen::VectorXd k);

    /// Chain with no killing.
    FiniteSymmetricModel(Eigen::VectorXd m, Eigen::MatrixXd q);

    int size() const { return static_cast<int>(m_.size()); }
    const Eigen::VectorXd& m() const { return m_; }
    const Eigen::MatrixXd& q() const { return q_; }
    const Eigen::VectorXd& k() const { return k_; }

    /// sum_y q(x,y) + k(x)
    double total_rate(int x) const;

    /// Dense generator Q with Q(x,x) = -sum_y q(x,y) - k(x).
    Eigen::MatrixXd generator() const;

    /// (Qf)(x) = sum_y q(x,y)(f(y)-f(x)) - k(x)f(x), evaluated without forming Q.
    Eigen::VectorXd apply_generator(const Eigen::VectorXd& f) const;

    bool conservative() const { return (k_.array() == 0.0).all(); }

    /// Throws StructuralError unless f has one entry per state.
    void require_state_function(const Eigen::VectorXd& f, const char* what) const;

private:
    Eigen::VectorXd m_;
    Eigen::MatrixXd q_;
    Eigen::VectorXd k_;
};

/**
 * Brownian motion (generator one-half Laplacian) plus an independent
 * rotationally symmetric alpha-stable process on R^d with Levy density
 * c / |z|^{d+alpha}. No killing.
 */
class JumpDiffusionModel {
public:
    JumpDiffusionModel(int d, double alpha, double c);

    int dimension() const { return d_; }
    double alpha() const { return alpha_; }
    double c() const { return c_; }

    /// Rate of jumps with |z| > eps: c * S_{d-1} * eps^{-alpha} / alpha.
    double jump_intensity(double eps) const;

    /// Per-coordinate variance rate of the jumps with |z| <= eps:
    /// c * S_{d-1} * eps^{2-alpha} / (d * (2-alpha)).
    double small_jump_variance(double eps) const;

private:
    int d_;
    double alpha_;
    double c_;
};

/// Surface area of the unit sphere in R^d.
double unit_sphere_area(int d);

/// Jump kernel plus the time clock H_t = t.
class LevySystemView {
public:
    explicit LevySystemView(const FiniteSymmetricModel& model) : q_(model.q()) {}

    /// N(x,{y}); zero on the diagonal and towards the cemetery (killing is
    /// carried separately by k).
    double kernel(int x, int y) const { return x == y ? 0.0 : q_(x, y); }

    /// dH_t / dt
    static constexpr double clock_rate() { return 1.0; }

private:
    Eigen::MatrixXd q_;
};

struct SymmetryViolation {
    int x = 0;
    int y = 0;
    double residual = 0.0; // |m(x)q(x,y) - m(y)q(y,x)|
};

struct SymmetryReport {
    std::vector<SymmetryViolation> violations; // sorted, worst first
    double worst_residual = 0.0;

    bool ok() const { return violations.empty(); }
};

/// Detailed-balance check to absolute tolerance `tolerance`.
SymmetryReport validate_symmetry(const FiniteSymmetricModel& model,
                                 double tolerance = kExactTolerance);

/// Throws InvalidModel naming the worst pair if detailed balance fails.
void require_symmetric(const FiniteSymmetricModel& model);

/// J(x,y) = m(x) q(x,y) / 2 over ordered pairs.
Eigen::MatrixXd jump_measure(const FiniteSymmetricModel& model);

/// kappa(x) = k(x) m(x)
Eigen::VectorXd killing_measure(const FiniteSymmetricModel& model);

/// c / |x-y|^{d+alpha}; DomainError when x == y.
double stable_kernel_density(std::span<const double> x, std::span<const double> y,
                             const JumpDiffusionModel& model);

/// (f, g)_mu = sum_x f(x) g(x) mu(x)
double inner_product(const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                     const Eigen::VectorXd& mu);

} // namespace girsanov
