#pragma once

#include "girsanov/model.hpp"
#include "girsanov/path.hpp"

#include <Eigen/Dense>

#include <optional>
#include <variant>
#include <vector>

namespace girsanov {

/// Girsanov transform driven by a strictly positive rho (h-transform type).
class RhoTransform {
public:
    explicit RhoTransform(Eigen::VectorXd rho);

    const Eigen::VectorXd& rho() const { return rho_; }

    friend bool operator==(const RhoTransform&, const RhoTransform&) = default;

private:
    Eigen::VectorXd rho_;
};

/// Pure-jump transform: symmetric phi > -1 with zero diagonal and phi(x, Delta) = 0.
class PureJumpPhi {
public:
    explicit PureJumpPhi(Eigen::MatrixXd phi);

    const Eigen::MatrixXd& phi() const { return phi_; }

    friend bool operator==(const PureJumpPhi&, const PureJumpPhi&) = default;

private:
    Eigen::MatrixXd phi_;
};

/**
 * General multiplicative functional Exp(M - A).
 *
 * M has jumps phi(X_{s-}, X_s) (phi_cemetery(x) for the killing jump) and a
 * continuous part with density mc_integrand. A has rate a_rate against the
 * clock. phi >= -1; a jump with phi = -1 sends Z to zero.
 *
 * On a pure-jump chain there is no continuous martingale, so mc_integrand
 * must vanish there.
 */
class GeneralMF {
public:
    GeneralMF(Eigen::VectorXd mc_integrand, Eigen::VectorXd a_rate, Eigen::MatrixXd phi,
              Eigen::VectorXd phi_cemetery);

    const Eigen::VectorXd& mc_integrand() const { return mc_integrand_; }
    const Eigen::VectorXd& a_rate() const { return a_rate_; }
    const Eigen::MatrixXd& phi() const { return phi_; }
    const Eigen::VectorXd& phi_cemetery() const { return phi_cemetery_; }

    /// phi(x, y) with y possibly kCemetery.
    double phi_at(int x, int y) const { return y == kCemetery ? phi_cemetery_(x) : phi_(x, y); }

    friend bool operator==(const GeneralMF&, const GeneralMF&) = default;

private:
    Eigen::VectorXd mc_integrand_;
    Eigen::VectorXd a_rate_;
    Eigen::MatrixXd phi_;
    Eigen::VectorXd phi_cemetery_;
};

using TransformSpec = std::variant<RhoTransform, PureJumpPhi, GeneralMF>;

/// Checks sizes against the model and, for GeneralMF, that it can be
/// applied to a chain. Throws StructuralError / InvalidTransform.
void validate_transform(const FiniteSymmetricModel& model, const TransformSpec& transform);

/**
 * Values of a multiplicative functional at sample epochs.
 *
 * Stored in log space; log_z_left differs from log_z only at jump epochs.
 * Z = 0 is log_z = -inf, and zero_time records the first such epoch.
 */
struct MFTrace {
    std::vector<double> times;
    std::vector<double> log_z;
    std::vector<double> log_z_left;
    std::vector<bool> jump;
    std::optional<double> zero_time;

    std::size_t size() const { return times.size(); }
    double z(std::size_t i) const;
    double z_left(std::size_t i) const;
    double final_z() const { return z(size() - 1); }
    double final_log_z() const { return log_z.back(); }
};

/// Z^rho by the telescoping closed form
/// (rho(X_t)/rho(X_0)) exp(-int_0^t (Q rho / rho)(X_s) ds).
MFTrace rho_transform_mf(const ChainPath& path, const RhoTransform& rho,
                         const FiniteSymmetricModel& model, double t);

/// Z^rho accumulated as exp(M_t) prod (1 + dM) e^{-dM} (Doleans-Dade form).
MFTrace rho_transform_mf_incremental(const ChainPath& path, const RhoTransform& rho,
                                     const FiniteSymmetricModel& model, double t);

/// The GeneralMF whose Exp(M - A) is Z^rho: phi(x,y) = rho(y)/rho(x) - 1,
/// phi(x, Delta) = -1, A = 0.
GeneralMF general_from_rho(const FiniteSymmetricModel& model, const RhoTransform& rho);

/// Z = prod (1 + phi(X_{s-}, X_s)) exp(-int N phi(X_s) ds).
MFTrace pure_jump_mf(const ChainPath& path, const PureJumpPhi& phi,
                     const FiniteSymmetricModel& model, double t);

/// Z = exp(M_t - A_t) prod (1 + phi) e^{-phi}; records the zero time when a
/// jump with phi = -1 occurs.
MFTrace general_mf(const ChainPath& path, const GeneralMF& spec,
                   const FiniteSymmetricModel& model, double t);

struct SplitTrace {
    MFTrace plus;  // nondecreasing
    MFTrace minus; // nonincreasing
};

/// Z = Z^+ Z^- with Z^+ carrying the phi^+ jumps and the phi^- compensator.
SplitTrace split_mf(const ChainPath& path, const PureJumpPhi& phi,
                    const FiniteSymmetricModel& model, double t);

/// Z_t for the transform's canonical route (closed form for rho, product
/// form otherwise). Zero for paths killed before t under a rho-transform.
double terminal_weight(const ChainPath& path, const FiniteSymmetricModel& model,
                       const TransformSpec& transform, double t);

/// gamma(x,y) = rho(x)^2 (1 + phi(x,y)); throws InvalidTransform when
/// rho(y)^2/rho(x)^2 != (1+phi(x,y))/(1+phi(y,x)) beyond 1e-10 on a J-charged pair.
Eigen::MatrixXd gamma(const FiniteSymmetricModel& model, const Eigen::VectorXd& rho,
                      const Eigen::MatrixXd& phi);

/// rho with (rho^2 m) the symmetry measure of the transformed chain: the
/// given rho, 1 for PureJumpPhi, and for GeneralMF the solution of the
/// consistency relation along spanning trees (1 at each component root).
Eigen::VectorXd symmetrizing_density(const FiniteSymmetricModel& model,
                                     const TransformSpec& transform);

/// Jump factor 1 + phi(x,y) of the transform (rho(y)/rho(x) for RhoTransform).
Eigen::MatrixXd jump_factor(const FiniteSymmetricModel& model, const TransformSpec& transform);

/// Everything that changes under the transform.
struct TransformedStructure {
    Eigen::VectorXd rho;       // symmetrizing density
    Eigen::VectorXd measure;   // rho^2 m
    Eigen::MatrixXd kernel;    // (1 + phi) q
    Eigen::MatrixXd gamma;     // rho(x)^2 (1 + phi)
    Eigen::MatrixXd jump;      // gamma * J
    Eigen::VectorXd killing;   // kappa^Y
    Eigen::VectorXd killing_rate; // kappa^Y / measure
};

TransformedStructure transformed_structure(const FiniteSymmetricModel& model,
                                           const TransformSpec& transform);

Eigen::MatrixXd transformed_levy_kernel(const FiniteSymmetricModel& model,
                                        const TransformSpec& transform);

Eigen::MatrixXd transformed_jump_measure(const FiniteSymmetricModel& model,
                                         const TransformSpec& transform);

/// kappa^Y(x) = rho(x)^2 (1 + phi(x,Delta)) kappa(x) + rho(x)^2 mu_A(x)
Eigen::VectorXd transformed_killing(const FiniteSymmetricModel& model,
                                    const TransformSpec& transform);

/// The transformed process as a chain of its own: (rho^2 m, N^Y, kappa^Y / rho^2 m).
FiniteSymmetricModel transformed_model(const FiniteSymmetricModel& model,
                                       const TransformSpec& transform);

/// rho^2 mu
Eigen::VectorXd transformed_revuz(const Eigen::VectorXd& mu, const Eigen::VectorXd& rho);

/// |Z^rho_t o r_t - Z^rho_t rho^2(X_0) / rho^2(X_t)|
double reversal_identity_residual(const ChainPath& path, const RhoTransform& rho,
                                  const FiniteSymmetricModel& model, double t);

/// phi_hat = -phi / (1 + phi); InvalidTransform when phi <= -1.
double inverse_transform(double phi);
Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& phi);

} // namespace girsanov
