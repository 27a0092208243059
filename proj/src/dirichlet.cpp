#include "girsanov/dirichlet.hpp"

#include "girsanov/errors.hpp"
#include "girsanov/numeric.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace girsanov {

namespace {

/// sum over ordered pairs x != y of (f(y) - f(x))^2 w(x,y)
double pair_energy(const Eigen::MatrixXd& w, const Eigen::VectorXd& f)
{
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index x = 0; x < w.rows(); ++x)
        for (Eigen::Index y = 0; y < w.cols(); ++y)
            if (x != y) {
                const double diff = f(y) - f(x);
                terms.push_back(diff * diff * w(x, y));
            }
    return pairwise_sum(terms);
}

double zero_order_energy(const Eigen::VectorXd& kappa, const Eigen::VectorXd& f)
{
    std::vector<double> terms(static_cast<std::size_t>(f.size()));
    for (Eigen::Index x = 0; x < f.size(); ++x)
        terms[static_cast<std::size_t>(x)] = kappa(x) * f(x) * f(x);
    return pairwise_sum(terms);
}

void require_continuum(const JumpDiffusionModel& model, Interval region, double mesh,
                       const char* what)
{
    if (model.dimension() != 1)
        throw DomainError(std::string(what) + ": only d = 1 is supported on the continuum");
    if (!(model.alpha() > 0.0 && model.alpha() < 2.0))
        throw InvalidModel(std::string(what) + ": alpha must lie in (0, 2)");
    if (!(region.hi > region.lo))
        throw DomainError(std::string(what) + ": empty region");
    if (!(mesh > 0.0) || mesh > region.length())
        throw DomainError(std::string(what) + ": mesh must be in (0, region length]");
}

} // namespace

FormValue FormValue::from_parts(double continuous, double jump, double killing)
{
    return FormValue{continuous, jump, killing, continuous + jump + killing};
}

double generator_energy(const Eigen::MatrixXd& generator, const Eigen::VectorXd& mu,
                        const Eigen::VectorXd& f)
{
    if (generator.rows() != f.size() || generator.cols() != f.size() || mu.size() != f.size())
        throw StructuralError("generator_energy: sizes differ");
    const Eigen::VectorXd qf = generator * f;
    std::vector<double> terms(static_cast<std::size_t>(f.size()));
    for (Eigen::Index x = 0; x < f.size(); ++x)
        terms[static_cast<std::size_t>(x)] = -qf(x) * f(x) * mu(x);
    return pairwise_sum(terms);
}

FormValue base_form(const FiniteSymmetricModel& model, const Eigen::VectorXd& f)
{
    model.require_state_function(f, "base_form");
    return FormValue::from_parts(0.0, pair_energy(jump_measure(model), f),
                                 zero_order_energy(killing_measure(model), f));
}

Eigen::MatrixXd transformed_generator(const FiniteSymmetricModel& model, const Eigen::VectorXd& rho)
{
    model.require_state_function(rho, "transformed_generator");
    for (Eigen::Index x = 0; x < rho.size(); ++x)
        if (!(rho(x) > 0.0) || !std::isfinite(rho(x)))
            throw InvalidTransform("transformed_generator: rho must be finite and > 0");
    const int n = model.size();
    const Eigen::VectorXd q_rho = model.apply_generator(rho);
    Eigen::MatrixXd out(n, n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(j) = 1.0;
        const Eigen::VectorXd col =
            (model.apply_generator(rho.cwiseProduct(e)) - e.cwiseProduct(q_rho)).cwiseQuotient(rho);
        out.col(j) = col;
    }
    return out;
}

Eigen::MatrixXd transformed_generator(const FiniteSymmetricModel& model,
                                      const TransformSpec& transform)
{
    return transformed_model(model, transform).generator();
}

Eigen::MatrixXd symmetric_semigroup(const Eigen::MatrixXd& generator, const Eigen::VectorXd& mu,
                                    double t)
{
    if (generator.rows() != mu.size() || generator.cols() != mu.size())
        throw StructuralError("symmetric_semigroup: sizes differ");
    const Eigen::VectorXd root = mu.cwiseSqrt();
    const Eigen::VectorXd inv_root = root.cwiseInverse();
    Eigen::MatrixXd s = root.asDiagonal() * generator * inv_root.asDiagonal();
    s = 0.5 * (s + s.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    const Eigen::VectorXd decay = (t * eig.eigenvalues().array()).exp().matrix();
    const Eigen::MatrixXd exp_s = eig.eigenvectors() * decay.asDiagonal() * eig.eigenvectors().transpose();
    return inv_root.asDiagonal() * exp_s * root.asDiagonal();
}

FormValue transformed_form_rho(const FiniteSymmetricModel& model, const Eigen::VectorXd& rho,
                               const Eigen::VectorXd& f)
{
    model.require_state_function(rho, "transformed_form_rho");
    model.require_state_function(f, "transformed_form_rho");
    const Eigen::MatrixXd weight = (rho * rho.transpose()).cwiseProduct(jump_measure(model));
    return FormValue::from_parts(0.0, pair_energy(weight, f), 0.0);
}

FormValue transformed_form_phi(const FiniteSymmetricModel& model, const PureJumpPhi& phi,
                               const Eigen::VectorXd& f)
{
    validate_transform(model, phi);
    const FormValue base = base_form(model, f);
    const Eigen::MatrixXd nu = phi.phi().cwiseProduct(jump_measure(model));
    return FormValue::from_parts(0.0, base.jump_part + pair_energy(nu, f), base.killing_part);
}

FormValue transformed_form(const FiniteSymmetricModel& model, const TransformSpec& transform,
                           const Eigen::VectorXd& f)
{
    model.require_state_function(f, "transformed_form");
    const auto s = transformed_structure(model, transform);
    return FormValue::from_parts(0.0, pair_energy(s.jump, f), zero_order_energy(s.killing, f));
}

ConservativenessReport conservativeness_check(const FiniteSymmetricModel& model,
                                              const Eigen::VectorXd& rho)
{
    const Eigen::MatrixXd q_hat = transformed_generator(model, rho);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(model.size());
    ConservativenessReport report;
    report.max_row_sum = (q_hat * one).cwiseAbs().maxCoeff();
    report.energy_of_one = std::abs(transformed_form_rho(model, rho, one).total);
    return report;
}

// ---------------------------------------------------------------------------
// Continuum

FormValue continuum_form_at(const RealFunction& rho, const RealFunction& f,
                            const JumpDiffusionModel& model, Interval region, double mesh)
{
    require_continuum(model, region, mesh, "continuum_form_quadrature");
    const double alpha = model.alpha();
    const double c = model.c();
    const double delta = 2.0 * mesh;
    const auto cells = static_cast<std::size_t>(std::ceil(region.length() / mesh - 1e-9));
    const double h = region.length() / static_cast<double>(cells);

    std::vector<double> continuous_terms(cells);
    std::vector<double> jump_terms(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double x = region.lo + (static_cast<double>(i) + 0.5) * h;
        const double fx = f(x);
        const double rx = rho(x);
        const double grad = derivative(f, x);
        continuous_terms[i] = 0.5 * grad * grad * rx * rx * h;

        // |y - x| < delta: f(y) - f(x) ~ f'(x) (y - x), rho(y) ~ rho(x).
        double inner = grad * grad * rx * rx * c * 2.0 * std::pow(delta, 2.0 - alpha) / (2.0 - alpha);
        std::vector<double> ring;
        for (double sign : {-1.0, 1.0}) {
            for (std::size_t j = 0;; ++j) {
                const double z = delta + (static_cast<double>(j) + 0.5) * h;
                const double y = x + sign * z;
                if (!region.contains(y))
                    break;
                const double diff = f(y) - fx;
                ring.push_back(diff * diff * rx * rho(y) * c * std::pow(z, -1.0 - alpha) * h);
            }
        }
        inner += pairwise_sum(ring);

        // y outside the region: f(y) = 0; the mirrored pairs (x outside, y
        // inside) contribute the same amount, hence the factor 2.
        double outside = 0.0;
        if (fx != 0.0) {
            const double gap = std::min(x - region.lo, region.hi - x);
            outside = kernel_integral(
                [&](double z) { return region.contains(x + z) ? 0.0 : rho(x + z); }, model, gap);
            outside *= 2.0 * fx * fx * rx;
        }
        jump_terms[i] = 0.5 * (inner + outside) * h;
    }
    return FormValue::from_parts(pairwise_sum(continuous_terms), pairwise_sum(jump_terms), 0.0);
}

ContinuumFormResult continuum_form_quadrature(const RealFunction& rho, const RealFunction& f,
                                              const JumpDiffusionModel& model, Interval region,
                                              double mesh, double tolerance)
{
    ContinuumFormResult out;
    out.coarse = continuum_form_at(rho, f, model, region, mesh);
    out.fine = continuum_form_at(rho, f, model, region, 0.5 * mesh);
    const double diff = out.fine.total - out.coarse.total;
    out.relative_change = out.fine.total == 0.0
                              ? (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                              : std::abs(diff) / std::abs(out.fine.total);
    out.extrapolated = out.fine.total + diff / 3.0;
    out.error_estimate = std::abs(out.extrapolated - out.fine.total);
    out.converged = std::isfinite(out.fine.total) && out.relative_change <= tolerance;
    return out;
}

DomainReport domain_membership(const FiniteSymmetricModel& model, const TransformSpec& transform,
                               const Eigen::VectorXd& f)
{
    model.require_state_function(f, "domain_membership");
    const auto s = transformed_structure(model, transform);
    DomainReport report;
    report.witnesses = {0.0, pair_energy(s.jump, f), zero_order_energy(s.killing, f)};
    report.l2_norm = zero_order_energy(s.measure, f);
    bool finite = std::isfinite(report.l2_norm);
    for (double w : report.witnesses)
        finite = finite && std::isfinite(w);
    report.status = finite ? DomainStatus::in_domain : DomainStatus::not_in_domain;
    return report;
}

DomainReport domain_membership(const RealFunction& rho, const RealFunction& f,
                               const JumpDiffusionModel& model, Interval region, double mesh)
{
    DomainReport report;
    const auto form = continuum_form_quadrature(rho, f, model, region, mesh);
    const auto cells = static_cast<std::size_t>(std::ceil(region.length() / (0.5 * mesh) - 1e-9));
    const double h = region.length() / static_cast<double>(cells);
    std::vector<double> l2(cells);
    for (std::size_t i = 0; i < cells; ++i) {
        const double x = region.lo + (static_cast<double>(i) + 0.5) * h;
        const double v = f(x) * rho(x);
        l2[i] = v * v * h;
    }
    report.l2_norm = pairwise_sum(l2);
    report.witnesses = {2.0 * form.fine.continuous_part, form.fine.jump_part, report.l2_norm};
    bool finite = true;
    for (double w : report.witnesses)
        finite = finite && std::isfinite(w);
    if (!finite)
        report.status = DomainStatus::not_in_domain;
    else
        report.status = form.converged ? DomainStatus::in_domain : DomainStatus::inconclusive;
    return report;
}

} // namespace girsanov
