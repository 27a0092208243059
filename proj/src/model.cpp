#include "girsanov/model.hpp"

#include "girsanov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace girsanov {

FiniteSymmetricModel::FiniteSymmetricModel(Eigen::VectorXd m, Eigen::MatrixXd q, Eigen::VectorXd k)
    : m_(std::move(m)), q_(std::move(q)), k_(std::move(k))
{
    const auto n = m_.size();
    if (n == 0)
        throw StructuralError("model: empty state space");
    if (q_.rows() != n || q_.cols() != n || k_.size() != n) {
        std::ostringstream msg;
        msg << "model: dimension mismatch (m has " << n << " entries, q is " << q_.rows() << "x"
            << q_.cols() << ", k has " << k_.size() << ")";
        throw StructuralError(msg.str());
    }
    for (Eigen::Index x = 0; x < n; ++x) {
        if (!(m_(x) > 0.0) || !std::isfinite(m_(x)))
            throw InvalidModel("model: m(" + std::to_string(x) + ") must be finite and > 0");
        if (!(k_(x) >= 0.0) || !std::isfinite(k_(x)))
            throw InvalidModel("model: k(" + std::to_string(x) + ") must be finite and >= 0");
        if (q_(x, x) != 0.0)
            throw StructuralError("model: q(" + std::to_string(x) + "," + std::to_string(x) +
                                  ") must be 0; the diagonal is implied by the row sum");
        for (Eigen::Index y = 0; y < n; ++y) {
            if (!(q_(x, y) >= 0.0) || !std::isfinite(q_(x, y)))
                throw InvalidModel("model: q(" + std::to_string(x) + "," + std::to_string(y) +
                                   ") must be finite and >= 0");
        }
    }
}

FiniteSymmetricModel::FiniteSymmetricModel(Eigen::VectorXd m, Eigen::MatrixXd q)
    : FiniteSymmetricModel(m, std::move(q), Eigen::VectorXd::Zero(m.size()))
{
}

double FiniteSymmetricModel::total_rate(int x) const { return q_.row(x).sum() + k_(x); }

Eigen::MatrixXd FiniteSymmetricModel::generator() const
{
    Eigen::MatrixXd gen = q_;
    for (int x = 0; x < size(); ++x)
        gen(x, x) = -total_rate(x);
    return gen;
}

Eigen::VectorXd FiniteSymmetricModel::apply_generator(const Eigen::VectorXd& f) const
{
    require_state_function(f, "apply_generator");
    Eigen::VectorXd out(size());
    for (int x = 0; x < size(); ++x) {
        double acc = 0.0;
        for (int y = 0; y < size(); ++y)
            if (y != x)
                acc += q_(x, y) * (f(y) - f(x));
        out(x) = acc - k_(x) * f(x);
    }
    return out;
}

void FiniteSymmetricModel::require_state_function(const Eigen::VectorXd& f, const char* what) const
{
    if (f.size() != size()) {
        std::ostringstream msg;
        msg << what << ": function has " << f.size() << " entries, model has " << size()
            << " states";
        throw StructuralError(msg.str());
    }
}

JumpDiffusionModel::JumpDiffusionModel(int d, double alpha, double c) : d_(d), alpha_(alpha), c_(c)
{
    if (d < 1)
        throw InvalidModel("jump diffusion: dimension must be >= 1");
    if (!(alpha > 0.0 && alpha < 2.0))
        throw InvalidModel("jump diffusion: alpha must lie in (0,2)");
    // c = 0 is kept as the degenerate pure Brownian case.
    if (!(c >= 0.0) || !std::isfinite(c))
        throw InvalidModel("jump diffusion: c must be finite and >= 0");
}

double unit_sphere_area(int d)
{
    return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double JumpDiffusionModel::jump_intensity(double eps) const
{
    if (!(eps > 0.0))
        throw DomainError("jump_intensity: eps must be > 0");
    return c_ * unit_sphere_area(d_) * std::pow(eps, -alpha_) / alpha_;
}

double JumpDiffusionModel::small_jump_variance(double eps) const
{
    if (!(eps > 0.0))
        throw DomainError("small_jump_variance: eps must be > 0");
    return c_ * unit_sphere_area(d_) * std::pow(eps, 2.0 - alpha_) / (d_ * (2.0 - alpha_));
}

SymmetryReport validate_symmetry(const FiniteSymmetricModel& model, double tolerance)
{
    SymmetryReport report;
    const auto& m = model.m();
    const auto& q = model.q();
    for (int x = 0; x < model.size(); ++x) {
        for (int y = x + 1; y < model.size(); ++y) {
            const double residual = std::abs(m(x) * q(x, y) - m(y) * q(y, x));
            report.worst_residual = std::max(report.worst_residual, residual);
            if (residual > tolerance)
                report.violations.push_back({x, y, residual});
        }
    }
    std::stable_sort(report.violations.begin(), report.violations.end(),
                     [](const auto& a, const auto& b) { return a.residual > b.residual; });
    return report;
}

void require_symmetric(const FiniteSymmetricModel& model)
{
    const auto report = validate_symmetry(model);
    if (!report.ok()) {
        const auto& v = report.violations.front();
        std::ostringstream msg;
        msg << "detailed balance violated at (" << v.x << "," << v.y << "): |m(x)q(x,y) - "
            << "m(y)q(y,x)| = " << v.residual << " (" << report.violations.size()
            << " violating pair(s))";
        throw InvalidModel(msg.str());
    }
}

Eigen::MatrixXd jump_measure(const FiniteSymmetricModel& model)
{
    require_symmetric(model);
    const int n = model.size();
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            if (x != y)
                j(x, y) = 0.5 * model.m()(x) * model.q()(x, y);
    return j;
}

Eigen::VectorXd killing_measure(const FiniteSymmetricModel& model)
{
    return model.k().cwiseProduct(model.m());
}

double stable_kernel_density(std::span<const double> x, std::span<const double> y,
                             const JumpDiffusionModel& model)
{
    if (x.size() != static_cast<std::size_t>(model.dimension()) || y.size() != x.size())
        throw StructuralError("stable_kernel_density: point dimension does not match the model");
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        r2 += (x[i] - y[i]) * (x[i] - y[i]);
    if (r2 == 0.0)
        throw DomainError("stable_kernel_density: kernel is singular on the diagonal x == y");
    return model.c() * std::pow(r2, -0.5 * (model.dimension() + model.alpha()));
}

double inner_product(const Eigen::VectorXd& f, const Eigen::VectorXd& g, const Eigen::VectorXd& mu)
{
    return (f.array() * g.array() * mu.array()).sum();
}

} // namespace girsanov
