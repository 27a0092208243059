#include "girsanov/continuum.hpp"

#include "girsanov/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace girsanov {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kFarCut = 1e4; // beyond this radius the tail is integrated in u = r^{-alpha}

using boost::math::quadrature::gauss_kronrod;

void require_one_dimensional(const JumpDiffusionModel& model, const char* what)
{
    if (model.dimension() != 1)
        throw DomainError(std::string(what) + ": only d = 1 is supported on the continuum");
}

/// int_eps^inf h(r) c r^{-1-alpha} dr over dyadic pieces plus a far tail.
double radial_integral(const std::function<double(double)>& h, double c, double alpha, double eps)
{
    double acc = 0.0;
    double a = eps;
    while (a < kFarCut) {
        const double b = std::min(2.0 * a, kFarCut);
        acc += gauss_kronrod<double, 15>::integrate(
            [&](double r) { return h(r) * c * std::pow(r, -1.0 - alpha); }, a, b, 8, 1e-11);
        a = b;
    }
    const double u_max = std::pow(std::max(eps, kFarCut), -alpha);
    acc += gauss_kronrod<double, 15>::integrate(
        [&](double u) { return h(std::pow(u, -1.0 / alpha)) * c / alpha; }, 0.0, u_max, 8, 1e-11);
    return acc;
}

struct DriftParts {
    JumpDiffusionModel model;
    RealFunction rho;
    double eps;
    double diffusion;

    double compensator(double x) const
    {
        const double r0 = rho(x);
        return kernel_integral([&](double z) { return rho(x + z) / r0 - 1.0; }, model, eps);
    }

    double operator()(double x) const
    {
        return diffusion * second_derivative(rho, x) / rho(x) + compensator(x);
    }
};

double position_1d(const DiffusionPath& path, double s)
{
    return path.position(s)[0];
}

double left_position_1d(const DiffusionPath& path, double s)
{
    return path.left_position(s)[0];
}

void require_path(const DiffusionPath& path, double t, const char* what)
{
    if (path.dim() != 1)
        throw DomainError(std::string(what) + ": only d = 1 paths are supported");
    if (!(t >= 0.0) || t > path.horizon() * (1.0 + 1e-12))
        throw DomainError(std::string(what) + ": t outside [0, horizon]");
}

double checked_rho(const ContinuumRhoTransform& transform, double x)
{
    const double r = transform.rho(x);
    if (!(r > 0.0) || !std::isfinite(r))
        throw InvalidTransform("continuum rho transform: rho must be finite and > 0 along the path");
    return r;
}

} // namespace

double derivative(const RealFunction& f, double x)
{
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

double second_derivative(const RealFunction& f, double x)
{
    const double h = 1e-4 * std::max(1.0, std::abs(x));
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

double kernel_integral(const RealFunction& g, const JumpDiffusionModel& model, double eps)
{
    require_one_dimensional(model, "kernel_integral");
    if (!(eps > 0.0))
        throw DomainError("kernel_integral: eps must be > 0");
    return radial_integral([&](double r) { return g(r) + g(-r); }, model.c(), model.alpha(), eps);
}

// ---------------------------------------------------------------------------

ContinuumRhoTransform::ContinuumRhoTransform(const JumpDiffusionModel& model, RealFunction rho,
                                             double eps)
    : model_(model), rho_(std::move(rho)), eps_(eps)
{
    require_one_dimensional(model_, "ContinuumRhoTransform");
    if (!(eps_ > 0.0))
        throw DomainError("ContinuumRhoTransform: eps must be > 0");
    if (!rho_)
        throw InvalidTransform("ContinuumRhoTransform: rho is empty");
    diffusion_ = 0.5 * (1.0 + model_.small_jump_variance(eps_));
}

void ContinuumRhoTransform::tabulate(Interval range, std::size_t points)
{
    DriftParts parts{model_, rho_, eps_, diffusion_};
    table_ = std::make_shared<TabulatedFunction>(parts, range.lo, range.hi, points);
}

double ContinuumRhoTransform::log_gradient(double x) const
{
    return derivative(rho_, x) / rho_(x);
}

double ContinuumRhoTransform::drift_direct(double x) const
{
    return DriftParts{model_, rho_, eps_, diffusion_}(x);
}

double ContinuumRhoTransform::drift(double x) const
{
    return table_ ? (*table_)(x) : drift_direct(x);
}

double ContinuumRhoTransform::jump_compensator(double x) const
{
    if (table_)
        return (*table_)(x) - diffusion_ * second_derivative(rho_, x) / rho_(x);
    return DriftParts{model_, rho_, eps_, diffusion_}.compensator(x);
}

// ---------------------------------------------------------------------------

double continuum_log_weight(const DiffusionPath& path, const ContinuumRhoTransform& transform,
                            double t)
{
    require_path(path, t, "continuum_log_weight");
    if (t == 0.0)
        return 0.0;
    const auto pts = path.partition(t);
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i];
        const double b = pts[i + 1];
        integral += 0.5 *
                    (transform.drift(position_1d(path, a)) +
                     transform.drift(left_position_1d(path, b))) *
                    (b - a);
    }
    const double x0 = path.x0()[0];
    return std::log(checked_rho(transform, position_1d(path, t))) - std::log(checked_rho(transform, x0)) -
           integral;
}

MFTrace continuum_rho_mf(const DiffusionPath& path, const ContinuumRhoTransform& transform,
                         double t)
{
    require_path(path, t, "continuum_rho_mf");
    const double log_rho0 = std::log(checked_rho(transform, path.x0()[0]));
    auto log_rho = [&](double x) { return std::log(checked_rho(transform, x)); };
    const auto& taus = path.jump_times();
    auto is_jump = [&](double s) { return std::binary_search(taus.begin(), taus.end(), s); };

    MFTrace trace;
    double integral = 0.0;
    const auto pts = t == 0.0 ? std::vector<double>{0.0} : path.partition(t);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double s = pts[i];
        if (i > 0) {
            const double a = pts[i - 1];
            integral += 0.5 *
                        (transform.drift(position_1d(path, a)) +
                         transform.drift(left_position_1d(path, s))) *
                        (s - a);
        }
        const bool jump = i > 0 && is_jump(s);
        const double value = log_rho(position_1d(path, s)) - log_rho0 - integral;
        trace.times.push_back(s);
        trace.log_z.push_back(value);
        trace.log_z_left.push_back(jump ? log_rho(left_position_1d(path, s)) - log_rho0 - integral
                                        : value);
        trace.jump.push_back(jump);
    }
    return trace;
}

MFTrace continuum_rho_mf_incremental(const DiffusionPath& path,
                                     const ContinuumRhoTransform& transform, double t)
{
    require_path(path, t, "continuum_rho_mf_incremental");
    const double variance_rate = 1.0 + transform.model().small_jump_variance(transform.eps());
    const auto& taus = path.jump_times();
    auto is_jump = [&](double s) { return std::binary_search(taus.begin(), taus.end(), s); };

    MFTrace trace;
    double m_cont = 0.0;   // Ito sum of rho'/rho against C
    double bracket = 0.0;  // <M^c>
    double m_jump = 0.0;   // compensated jump sum
    double log_prod = 0.0; // sum log(1 + dM) - dM
    const auto pts = t == 0.0 ? std::vector<double>{0.0} : path.partition(t);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double s = pts[i];
        double left = 0.0;
        bool jump = false;
        if (i > 0) {
            const double a = pts[i - 1];
            const double xa = position_1d(path, a);
            const double xb = left_position_1d(path, s);
            const double grad = transform.log_gradient(xa);
            m_cont += grad * (path.continuous_at(s)[0] - path.continuous_at(a)[0]);
            bracket += grad * grad * variance_rate * (s - a);
            m_jump -= 0.5 * (transform.jump_compensator(xa) + transform.jump_compensator(xb)) *
                      (s - a);
            left = m_cont - 0.5 * bracket + m_jump + log_prod;
            jump = is_jump(s);
            if (jump) {
                const double ratio =
                    checked_rho(transform, position_1d(path, s)) / checked_rho(transform, xb) - 1.0;
                m_jump += ratio;
                log_prod += std::log1p(ratio) - ratio;
            }
        }
        const double value = m_cont - 0.5 * bracket + m_jump + log_prod;
        trace.times.push_back(s);
        trace.log_z.push_back(value);
        trace.log_z_left.push_back(jump ? left : value);
        trace.jump.push_back(jump);
        if (value == kNegInf && !trace.zero_time)
            trace.zero_time = s;
    }
    return trace;
}

// ---------------------------------------------------------------------------

namespace {

struct ShellScan {
    IntegrabilityStatus status;
    double value;
};

/// Classifies a sequence of shell contributions ordered towards the
/// singular end (inner: r -> 0, outer: r -> infinity).
ShellScan classify(const std::vector<double>& shells)
{
    double total = 0.0;
    for (double s : shells)
        total += s;
    const std::size_t n = shells.size();
    const double last = shells[n - 1];
    if (last == 0.0 || last <= 1e-16 * std::max(total, 1e-300))
        return {IntegrabilityStatus::finite, total};
    // Ratios over the last few shells.
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    for (std::size_t k = n - 6; k < n; ++k) {
        if (shells[k - 1] <= 0.0)
            return {IntegrabilityStatus::inconclusive, total};
        const double r = shells[k] / shells[k - 1];
        min_ratio = std::min(min_ratio, r);
        max_ratio = std::max(max_ratio, r);
    }
    if (max_ratio < 0.95)
        return {IntegrabilityStatus::finite, total + last * max_ratio / (1.0 - max_ratio)};
    if (min_ratio >= 0.999)
        return {IntegrabilityStatus::infinite, std::numeric_limits<double>::infinity()};
    return {IntegrabilityStatus::inconclusive, total};
}

} // namespace

IntegrabilityResult integrability_check(const JumpDiffusionModel& model, const PairFunction& phi,
                                        std::span<const double> lo, std::span<const double> hi,
                                        double t, int samples_per_axis)
{
    const int d = model.dimension();
    if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
        throw StructuralError("integrability_check: region dimension does not match the model");
    if (samples_per_axis < 1)
        throw DomainError("integrability_check: samples_per_axis must be >= 1");
    for (int i = 0; i < d; ++i)
        if (!(lo[i] <= hi[i]) || !std::isfinite(lo[i]) || !std::isfinite(hi[i]))
            throw DomainError("integrability_check: region must be a bounded box");

    constexpr int kInner = -40;
    constexpr int kOuter = 40;
    const double alpha = model.alpha();
    const double weight = unit_sphere_area(d) * model.c() / (2.0 * d);

    IntegrabilityResult result;
    result.status = IntegrabilityStatus::finite;
    std::vector<int> index(static_cast<std::size_t>(d), 0);
    std::vector<double> x(static_cast<std::size_t>(d));
    std::vector<double> y(static_cast<std::size_t>(d));
    while (true) {
        for (int i = 0; i < d; ++i) {
            const double frac =
                samples_per_axis == 1 ? 0.5 : static_cast<double>(index[i]) / (samples_per_axis - 1);
            x[i] = lo[i] + frac * (hi[i] - lo[i]);
        }
        double rate = 0.0;
        IntegrabilityStatus point_status = IntegrabilityStatus::finite;
        for (int axis = 0; axis < d; ++axis) {
            for (double sign : {-1.0, 1.0}) {
                auto h = [&](double r) {
                    y = x;
                    y[axis] += sign * r;
                    return std::abs(phi(x, y)) * std::pow(r, -1.0 - alpha);
                };
                std::vector<double> inner;
                std::vector<double> outer;
                for (int k = -1; k >= kInner; --k)
                    inner.push_back(gauss_kronrod<double, 15>::integrate(
                        h, std::ldexp(1.0, k), std::ldexp(1.0, k + 1), 6, 1e-10));
                for (int k = 0; k < kOuter; ++k)
                    outer.push_back(gauss_kronrod<double, 15>::integrate(
                        h, std::ldexp(1.0, k), std::ldexp(1.0, k + 1), 6, 1e-10));
                for (const auto& shells : {inner, outer}) {
                    const auto scan = classify(shells);
                    if (scan.status == IntegrabilityStatus::infinite)
                        point_status = IntegrabilityStatus::infinite;
                    else if (scan.status == IntegrabilityStatus::inconclusive &&
                             point_status == IntegrabilityStatus::finite)
                        point_status = IntegrabilityStatus::inconclusive;
                    rate += weight * scan.value;
                }
            }
        }
        if (point_status == IntegrabilityStatus::infinite)
            result.status = IntegrabilityStatus::infinite;
        else if (point_status == IntegrabilityStatus::inconclusive &&
                 result.status == IntegrabilityStatus::finite)
            result.status = IntegrabilityStatus::inconclusive;
        if (rate > result.worst_rate || result.worst_point.empty()) {
            result.worst_rate = rate;
            result.worst_point = x;
        }

        int axis = 0;
        while (axis < d && ++index[axis] == samples_per_axis)
            index[axis++] = 0;
        if (axis == d)
            break;
    }
    result.worst_estimate = t * result.worst_rate;
    return result;
}

} // namespace girsanov
