#include "girsanov/transform.hpp"

#include "girsanov/errors.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace girsanov {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kGammaTolerance = 1e-10;

void require_finite(const Eigen::MatrixXd& a, const char* what)
{
    if (!a.allFinite())
        throw InvalidTransform(std::string(what) + ": values must be finite");
}

void require_path_in_model(const ChainPath& path, const FiniteSymmetricModel& model)
{
    auto bad = [&](int s) { return s < 0 || s >= model.size(); };
    if (bad(path.x0()))
        throw StructuralError("path starts outside the model's state space");
    for (const auto& e : path.events())
        if (bad(e.state))
            throw StructuralError("path visits a state outside the model's state space");
}

void require_time(const ChainPath& path, double t, const char* what)
{
    if (!(t >= 0.0) || t > path.horizon())
        throw DomainError(std::string(what) + ": t outside [0, horizon]");
}

/// Walks the epochs of a chain path on [0, t]: the initial epoch, every
/// jump (including killing, reported with target kCemetery) and t itself.
template <typename OnHold, typename OnJump, typename OnEpoch>
void walk_epochs(const ChainPath& path, double t, OnHold&& hold, OnJump&& jump, OnEpoch&& epoch)
{
    int state = path.x0();
    double now = 0.0;
    epoch(0.0, state, false);
    for (const auto& e : path.events()) {
        if (e.time > t)
            break;
        hold(state, e.time - now);
        jump(state, e.state);
        now = e.time;
        state = e.state;
        epoch(now, state, true);
    }
    if (path.killed_at() && *path.killed_at() <= t) {
        hold(state, *path.killed_at() - now);
        jump(state, kCemetery);
        now = *path.killed_at();
        state = kCemetery;
        epoch(now, state, true);
    }
    if (t > now) {
        if (state != kCemetery)
            hold(state, t - now);
        epoch(t, state, false);
    }
}

/// Trace of exp(-int rate(X) ds) * prod exp(log_jump(X_{s-}, X_s)).
template <typename LogJump>
MFTrace product_trace(const ChainPath& path, double t, const Eigen::VectorXd& rate,
                      LogJump&& log_jump)
{
    MFTrace trace;
    double log_z = 0.0;
    double left = 0.0;
    walk_epochs(
        path, t, [&](int x, double dt) { log_z -= rate(x) * dt; },
        [&](int x, int y) {
            left = log_z;
            log_z += log_jump(x, y);
        },
        [&](double s, int, bool is_jump) {
            trace.times.push_back(s);
            trace.log_z.push_back(log_z);
            trace.log_z_left.push_back(is_jump ? left : log_z);
            trace.jump.push_back(is_jump);
            if (log_z == kNegInf && !trace.zero_time)
                trace.zero_time = s;
        });
    return trace;
}

double safe_log1p(double phi) { return phi == -1.0 ? kNegInf : std::log1p(phi); }

Eigen::VectorXd rho_log_drift(const FiniteSymmetricModel& model, const Eigen::VectorXd& rho)
{
    return model.apply_generator(rho).cwiseQuotient(rho);
}

Eigen::VectorXd compensator_rate(const FiniteSymmetricModel& model, const Eigen::MatrixXd& phi)
{
    Eigen::VectorXd rate(model.size());
    for (int x = 0; x < model.size(); ++x) {
        double acc = 0.0;
        for (int y = 0; y < model.size(); ++y)
            if (y != x)
                acc += model.q()(x, y) * phi(x, y);
        rate(x) = acc;
    }
    return rate;
}

void require_phi_shape(const FiniteSymmetricModel& model, const Eigen::MatrixXd& phi,
                       const char* what)
{
    if (phi.rows() != model.size() || phi.cols() != model.size())
        throw StructuralError(std::string(what) + ": phi must be n x n for the model");
}

} // namespace

// ---------------------------------------------------------------------------
// Transform specs

RhoTransform::RhoTransform(Eigen::VectorXd rho) : rho_(std::move(rho))
{
    if (rho_.size() == 0)
        throw StructuralError("rho transform: empty rho");
    for (Eigen::Index x = 0; x < rho_.size(); ++x)
        if (!(rho_(x) > 0.0) || !std::isfinite(rho_(x)))
            throw InvalidTransform("rho transform: rho(" + std::to_string(x) +
                                   ") must be finite and > 0");
}

PureJumpPhi::PureJumpPhi(Eigen::MatrixXd phi) : phi_(std::move(phi))
{
    if (phi_.rows() != phi_.cols() || phi_.rows() == 0)
        throw StructuralError("pure-jump phi: matrix must be square and non-empty");
    require_finite(phi_, "pure-jump phi");
    for (Eigen::Index x = 0; x < phi_.rows(); ++x) {
        if (phi_(x, x) != 0.0)
            throw InvalidTransform("pure-jump phi: phi(x,x) must be 0");
        for (Eigen::Index y = 0; y < phi_.cols(); ++y) {
            if (!(phi_(x, y) > -1.0)) {
                std::ostringstream msg;
                msg << "pure-jump phi: phi(" << x << "," << y << ") = " << phi_(x, y)
                    << " must be > -1";
                throw InvalidTransform(msg.str());
            }
            if (phi_(x, y) != phi_(y, x)) {
                std::ostringstream msg;
                msg << "pure-jump phi: not symmetric at (" << x << "," << y << ")";
                throw InvalidTransform(msg.str());
            }
        }
    }
}

GeneralMF::GeneralMF(Eigen::VectorXd mc_integrand, Eigen::VectorXd a_rate, Eigen::MatrixXd phi,
                     Eigen::VectorXd phi_cemetery)
    : mc_integrand_(std::move(mc_integrand)), a_rate_(std::move(a_rate)), phi_(std::move(phi)),
      phi_cemetery_(std::move(phi_cemetery))
{
    const auto n = phi_.rows();
    if (phi_.cols() != n || mc_integrand_.size() != n || a_rate_.size() != n ||
        phi_cemetery_.size() != n)
        throw StructuralError("general MF: mc_integrand, a_rate, phi and phi_cemetery sizes differ");
    require_finite(phi_, "general MF phi");
    require_finite(phi_cemetery_, "general MF phi_cemetery");
    require_finite(mc_integrand_, "general MF mc_integrand");
    for (Eigen::Index x = 0; x < n; ++x) {
        if (!(a_rate_(x) >= 0.0) || !std::isfinite(a_rate_(x)))
            throw InvalidTransform("general MF: A rate must be finite and >= 0");
        if (!(phi_cemetery_(x) >= -1.0))
            throw InvalidTransform("general MF: phi(x, Delta) must be >= -1");
        for (Eigen::Index y = 0; y < n; ++y)
            if (!(phi_(x, y) >= -1.0))
                throw InvalidTransform("general MF: phi must be >= -1");
    }
}

void validate_transform(const FiniteSymmetricModel& model, const TransformSpec& transform)
{
    std::visit(
        [&](const auto& spec) {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, RhoTransform>) {
                model.require_state_function(spec.rho(), "rho transform");
            } else if constexpr (std::is_same_v<T, PureJumpPhi>) {
                require_phi_shape(model, spec.phi(), "pure-jump transform");
            } else {
                require_phi_shape(model, spec.phi(), "general MF");
                if (!(spec.mc_integrand().array() == 0.0).all())
                    throw InvalidTransform(
                        "general MF: a finite chain has no continuous martingale part; "
                        "mc_integrand must be 0");
            }
        },
        transform);
}

// ---------------------------------------------------------------------------
// Traces

double MFTrace::z(std::size_t i) const { return std::exp(log_z.at(i)); }

double MFTrace::z_left(std::size_t i) const { return std::exp(log_z_left.at(i)); }

MFTrace rho_transform_mf(const ChainPath& path, const RhoTransform& rho,
                         const FiniteSymmetricModel& model, double t)
{
    validate_transform(model, rho);
    require_path_in_model(path, model);
    require_time(path, t, "rho_transform_mf");
    const Eigen::VectorXd drift = rho_log_drift(model, rho.rho());
    const double log_rho0 = std::log(rho.rho()(path.x0()));
    auto log_rho = [&](int x) { return x == kCemetery ? kNegInf : std::log(rho.rho()(x)); };

    MFTrace trace;
    double integral = 0.0; // int_0^s (Q rho / rho)(X_u) du
    int left_state = path.x0();
    walk_epochs(
        path, t, [&](int x, double dt) { integral += drift(x) * dt; },
        [&](int x, int) { left_state = x; },
        [&](double s, int state, bool is_jump) {
            const double value = log_rho(state) - log_rho0 - integral;
            trace.times.push_back(s);
            trace.log_z.push_back(value);
            trace.log_z_left.push_back(is_jump ? log_rho(left_state) - log_rho0 - integral : value);
            trace.jump.push_back(is_jump);
            if (value == kNegInf && !trace.zero_time)
                trace.zero_time = s;
        });
    return trace;
}

GeneralMF general_from_rho(const FiniteSymmetricModel& model, const RhoTransform& rho)
{
    model.require_state_function(rho.rho(), "general_from_rho");
    const int n = model.size();
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            if (x != y)
                phi(x, y) = rho.rho()(y) / rho.rho()(x) - 1.0;
    return GeneralMF(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), std::move(phi),
                     Eigen::VectorXd::Constant(n, -1.0));
}

MFTrace rho_transform_mf_incremental(const ChainPath& path, const RhoTransform& rho,
                                     const FiniteSymmetricModel& model, double t)
{
    return general_mf(path, general_from_rho(model, rho), model, t);
}

MFTrace pure_jump_mf(const ChainPath& path, const PureJumpPhi& phi,
                     const FiniteSymmetricModel& model, double t)
{
    validate_transform(model, phi);
    require_path_in_model(path, model);
    require_time(path, t, "pure_jump_mf");
    const Eigen::VectorXd rate = compensator_rate(model, phi.phi());
    return product_trace(path, t, rate, [&](int x, int y) {
        return y == kCemetery ? 0.0 : std::log1p(phi.phi()(x, y));
    });
}

MFTrace general_mf(const ChainPath& path, const GeneralMF& spec,
                   const FiniteSymmetricModel& model, double t)
{
    validate_transform(model, spec);
    require_path_in_model(path, model);
    require_time(path, t, "general_mf");
    // M_t = sum phi(X_{s-}, X_s) - int N phi(X_s) ds, where N phi includes the
    // killing jump k(x) phi(x, Delta).
    Eigen::VectorXd n_phi = compensator_rate(model, spec.phi());
    n_phi += model.k().cwiseProduct(spec.phi_cemetery());
    const double integrability = n_phi.cwiseAbs().maxCoeff() * t;
    if (!std::isfinite(integrability))
        throw IntegrabilityError("general_mf: compensator of phi is not finite along the path");

    double m = 0.0;       // M_t
    double a = 0.0;       // A_t
    double log_prod = 0.0; // sum log(1 + phi) - phi
    double left = 0.0;
    MFTrace trace;
    walk_epochs(
        path, t,
        [&](int x, double dt) {
            m -= n_phi(x) * dt;
            a += spec.a_rate()(x) * dt;
        },
        [&](int x, int y) {
            left = m - a + log_prod;
            const double jump = spec.phi_at(x, y);
            m += jump;
            log_prod += safe_log1p(jump) - jump;
        },
        [&](double s, int, bool is_jump) {
            const double value = m - a + log_prod;
            trace.times.push_back(s);
            trace.log_z.push_back(value);
            trace.log_z_left.push_back(is_jump ? left : value);
            trace.jump.push_back(is_jump);
            if (value == kNegInf && !trace.zero_time)
                trace.zero_time = s;
        });
    return trace;
}

SplitTrace split_mf(const ChainPath& path, const PureJumpPhi& phi,
                    const FiniteSymmetricModel& model, double t)
{
    validate_transform(model, phi);
    require_path_in_model(path, model);
    require_time(path, t, "split_mf");
    const Eigen::MatrixXd plus = phi.phi().cwiseMax(0.0);
    const Eigen::MatrixXd minus = (-phi.phi()).cwiseMax(0.0);
    // Z^+ = prod (1 + phi^+) exp(+int N phi^-);  Z^- = prod (1 - phi^-) exp(-int N phi^+)
    const Eigen::VectorXd rate_plus = -compensator_rate(model, minus);
    const Eigen::VectorXd rate_minus = compensator_rate(model, plus);
    SplitTrace out;
    out.plus = product_trace(path, t, rate_plus, [&](int x, int y) {
        return y == kCemetery ? 0.0 : std::log1p(plus(x, y));
    });
    out.minus = product_trace(path, t, rate_minus, [&](int x, int y) {
        return y == kCemetery ? 0.0 : std::log1p(-minus(x, y));
    });
    return out;
}

double terminal_weight(const ChainPath& path, const FiniteSymmetricModel& model,
                       const TransformSpec& transform, double t)
{
    return std::visit(
        [&](const auto& spec) {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, RhoTransform>)
                return rho_transform_mf(path, spec, model, t).final_z();
            else if constexpr (std::is_same_v<T, PureJumpPhi>)
                return pure_jump_mf(path, spec, model, t).final_z();
            else
                return general_mf(path, spec, model, t).final_z();
        },
        transform);
}

// ---------------------------------------------------------------------------
// Transformed structure

Eigen::MatrixXd gamma(const FiniteSymmetricModel& model, const Eigen::VectorXd& rho,
                      const Eigen::MatrixXd& phi)
{
    model.require_state_function(rho, "gamma");
    require_phi_shape(model, phi, "gamma");
    const Eigen::MatrixXd j = jump_measure(model);
    const int n = model.size();
    Eigen::MatrixXd out(n, n);
    for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
            out(x, y) = rho(x) * rho(x) * (1.0 + phi(x, y));
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            if (x == y || j(x, y) <= 0.0)
                continue;
            // gamma symmetric <=> rho(y)^2/rho(x)^2 = (1+phi(x,y))/(1+phi(y,x))
            const double lhs = rho(y) * rho(y) * (1.0 + phi(y, x));
            const double rhs = rho(x) * rho(x) * (1.0 + phi(x, y));
            if (std::abs(lhs - rhs) > kGammaTolerance * std::max({1.0, std::abs(lhs), std::abs(rhs)})) {
                std::ostringstream msg;
                msg << "gamma: consistency relation fails on the J-charged pair (" << x << "," << y
                    << "): gamma(x,y) = " << rhs << ", gamma(y,x) = " << lhs;
                throw InvalidTransform(msg.str());
            }
        }
    }
    return out;
}

Eigen::MatrixXd jump_factor(const FiniteSymmetricModel& model, const TransformSpec& transform)
{
    validate_transform(model, transform);
    const int n = model.size();
    Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            if (x == y)
                continue;
            factor(x, y) = std::visit(
                [&](const auto& spec) {
                    using T = std::decay_t<decltype(spec)>;
                    if constexpr (std::is_same_v<T, RhoTransform>)
                        return spec.rho()(y) / spec.rho()(x);
                    else
                        return 1.0 + spec.phi()(x, y);
                },
                transform);
        }
    }
    return factor;
}

Eigen::VectorXd symmetrizing_density(const FiniteSymmetricModel& model,
                                     const TransformSpec& transform)
{
    validate_transform(model, transform);
    if (const auto* r = std::get_if<RhoTransform>(&transform))
        return r->rho();
    const int n = model.size();
    if (std::holds_alternative<PureJumpPhi>(transform))
        return Eigen::VectorXd::Ones(n);

    const auto& phi = std::get<GeneralMF>(transform).phi();
    require_symmetric(model);
    // rho^2 along a spanning forest of the jump graph.
    Eigen::VectorXd rho2 = Eigen::VectorXd::Zero(n);
    for (int root = 0; root < n; ++root) {
        if (rho2(root) > 0.0)
            continue;
        rho2(root) = 1.0;
        std::queue<int> frontier;
        frontier.push(root);
        while (!frontier.empty()) {
            const int x = frontier.front();
            frontier.pop();
            for (int y = 0; y < n; ++y) {
                if (y == x || model.q()(x, y) <= 0.0 || rho2(y) > 0.0)
                    continue;
                const double forward = 1.0 + phi(x, y);
                const double backward = 1.0 + phi(y, x);
                if (forward <= 0.0 || backward <= 0.0) {
                    std::ostringstream msg;
                    msg << "general MF: phi = -1 on the J-charged pair (" << x << "," << y
                        << ") has no symmetrizing measure";
                    throw InvalidTransform(msg.str());
                }
                rho2(y) = rho2(x) * forward / backward;
                frontier.push(y);
            }
        }
    }
    Eigen::VectorXd rho = rho2.cwiseSqrt();
    gamma(model, rho, phi); // throws when a cycle breaks the consistency relation
    return rho;
}

TransformedStructure transformed_structure(const FiniteSymmetricModel& model,
                                           const TransformSpec& transform)
{
    require_symmetric(model);
    TransformedStructure s;
    s.rho = symmetrizing_density(model, transform);
    const Eigen::VectorXd rho2 = s.rho.cwiseProduct(s.rho);
    s.measure = rho2.cwiseProduct(model.m());
    const Eigen::MatrixXd factor = jump_factor(model, transform);
    s.kernel = factor.cwiseProduct(model.q());
    s.gamma = rho2.asDiagonal() * factor;
    s.jump = s.gamma.cwiseProduct(jump_measure(model));
    const Eigen::VectorXd kappa = killing_measure(model);
    s.killing = std::visit(
        [&](const auto& spec) -> Eigen::VectorXd {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, RhoTransform>) {
                // rho(Delta) = 0, so phi(x, Delta) = -1 and the killing term vanishes.
                return rho2.cwiseProduct((1.0 + (-1.0)) * kappa);
            } else if constexpr (std::is_same_v<T, PureJumpPhi>) {
                return rho2.cwiseProduct(kappa);
            } else {
                const Eigen::VectorXd mu_a = spec.a_rate().cwiseProduct(model.m());
                return rho2.cwiseProduct(
                    (Eigen::VectorXd::Ones(model.size()) + spec.phi_cemetery()).cwiseProduct(kappa) +
                    mu_a);
            }
        },
        transform);
    s.killing_rate = s.killing.cwiseQuotient(s.measure);
    return s;
}

Eigen::MatrixXd transformed_levy_kernel(const FiniteSymmetricModel& model,
                                        const TransformSpec& transform)
{
    return transformed_structure(model, transform).kernel;
}

Eigen::MatrixXd transformed_jump_measure(const FiniteSymmetricModel& model,
                                         const TransformSpec& transform)
{
    return transformed_structure(model, transform).jump;
}

Eigen::VectorXd transformed_killing(const FiniteSymmetricModel& model,
                                    const TransformSpec& transform)
{
    return transformed_structure(model, transform).killing;
}

FiniteSymmetricModel transformed_model(const FiniteSymmetricModel& model,
                                       const TransformSpec& transform)
{
    auto s = transformed_structure(model, transform);
    return FiniteSymmetricModel(std::move(s.measure), std::move(s.kernel),
                                std::move(s.killing_rate));
}

Eigen::VectorXd transformed_revuz(const Eigen::VectorXd& mu, const Eigen::VectorXd& rho)
{
    if (mu.size() != rho.size())
        throw StructuralError("transformed_revuz: mu and rho sizes differ");
    return rho.cwiseProduct(rho).cwiseProduct(mu);
}

double reversal_identity_residual(const ChainPath& path, const RhoTransform& rho,
                                  const FiniteSymmetricModel& model, double t)
{
    const auto reversed = reverse(path, t);
    const double forward = rho_transform_mf(path, rho, model, t).final_z();
    const double backward = rho_transform_mf(reversed, rho, model, t).final_z();
    const double r0 = rho.rho()(path.x0());
    const double rt = rho.rho()(path.state_at(t));
    return std::abs(backward - forward * (r0 * r0) / (rt * rt));
}

double inverse_transform(double phi)
{
    if (!(phi > -1.0) || !std::isfinite(phi))
        throw InvalidTransform("inverse_transform: phi must be finite and > -1");
    return -phi / (1.0 + phi);
}

Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& phi)
{
    return phi.unaryExpr([](double v) { return inverse_transform(v); });
}

} // namespace girsanov
