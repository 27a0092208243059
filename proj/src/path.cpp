#include "girsanov/path.hpp"

#include "girsanov/errors.hpp"
#include "girsanov/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace girsanov {

namespace {

void require_time(double t, double horizon, const char* what)
{
    if (!(t >= 0.0) || t > horizon) {
        std::ostringstream msg;
        msg << what << ": t = " << t << " outside [0, horizon = " << horizon << "]";
        throw DomainError(msg.str());
    }
}

} // namespace

// ---------------------------------------------------------------------------
// ChainPath

ChainPath::ChainPath(int x0, std::vector<ChainEvent> events, double horizon,
                     std::optional<double> killed_at)
    : x0_(x0), events_(std::move(events)), horizon_(horizon), killed_at_(killed_at)
{
    if (x0_ < 0)
        throw StructuralError("path: initial state must be a state index");
    if (!(horizon_ >= 0.0) || !std::isfinite(horizon_))
        throw DomainError("path: horizon must be finite and >= 0");
    double last_time = 0.0;
    int last_state = x0_;
    for (const auto& e : events_) {
        if (!(e.time > last_time) || e.time > horizon_)
            throw DomainError("path: event times must increase strictly within (0, horizon]");
        if (e.state < 0)
            throw StructuralError("path: event state must be a state index");
        if (e.state == last_state)
            throw DomainError("path: event at t = " + std::to_string(e.time) +
                              " does not change the state");
        last_time = e.time;
        last_state = e.state;
    }
    if (killed_at_) {
        if (!(*killed_at_ > last_time) || *killed_at_ > horizon_)
            throw DomainError("path: killing time must follow the last event and lie in (0, horizon]");
    }
}

int ChainPath::state_at(double s) const
{
    if (killed_at_ && s >= *killed_at_)
        return kCemetery;
    auto it = std::upper_bound(events_.begin(), events_.end(), s,
                               [](double v, const ChainEvent& e) { return v < e.time; });
    return it == events_.begin() ? x0_ : std::prev(it)->state;
}

int ChainPath::left_limit(double s) const
{
    if (killed_at_ && s > *killed_at_)
        return kCemetery;
    auto it = std::lower_bound(events_.begin(), events_.end(), s,
                               [](const ChainEvent& e, double v) { return e.time < v; });
    return it == events_.begin() ? x0_ : std::prev(it)->state;
}

ChainPath reverse(const ChainPath& path, double t)
{
    require_time(t, path.horizon(), "reverse");
    if (path.killed_at() && *path.killed_at() < t)
        throw DomainError("reverse: path is killed before t");
    const auto& ev = path.events();
    std::vector<ChainEvent> out;
    // Jumps strictly before t become jumps at t - tau to the pre-jump state;
    // a jump exactly at t is invisible to s -> X((t-s)-).
    std::size_t count = 0;
    while (count < ev.size() && ev[count].time < t)
        ++count;
    out.reserve(count);
    for (std::size_t j = count; j-- > 0;) {
        const int before = j == 0 ? path.x0() : ev[j - 1].state;
        out.push_back({t - ev[j].time, before});
    }
    return ChainPath(path.left_limit(t), std::move(out), t);
}

ChainPath shift(const ChainPath& path, double s)
{
    require_time(s, path.horizon(), "shift");
    if (!path.alive_at(s))
        throw DomainError("shift: path is dead at the shift time");
    std::vector<ChainEvent> out;
    for (const auto& e : path.events())
        if (e.time > s)
            out.push_back({e.time - s, e.state});
    std::optional<double> killed;
    if (path.killed_at())
        killed = *path.killed_at() - s;
    return ChainPath(path.state_at(s), std::move(out), path.horizon() - s, killed);
}

double integrate_along(const ChainPath& path, const Eigen::VectorXd& f, double t)
{
    require_time(t, path.horizon(), "integrate_along");
    auto bad = [&](int x) { return x >= f.size(); };
    if (bad(path.x0()) || std::any_of(path.events().begin(), path.events().end(),
                                      [&](const ChainEvent& e) { return bad(e.state); }))
        throw StructuralError("integrate_along: path visits a state outside f");
    const double end = path.killed_at() ? std::min(t, *path.killed_at()) : t;
    double acc = 0.0;
    double from = 0.0;
    int state = path.x0();
    for (const auto& e : path.events()) {
        if (e.time >= end)
            break;
        acc += f(state) * (e.time - from);
        from = e.time;
        state = e.state;
    }
    if (end > from)
        acc += f(state) * (end - from);
    return acc;
}

double jump_sum(const ChainPath& path, const StatePairFunction& f, double t)
{
    require_time(t, path.horizon(), "jump_sum");
    double acc = 0.0;
    int state = path.x0();
    for (const auto& e : path.events()) {
        if (e.time > t)
            break;
        acc += f(state, e.state);
        state = e.state;
    }
    return acc;
}

double evenness_residual(const ChainPath& path, const Eigen::VectorXd& f, double t)
{
    const auto reversed = reverse(path, t);
    return std::abs(integrate_along(path, f, t) - integrate_along(reversed, f, t));
}

double lyons_zheng_residual(const ChainPath& path, const Eigen::VectorXd& u,
                            const FiniteSymmetricModel& model, double t)
{
    model.require_state_function(u, "lyons_zheng_residual");
    require_time(t, path.horizon(), "lyons_zheng_residual");
    if (path.killed_at() && *path.killed_at() < t)
        throw DomainError("lyons_zheng_residual: path is killed before t");
    for (const auto& e : path.events())
        if (e.state >= model.size())
            throw StructuralError("lyons_zheng_residual: path visits a state outside the model");
    // No diffusion part on a chain: the forward-backward martingale term vanishes.
    const double lhs = u(path.state_at(t)) - u(path.x0());
    const double jumps = jump_sum(path, [&u](int x, int y) { return u(y) - u(x); }, t);
    return std::abs(lhs - jumps);
}

void write_csv(std::ostream& out, const ChainPath& path)
{
    out << "time,state,event_flag\n";
    out << "0," << path.x0() << ",0\n";
    for (const auto& e : path.events())
        out << format_double(e.time) << ',' << e.state << ",1\n";
    if (path.killed_at())
        out << format_double(*path.killed_at()) << ',' << kCemetery << ",1\n";
    out << format_double(path.horizon()) << ',' << path.state_at(path.horizon()) << ",0\n";
}

// ---------------------------------------------------------------------------
// DiffusionPath

DiffusionPath::DiffusionPath(int dim, double dt, std::vector<double> continuous,
                             std::vector<double> jump_times, std::vector<double> jump_displacements)
    : dim_(dim), dt_(dt), continuous_(std::move(continuous)), jump_times_(std::move(jump_times)),
      jump_displacements_(std::move(jump_displacements))
{
    if (dim_ < 1)
        throw StructuralError("diffusion path: dimension must be >= 1");
    if (!(dt_ > 0.0))
        throw DomainError("diffusion path: dt must be > 0");
    const auto d = static_cast<std::size_t>(dim_);
    if (continuous_.empty() || continuous_.size() % d != 0)
        throw StructuralError("diffusion path: grid size is not a multiple of the dimension");
    if (jump_displacements_.size() != jump_times_.size() * d)
        throw StructuralError("diffusion path: one displacement vector per jump time expected");
    double last = 0.0;
    for (std::size_t j = 0; j < jump_times_.size(); ++j) {
        if (!(jump_times_[j] > last) || jump_times_[j] > horizon() * (1.0 + 1e-12))
            throw DomainError("diffusion path: jump times must increase strictly within (0, horizon]");
        last = jump_times_[j];
        const auto z = jump(j);
        if (std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; }))
            throw DomainError("diffusion path: zero jump displacement");
    }
}

std::span<const double> DiffusionPath::jump(std::size_t j) const
{
    return {jump_displacements_.data() + j * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
}

std::vector<double> DiffusionPath::x0() const
{
    return {continuous_.begin(), continuous_.begin() + dim_};
}

std::vector<double> DiffusionPath::continuous_at(double s) const
{
    const auto d = static_cast<std::size_t>(dim_);
    const std::size_t n = steps();
    std::vector<double> out(d);
    if (n == 0) {
        std::copy_n(continuous_.begin(), d, out.begin());
        return out;
    }
    const double pos = std::clamp(s / dt_, 0.0, static_cast<double>(n));
    const auto k = std::min(static_cast<std::size_t>(pos), n - 1);
    const double w = pos - static_cast<double>(k);
    for (std::size_t i = 0; i < d; ++i)
        out[i] = (1.0 - w) * continuous_[k * d + i] + w * continuous_[(k + 1) * d + i];
    return out;
}

std::vector<double> DiffusionPath::position(double s) const
{
    auto out = continuous_at(s);
    for (std::size_t j = 0; j < jump_times_.size() && jump_times_[j] <= s; ++j) {
        const auto z = jump(j);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += z[i];
    }
    return out;
}

std::vector<double> DiffusionPath::left_position(double s) const
{
    auto out = continuous_at(s);
    for (std::size_t j = 0; j < jump_times_.size() && jump_times_[j] < s; ++j) {
        const auto z = jump(j);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += z[i];
    }
    return out;
}

std::vector<double> DiffusionPath::partition(double t) const
{
    std::vector<double> pts;
    const auto n = steps();
    for (std::size_t k = 0; k <= n; ++k) {
        const double s = dt_ * static_cast<double>(k);
        if (s >= t)
            break;
        pts.push_back(s);
    }
    for (double tau : jump_times_)
        if (tau > 0.0 && tau < t)
            pts.push_back(tau);
    pts.push_back(t);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

namespace {

double grid_time(const DiffusionPath& path, double t, const char* what)
{
    require_time(t, path.horizon() * (1.0 + 1e-12), what);
    const double k = std::round(t / path.dt());
    if (std::abs(k * path.dt() - t) > 1e-9 * path.dt())
        throw DomainError(std::string(what) + ": t must lie on the sample grid of a diffusion path");
    return k * path.dt();
}

std::vector<double> gradient(const PointFunction& u, std::span<const double> x)
{
    std::vector<double> p(x.begin(), x.end());
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
        const double xi = p[i];
        p[i] = xi + h;
        const double up = u(p);
        p[i] = xi - h;
        const double down = u(p);
        p[i] = xi;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

} // namespace

DiffusionPath reverse(const DiffusionPath& path, double t)
{
    const double tg = grid_time(path, t, "reverse");
    const auto d = static_cast<std::size_t>(path.dim());
    const auto k_end = static_cast<std::size_t>(std::llround(tg / path.dt()));
    // X_hat(s) = C(t-s) + sum_{tau < t-s} z = C_hat(s) + sum_{t - tau <= s} (-z)
    // with C_hat(s) = C(t-s) + sum_{tau < t} z.
    std::vector<double> shift_sum(d, 0.0);
    std::size_t count = 0;
    while (count < path.jump_count() && path.jump_times()[count] < tg) {
        const auto z = path.jump(count);
        for (std::size_t i = 0; i < d; ++i)
            shift_sum[i] += z[i];
        ++count;
    }
    std::vector<double> cont((k_end + 1) * d);
    const auto& c = path.continuous();
    for (std::size_t k = 0; k <= k_end; ++k)
        for (std::size_t i = 0; i < d; ++i)
            cont[k * d + i] = c[(k_end - k) * d + i] + shift_sum[i];
    std::vector<double> times;
    std::vector<double> disp;
    times.reserve(count);
    disp.reserve(count * d);
    for (std::size_t j = count; j-- > 0;) {
        times.push_back(tg - path.jump_times()[j]);
        const auto z = path.jump(j);
        for (std::size_t i = 0; i < d; ++i)
            disp.push_back(-z[i]);
    }
    return DiffusionPath(path.dim(), path.dt(), std::move(cont), std::move(times), std::move(disp));
}

double integrate_along(const DiffusionPath& path, const PointFunction& f, double t)
{
    require_time(t, path.horizon() * (1.0 + 1e-12), "integrate_along");
    if (t == 0.0)
        return 0.0;
    const auto pts = path.partition(t);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i];
        const double b = pts[i + 1];
        acc += 0.5 * (f(path.position(a)) + f(path.left_position(b))) * (b - a);
    }
    return acc;
}

double jump_sum(const DiffusionPath& path, const PairFunction& f, double t)
{
    require_time(t, path.horizon() * (1.0 + 1e-12), "jump_sum");
    double acc = 0.0;
    for (std::size_t j = 0; j < path.jump_count() && path.jump_times()[j] <= t; ++j) {
        const double tau = path.jump_times()[j];
        acc += f(path.left_position(tau), path.position(tau));
    }
    return acc;
}

double evenness_residual(const DiffusionPath& path, const PointFunction& f, double t)
{
    const auto reversed = reverse(path, t);
    const double tg = reversed.horizon();
    return std::abs(integrate_along(path, f, tg) - integrate_along(reversed, f, tg));
}

double continuous_martingale(const DiffusionPath& path, const PointFunction& u, double t)
{
    require_time(t, path.horizon() * (1.0 + 1e-12), "continuous_martingale");
    if (t == 0.0)
        return 0.0;
    const auto pts = path.partition(t);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const auto grad = gradient(u, path.position(pts[i]));
        const auto ca = path.continuous_at(pts[i]);
        const auto cb = path.continuous_at(pts[i + 1]);
        for (std::size_t k = 0; k < grad.size(); ++k)
            acc += grad[k] * (cb[k] - ca[k]);
    }
    return acc;
}

double lyons_zheng_residual(const DiffusionPath& path, const PointFunction& u,
                            const JumpDiffusionModel& model, double t)
{
    if (path.dim() != model.dimension())
        throw StructuralError("lyons_zheng_residual: path dimension does not match the model");
    const auto reversed = reverse(path, t);
    const double tg = reversed.horizon();
    const double lhs = u(path.position(tg)) - u(path.x0());
    const double forward_backward =
        0.5 * (continuous_martingale(path, u, tg) - continuous_martingale(reversed, u, tg));
    const double jumps = jump_sum(
        path, [&u](std::span<const double> a, std::span<const double> b) { return u(b) - u(a); },
        tg);
    const double residual = lhs - forward_backward - jumps;
    if (!std::isfinite(residual))
        throw DomainError("lyons_zheng_residual: u is not finite along the path");
    return std::abs(residual);
}

void write_csv(std::ostream& out, const DiffusionPath& path)
{
    out << "time";
    for (int i = 1; i <= path.dim(); ++i)
        out << ",x" << i;
    out << ",event_flag\n";
    auto row = [&](double s, const std::vector<double>& x, int flag) {
        out << format_double(s);
        for (double v : x)
            out << ',' << format_double(v);
        out << ',' << flag << '\n';
    };
    std::size_t j = 0;
    for (std::size_t k = 0; k <= path.steps(); ++k) {
        const double s = path.dt() * static_cast<double>(k);
        for (; j < path.jump_count() && path.jump_times()[j] <= s; ++j)
            row(path.jump_times()[j], path.position(path.jump_times()[j]), 1);
        row(s, path.position(s), 0);
    }
}

} // namespace girsanov
