#include "girsanov/montecarlo.hpp"

#include "girsanov/errors.hpp"
#include "girsanov/numeric.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace girsanov {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Precomputed jump tables for Gillespie sampling.
class ChainSampler {
public:
    explicit ChainSampler(const FiniteSymmetricModel& model) : model_(model)
    {
        const int n = model.size();
        cumulative_.resize(static_cast<std::size_t>(n));
        for (int x = 0; x < n; ++x) {
            auto& row = cumulative_[static_cast<std::size_t>(x)];
            double acc = 0.0;
            for (int y = 0; y < n; ++y) {
                acc += y == x ? 0.0 : model.q()(x, y);
                row.push_back(acc);
            }
            row.push_back(acc + model.k()(x)); // last slot: killing
        }
    }

    ChainPath sample(int x0, double horizon, PathRng& rng) const
    {
        if (x0 < 0 || x0 >= model_.size())
            throw StructuralError("sample_finite_path: x0 is not a state of the model");
        if (!(horizon >= 0.0))
            throw DomainError("sample_finite_path: horizon must be >= 0");
        std::vector<ChainEvent> events;
        std::optional<double> killed;
        int x = x0;
        double now = 0.0;
        while (true) {
            const auto& row = cumulative_[static_cast<std::size_t>(x)];
            const double rate = row.back();
            if (rate <= 0.0)
                break;
            now += -std::log(rng.uniform()) / rate;
            if (now > horizon)
                break;
            const double u = rng.uniform() * rate;
            const auto it = std::upper_bound(row.begin(), row.end() - 1, u);
            const auto target = static_cast<int>(it - row.begin());
            if (target >= model_.size()) {
                killed = now;
                break;
            }
            events.push_back({now, target});
            x = target;
        }
        return ChainPath(x0, std::move(events), horizon, killed);
    }

private:
    const FiniteSymmetricModel& model_;
    std::vector<std::vector<double>> cumulative_;
};

/// log Z_t = sum of log jump factors - int rate(X_s) ds, for any transform.
class ChainWeight {
public:
    ChainWeight(const FiniteSymmetricModel& model, const TransformSpec& transform)
    {
        validate_transform(model, transform);
        const int n = model.size();
        rate_ = Eigen::VectorXd::Zero(n);
        log_jump_ = Eigen::MatrixXd::Zero(n, n);
        log_kill_ = Eigen::VectorXd::Zero(n);
        std::visit(
            [&](const auto& spec) {
                using T = std::decay_t<decltype(spec)>;
                if constexpr (std::is_same_v<T, RhoTransform>) {
                    const auto& rho = spec.rho();
                    rate_ = model.apply_generator(rho).cwiseQuotient(rho);
                    for (int x = 0; x < n; ++x)
                        for (int y = 0; y < n; ++y)
                            log_jump_(x, y) = std::log(rho(y)) - std::log(rho(x));
                    log_kill_.setConstant(kNegInf);
                } else {
                    const auto& phi = spec.phi();
                    for (int x = 0; x < n; ++x)
                        for (int y = 0; y < n; ++y)
                            if (x != y) {
                                rate_(x) += model.q()(x, y) * phi(x, y);
                                log_jump_(x, y) = phi(x, y) == -1.0 ? kNegInf : std::log1p(phi(x, y));
                            }
                    if constexpr (std::is_same_v<T, GeneralMF>) {
                        for (int x = 0; x < n; ++x) {
                            const double pd = spec.phi_cemetery()(x);
                            rate_(x) += model.k()(x) * pd + spec.a_rate()(x);
                            log_kill_(x) = pd == -1.0 ? kNegInf : std::log1p(pd);
                        }
                    }
                }
            },
            transform);
    }

    double log_weight(const ChainPath& path, double t) const
    {
        double acc = 0.0;
        int x = path.x0();
        double now = 0.0;
        for (const auto& e : path.events()) {
            if (e.time > t)
                break;
            acc += log_jump_(x, e.state) - rate_(x) * (e.time - now);
            now = e.time;
            x = e.state;
        }
        if (path.killed_at() && *path.killed_at() <= t)
            return acc - rate_(x) * (*path.killed_at() - now) + log_kill_(x);
        return acc - rate_(x) * (t - now);
    }

    double weight(const ChainPath& path, double t) const { return std::exp(log_weight(path, t)); }

private:
    Eigen::VectorXd rate_;
    Eigen::MatrixXd log_jump_;
    Eigen::VectorXd log_kill_;
};

class Categorical {
public:
    explicit Categorical(const Eigen::VectorXd& weights)
    {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < weights.size(); ++i) {
            acc += weights(i);
            cumulative_.push_back(acc);
        }
        if (!(acc > 0.0))
            throw DomainError("categorical sampling: total weight must be > 0");
    }

    int operator()(PathRng& rng) const
    {
        const double u = rng.uniform() * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end() - 1, u);
        return static_cast<int>(it - cumulative_.begin());
    }

    double total() const { return cumulative_.back(); }

private:
    std::vector<double> cumulative_;
};

void require_paths(const McOptions& options)
{
    if (options.paths < 2)
        throw DomainError("Monte Carlo estimate needs at least 2 paths");
}

void require_state(const FiniteSymmetricModel& model, int x, const char* what)
{
    if (x < 0 || x >= model.size())
        throw StructuralError(std::string(what) + ": state outside the model");
}

EstimatorResult ratio_estimate(const std::vector<double>& pairs)
{
    const std::size_t n = pairs.size() / 2;
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = pairs[2 * i];
        b[i] = pairs[2 * i + 1];
    }
    const double mean_a = pairwise_sum(a) / static_cast<double>(n);
    const double mean_b = pairwise_sum(b) / static_cast<double>(n);
    if (!(mean_b > 0.0))
        throw DomainError("jump intensity ratio: no weighted occupation time at the source state");
    const double ratio = mean_a / mean_b;
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i)
        resid[i] = a[i] - ratio * b[i];
    const auto moments = sample_moments(resid);
    const double se = std::sqrt(moments.variance / static_cast<double>(n)) / mean_b;
    return EstimatorResult::from_moments(ratio, se, n);
}

} // namespace

EstimatorResult EstimatorResult::from_samples(std::span<const double> samples)
{
    if (samples.size() < 2)
        throw DomainError("EstimatorResult: at least 2 samples are required");
    const auto m = sample_moments(samples);
    return from_moments(m.mean, std::sqrt(m.variance / static_cast<double>(m.n)), m.n);
}

EstimatorResult EstimatorResult::from_moments(double mean, double std_error, std::size_t n)
{
    EstimatorResult r;
    r.mean = mean;
    r.std_error = std_error;
    r.n = n;
    r.ci95 = {mean - 1.96 * std_error, mean + 1.96 * std_error};
    return r;
}

ChainPath sample_finite_path(const FiniteSymmetricModel& model, int x0, double horizon,
                             PathRng& rng)
{
    return ChainSampler(model).sample(x0, horizon, rng);
}

std::vector<ChainPath> sample_finite_paths(const FiniteSymmetricModel& model, int x0,
                                           double horizon, const McOptions& options)
{
    const ChainSampler sampler(model);
    std::vector<ChainPath> out;
    out.reserve(options.paths);
    for (std::size_t i = 0; i < options.paths; ++i) {
        PathRng rng(options.rng, i);
        out.push_back(sampler.sample(x0, horizon, rng));
    }
    return out;
}

bool jump_check_underpowered(const JumpDiffusionModel& model, double eps, double horizon)
{
    return model.jump_intensity(eps) * horizon < 1e-6;
}

DiffusionPath sample_jump_diffusion_path(const JumpDiffusionModel& model,
                                         std::span<const double> x0, double horizon, double dt,
                                         double eps, PathRng& rng)
{
    const int d = model.dimension();
    if (static_cast<int>(x0.size()) != d)
        throw StructuralError("sample_jump_diffusion_path: x0 dimension does not match the model");
    if (!(dt > 0.0) || !(eps > 0.0) || !(horizon >= 0.0))
        throw DomainError("sample_jump_diffusion_path: dt, eps must be > 0 and horizon >= 0");
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    const double sd = std::sqrt((1.0 + model.small_jump_variance(eps)) * dt);

    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> continuous(x0.begin(), x0.end());
    continuous.reserve((steps + 1) * static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < steps; ++k)
        for (int i = 0; i < d; ++i)
            continuous.push_back(continuous[k * static_cast<std::size_t>(d) + i] + sd * normal(rng));

    std::vector<double> times;
    std::vector<double> displacements;
    const double lambda = model.c() > 0.0 ? model.jump_intensity(eps) : 0.0;
    const double end = dt * static_cast<double>(steps);
    if (lambda > 0.0) {
        double now = -std::log(rng.uniform()) / lambda;
        while (now <= end) {
            const double radius = eps * std::pow(rng.uniform(), -1.0 / model.alpha());
            times.push_back(now);
            if (d == 1) {
                displacements.push_back(rng.uniform() < 0.5 ? -radius : radius);
            } else {
                std::vector<double> dir(static_cast<std::size_t>(d));
                double norm = 0.0;
                do {
                    norm = 0.0;
                    for (auto& v : dir) {
                        v = normal(rng);
                        norm += v * v;
                    }
                } while (norm == 0.0);
                norm = std::sqrt(norm);
                for (double v : dir)
                    displacements.push_back(radius * v / norm);
            }
            now += -std::log(rng.uniform()) / lambda;
        }
    }
    return DiffusionPath(d, dt, std::move(continuous), std::move(times), std::move(displacements));
}

EstimatorResult estimate_transformed_semigroup(const FiniteSymmetricModel& model,
                                               const TransformSpec& transform,
                                               const Eigen::VectorXd& f, int x, double t,
                                               const McOptions& options)
{
    require_paths(options);
    require_state(model, x, "estimate_transformed_semigroup");
    model.require_state_function(f, "estimate_transformed_semigroup");
    const ChainSampler sampler(model);
    const ChainWeight weight(model, transform);
    const auto values = parallel_map(options.paths, options.workers, [&](std::size_t i) {
        PathRng rng(options.rng, i);
        const auto path = sampler.sample(x, t, rng);
        const int end = path.state_at(t);
        return end == kCemetery ? 0.0 : weight.weight(path, t) * f(end);
    });
    return EstimatorResult::from_samples(values);
}

EstimatorResult estimate_symmetry_gap(const FiniteSymmetricModel& model,
                                      const TransformSpec& transform, const Eigen::VectorXd& f,
                                      const Eigen::VectorXd& g, double t,
                                      const McOptions& options)
{
    require_paths(options);
    model.require_state_function(f, "estimate_symmetry_gap");
    model.require_state_function(g, "estimate_symmetry_gap");
    if (f == g)
        return EstimatorResult::from_moments(0.0, 0.0, options.paths);
    const auto structure = transformed_structure(model, transform);
    const Categorical initial(structure.measure);
    const double mass = initial.total();
    const ChainSampler sampler(model);
    const ChainWeight weight(model, transform);
    const auto values = parallel_map(options.paths, options.workers, [&](std::size_t i) {
        PathRng rng(options.rng, i);
        const int x0 = initial(rng);
        const auto path = sampler.sample(x0, t, rng);
        const int end = path.state_at(t);
        const double z = weight.weight(path, t);
        return mass * z * (eval_state(f, end) * g(x0) - f(x0) * eval_state(g, end));
    });
    return EstimatorResult::from_samples(values);
}

EstimatorResult estimate_quadratic_form(const FiniteSymmetricModel& model,
                                        const TransformSpec& transform,
                                        const Eigen::VectorXd& f, double t,
                                        const McOptions& options)
{
    require_paths(options);
    model.require_state_function(f, "estimate_quadratic_form");
    if (!(t > 0.0))
        throw DomainError("estimate_quadratic_form: t must be > 0");
    const auto structure = transformed_structure(model, transform);
    const Categorical initial(structure.measure);
    const double scale = initial.total() / (2.0 * t);
    const ChainSampler sampler(model);
    const ChainWeight weight(model, transform);
    const auto values = parallel_map(options.paths, options.workers, [&](std::size_t i) {
        PathRng rng(options.rng, i);
        const int x0 = initial(rng);
        const auto path = sampler.sample(x0, t, rng);
        const int end = path.state_at(t);
        const double diff = eval_state(f, end) - f(x0);
        const double lost = end == kCemetery ? f(x0) * f(x0) : 0.0;
        const double z = weight.weight(path, t);
        return z == 0.0 ? 0.0 : scale * z * (diff * diff + lost);
    });
    return EstimatorResult::from_samples(values);
}

QuadraticFormTrend quadratic_form_trend(const FiniteSymmetricModel& model,
                                        const TransformSpec& transform,
                                        const Eigen::VectorXd& f, std::span<const double> ts,
                                        double target, const McOptions& options)
{
    QuadraticFormTrend trend;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        McOptions o = options;
        o.rng = replicate(options.rng, k);
        trend.points.push_back({ts[k], estimate_quadratic_form(model, transform, f, ts[k], o)});
    }
    trend.monotone = true;
    for (std::size_t k = 1; k < trend.points.size(); ++k) {
        const double prev = trend.points[k - 1].estimate.mean;
        const double cur = trend.points[k].estimate.mean;
        const bool towards = (target - prev) * (cur - prev) > 0.0;
        const bool closer = std::abs(target - cur) < std::abs(target - prev);
        trend.monotone = trend.monotone && towards && closer;
    }
    return trend;
}

EstimatorResult estimate_jump_intensity_ratio(const FiniteSymmetricModel& model,
                                              const TransformSpec& transform, int x, int y,
                                              double horizon, const McOptions& options)
{
    require_paths(options);
    require_state(model, x, "estimate_jump_intensity_ratio");
    require_state(model, y, "estimate_jump_intensity_ratio");
    if (x == y)
        throw DomainError("estimate_jump_intensity_ratio: x and y must differ");
    const ChainSampler sampler(model);
    const ChainWeight weight(model, transform);
    const auto pairs = parallel_map_multi(
        options.paths, 2, options.workers, [&](std::size_t i, std::span<double> out) {
            PathRng rng(options.rng, i);
            const auto path = sampler.sample(x, horizon, rng);
            double count = 0.0;
            double occupation = 0.0;
            int state = path.x0();
            double now = 0.0;
            for (const auto& e : path.events()) {
                if (state == x)
                    occupation += e.time - now;
                if (state == x && e.state == y)
                    count += 1.0;
                state = e.state;
                now = e.time;
            }
            const double end = path.killed_at() ? *path.killed_at() : horizon;
            if (state == x)
                occupation += end - now;
            const double z = weight.weight(path, horizon);
            out[0] = z * count;
            out[1] = z * occupation;
        });
    return ratio_estimate(pairs);
}

EstimatorResult estimate_mass(const FiniteSymmetricModel& model, const TransformSpec& transform,
                              int x, double t, const McOptions& options)
{
    require_paths(options);
    require_state(model, x, "estimate_mass");
    const ChainSampler sampler(model);
    const ChainWeight weight(model, transform);
    const auto values = parallel_map(options.paths, options.workers, [&](std::size_t i) {
        PathRng rng(options.rng, i);
        const auto path = sampler.sample(x, t, rng);
        return path.alive_at(t) ? weight.weight(path, t) : 0.0;
    });
    return EstimatorResult::from_samples(values);
}

EstimatorResult estimate_path_functional(
    const FiniteSymmetricModel& model, int x, double t,
    const std::function<double(const ChainPath&)>& functional, const McOptions& options)
{
    require_paths(options);
    require_state(model, x, "estimate_path_functional");
    const ChainSampler sampler(model);
    const auto values = parallel_map(options.paths, options.workers, [&](std::size_t i) {
        PathRng rng(options.rng, i);
        return functional(sampler.sample(x, t, rng));
    });
    return EstimatorResult::from_samples(values);
}

EstimatorResult estimate_weighted_path_functional(
    const FiniteSymmetricModel& model, const TransformSpec& transform, int x, double t,
    const std::function<double(const ChainPath&)>& functional, const McOptions& options)
{
    require_paths(options);
    require_state(model, x, "estimate_weighted_path_functional");
    const ChainSampler sampler(model);
    const ChainWeight weight(model, transform);
    const auto values = parallel_map(options.paths, options.workers, [&](std::size_t i) {
        PathRng rng(options.rng, i);
        const auto path = sampler.sample(x, t, rng);
        const double z = weight.weight(path, t);
        return z == 0.0 ? 0.0 : z * functional(path);
    });
    return EstimatorResult::from_samples(values);
}

std::size_t coverage_count(std::size_t replications, double oracle,
                           const std::function<EstimatorResult(const RngSpec&)>& run,
                           const RngSpec& base)
{
    std::size_t covered = 0;
    for (std::size_t r = 0; r < replications; ++r)
        if (run(replicate(base, r)).covers(oracle))
            ++covered;
    return covered;
}

EstimatorResult estimate_continuum_jump_rate(const JumpDiffusionModel& model, double horizon,
                                             double dt, double eps, const McOptions& options)
{
    require_paths(options);
    if (jump_check_underpowered(model, eps, horizon))
        spdlog::warn("jump intensity check underpowered: Lambda(eps) * horizon = {}",
                     model.jump_intensity(eps) * horizon);
    const std::vector<double> x0(static_cast<std::size_t>(model.dimension()), 0.0);
    const auto values = parallel_map(options.paths, options.workers, [&](std::size_t i) {
        PathRng rng(options.rng, i);
        const auto path = sample_jump_diffusion_path(model, x0, horizon, dt, eps, rng);
        return static_cast<double>(path.jump_count()) / path.horizon();
    });
    return EstimatorResult::from_samples(values);
}

EstimatorResult estimate_continuum_quadratic_form(const ContinuumRhoTransform& transform,
                                                  const RealFunction& f, Interval region,
                                                  double t, double dt,
                                                  const McOptions& options)
{
    require_paths(options);
    if (!(t > 0.0) || !(dt > 0.0))
        throw DomainError("estimate_continuum_quadratic_form: t and dt must be > 0");
    const double steps = std::round(t / dt);
    if (steps < 1.0 || std::abs(steps * dt - t) > 1e-9 * t)
        throw DomainError("estimate_continuum_quadratic_form: t must be a multiple of dt");
    const double scale = region.length() / (2.0 * t);
    const auto values = parallel_map(options.paths, options.workers, [&](std::size_t i) {
        PathRng rng(options.rng, i);
        const double x0 = region.lo + rng.uniform() * region.length();
        const double start[] = {x0};
        const auto path =
            sample_jump_diffusion_path(transform.model(), start, t, dt, transform.eps(), rng);
        const double tg = path.horizon();
        const double xt = path.position(tg)[0];
        const double z = std::exp(continuum_log_weight(path, transform, tg));
        const double r0 = transform.rho(x0);
        const double f0 = f(x0);
        const double diff = f(xt) - f0;
        const double lost = region.contains(xt) ? 0.0 : f0 * f0;
        return scale * r0 * r0 * z * (diff * diff + lost);
    });
    return EstimatorResult::from_samples(values);
}

EstimatorResult estimate_continuum_mass(const ContinuumRhoTransform& transform, double x,
                                        double t, double dt, const McOptions& options)
{
    require_paths(options);
    const auto values = parallel_map(options.paths, options.workers, [&](std::size_t i) {
        PathRng rng(options.rng, i);
        const double start[] = {x};
        const auto path =
            sample_jump_diffusion_path(transform.model(), start, t, dt, transform.eps(), rng);
        return std::exp(continuum_log_weight(path, transform, path.horizon()));
    });
    return EstimatorResult::from_samples(values);
}

} // namespace girsanov
