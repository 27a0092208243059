#include "girsanov/runner.hpp"

#include "girsanov/dirichlet.hpp"
#include "girsanov/errors.hpp"
#include "girsanov/montecarlo.hpp"
#include "girsanov/numeric.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace girsanov {

using nlohmann::json;

namespace {

constexpr double kExact = 1e-12;

/// Everything a check needs, built once per run.
struct Context {
    const ExperimentConfig& config;
    std::optional<FiniteSymmetricModel> chain{};
    std::optional<TransformSpec> transform{};
    std::optional<JumpDiffusionModel> continuum{};
    std::optional<ContinuumRhoTransform> continuum_transform{};
    std::uint64_t seed = 0;
    std::optional<std::size_t> paths{};
    unsigned workers = 0;
};

template <typename T>
T param(const CheckSpec& check, const char* key, T fallback)
{
    if (!check.params.contains(key))
        return fallback;
    try {
        return check.params.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("check " + check.id + ": parameter '" + key + "' has the wrong type");
    }
}

McOptions options_for(const Context& ctx, const CheckSpec& check, std::size_t index,
                      std::size_t default_paths)
{
    McOptions o;
    o.rng = RngSpec{ctx.seed, index};
    o.paths = ctx.paths ? *ctx.paths : param<std::size_t>(check, "paths", default_paths);
    o.workers = ctx.workers;
    return o;
}

const FiniteSymmetricModel& chain_of(const Context& ctx, const CheckSpec& check)
{
    if (!ctx.chain)
        throw ConfigError("check " + check.id + " requires a finite model");
    return *ctx.chain;
}

const TransformSpec& transform_of(const Context& ctx, const CheckSpec& check)
{
    chain_of(ctx, check);
    if (!ctx.transform)
        throw ConfigError("check " + check.id + " requires a transform");
    return *ctx.transform;
}

const RhoTransform& rho_of(const Context& ctx, const CheckSpec& check)
{
    const auto* rho = std::get_if<RhoTransform>(&transform_of(ctx, check));
    if (!rho)
        throw ConfigError("check " + check.id + " requires a rho transform");
    return *rho;
}

const PureJumpPhi& phi_of(const Context& ctx, const CheckSpec& check)
{
    const auto* phi = std::get_if<PureJumpPhi>(&transform_of(ctx, check));
    if (!phi)
        throw ConfigError("check " + check.id + " requires a phi transform");
    return *phi;
}

const ContinuumRhoTransform& continuum_transform_of(const Context& ctx, const CheckSpec& check)
{
    if (!ctx.continuum_transform)
        throw ConfigError("check " + check.id + " requires a jump_diffusion model with a rho function");
    return *ctx.continuum_transform;
}

Eigen::VectorXd state_function(const Context& ctx, const CheckSpec& check, const char* key,
                               int default_state)
{
    const auto& model = chain_of(ctx, check);
    const int n = model.size();
    if (check.params.contains(key)) {
        const auto v = param<std::vector<double>>(check, key, {});
        if (static_cast<int>(v.size()) != n)
            throw ConfigError("check " + check.id + ": '" + key + "' needs one value per state");
        return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
    }
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    f(std::min(default_state, n - 1)) = 1.0;
    return f;
}

int state_param(const Context& ctx, const CheckSpec& check, const char* key, int fallback)
{
    const int x = param<int>(check, key, fallback);
    if (x < 0 || x >= chain_of(ctx, check).size())
        throw ConfigError("check " + check.id + ": '" + key + "' is not a state");
    return x;
}

Interval region_param(const CheckSpec& check)
{
    const auto r = param<std::vector<double>>(check, "region", {-8.0, 8.0});
    if (r.size() != 2 || !(r[1] > r[0]))
        throw ConfigError("check " + check.id + ": region must be [lo, hi] with lo < hi");
    return {r[0], r[1]};
}

RealFunction continuum_f(const CheckSpec& check)
{
    FunctionSpec spec;
    if (check.params.contains("f")) {
        const auto& f = check.params.at("f");
        spec.family = f.value("family", spec.family);
        spec.base = f.value("base", spec.base);
        spec.amplitude = f.value("amplitude", spec.amplitude);
        spec.center = f.value("center", spec.center);
        spec.scale = f.value("scale", spec.scale);
        if (spec.family != "gaussian_bump" || !(spec.scale > 0.0))
            throw ConfigError("check " + check.id + ": unsupported function for 'f'");
    }
    return spec.build();
}

/// Generator and symmetry measure of the transformed chain; for rho the
/// generator comes from the conjugation formula, otherwise from N^Y and kappa^Y.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> transformed_pair(const FiniteSymmetricModel& model,
                                                             const TransformSpec& transform)
{
    const auto s = transformed_structure(model, transform);
    if (const auto* rho = std::get_if<RhoTransform>(&transform))
        return {transformed_generator(model, rho->rho()), s.measure};
    return {transformed_generator(model, transform), s.measure};
}

ReportRow exact_row(const std::string& id, double residual, double tolerance)
{
    return {id, residual, 0.0, 0.0, std::isfinite(residual) && residual <= tolerance};
}

ReportRow ci_row(const std::string& id, const EstimatorResult& r, double oracle)
{
    return {id, r.mean, r.std_error, oracle, r.covers(oracle)};
}

std::vector<ChainPath> chain_paths(const Context& ctx, const CheckSpec& check, std::size_t index,
                                   double t)
{
    const auto& model = chain_of(ctx, check);
    const int x = state_param(ctx, check, "x", 0);
    return sample_finite_paths(model, x, t, options_for(ctx, check, index, 1000));
}

void run_check(const Context& ctx, const CheckSpec& check, std::size_t index, Report& report)
{
    const auto& id = check.id;
    spdlog::info("running check {}", id);

    if (id == "generator_consistency") {
        const auto& model = chain_of(ctx, check);
        const auto& transform = transform_of(ctx, check);
        const auto [q_tilde, mu] = transformed_pair(model, transform);
        const Eigen::MatrixXd expected = jump_factor(model, transform).cwiseProduct(model.q());
        double worst = 0.0;
        for (int x = 0; x < model.size(); ++x)
            for (int y = 0; y < model.size(); ++y)
                if (x != y) {
                    const double diff = std::abs(q_tilde(x, y) - expected(x, y));
                    worst = std::max(worst, expected(x, y) == 0.0 ? diff : diff / std::abs(expected(x, y)));
                }
        report.rows.push_back(exact_row(id, worst, kExact));
    } else if (id == "symmetry") {
        const auto& model = chain_of(ctx, check);
        const auto [q_tilde, mu] = transformed_pair(model, transform_of(ctx, check));
        const Eigen::MatrixXd flux = mu.asDiagonal() * q_tilde;
        const double scale = std::max(1.0, flux.cwiseAbs().maxCoeff());
        report.rows.push_back(exact_row(id, (flux - flux.transpose()).cwiseAbs().maxCoeff() / scale, kExact));
    } else if (id == "form_identity") {
        const auto& model = chain_of(ctx, check);
        const auto& transform = transform_of(ctx, check);
        const Eigen::VectorXd f = state_function(ctx, check, "f", 1);
        const auto [q_tilde, mu] = transformed_pair(model, transform);
        FormValue value;
        if (const auto* rho = std::get_if<RhoTransform>(&transform))
            value = transformed_form_rho(model, rho->rho(), f);
        else if (const auto* phi = std::get_if<PureJumpPhi>(&transform))
            value = transformed_form_phi(model, *phi, f);
        else
            value = transformed_form(model, transform, f);
        const FormValue direct = transformed_form(model, transform, f);
        const double energy = generator_energy(q_tilde, mu, f);
        const double residual = std::abs(value.total - energy);
        report.forms.push_back({id + ":jump", value.jump_part, direct.jump_part,
                                std::abs(value.jump_part - direct.jump_part)});
        report.forms.push_back({id + ":killing", value.killing_part, direct.killing_part,
                                std::abs(value.killing_part - direct.killing_part)});
        report.forms.push_back({id + ":total", value.total, energy, residual});
        report.rows.push_back({id, value.total, 0.0, energy,
                               residual <= kExact * std::max(1.0, std::abs(value.total))});
    } else if (id == "conservativeness") {
        const auto& model = chain_of(ctx, check);
        const auto c = conservativeness_check(model, rho_of(ctx, check).rho());
        report.rows.push_back(exact_row(id, std::max(c.max_row_sum, c.energy_of_one), kExact));
    } else if (id == "gamma_symmetry") {
        const auto& model = chain_of(ctx, check);
        const auto s = transformed_structure(model, transform_of(ctx, check));
        const Eigen::MatrixXd j = jump_measure(model);
        double worst = 0.0;
        for (int x = 0; x < model.size(); ++x)
            for (int y = 0; y < model.size(); ++y)
                if (x != y && j(x, y) > 0.0)
                    worst = std::max(worst, std::abs(s.gamma(x, y) - s.gamma(y, x)));
        report.rows.push_back(exact_row(id, worst, 1e-10));
    } else if (id == "inverse_roundtrip") {
        const auto& phi = phi_of(ctx, check).phi();
        const double worst = (inverse_transform(inverse_transform(phi)) - phi).cwiseAbs().maxCoeff();
        report.rows.push_back(exact_row(id, worst, 1e-14));
    } else if (id == "split_product") {
        const auto& model = chain_of(ctx, check);
        const auto& phi = phi_of(ctx, check);
        const double t = param<double>(check, "t", 1.0);
        double worst = 0.0;
        for (const auto& path : chain_paths(ctx, check, index, t)) {
            const auto z = pure_jump_mf(path, phi, model, t);
            const auto split = split_mf(path, phi, model, t);
            for (std::size_t i = 0; i < z.size(); ++i) {
                const double prod = split.plus.z(i) * split.minus.z(i);
                worst = std::max(worst, std::abs(prod - z.z(i)) / std::max(z.z(i), 1e-300));
            }
        }
        report.rows.push_back(exact_row(id, worst, kExact));
    } else if (id == "reversal") {
        const auto& model = chain_of(ctx, check);
        const auto& rho = rho_of(ctx, check);
        const double t = param<double>(check, "t", 1.0);
        double worst = 0.0;
        for (const auto& path : chain_paths(ctx, check, index, t))
            if (path.alive_at(t))
                worst = std::max(worst, reversal_identity_residual(path, rho, model, t));
        report.rows.push_back(exact_row(id, worst, kExact));
    } else if (id == "evenness" || id == "lyons_zheng") {
        const auto& model = chain_of(ctx, check);
        const Eigen::VectorXd f = state_function(ctx, check, "f", 1);
        const double t = param<double>(check, "t", 1.0);
        double worst = 0.0;
        for (const auto& path : chain_paths(ctx, check, index, t)) {
            if (!path.alive_at(t))
                continue;
            worst = std::max(worst, id == "evenness" ? evenness_residual(path, f, t)
                                                     : lyons_zheng_residual(path, f, model, t));
        }
        report.rows.push_back(exact_row(id, worst, kExact));
    } else if (id == "semigroup_mc") {
        const auto& model = chain_of(ctx, check);
        const auto& transform = transform_of(ctx, check);
        const Eigen::VectorXd f = state_function(ctx, check, "f", 1);
        const int x = state_param(ctx, check, "x", 0);
        const double t = param<double>(check, "t", 1.0);
        const auto [q_tilde, mu] = transformed_pair(model, transform);
        const double oracle = (symmetric_semigroup(q_tilde, mu, t) * f)(x);
        const auto r = estimate_transformed_semigroup(model, transform, f, x, t,
                                                      options_for(ctx, check, index, 100000));
        report.rows.push_back(ci_row(id, r, oracle));
        report.series.push_back({id, t, r.mean, r.std_error, oracle});
    } else if (id == "symmetry_gap_mc") {
        const auto& model = chain_of(ctx, check);
        const Eigen::VectorXd f = state_function(ctx, check, "f", 1);
        const Eigen::VectorXd g = state_function(ctx, check, "g", 0);
        const double t = param<double>(check, "t", 0.7);
        const auto r = estimate_symmetry_gap(model, transform_of(ctx, check), f, g, t,
                                             options_for(ctx, check, index, 100000));
        report.rows.push_back(ci_row(id, r, 0.0));
    } else if (id == "mass_mc") {
        const auto& model = chain_of(ctx, check);
        const auto& transform = transform_of(ctx, check);
        const int x = state_param(ctx, check, "x", 0);
        const double t = param<double>(check, "t", 1.0);
        const auto [q_tilde, mu] = transformed_pair(model, transform);
        const double oracle =
            (symmetric_semigroup(q_tilde, mu, t) * Eigen::VectorXd::Ones(model.size()))(x);
        const auto r = estimate_mass(model, transform, x, t, options_for(ctx, check, index, 100000));
        report.rows.push_back(ci_row(id, r, oracle));
    } else if (id == "jump_ratio_mc") {
        const auto& model = chain_of(ctx, check);
        const auto& transform = transform_of(ctx, check);
        const int x = state_param(ctx, check, "x", 0);
        const int y = state_param(ctx, check, "y", 1);
        if (x == y)
            throw ConfigError("check jump_ratio_mc: x and y must differ");
        const double horizon = param<double>(check, "horizon", 1.0);
        const double oracle = transformed_levy_kernel(model, transform)(x, y);
        const auto r = estimate_jump_intensity_ratio(model, transform, x, y, horizon,
                                                     options_for(ctx, check, index, 100000));
        report.rows.push_back(ci_row(id, r, oracle));
        report.series.push_back({id, horizon, r.mean, r.std_error, oracle});
    } else if (id == "quadratic_form_trend") {
        const auto& model = chain_of(ctx, check);
        const auto& transform = transform_of(ctx, check);
        const Eigen::VectorXd f = state_function(ctx, check, "f", 1);
        const auto ts = param<std::vector<double>>(check, "t", {0.2, 0.1, 0.05});
        const double tolerance = param<double>(check, "tolerance", 0.1);
        if (ts.empty())
            throw ConfigError("check quadratic_form_trend: empty t list");
        const double oracle = transformed_form(model, transform, f).total;
        const auto trend = quadratic_form_trend(model, transform, f, ts, oracle,
                                                options_for(ctx, check, index, 1000000));
        for (const auto& p : trend.points)
            report.series.push_back({id, p.t, p.estimate.mean, p.estimate.std_error, oracle});
        const auto& last = trend.points.back().estimate;
        const bool within = last.ci95[0] >= (1.0 - tolerance) * oracle &&
                            last.ci95[1] <= (1.0 + tolerance) * oracle;
        report.rows.push_back({id, last.mean, last.std_error, oracle, trend.monotone && within});
    } else if (id == "continuum_jump_rate") {
        if (!ctx.continuum)
            throw ConfigError("check continuum_jump_rate requires a jump_diffusion model");
        const double eps = param<double>(check, "eps", 0.1);
        const double horizon = param<double>(check, "horizon", 1.0);
        const double dt = param<double>(check, "dt", 1e-3);
        const double oracle = ctx.continuum->jump_intensity(eps);
        const auto r = estimate_continuum_jump_rate(*ctx.continuum, horizon, dt, eps,
                                                    options_for(ctx, check, index, 10000));
        report.rows.push_back(
            {id, r.mean, r.std_error, oracle, std::abs(r.mean - oracle) <= 4.0 * r.std_error});
    } else if (id == "continuum_form") {
        const auto& transform = continuum_transform_of(ctx, check);
        const auto q = continuum_form_quadrature(transform.rho_function(), continuum_f(check),
                                                 transform.model(), region_param(check),
                                                 param<double>(check, "mesh", 0.02),
                                                 param<double>(check, "tolerance", 1e-2));
        report.forms.push_back({id + ":continuous", q.fine.continuous_part, q.coarse.continuous_part,
                                std::abs(q.fine.continuous_part - q.coarse.continuous_part)});
        report.forms.push_back({id + ":jump", q.fine.jump_part, q.coarse.jump_part,
                                std::abs(q.fine.jump_part - q.coarse.jump_part)});
        report.forms.push_back(
            {id + ":total", q.fine.total, q.coarse.total, std::abs(q.fine.total - q.coarse.total)});
        report.rows.push_back({id, q.fine.total, q.error_estimate, q.coarse.total, q.converged});
    } else if (id == "continuum_quadratic_form") {
        const auto& transform = continuum_transform_of(ctx, check);
        const auto f = continuum_f(check);
        const Interval region = region_param(check);
        const double t = param<double>(check, "t", 0.05);
        const double dt = param<double>(check, "dt", 1e-3);
        const double tolerance = param<double>(check, "tolerance", 0.15);
        const auto q = continuum_form_quadrature(transform.rho_function(), f, transform.model(),
                                                 region, param<double>(check, "mesh", 0.02));
        const auto r = estimate_continuum_quadratic_form(transform, f, region, t, dt,
                                                         options_for(ctx, check, index, 100000));
        report.series.push_back({id, t, r.mean, r.std_error, q.extrapolated});
        report.rows.push_back({id, r.mean, r.std_error, q.extrapolated,
                               std::abs(r.mean - q.extrapolated) <= tolerance * std::abs(q.extrapolated)});
    } else if (id == "continuum_mass") {
        const auto& transform = continuum_transform_of(ctx, check);
        const auto r = estimate_continuum_mass(transform, param<double>(check, "x", 0.0),
                                               param<double>(check, "t", 1.0),
                                               param<double>(check, "dt", 1e-3),
                                               options_for(ctx, check, index, 10000));
        report.rows.push_back(ci_row(id, r, 1.0));
    } else {
        throw ConfigError("unknown check id '" + id + "'");
    }
}

std::string bool_field(bool v) { return v ? "true" : "false"; }

} // namespace

bool Report::all_pass() const
{
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

Report run_checks(const ExperimentConfig& config, const RunOverrides& overrides)
{
    Context ctx{config};
    ctx.seed = overrides.seed ? *overrides.seed : config.seed;
    ctx.paths = overrides.paths;
    ctx.workers = overrides.workers;
    if (const auto* finite = std::get_if<FiniteModelSpec>(&config.model)) {
        ctx.chain = build_finite_model(*finite);
        if (config.transform) {
            ctx.transform = build_transform(*config.transform, *ctx.chain);
            validate_transform(*ctx.chain, *ctx.transform);
        }
    } else {
        ctx.continuum = build_jump_diffusion_model(std::get<JumpDiffusionSpec>(config.model));
        if (config.transform) {
            const auto* spec = std::get_if<ContinuumRhoSpec>(&*config.transform);
            if (!spec)
                throw ConfigError("transform: a jump_diffusion model takes a rho function");
            ctx.continuum_transform.emplace(*ctx.continuum, spec->rho.build(), spec->eps);
            ctx.continuum_transform->tabulate({-12.0, 12.0}, 4801);
        }
    }
    Report report;
    for (std::size_t i = 0; i < config.checks.size(); ++i)
        run_check(ctx, config.checks[i], i, report);
    return report;
}

std::string csv_field(const std::string& value)
{
    if (value.find_first_of(",\"\r\n") == std::string::npos)
        return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void write_report_csv(std::ostream& out, const Report& report)
{
    out << "check_id,estimate,stderr,oracle,pass\n";
    for (const auto& r : report.rows)
        out << csv_field(r.check_id) << ',' << format_double(r.estimate) << ','
            << format_double(r.std_error) << ',' << format_double(r.oracle) << ','
            << bool_field(r.pass) << '\n';
}

void write_forms_csv(std::ostream& out, const Report& report)
{
    out << "part,value,cross_check,residual\n";
    for (const auto& f : report.forms)
        out << csv_field(f.part) << ',' << format_double(f.value) << ','
            << format_double(f.cross_check) << ',' << format_double(f.residual) << '\n';
}

void emit_plot_data(std::ostream& out, const Report& report)
{
    auto series = report.series;
    std::stable_sort(series.begin(), series.end(), [](const SeriesPoint& a, const SeriesPoint& b) {
        if (a.check_id != b.check_id)
            return a.check_id < b.check_id;
        return a.t < b.t;
    });
    out << "check_id,t,estimate,stderr,oracle\n";
    for (const auto& p : series)
        out << csv_field(p.check_id) << ',' << format_double(p.t) << ','
            << format_double(p.estimate) << ',' << format_double(p.std_error) << ','
            << format_double(p.oracle) << '\n';
}

int run(const ExperimentConfig& config, const std::string& out_dir, const RunOverrides& overrides,
        std::ostream& err)
{
    Report report;
    try {
        report = run_checks(config, overrides);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const InvalidModel& e) {
        err << "invalid model: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const InvalidTransform& e) {
        err << "invalid transform: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const StructuralError& e) {
        err << "structural error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kExitConfigError;
    }
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream out(std::filesystem::path(out_dir) / "report.csv", std::ios::binary);
        write_report_csv(out, report);
    }
    if (!report.forms.empty()) {
        std::ofstream out(std::filesystem::path(out_dir) / "forms.csv", std::ios::binary);
        write_forms_csv(out, report);
    }
    for (const auto& r : report.rows)
        if (!r.pass)
            err << "check failed: " << r.check_id << " estimate " << format_double(r.estimate)
                << " oracle " << format_double(r.oracle) << '\n';
    return report.all_pass() ? kExitPass : kExitCheckFailed;
}

} // namespace girsanov
