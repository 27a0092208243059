#include "girsanov/config.hpp"

#include "girsanov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace girsanov {

using nlohmann::json;

namespace {

const json& require_key(const json& obj, const char* key, const char* where)
{
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError(std::string(where) + ": missing key '" + key + "'");
    return obj.at(key);
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const char* where)
{
    for (const auto& item : obj.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(),
                                    [&](const char* k) { return item.key() == k; });
        if (!ok)
            throw ConfigError(std::string(where) + ": unknown key '" + item.key() + "'");
    }
}

std::vector<double> number_list(const json& value, const char* where)
{
    if (!value.is_array())
        throw ConfigError(std::string(where) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : value) {
        if (!v.is_number())
            throw ConfigError(std::string(where) + ": expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::vector<PhiEntry> phi_entries(const json& value, const char* where)
{
    if (!value.is_array())
        throw ConfigError(std::string(where) + ": phi must be a list of [x, y, value]");
    std::vector<PhiEntry> out;
    for (const auto& row : value) {
        if (!row.is_array() || row.size() != 3 || !row[0].is_number_integer() ||
            !row[1].is_number_integer() || !row[2].is_number())
            throw ConfigError(std::string(where) + ": phi must be a list of [x, y, value]");
        out.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<double>()});
    }
    return out;
}

json phi_json(const std::vector<PhiEntry>& entries)
{
    json out = json::array();
    for (const auto& e : entries)
        out.push_back(json::array({e.x, e.y, e.value}));
    return out;
}

FunctionSpec parse_function(const json& obj)
{
    reject_unknown_keys(obj, {"family", "base", "amplitude", "center", "scale"}, "function");
    FunctionSpec f;
    f.family = obj.value("family", f.family);
    f.base = obj.value("base", f.base);
    f.amplitude = obj.value("amplitude", f.amplitude);
    f.center = obj.value("center", f.center);
    f.scale = obj.value("scale", f.scale);
    if (f.family != "gaussian_bump")
        throw ConfigError("function: unknown family '" + f.family + "'");
    if (!(f.scale > 0.0))
        throw ConfigError("function: scale must be > 0");
    return f;
}

json function_json(const FunctionSpec& f)
{
    return {{"family", f.family},
            {"base", f.base},
            {"amplitude", f.amplitude},
            {"center", f.center},
            {"scale", f.scale}};
}

ModelSpec parse_model(const json& obj)
{
    const auto type = require_key(obj, "type", "model").get<std::string>();
    if (type == "finite") {
        reject_unknown_keys(obj, {"type", "m", "q", "k"}, "model");
        FiniteModelSpec spec;
        spec.m = number_list(require_key(obj, "m", "model"), "model.m");
        const auto n = spec.m.size();
        if (n == 0)
            throw ConfigError("model.m: empty state space");
        const auto& q = require_key(obj, "q", "model");
        if (!q.is_array())
            throw ConfigError("model.q: expected a matrix");
        if (!q.empty() && q[0].is_array()) {
            for (const auto& row : q)
                spec.q.push_back(number_list(row, "model.q"));
        } else {
            const auto flat = number_list(q, "model.q");
            if (flat.size() != n * n)
                throw ConfigError("model.q: flat row-major matrix must have n*n entries");
            for (std::size_t i = 0; i < n; ++i)
                spec.q.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i * n),
                                    flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * n));
        }
        if (spec.q.size() != n ||
            std::any_of(spec.q.begin(), spec.q.end(), [n](const auto& r) { return r.size() != n; }))
            throw ConfigError("model.q: must be n x n with n = size of m");
        if (obj.contains("k")) {
            spec.k = number_list(obj.at("k"), "model.k");
            if (spec.k.size() != n)
                throw ConfigError("model.k: must have one entry per state");
        }
        return spec;
    }
    if (type == "jump_diffusion") {
        reject_unknown_keys(obj, {"type", "d", "alpha", "c"}, "model");
        JumpDiffusionSpec spec;
        spec.d = obj.value("d", spec.d);
        spec.alpha = obj.value("alpha", spec.alpha);
        spec.c = obj.value("c", spec.c);
        return spec;
    }
    throw ConfigError("model: unknown type '" + type + "'");
}

TransformConfig parse_transform(const json& obj, const ModelSpec& model)
{
    const auto type = require_key(obj, "type", "transform").get<std::string>();
    const bool finite = std::holds_alternative<FiniteModelSpec>(model);
    const auto n = finite ? std::get<FiniteModelSpec>(model).m.size() : 0;
    auto require_finite_model = [&](const char* what) {
        if (!finite)
            throw ConfigError(std::string("transform: ") + what +
                              " requires a finite model");
    };
    auto check_entries = [&](const std::vector<PhiEntry>& entries) {
        for (const auto& e : entries)
            if (e.x < 0 || e.y < 0 || static_cast<std::size_t>(e.x) >= n ||
                static_cast<std::size_t>(e.y) >= n)
                throw ConfigError("transform.phi: state index out of range");
    };
    if (type == "rho") {
        if (obj.contains("function")) {
            reject_unknown_keys(obj, {"type", "function", "eps"}, "transform");
            if (finite)
                throw ConfigError("transform: a rho function requires a jump_diffusion model");
            ContinuumRhoSpec spec;
            spec.rho = parse_function(obj.at("function"));
            spec.eps = obj.value("eps", spec.eps);
            if (!(spec.eps > 0.0))
                throw ConfigError("transform.eps must be > 0");
            return spec;
        }
        reject_unknown_keys(obj, {"type", "rho"}, "transform");
        require_finite_model("rho values");
        RhoValuesSpec spec{number_list(require_key(obj, "rho", "transform"), "transform.rho")};
        if (spec.rho.size() != n)
            throw ConfigError("transform.rho: must have one entry per state");
        return spec;
    }
    if (type == "phi") {
        reject_unknown_keys(obj, {"type", "phi"}, "transform");
        require_finite_model("phi");
        PhiTableSpec spec{phi_entries(require_key(obj, "phi", "transform"), "transform.phi")};
        check_entries(spec.entries);
        return spec;
    }
    if (type == "general") {
        reject_unknown_keys(obj, {"type", "phi", "phi_cemetery", "a_rate"}, "transform");
        require_finite_model("general");
        GeneralSpec spec;
        spec.entries = phi_entries(require_key(obj, "phi", "transform"), "transform.phi");
        check_entries(spec.entries);
        if (obj.contains("phi_cemetery"))
            spec.phi_cemetery = number_list(obj.at("phi_cemetery"), "transform.phi_cemetery");
        if (obj.contains("a_rate"))
            spec.a_rate = number_list(obj.at("a_rate"), "transform.a_rate");
        if ((!spec.phi_cemetery.empty() && spec.phi_cemetery.size() != n) ||
            (!spec.a_rate.empty() && spec.a_rate.size() != n))
            throw ConfigError("transform: phi_cemetery and a_rate need one entry per state");
        return spec;
    }
    throw ConfigError("transform: unknown type '" + type + "'");
}

CheckSpec parse_check(const json& value)
{
    CheckSpec check;
    if (value.is_string()) {
        check.id = value.get<std::string>();
    } else if (value.is_object()) {
        check.id = require_key(value, "id", "check").get<std::string>();
        for (const auto& item : value.items())
            if (item.key() != "id")
                check.params[item.key()] = item.value();
    } else {
        throw ConfigError("checks: each entry is an id or an object with an 'id'");
    }
    const auto& known = known_checks();
    if (std::find(known.begin(), known.end(), check.id) == known.end())
        throw ConfigError("checks: unknown check id '" + check.id + "'");
    return check;
}

} // namespace

RealFunction FunctionSpec::build() const
{
    return [b = base, a = amplitude, c = center, s = scale](double x) {
        const double u = (x - c) / s;
        return b + a * std::exp(-u * u);
    };
}

const std::vector<std::string>& known_checks()
{
    static const std::vector<std::string> ids = {
        "generator_consistency", "symmetry",        "form_identity",
        "conservativeness",      "gamma_symmetry",  "split_product",
        "inverse_roundtrip",     "reversal",        "evenness",
        "lyons_zheng",           "semigroup_mc",    "symmetry_gap_mc",
        "mass_mc",               "jump_ratio_mc",   "quadratic_form_trend",
        "continuum_jump_rate",   "continuum_form",  "continuum_quadratic_form",
        "continuum_mass",
    };
    return ids;
}

ExperimentConfig parse_config(const json& doc)
{
    try {
        if (!doc.is_object())
            throw ConfigError("config: top level must be an object");
        reject_unknown_keys(doc, {"model", "transform", "checks", "seed", "output"}, "config");
        ExperimentConfig config;
        config.model = parse_model(require_key(doc, "model", "config"));
        if (doc.contains("transform") && !doc.at("transform").is_null())
            config.transform = parse_transform(doc.at("transform"), config.model);
        if (doc.contains("checks")) {
            if (!doc.at("checks").is_array())
                throw ConfigError("checks: expected a list");
            for (const auto& c : doc.at("checks"))
                config.checks.push_back(parse_check(c));
        }
        if (doc.contains("seed")) {
            if (!doc.at("seed").is_number_unsigned())
                throw ConfigError("seed: expected an unsigned 64-bit integer");
            config.seed = doc.at("seed").get<std::uint64_t>();
        }
        config.output = doc.value("output", config.output);
        return config;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ExperimentConfig parse_config_text(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

json serialize_config(const ExperimentConfig& config)
{
    json doc;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FiniteModelSpec>) {
                doc["model"] = {{"type", "finite"}, {"m", m.m}, {"q", m.q}};
                if (!m.k.empty())
                    doc["model"]["k"] = m.k;
            } else {
                doc["model"] = {{"type", "jump_diffusion"}, {"d", m.d}, {"alpha", m.alpha}, {"c", m.c}};
            }
        },
        config.model);
    if (config.transform) {
        std::visit(
            [&](const auto& t) {
                using T = std::decay_t<decltype(t)>;
                if constexpr (std::is_same_v<T, RhoValuesSpec>) {
                    doc["transform"] = {{"type", "rho"}, {"rho", t.rho}};
                } else if constexpr (std::is_same_v<T, PhiTableSpec>) {
                    doc["transform"] = {{"type", "phi"}, {"phi", phi_json(t.entries)}};
                } else if constexpr (std::is_same_v<T, GeneralSpec>) {
                    doc["transform"] = {{"type", "general"}, {"phi", phi_json(t.entries)}};
                    if (!t.phi_cemetery.empty())
                        doc["transform"]["phi_cemetery"] = t.phi_cemetery;
                    if (!t.a_rate.empty())
                        doc["transform"]["a_rate"] = t.a_rate;
                } else {
                    doc["transform"] = {
                        {"type", "rho"}, {"function", function_json(t.rho)}, {"eps", t.eps}};
                }
            },
            *config.transform);
    }
    doc["checks"] = json::array();
    for (const auto& c : config.checks) {
        json entry = c.params;
        entry["id"] = c.id;
        doc["checks"].push_back(entry);
    }
    doc["seed"] = config.seed;
    doc["output"] = config.output;
    return doc;
}

FiniteSymmetricModel build_finite_model(const FiniteModelSpec& spec)
{
    const auto n = static_cast<Eigen::Index>(spec.m.size());
    Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(spec.m.data(), n);
    Eigen::MatrixXd q(n, n);
    for (Eigen::Index x = 0; x < n; ++x)
        for (Eigen::Index y = 0; y < n; ++y)
            q(x, y) = spec.q.at(static_cast<std::size_t>(x)).at(static_cast<std::size_t>(y));
    Eigen::VectorXd k = spec.k.empty() ? Eigen::VectorXd::Zero(n)
                                       : Eigen::Map<const Eigen::VectorXd>(spec.k.data(), n).eval();
    FiniteSymmetricModel model(std::move(m), std::move(q), std::move(k));
    require_symmetric(model);
    return model;
}

JumpDiffusionModel build_jump_diffusion_model(const JumpDiffusionSpec& spec)
{
    return JumpDiffusionModel(spec.d, spec.alpha, spec.c);
}

Eigen::MatrixXd complete_phi_table(const std::vector<PhiEntry>& entries, int n)
{
    std::map<std::pair<int, int>, double> given;
    for (const auto& e : entries) {
        if (e.x < 0 || e.y < 0 || e.x >= n || e.y >= n)
            throw ConfigError("phi table: state index out of range");
        const auto [it, inserted] = given.emplace(std::make_pair(e.x, e.y), e.value);
        if (!inserted && it->second != e.value) {
            std::ostringstream msg;
            msg << "phi table: conflicting entries for (" << e.x << "," << e.y << ")";
            throw ConfigError(msg.str());
        }
    }
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [key, value] : given) {
        const auto [x, y] = key;
        const auto mirror = given.find({y, x});
        if (mirror != given.end() && mirror->second != value) {
            std::ostringstream msg;
            msg << "phi table: phi(" << x << "," << y << ") = " << value << " conflicts with phi("
                << y << "," << x << ") = " << mirror->second;
            throw ConfigError(msg.str());
        }
        phi(x, y) = value;
        phi(y, x) = value;
    }
    return phi;
}

TransformSpec build_transform(const TransformConfig& config, const FiniteSymmetricModel& model)
{
    const int n = model.size();
    return std::visit(
        [&](const auto& t) -> TransformSpec {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, RhoValuesSpec>) {
                return RhoTransform(Eigen::Map<const Eigen::VectorXd>(t.rho.data(), n));
            } else if constexpr (std::is_same_v<T, PhiTableSpec>) {
                return PureJumpPhi(complete_phi_table(t.entries, n));
            } else if constexpr (std::is_same_v<T, GeneralSpec>) {
                Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
                for (const auto& e : t.entries)
                    phi(e.x, e.y) = e.value;
                auto vec = [n](const std::vector<double>& v) -> Eigen::VectorXd {
                    return v.empty() ? Eigen::VectorXd::Zero(n)
                                     : Eigen::Map<const Eigen::VectorXd>(v.data(), n).eval();
                };
                return GeneralMF(Eigen::VectorXd::Zero(n), vec(t.a_rate), std::move(phi),
                                 vec(t.phi_cemetery));
            } else {
                throw ConfigError("transform: a rho function requires a jump_diffusion model");
            }
        },
        config);
}

} // namespace girsanov
