#pragma once

#include "girsanov/continuum.hpp"
#include "girsanov/model.hpp"
#include "girsanov/transform.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace girsanov {

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct FiniteModelSpec {
    std::vector<double> m;
    std::vector<std::vector<double>> q; // dense, row-major
    std::vector<double> k;              // empty = no killing

    friend bool operator==(const FiniteModelSpec&, const FiniteModelSpec&) = default;
};

struct JumpDiffusionSpec {
    int d = 1;
    double alpha = 1.0;
    double c = 1.0;

    friend bool operator==(const JumpDiffusionSpec&, const JumpDiffusionSpec&) = default;
};

using ModelSpec = std::variant<FiniteModelSpec, JumpDiffusionSpec>;

/// base + amplitude * exp(-((x - center) / scale)^2)
struct FunctionSpec {
    std::string family = "gaussian_bump";
    double base = 0.0;
    double amplitude = 1.0;
    double center = 0.0;
    double scale = 1.0;

    RealFunction build() const;

    friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;
};

struct PhiEntry {
    int x = 0;
    int y = 0;
    double value = 0.0;

    friend bool operator==(const PhiEntry&, const PhiEntry&) = default;
};

struct RhoValuesSpec {
    std::vector<double> rho;

    friend bool operator==(const RhoValuesSpec&, const RhoValuesSpec&) = default;
};

/// Sparse phi table; (y,x) is filled from (x,y) when absent.
struct PhiTableSpec {
    std::vector<PhiEntry> entries;

    friend bool operator==(const PhiTableSpec&, const PhiTableSpec&) = default;
};

/// General MF on a chain. phi entries are taken as given (no symmetric
/// completion); phi_cemetery and a_rate default to 0.
struct GeneralSpec {
    std::vector<PhiEntry> entries;
    std::vector<double> phi_cemetery;
    std::vector<double> a_rate;

    friend bool operator==(const GeneralSpec&, const GeneralSpec&) = default;
};

struct ContinuumRhoSpec {
    FunctionSpec rho;
    double eps = 0.01;

    friend bool operator==(const ContinuumRhoSpec&, const ContinuumRhoSpec&) = default;
};

using TransformConfig = std::variant<RhoValuesSpec, PhiTableSpec, GeneralSpec, ContinuumRhoSpec>;

struct CheckSpec {
    std::string id;
    nlohmann::json params = nlohmann::json::object();

    friend bool operator==(const CheckSpec&, const CheckSpec&) = default;
};

struct ExperimentConfig {
    ModelSpec model;
    std::optional<TransformConfig> transform;
    std::vector<CheckSpec> checks;
    std::uint64_t seed = 0;
    std::string output = "out";

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Check identifiers understood by the runner.
const std::vector<std::string>& known_checks();

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

nlohmann::json serialize_config(const ExperimentConfig& config);

/// Model, with the symmetry gate applied (InvalidModel names the worst pair).
FiniteSymmetricModel build_finite_model(const FiniteModelSpec& spec);
JumpDiffusionModel build_jump_diffusion_model(const JumpDiffusionSpec& spec);

/// Symmetric completion of a phi table; ConfigError on conflicting entries.
Eigen::MatrixXd complete_phi_table(const std::vector<PhiEntry>& entries, int n);

TransformSpec build_transform(const TransformConfig& config, const FiniteSymmetricModel& model);

} // namespace girsanov
