#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "curvband/fields.hpp"
#include "curvband/geometry.hpp"
#include "curvband/operator.hpp"

namespace curvband {

/// Parse or validation failure. `line()` is 0 when the error is not tied to a
/// line of the input document.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0) : std::runtime_error(what), line_(line) {}
    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

struct SurfaceConfig {
    std::string kind = "flat";  // flat | paraboloid | gaussian-bump | sphere-cap
    double rho_max = 1.0;
    double a = 0.5;          // paraboloid S = a rho^2
    double amplitude = 0.2;  // gaussian bump
    double sigma = 0.5;
    double radius = 2.0;  // sphere cap
    std::string derivatives = "analytic";  // analytic | finite-difference

    bool operator==(const SurfaceConfig&) const = default;
};

struct FieldConfig {
    std::string kind = "none";  // none | axial-uniform | cartesian-constant | frame-synthetic
    double b = 0.0;             // axial-uniform
    double c = 0.0;             // cartesian-constant (0, 0, c)
    double a1 = 0.0;            // frame-synthetic
    double a2 = 0.0;
    double a3 = 0.0;
    std::optional<double> coupling;  // frame-synthetic: A3 = coupling / H
    std::optional<std::pair<double, double>> gamma_interval;

    bool operator==(const FieldConfig&) const = default;
};

struct RunConfig {
    SurfaceConfig surface;
    FieldConfig field;
    std::size_t n_points = 1000;
    OperatorMode mode = OperatorMode::hermitian_corrected;
    double charge_e = 1.0;
    std::vector<int> m_list{0};
    std::size_t k_eigen = 6;
    double omega = 100.0;
    int n_normal = 0;
    double dt = 1e-3;
    std::size_t steps = 1000;
    double gauge_tol = 1e-10;
    std::string output_path = ".";

    bool operator==(const RunConfig&) const = default;
};

/// Reads a `key = value` document. Keys are dotted (`surface.kind`) or
/// grouped under `[surface]` style headers; `#` starts a comment; lists are
/// written `[0, 1, 2]`. Unknown keys are rejected.
RunConfig parse_config(std::string_view text);

RunConfig load_config(const std::string& path);

/// Emits every key, so parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

/// Throws ConfigError naming the field and the violated constraint.
void validate(const RunConfig& config);

SurfaceProfile make_profile(const RunConfig& config);
VectorPotentialSpec make_field(const RunConfig& config, const SurfaceProfile& profile);
RadialGrid make_grid(const RunConfig& config);

}  // namespace curvband
