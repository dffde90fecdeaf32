#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>

namespace curvband {

using Vec3 = std::array<double, 3>;

/// Raised when a radius or normal offset lies outside the region where the
/// surface chart is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a profile produces non-finite heights or derivatives.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DerivativeSource { analytic, finite_difference };

struct ProfileDerivatives {
    double S = 0.0;
    double S_rho = 0.0;
    double S_rhorho = 0.0;
};

/// Generator z = S(rho) of an axially symmetric surface on [0, rho_max].
///
/// Catalog profiles carry analytic derivatives. Profiles built from an
/// arbitrary height function use central differences with step 1e-5 * rho_max
/// and treat S as even in rho, so the stencil may reach across the axis.
class SurfaceProfile {
public:
    using HeightFn = std::function<double(double)>;

    static SurfaceProfile flat(double rho_max);
    /// S = a rho^2
    static SurfaceProfile paraboloid(double a, double rho_max);
    /// S = amplitude * exp(-rho^2 / sigma^2)
    static SurfaceProfile gaussian_bump(double amplitude, double sigma, double rho_max);
    /// S = sqrt(R^2 - rho^2) - R, requires rho_max < R.
    static SurfaceProfile sphere_cap(double sphere_radius, double rho_max);
    static SurfaceProfile from_height(std::string name, HeightFn S, double rho_max);

    /// Same height function, derivatives taken by central differences.
    [[nodiscard]] SurfaceProfile with_finite_differences() const;

    [[nodiscard]] ProfileDerivatives evaluate(double rho) const;

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] double rho_max() const { return rho_max_; }
    [[nodiscard]] DerivativeSource derivative_source() const { return source_; }
    [[nodiscard]] double fd_step() const { return 1e-5 * rho_max_; }

private:
    using DerivFn = std::function<ProfileDerivatives(double)>;

    SurfaceProfile(std::string name, double rho_max, HeightFn S, DerivFn analytic);

    std::string name_;
    double rho_max_ = 0.0;
    DerivativeSource source_ = DerivativeSource::analytic;
    HeightFn height_;
    DerivFn analytic_;
};

struct Frame {
    Vec3 e1{};
    Vec3 e2{};
    Vec3 e3{};
};

/// Interval of normal offsets q around the surface where F(q) > 0.01.
/// Either end may be infinite.
struct QRange {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool contains(double q) const { return q > lo && q < hi; }
};

struct GeometrySample {
    double rho = 0.0;
    double S_rho = 0.0;
    double S_rhorho = 0.0;
    double Z = 1.0;
    double H = 0.0;
    double K = 0.0;
    Frame frame;  // evaluated at phi = 0
    QRange valid_q_range;

    /// F(q) = 1 + 2 q H + q^2 K
    [[nodiscard]] double F(double q) const { return 1.0 + 2.0 * q * H + q * q * K; }
};

/// Metric factors of the one-forms sigma_1 = h1 drho, sigma_2 = h2 dphi,
/// sigma_3 = h3 dq at normal offset q.
struct ScaleFactors {
    double h1 = 0.0;
    double h2 = 0.0;
    double h3 = 1.0;
    double q = 0.0;
};

/// Below this fraction of rho_max the ratio S_rho / rho is replaced by its
/// axis limit S_rhorho.
inline constexpr double kAxisEpsilon = 1e-8;

/// Lower bound on F that defines the usable normal chart.
inline constexpr double kChartFloor = 0.01;

GeometrySample eval_geometry(const SurfaceProfile& profile, double rho);

Frame frame_vectors(const SurfaceProfile& profile, double rho, double phi);

ScaleFactors scale_factors(const GeometrySample& sample, double q);

/// Geometric potential -(H^2 - K) / 2.
double curvature_potential(const GeometrySample& sample);

/// Point r(rho, phi) + q e3 in Cartesian coordinates.
Vec3 embed(const SurfaceProfile& profile, double rho, double phi, double q);

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

inline Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace curvband
