#include "curvband/geometry.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include <fmt/format.h>

namespace curvband {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_radius(double rho_max)
{
    if (!(rho_max > 0.0) || !std::isfinite(rho_max))
        throw DomainError(fmt::format("rho_max must be positive and finite, got {}", rho_max));
}

void check_rho(const SurfaceProfile& profile, double rho)
{
    if (!(rho >= 0.0 && rho <= profile.rho_max()))
        throw DomainError(fmt::format("rho = {} outside [0, {}] for profile '{}'", rho,
                                      profile.rho_max(), profile.name()));
}

// Largest interval around q = 0 where 1 + 2 q H + q^2 K > kChartFloor.
QRange chart_range(double H, double K)
{
    const double c = 1.0 - kChartFloor;
    // K q^2 + 2 H q + c = 0
    if (K == 0.0) {
        if (H == 0.0) return {-kInf, kInf};
        const double root = -c / (2.0 * H);
        return root > 0.0 ? QRange{-kInf, root} : QRange{root, kInf};
    }
    const double disc = H * H - K * c;
    if (disc < 0.0) return {-kInf, kInf};  // K > 0, F never reaches the floor
    const double s = std::sqrt(disc);
    // numerically stable pair of roots
    const double t = -(H + std::copysign(s, H));
    double r1 = t / K;
    double r2 = (t != 0.0) ? c / t : -r1;
    if (r1 > r2) std::swap(r1, r2);
    if (K < 0.0) return {r1, r2};  // roots bracket zero
    // K > 0: both roots on one side of zero (product c / K > 0)
    if (r1 > 0.0) return {-kInf, r1};
    return {r2, kInf};
}

}  // namespace

SurfaceProfile::SurfaceProfile(std::string name, double rho_max, HeightFn S, DerivFn analytic)
    : name_(std::move(name)), rho_max_(rho_max), height_(std::move(S)), analytic_(std::move(analytic))
{
    require_positive_radius(rho_max_);
    if (!analytic_) source_ = DerivativeSource::finite_difference;
}

SurfaceProfile SurfaceProfile::flat(double rho_max)
{
    return {"flat", rho_max, [](double) { return 0.0; },
            [](double) { return ProfileDerivatives{}; }};
}

SurfaceProfile SurfaceProfile::paraboloid(double a, double rho_max)
{
    return {"paraboloid", rho_max, [a](double r) { return a * r * r; },
            [a](double r) { return ProfileDerivatives{a * r * r, 2.0 * a * r, 2.0 * a}; }};
}

SurfaceProfile SurfaceProfile::gaussian_bump(double amplitude, double sigma, double rho_max)
{
    if (!(sigma > 0.0)) throw DomainError("gaussian bump needs sigma > 0");
    const double s2 = sigma * sigma;
    auto S = [amplitude, s2](double r) { return amplitude * std::exp(-r * r / s2); };
    return {"gaussian-bump", rho_max, S, [S, s2](double r) {
                const double v = S(r);
                return ProfileDerivatives{v, -2.0 * r / s2 * v, (-2.0 / s2 + 4.0 * r * r / (s2 * s2)) * v};
            }};
}

SurfaceProfile SurfaceProfile::sphere_cap(double sphere_radius, double rho_max)
{
    if (!(rho_max < sphere_radius))
        throw DomainError(fmt::format("sphere cap needs rho_max < radius ({} >= {})", rho_max,
                                      sphere_radius));
    const double R2 = sphere_radius * sphere_radius;
    return {"sphere-cap", rho_max,
            [R = sphere_radius, R2](double r) { return std::sqrt(R2 - r * r) - R; },
            [R = sphere_radius, R2](double r) {
                const double s = std::sqrt(R2 - r * r);
                return ProfileDerivatives{s - R, -r / s, -R2 / (s * s * s)};
            }};
}

SurfaceProfile SurfaceProfile::from_height(std::string name, HeightFn S, double rho_max)
{
    return {std::move(name), rho_max, std::move(S), nullptr};
}

SurfaceProfile SurfaceProfile::with_finite_differences() const
{
    SurfaceProfile copy = *this;
    copy.analytic_ = nullptr;
    copy.source_ = DerivativeSource::finite_difference;
    return copy;
}

ProfileDerivatives SurfaceProfile::evaluate(double rho) const
{
    ProfileDerivatives d;
    if (source_ == DerivativeSource::analytic) {
        d = analytic_(rho);
    } else {
        const double h = fd_step();
        auto S = [this](double r) { return height_(std::abs(r)); };
        const double s0 = S(rho);
        const double sp = S(rho + h);
        const double sm = S(rho - h);
        d = {s0, (sp - sm) / (2.0 * h), (sp - 2.0 * s0 + sm) / (h * h)};
    }
    if (!std::isfinite(d.S) || !std::isfinite(d.S_rho) || !std::isfinite(d.S_rhorho))
        throw EvaluationError(
            fmt::format("profile '{}' is not finite at rho = {}", name_, rho));
    return d;
}

GeometrySample eval_geometry(const SurfaceProfile& profile, double rho)
{
    check_rho(profile, rho);
    const ProfileDerivatives d = profile.evaluate(rho);

    GeometrySample g;
    g.rho = rho;
    g.S_rho = d.S_rho;
    g.S_rhorho = d.S_rhorho;
    g.Z = std::sqrt(1.0 + d.S_rho * d.S_rho);

    // removable singularity: S_rho / rho -> S_rhorho(0)
    const bool on_axis = rho < kAxisEpsilon * profile.rho_max();
    const double slope_over_rho = on_axis ? d.S_rhorho : d.S_rho / rho;

    const double Z = g.Z;
    const double Z3 = Z * Z * Z;
    g.H = -0.5 * (slope_over_rho / Z + d.S_rhorho / Z3) + 0.0;  // no signed zero on flat profiles
    g.K = slope_over_rho * d.S_rhorho / (Z3 * Z);
    g.frame = frame_vectors(profile, rho, 0.0);
    g.valid_q_range = chart_range(g.H, g.K);
    return g;
}

Frame frame_vectors(const SurfaceProfile& profile, double rho, double phi)
{
    check_rho(profile, rho);
    const double Sr = profile.evaluate(rho).S_rho;
    const double Z = std::sqrt(1.0 + Sr * Sr);
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    return {{c / Z, s / Z, Sr / Z}, {-s, c, 0.0}, {-Sr * c / Z, -Sr * s / Z, 1.0 / Z}};
}

ScaleFactors scale_factors(const GeometrySample& sample, double q)
{
    if (!(sample.F(q) > 0.0) || !sample.valid_q_range.contains(q))
        throw DomainError(fmt::format("q = {} outside the chart ({}, {}) at rho = {}", q,
                                      sample.valid_q_range.lo, sample.valid_q_range.hi, sample.rho));
    const double Z = sample.Z;
    ScaleFactors f;
    f.q = q;
    f.h1 = Z * (1.0 - q * sample.S_rhorho / (Z * Z * Z));
    // rho * (1 - q S_rho / (Z rho)), written without the division for the axis
    f.h2 = sample.rho - q * sample.S_rho / Z;
    f.h3 = 1.0;
    return f;
}

double curvature_potential(const GeometrySample& sample)
{
    return -0.5 * (sample.H * sample.H - sample.K);
}

Vec3 embed(const SurfaceProfile& profile, double rho, double phi, double q)
{
    check_rho(profile, rho);
    const ProfileDerivatives d = profile.evaluate(rho);
    const Frame f = frame_vectors(profile, rho, phi);
    return {rho * std::cos(phi) + q * f.e3[0], rho * std::sin(phi) + q * f.e3[1], d.S + q * f.e3[2]};
}

}  // namespace curvband
