#include "curvband/fields.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "curvband/operator.hpp"

namespace curvband {

VectorPotentialSpec VectorPotentialSpec::zero()
{
    return {};
}

VectorPotentialSpec VectorPotentialSpec::frame_synthetic(Component A1, Component A2, Component A3,
                                                         std::optional<GammaInterval> region)
{
    VectorPotentialSpec spec;
    spec.A1 = std::move(A1);
    spec.A2 = std::move(A2);
    if (A3 && region) {
        spec.A3 = [A3 = std::move(A3), g = *region](double rho, double q) {
            return g.contains(rho) ? A3(rho, q) : 0.0;
        };
    } else {
        spec.A3 = std::move(A3);
    }
    spec.source = FieldSource::frame_given;
    spec.region = region;
    return spec;
}

VectorPotentialSpec VectorPotentialSpec::uniform_coupling(const SurfaceProfile& profile,
                                                          double coupling,
                                                          std::optional<GammaInterval> region)
{
    auto A3 = [profile, coupling](double rho, double) {
        if (coupling == 0.0) return 0.0;
        const double H = eval_geometry(profile, rho).H;
        if (H == 0.0)
            throw DomainError(fmt::format(
                "uniform coupling {} needs nonzero mean curvature, H = 0 at rho = {}", coupling, rho));
        return coupling / H;
    };
    return frame_synthetic(nullptr, nullptr, A3, region);
}

FrameComponents project_to_frame(const std::function<Vec3(const Vec3&)>& cartesian_field,
                                 const SurfaceProfile& profile, double rho, double phi, double q)
{
    const GeometrySample g = eval_geometry(profile, rho);
    if (!g.valid_q_range.contains(q))
        throw DomainError(fmt::format("q = {} is outside the chart at rho = {} (F = {})", q, rho, g.F(q)));
    const Frame f = frame_vectors(profile, rho, phi);
    const Vec3 A = cartesian_field(embed(profile, rho, phi, q));
    return {dot(A, f.e1), dot(A, f.e2), dot(A, f.e3)};
}

VectorPotentialSpec VectorPotentialSpec::from_cartesian(std::function<Vec3(const Vec3&)> field,
                                                        const SurfaceProfile& profile)
{
    auto component = [field, profile](int which) {
        return [field, profile, which](double rho, double q) {
            const FrameComponents c = project_to_frame(field, profile, rho, 0.0, q);
            return which == 1 ? c.A1 : which == 2 ? c.A2 : c.A3;
        };
    };
    VectorPotentialSpec spec;
    spec.A1 = component(1);
    spec.A2 = component(2);
    spec.A3 = component(3);
    spec.source = FieldSource::cartesian_projected;
    return spec;
}

VectorPotentialSpec VectorPotentialSpec::axial_uniform(double B, const SurfaceProfile& profile)
{
    return from_cartesian([B](const Vec3& x) { return Vec3{-0.5 * B * x[1], 0.5 * B * x[0], 0.0}; },
                          profile);
}

VectorPotentialSpec VectorPotentialSpec::cartesian_constant(double c, const SurfaceProfile& profile)
{
    return from_cartesian([c](const Vec3&) { return Vec3{0.0, 0.0, c}; }, profile);
}

double divergence(const VectorPotentialSpec& A, const SurfaceProfile& profile, double rho, double q,
                  double rho_step)
{
    if (!(rho > 0.0))
        throw DomainError("divergence is undefined on the axis (h2 = 0)");
    if (!(rho_step > 0.0)) throw DomainError("divergence needs a positive rho step");

    const GeometrySample g = eval_geometry(profile, rho);
    if (!g.valid_q_range.contains(q))
        throw DomainError(fmt::format("q = {} is outside the chart at rho = {} (F = {})", q, rho, g.F(q)));
    const ScaleFactors sf = scale_factors(g, q);

    // d/drho (h2 A1) at fixed q
    const double lo = std::max(0.0, rho - rho_step);
    const double hi = std::min(profile.rho_max(), rho + rho_step);
    auto h2A1 = [&](double r) {
        const double a1 = A.a1(r, q);
        if (a1 == 0.0) return 0.0;
        return scale_factors(eval_geometry(profile, r), q).h2 * a1;
    };
    const double radial = (h2A1(hi) - h2A1(lo)) / (hi - lo);

    // d/dq (h1 h2 A3) at fixed rho
    auto h1h2A3 = [&](double qq) {
        const double a3 = A.a3(rho, qq);
        if (a3 == 0.0) return 0.0;
        const ScaleFactors s = scale_factors(g, qq);
        return s.h1 * s.h2 * a3;
    };
    const double dq = kDivergenceQStep;
    const double normal = (h1h2A3(q + dq) - h1h2A3(q - dq)) / (2.0 * dq);

    return (radial + normal) / (sf.h1 * sf.h2);
}

GaugeReport is_coulomb_gauge(const VectorPotentialSpec& A, const SurfaceProfile& profile,
                             const RadialGrid& grid, double tol)
{
    GaugeReport report;
    report.divergence.reserve(grid.size());
    try {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double rho = grid.node(j);
            const double d = divergence(A, profile, rho, 0.0, grid.spacing());
            report.divergence.push_back(d);
            if (std::abs(d) > report.max_violation || j == 0) {
                report.max_violation = std::abs(d);
                report.rho_at_max = rho;
            }
        }
    } catch (const std::exception& e) {
        report.error = e.what();
        report.pass = false;
        return report;
    }
    report.pass = report.max_violation <= tol;
    return report;
}

std::vector<double> coupling_profile(const VectorPotentialSpec& A, const SurfaceProfile& profile,
                                     const RadialGrid& grid)
{
    std::vector<double> out(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double rho = grid.node(j);
        const double a3 = A.a3(rho, 0.0);
        out[j] = a3 == 0.0 ? 0.0 : a3 * eval_geometry(profile, rho).H;
    }
    return out;
}

}  // namespace curvband
