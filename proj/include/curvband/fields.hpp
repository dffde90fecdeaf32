#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "curvband/geometry.hpp"

namespace curvband {

class RadialGrid;

enum class FieldSource { frame_given, cartesian_projected };

/// Closed interval [lo, hi] in rho selecting the support of a synthetic A3.
struct GammaInterval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool contains(double rho) const { return rho >= lo && rho <= hi; }
};

/// Axisymmetric static vector potential in the surface-adapted frame.
/// Components are functions of (rho, q) only.
struct VectorPotentialSpec {
    using Component = std::function<double(double rho, double q)>;

    Component A1;
    Component A2;
    Component A3;
    FieldSource source = FieldSource::frame_given;
    std::optional<GammaInterval> region;

    [[nodiscard]] double a1(double rho, double q = 0.0) const { return A1 ? A1(rho, q) : 0.0; }
    [[nodiscard]] double a2(double rho, double q = 0.0) const { return A2 ? A2(rho, q) : 0.0; }
    [[nodiscard]] double a3(double rho, double q = 0.0) const { return A3 ? A3(rho, q) : 0.0; }

    static VectorPotentialSpec zero();

    /// Frame components given directly. A3 is restricted to `region` when set.
    static VectorPotentialSpec frame_synthetic(Component A1, Component A2, Component A3,
                                               std::optional<GammaInterval> region = std::nullopt);

    /// A3 = coupling / H(rho) so that A3 * H equals `coupling` wherever the
    /// mean curvature is nonzero (and inside `region`, when set). Throws
    /// DomainError at points where H vanishes inside the support.
    static VectorPotentialSpec uniform_coupling(const SurfaceProfile& profile, double coupling,
                                                std::optional<GammaInterval> region = std::nullopt);

    /// Project a Cartesian field onto the frame along the phi = 0 meridian.
    /// Only meaningful for fields whose frame components do not depend on phi.
    static VectorPotentialSpec from_cartesian(std::function<Vec3(const Vec3&)> field,
                                              const SurfaceProfile& profile);

    /// Symmetric gauge of a uniform field B along z: A = (B/2)(-y, x, 0).
    static VectorPotentialSpec axial_uniform(double B, const SurfaceProfile& profile);

    /// Constant Cartesian field (0, 0, c).
    static VectorPotentialSpec cartesian_constant(double c, const SurfaceProfile& profile);
};

struct FrameComponents {
    double A1 = 0.0;
    double A2 = 0.0;
    double A3 = 0.0;
};

FrameComponents project_to_frame(const std::function<Vec3(const Vec3&)>& cartesian_field,
                                 const SurfaceProfile& profile, double rho, double phi, double q);

/// Step used for the q-derivative in the divergence.
inline constexpr double kDivergenceQStep = 1e-5;

/// Divergence of A in the (rho, phi, q) chart using the one-form scale factors.
/// The rho-derivative uses central differences with `rho_step`; near the ends
/// of [0, rho_max] the stencil is shifted inward.
double divergence(const VectorPotentialSpec& A, const SurfaceProfile& profile, double rho,
                  double q, double rho_step);

struct GaugeReport {
    bool pass = false;
    double max_violation = 0.0;
    double rho_at_max = 0.0;
    std::vector<double> divergence;  // per grid node, q = 0
    std::string error;               // set when evaluation failed part way
};

GaugeReport is_coulomb_gauge(const VectorPotentialSpec& A, const SurfaceProfile& profile,
                             const RadialGrid& grid, double tol);

/// A3(rho, 0) * H(rho) at each grid node.
std::vector<double> coupling_profile(const VectorPotentialSpec& A, const SurfaceProfile& profile,
                                     const RadialGrid& grid);

}  // namespace curvband
