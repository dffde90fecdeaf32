#include "curvband/operator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace curvband {

RadialGrid::RadialGrid(std::size_t n_points, double rho_max)
    : n_(n_points), rho_max_(rho_max), dr_(rho_max / static_cast<double>(n_points + 1))
{
    if (n_points < 2) throw DomainError("radial grid needs at least 2 interior nodes");
    if (!(rho_max > 0.0) || !std::isfinite(rho_max))
        throw DomainError(fmt::format("radial grid needs rho_max > 0, got {}", rho_max));
}

std::vector<double> RadialGrid::nodes() const
{
    std::vector<double> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = node(j);
    return out;
}

std::string_view to_string(OperatorMode mode)
{
    switch (mode) {
    case OperatorMode::as_written: return "as-written";
    case OperatorMode::hermitian_corrected: return "hermitian-corrected";
    }
    return "unknown";
}

OperatorMode parse_mode(std::string_view text)
{
    if (text == "as-written") return OperatorMode::as_written;
    if (text == "hermitian-corrected") return OperatorMode::hermitian_corrected;
    throw std::invalid_argument(
        fmt::format("invalid mode '{}' (expected as-written or hermitian-corrected)", text));
}

CVector Tridiagonal::apply(const CVector& v) const
{
    const Eigen::Index n = size();
    CVector out = diag.cwiseProduct(v);
    if (n > 1) {
        out.head(n - 1) += upper.cwiseProduct(v.tail(n - 1));
        out.tail(n - 1) += lower.cwiseProduct(v.head(n - 1));
    }
    return out;
}

Eigen::MatrixXcd Tridiagonal::dense() const
{
    const Eigen::Index n = size();
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);
    M.diagonal() = diag;
    if (n > 1) {
        M.diagonal(1) = upper;
        M.diagonal(-1) = lower;
    }
    return M;
}

TangentialOperator build_tangential(const SurfaceProfile& profile, const VectorPotentialSpec& A,
                                    int m, const RadialGrid& grid, OperatorMode mode, double e)
{
    if (mode != OperatorMode::as_written && mode != OperatorMode::hermitian_corrected)
        throw std::invalid_argument("invalid operator mode");
    if (grid.rho_max() > profile.rho_max() * (1.0 + 1e-12))
        throw DomainError(fmt::format("grid extends to {} beyond the profile radius {}",
                                      grid.rho_max(), profile.rho_max()));

    const auto n = static_cast<Eigen::Index>(grid.size());
    const double dr = grid.spacing();
    const double dr2 = dr * dr;
    const double mm = static_cast<double>(m) * static_cast<double>(m);
    const bool corrected = mode == OperatorMode::hermitian_corrected;
    const cplx ie{0.0, e};

    TangentialOperator op;
    op.m = m;
    op.mode = mode;
    op.charge_e = e;
    op.grid = grid;
    op.matrix.diag = CVector::Zero(n);
    op.matrix.upper = CVector::Zero(n - 1);
    op.matrix.lower = CVector::Zero(n - 1);
    op.measure_weights.resize(n);
    op.potential.resize(n);
    op.coupling.resize(n);
    if (grid.size() < RadialGrid::kMinPoints)
        op.warnings.push_back(fmt::format("grid too coarse: {} points (< {})", grid.size(),
                                          RadialGrid::kMinPoints));

    // rho * A1 at half nodes feeds the skew-symmetric radial field stencil
    auto beta = [&A](double r) { return r * A.a1(r, 0.0); };

    for (Eigen::Index j = 0; j < n; ++j) {
        const double rho = grid.node(static_cast<std::size_t>(j));
        const double rp = rho + 0.5 * dr;
        const double rm = rho - 0.5 * dr;
        const GeometrySample g = eval_geometry(profile, rho);
        const double Z = g.Z;

        double cu = 0.0;
        double cd = 0.0;
        double drift = 0.0;
        if (corrected) {
            cu = 1.0 / (eval_geometry(profile, rp).Z * Z);
            cd = 1.0 / (eval_geometry(profile, rm).Z * Z);
        } else {
            cu = Z * Z;
            cd = Z * Z;
            drift = 0.5 * (Z * Z * Z * Z) * g.S_rho * g.S_rhorho;
        }

        const double wj = rho * Z;
        cplx up = -0.5 * cu * rp / (rho * dr2) + drift / (2.0 * dr);
        cplx lo = -0.5 * cd * rm / (rho * dr2) - drift / (2.0 * dr);
        cplx di = 0.5 * (cu * rp + cd * rm) / (rho * dr2) + 0.5 * mm / (rho * rho);

        const double a1 = A.a1(rho, 0.0);
        const double a2 = A.a2(rho, 0.0);
        const double a3 = A.a3(rho, 0.0);
        const double bp = beta(rp);
        const double bm = beta(rm);
        if (bp != 0.0) up += -ie * bp / (2.0 * dr * wj);
        if (bm != 0.0 && j > 0) lo += ie * bm / (2.0 * dr * wj);

        const double eA3H = a3 == 0.0 ? 0.0 : e * a3 * g.H;
        const cplx pot = curvature_potential(g) + e * static_cast<double>(m) * a2 / rho +
                         cplx{0.0, eA3H} + 0.5 * e * e * (a1 * a1 + a2 * a2 + a3 * a3);
        di += pot;

        if (j == 0) {
            // axis: mirror ghost chi(0) = chi(dr) for m = 0, chi(0) = 0 otherwise
            if (m == 0) di += -0.5 * cd * rm / (rho * dr2) - drift / (2.0 * dr);
        } else {
            op.matrix.lower(j - 1) = lo;
        }
        if (j + 1 < n) op.matrix.upper(j) = up;  // outer wall: Dirichlet
        op.matrix.diag(j) = di;

        op.measure_weights(j) = wj * dr;
        op.potential(j) = pot;
        op.coupling(j) = eA3H;
    }
    return op;
}

double NormalChannel::energy() const
{
    return normal_energy(omega, level);
}

double normal_energy(double omega, int n)
{
    if (!(omega > 0.0)) throw DomainError(fmt::format("omega must be positive, got {}", omega));
    if (n < 0) throw DomainError(fmt::format("oscillator level must be >= 0, got {}", n));
    return omega * (static_cast<double>(n) + 0.5);
}

DecouplingReport decoupling_check(double omega, const VectorPotentialSpec& A,
                                  const SurfaceProfile& profile, const RadialGrid& grid)
{
    if (!(omega > 0.0)) throw DomainError(fmt::format("omega must be positive, got {}", omega));
    (void)profile;

    DecouplingReport r;
    r.omega = omega;
    r.q_star = 1.0 / std::sqrt(omega);
    r.confinement = 0.5 * omega * omega * r.q_star * r.q_star;
    const double log_derivative = omega * r.q_star;  // |d/dq ln exp(-omega q^2 / 2)| at q*
    double max_a3 = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j)
        max_a3 = std::max(max_a3, std::abs(A.a3(grid.node(j), 0.0)));
    r.max_term = max_a3 * log_derivative;
    r.ratio = r.max_term == 0.0 ? std::numeric_limits<double>::infinity() : r.confinement / r.max_term;
    r.pass = r.ratio >= kDecouplingThreshold;
    return r;
}

}  // namespace curvband
