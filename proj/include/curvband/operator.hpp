#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "curvband/fields.hpp"
#include "curvband/geometry.hpp"

namespace curvband {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;

/// Uniform radial grid on (0, R): nodes rho_j = j * dr, j = 1..n, with
/// dr = R / (n + 1). The axis and the outer wall are not nodes.
class RadialGrid {
public:
    static constexpr std::size_t kMinPoints = 16;

    RadialGrid(std::size_t n_points, double rho_max);

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] double rho_max() const { return rho_max_; }
    [[nodiscard]] double spacing() const { return dr_; }
    /// 0-based: node(0) = dr.
    [[nodiscard]] double node(std::size_t j) const { return static_cast<double>(j + 1) * dr_; }
    [[nodiscard]] std::vector<double> nodes() const;

private:
    std::size_t n_;
    double rho_max_;
    double dr_;
};

enum class OperatorMode { as_written, hermitian_corrected };

std::string_view to_string(OperatorMode mode);
/// Accepts "as-written" and "hermitian-corrected"; throws std::invalid_argument.
OperatorMode parse_mode(std::string_view text);

/// Complex tridiagonal matrix: diag (n), upper(j) = M(j, j+1), lower(j) = M(j+1, j).
struct Tridiagonal {
    CVector lower;
    CVector diag;
    CVector upper;

    [[nodiscard]] Eigen::Index size() const { return diag.size(); }
    [[nodiscard]] CVector apply(const CVector& v) const;
    [[nodiscard]] Eigen::MatrixXcd dense() const;
};

/// Reduced tangential Hamiltonian for one azimuthal channel m on a radial grid.
///
/// Units: hbar = mass = 1. The row for node rho_j carries
///   kinetic      -1/2 c_Z (D2 + D1/rho) + 1/2 c_S S' S'' D1
///   centrifugal  m^2 / (2 rho^2)
///   geometric    -(H^2 - K)/2
///   azimuthal    e m A2 / rho
///   radial field -i e (A1/Z) D1   (skew-symmetrized under the measure)
///   coupling     +i e A3 H
///   diamagnetic  e^2 (A1^2 + A2^2 + A3^2) / 2
/// with (c_Z, c_S) = (Z^2, Z^4) as printed, or the Laplace-Beltrami
/// (1/Z^2, 1/Z^4) assembled in conservative form, which is self-adjoint
/// under the weights rho Z dr.
struct TangentialOperator {
    int m = 0;
    OperatorMode mode = OperatorMode::hermitian_corrected;
    double charge_e = 1.0;
    RadialGrid grid{RadialGrid::kMinPoints, 1.0};
    Tridiagonal matrix;
    /// Surface measure rho_j Z_j dr.
    Eigen::VectorXd measure_weights;
    /// Non-kinetic diagonal part (centrifugal excluded): geometric, azimuthal,
    /// coupling, and diamagnetic terms.
    CVector potential;
    /// e A3 H per node; the imaginary diagonal is i times this.
    Eigen::VectorXd coupling;
    std::vector<std::string> warnings;

    [[nodiscard]] Eigen::Index size() const { return matrix.size(); }
    [[nodiscard]] Eigen::MatrixXcd dense() const { return matrix.dense(); }
    [[nodiscard]] CVector apply(const CVector& v) const { return matrix.apply(v); }
};

TangentialOperator build_tangential(const SurfaceProfile& profile, const VectorPotentialSpec& A,
                                    int m, const RadialGrid& grid, OperatorMode mode, double e);

/// Harmonic confinement V_n(q) = omega^2 q^2 / 2 in the normal direction.
struct NormalChannel {
    double omega = 1.0;
    int level = 0;
    [[nodiscard]] double energy() const;
};

/// omega (n + 1/2); throws DomainError for omega <= 0 or n < 0.
double normal_energy(double omega, int n);

struct DecouplingReport {
    double omega = 0.0;
    double q_star = 0.0;
    double confinement = 0.0;  // V_n(q*)
    double max_term = 0.0;     // max_rho |A3(rho, 0) d/dq ln chi_n(q*)|
    double ratio = 0.0;        // confinement / max_term, +inf when A3 = 0
    bool pass = false;         // ratio >= kDecouplingThreshold
};

inline constexpr double kDecouplingThreshold = 100.0;

/// Compares the confinement with the A3 d/dq ln chi_n cross term at the
/// oscillator width q* = omega^(-1/2), using the Gaussian ground state.
DecouplingReport decoupling_check(double omega, const VectorPotentialSpec& A,
                                  const SurfaceProfile& profile, const RadialGrid& grid);

}  // namespace curvband
