#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curvband/operator.hpp"

namespace curvband {

/// Raised when an eigenpair cannot be verified against the residual contract.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, int iterations)
        : std::runtime_error(what), iterations_(iterations)
    {
    }
    [[nodiscard]] int iterations() const { return iterations_; }

private:
    int iterations_;
};

enum class EigenMethod {
    symmetrizable,  // diagonal similarity to real symmetric plus uniform i*gamma
    dense,          // complex Schur on the full matrix
    shift_invert,   // Arnoldi on (M - sigma)^-1
};

std::string_view to_string(EigenMethod method);

struct EigenOptions {
    /// Largest size handled by the dense complex path; beyond it the
    /// shift-invert iteration is used.
    Eigen::Index dense_limit = 3000;
    double residual_tol = 1e-8;
    /// Disables the structured path, so tests can exercise the general ones.
    bool allow_symmetrizable = true;
};

struct Spectrum {
    int m = 0;
    std::vector<cplx> eigenvalues;  // ordered by real part, then imaginary part
    Eigen::MatrixXcd eigenvectors;  // n x k, unit norm under the surface measure
    std::vector<double> residuals;  // ||M v - lambda v|| / ||v||
    EigenMethod method = EigenMethod::dense;
};

/// The k eigenpairs with the smallest real parts. Every returned pair satisfies
/// the residual tolerance; otherwise ConvergenceError is thrown.
Spectrum eigen_solve(const TangentialOperator& op, std::size_t k, const EigenOptions& options = {});

/// sqrt(sum_j w_j |v_j|^2) with the operator's measure weights.
double surface_norm(const TangentialOperator& op, const CVector& v);
CVector normalized(const TangentialOperator& op, const CVector& v);

struct EvolutionTrace {
    std::vector<double> times;
    std::vector<double> norms;  // surface norm ||chi(t)||
    /// <e A3 H> weighted by w |chi|^2 at each time; equals d ln||chi|| / dt
    /// exactly for the continuous dynamics.
    std::vector<double> weighted_coupling;
    std::vector<double> state_times;
    std::vector<CVector> states;
    double log_norm_slope = 0.0;  // least-squares d ln||chi|| / dt
    std::vector<std::string> warnings;
};

/// Crank-Nicolson: (I + i dt/2 M) chi_{t+dt} = (I - i dt/2 M) chi_t.
/// `initial` must have unit surface norm. States are stored every
/// `state_stride` steps (0 keeps only the first and last); norms every step.
EvolutionTrace evolve(const TangentialOperator& op, const CVector& initial, double dt,
                      std::size_t steps, std::size_t state_stride = 1);

struct HermiticityReport {
    /// max |(W M) - (W M)^H| entrywise, W = diag(measure_weights)
    double max_asymmetry = 0.0;
    /// Frobenius norm of the measure anti-Hermitian part W^-1 ((W M) - (W M)^H) / 2
    double anti_hermitian_norm = 0.0;
    /// max |antiHermitian - i diag(e A3 H)| entrywise, divided by max(1, max |M_ij|)
    double coupling_mismatch = 0.0;
    bool anti_hermitian_is_coupling = false;
};

inline constexpr double kHermiticityTolerance = 1e-10;

HermiticityReport hermiticity_report(const TangentialOperator& op);

/// Measure-Hermitian part of the operator; the coupling field is zeroed.
TangentialOperator hermitian_part(const TangentialOperator& op);

struct CombinedLevel {
    std::size_t tangential_index = 0;
    int normal_level = 0;
    cplx tangential{};
    double normal = 0.0;
    cplx total{};
};

/// E_t + omega (n + 1/2) for each requested (tangential index, n).
std::vector<CombinedLevel> total_energy(const Spectrum& spectrum, double omega,
                                        std::span<const std::pair<std::size_t, int>> requests);

}  // namespace curvband
