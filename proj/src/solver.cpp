#include "curvband/solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace curvband {

namespace {

// LU factorization with partial pivoting of (T - shift I) for a complex
// tridiagonal T.
class TridiagonalLU {
public:
    TridiagonalLU(const Tridiagonal& T, cplx shift, cplx scale = 1.0)
        : n_(static_cast<lapack_int>(T.size())), dl_(T.lower.size()), d_(T.diag.size()),
          du_(T.upper.size()), du2_(std::max<lapack_int>(n_ - 2, 1)), ipiv_(n_)
    {
        for (Eigen::Index j = 0; j < T.lower.size(); ++j) {
            dl_[j] = scale * T.lower(j);
            du_[j] = scale * T.upper(j);
        }
        for (Eigen::Index j = 0; j < T.diag.size(); ++j) d_[j] = scale * T.diag(j) - shift;
        // zgttrf wants non-null pointers even for n = 1
        if (dl_.empty()) dl_.resize(1), du_.resize(1);
        info_ = LAPACKE_zgttrf(n_, dl_.data(), d_.data(), du_.data(), du2_.data(), ipiv_.data());
    }

    [[nodiscard]] bool ok() const { return info_ == 0; }
    [[nodiscard]] lapack_int info() const { return info_; }

    void solve_in_place(CVector& b) const
    {
        const lapack_int rc = LAPACKE_zgttrs(LAPACK_COL_MAJOR, 'N', n_, 1, dl_.data(), d_.data(),
                                             du_.data(), du2_.data(), ipiv_.data(), b.data(), n_);
        if (rc != 0) throw std::runtime_error(fmt::format("tridiagonal solve failed (info {})", rc));
    }

private:
    lapack_int n_;
    std::vector<cplx> dl_, d_, du_, du2_;
    std::vector<lapack_int> ipiv_;
    lapack_int info_ = 0;
};

double residual(const Tridiagonal& T, const CVector& v, cplx lambda)
{
    return (T.apply(v) - lambda * v).norm() / v.norm();
}

// Unit surface norm, largest component real and positive.
CVector canonical(const TangentialOperator& op, CVector v)
{
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (std::abs(v(imax)) > 0.0) v *= std::polar(1.0, -std::arg(v(imax)));
    return normalized(op, v);
}

// A few steps of inverse iteration at a slightly perturbed shift.
CVector refine(const Tridiagonal& T, cplx lambda, CVector v, int steps)
{
    const double bump = 1e-12 * std::max(1.0, std::abs(lambda));
    TridiagonalLU lu(T, lambda + cplx{bump, bump});
    if (!lu.ok()) return v;
    for (int s = 0; s < steps; ++s) {
        lu.solve_in_place(v);
        v /= v.norm();
    }
    return v;
}

struct Pair {
    cplx value;
    CVector vector;
};

bool by_real_then_imag(const cplx& a, const cplx& b)
{
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

// If T = D S D^-1 + i gamma I with S real symmetric tridiagonal, returns the
// off-diagonal of S and fills `scaling` with D.
bool symmetrizable(const Tridiagonal& T, Eigen::VectorXd& offdiag, double& gamma,
                   Eigen::VectorXcd& scaling)
{
    const Eigen::Index n = T.size();
    double imag_scale = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) imag_scale = std::max(imag_scale, std::abs(T.diag(j).imag()));
    gamma = T.diag(0).imag();
    for (Eigen::Index j = 1; j < n; ++j)
        if (std::abs(T.diag(j).imag() - gamma) > 1e-13 * imag_scale) return false;

    offdiag.resize(std::max<Eigen::Index>(n - 1, 0));
    scaling.resize(n);
    scaling(0) = 1.0;
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const cplx p = T.upper(j) * T.lower(j);
        if (!(p.real() > 0.0) || std::abs(p.imag()) > 1e-12 * std::abs(p)) return false;
        offdiag(j) = std::sqrt(p.real());
        scaling(j + 1) = scaling(j) * offdiag(j) / T.upper(j);
    }
    return true;
}

std::vector<Pair> solve_symmetrizable(const Tridiagonal& T, const Eigen::VectorXd& offdiag,
                                      double gamma, const Eigen::VectorXcd& scaling, std::size_t k)
{
    const auto n = static_cast<lapack_int>(T.size());
    std::vector<double> d(n), e(std::max<lapack_int>(n, 1), 0.0);
    for (lapack_int j = 0; j < n; ++j) d[j] = T.diag(j).real();
    for (lapack_int j = 0; j + 1 < n; ++j) e[j] = offdiag(j);

    lapack_int found = 0;
    std::vector<double> w(n);
    std::vector<double> z(static_cast<std::size_t>(n) * k);
    std::vector<lapack_int> isuppz(2 * k);
    const lapack_int rc =
        LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0, 0.0, 1,
                       static_cast<lapack_int>(k), LAPACKE_dlamch('S'), &found, w.data(), z.data(),
                       n, isuppz.data());
    if (rc != 0 || found != static_cast<lapack_int>(k))
        throw ConvergenceError(fmt::format("symmetric tridiagonal eigensolver failed (info {})", rc), 1);

    std::vector<Pair> pairs(k);
    for (std::size_t i = 0; i < k; ++i) {
        CVector v(n);
        for (lapack_int j = 0; j < n; ++j) v(j) = scaling(j) * z[i * n + j];
        pairs[i] = {cplx{w[i], gamma}, v / v.norm()};
    }
    return pairs;
}

std::vector<Pair> solve_dense(const Tridiagonal& T)
{
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(T.dense(), true);
    if (ces.info() != Eigen::Success)
        throw ConvergenceError("dense complex eigensolver did not converge", 1);
    std::vector<Pair> pairs(static_cast<std::size_t>(T.size()));
    for (Eigen::Index i = 0; i < T.size(); ++i) pairs[i] = {ces.eigenvalues()(i), ces.eigenvectors().col(i)};
    return pairs;
}

std::vector<Pair> solve_shift_invert(const Tridiagonal& T, std::size_t k, double tol, int& iterations)
{
    const Eigen::Index n = T.size();
    // left of every Gershgorin disc
    double sigma = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
        double radius = 0.0;
        if (j > 0) radius += std::abs(T.lower(j - 1));
        if (j + 1 < n) radius += std::abs(T.upper(j));
        sigma = std::min(sigma, T.diag(j).real() - radius);
    }
    sigma -= 1.0;
    TridiagonalLU lu(T, sigma);
    if (!lu.ok()) throw ConvergenceError("shift-invert factorization failed", 0);

    CVector start = CVector::Ones(n);
    for (Eigen::Index j = 0; j < n; ++j) start(j) += 1e-3 * static_cast<double>(j % 7);
    start /= start.norm();

    constexpr int kMaxRestarts = 30;
    Eigen::Index ncv = std::min<Eigen::Index>(n, std::max<Eigen::Index>(4 * static_cast<Eigen::Index>(k), 40));
    std::vector<Pair> best;
    for (iterations = 1; iterations <= kMaxRestarts; ++iterations) {
        Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(n, ncv + 1);
        Eigen::MatrixXcd Hm = Eigen::MatrixXcd::Zero(ncv + 1, ncv);
        V.col(0) = start;
        Eigen::Index used = ncv;
        for (Eigen::Index j = 0; j < ncv; ++j) {
            CVector w = V.col(j);
            lu.solve_in_place(w);
            for (int pass = 0; pass < 2; ++pass) {
                const CVector h = V.leftCols(j + 1).adjoint() * w;
                w -= V.leftCols(j + 1) * h;
                Hm.col(j).head(j + 1) += h;
            }
            const double beta = w.norm();
            Hm(j + 1, j) = beta;
            if (beta < 1e-14 * Hm.col(j).head(j + 1).norm()) {
                used = j + 1;
                break;
            }
            V.col(j + 1) = w / beta;
        }

        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> small(Hm.topLeftCorner(used, used), true);
        std::vector<Pair> ritz;
        for (Eigen::Index i = 0; i < used; ++i) {
            const cplx theta = small.eigenvalues()(i);
            if (std::abs(theta) == 0.0) continue;
            CVector x = V.leftCols(used) * small.eigenvectors().col(i);
            ritz.push_back({sigma + 1.0 / theta, x / x.norm()});
        }
        std::sort(ritz.begin(), ritz.end(),
                  [](const Pair& a, const Pair& b) { return by_real_then_imag(a.value, b.value); });
        if (ritz.size() > k) ritz.resize(k);

        bool converged = ritz.size() == k;
        for (auto& p : ritz) {
            if (residual(T, p.vector, p.value) >= tol) {
                p.vector = refine(T, p.value, p.vector, 2);
                if (residual(T, p.vector, p.value) >= tol) converged = false;
            }
        }
        best = std::move(ritz);
        if (converged) return best;

        start = CVector::Zero(n);
        for (const auto& p : best) start += p.vector;
        start /= start.norm();
        ncv = std::min<Eigen::Index>(n, ncv + 20);
    }
    throw ConvergenceError(
        fmt::format("shift-invert iteration did not converge after {} restarts", kMaxRestarts),
        kMaxRestarts);
}

}  // namespace

std::string_view to_string(EigenMethod method)
{
    switch (method) {
    case EigenMethod::symmetrizable: return "symmetrizable-tridiagonal";
    case EigenMethod::dense: return "dense";
    case EigenMethod::shift_invert: return "shift-invert";
    }
    return "unknown";
}

double surface_norm(const TangentialOperator& op, const CVector& v)
{
    return std::sqrt((op.measure_weights.array() * v.array().abs2()).sum());
}

CVector normalized(const TangentialOperator& op, const CVector& v)
{
    const double nrm = surface_norm(op, v);
    if (!(nrm > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
    return v / nrm;
}

Spectrum eigen_solve(const TangentialOperator& op, std::size_t k, const EigenOptions& options)
{
    const Tridiagonal& T = op.matrix;
    const auto n = static_cast<std::size_t>(T.size());
    if (k == 0 || k > n)
        throw std::invalid_argument(fmt::format("requested {} eigenpairs from a {}-point operator", k, n));

    Spectrum spec;
    spec.m = op.m;

    std::vector<Pair> pairs;
    int iterations = 1;
    Eigen::VectorXd offdiag;
    Eigen::VectorXcd scaling;
    double gamma = 0.0;
    if (options.allow_symmetrizable && symmetrizable(T, offdiag, gamma, scaling)) {
        spec.method = EigenMethod::symmetrizable;
        pairs = solve_symmetrizable(T, offdiag, gamma, scaling, k);
    } else if (T.size() <= options.dense_limit) {
        spec.method = EigenMethod::dense;
        pairs = solve_dense(T);
    } else {
        spec.method = EigenMethod::shift_invert;
        pairs = solve_shift_invert(T, k, options.residual_tol, iterations);
    }

    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Pair& a, const Pair& b) { return by_real_then_imag(a.value, b.value); });
    pairs.resize(k);

    spec.eigenvectors.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        Pair& p = pairs[i];
        double r = residual(T, p.vector, p.value);
        if (r >= options.residual_tol) {
            p.vector = refine(T, p.value, p.vector, 3);
            r = residual(T, p.vector, p.value);
            ++iterations;
        }
        if (!(r < options.residual_tol))
            throw ConvergenceError(
                fmt::format("eigenpair {} (lambda = {}{:+}i) has residual {:.3e} >= {:.1e} after {} "
                            "iterations",
                            i, p.value.real(), p.value.imag(), r, options.residual_tol, iterations),
                iterations);
        spec.eigenvalues.push_back(p.value);
        spec.residuals.push_back(r);
        spec.eigenvectors.col(static_cast<Eigen::Index>(i)) = canonical(op, p.vector);
    }
    return spec;
}

EvolutionTrace evolve(const TangentialOperator& op, const CVector& initial, double dt,
                      std::size_t steps, std::size_t state_stride)
{
    if (!(dt > 0.0)) throw std::invalid_argument(fmt::format("dt must be positive, got {}", dt));
    if (initial.size() != op.size())
        throw std::invalid_argument(fmt::format("initial state has {} entries, operator has {}",
                                                initial.size(), op.size()));
    const double n0 = surface_norm(op, initial);
    if (std::abs(n0 - 1.0) > 1e-8)
        throw std::invalid_argument(fmt::format("initial state must have unit surface norm, got {}", n0));

    const Tridiagonal& M = op.matrix;
    const cplx half_step{0.0, 0.5 * dt};
    // (I + i dt/2 M) = i dt/2 (M - (-1 / (i dt/2)) I)
    TridiagonalLU implicit(M, -1.0, half_step);
    if (!implicit.ok())
        throw std::runtime_error(
            fmt::format("Crank-Nicolson matrix is singular (info {})", implicit.info()));

    EvolutionTrace trace;
    trace.times.reserve(steps + 1);
    trace.norms.reserve(steps + 1);
    trace.weighted_coupling.reserve(steps + 1);

    auto record = [&](std::size_t step, const CVector& chi) {
        const double t = static_cast<double>(step) * dt;
        const Eigen::ArrayXd density = op.measure_weights.array() * chi.array().abs2();
        const double mass = density.sum();
        trace.times.push_back(t);
        trace.norms.push_back(std::sqrt(mass));
        trace.weighted_coupling.push_back((density * op.coupling.array()).sum() / mass);
        const bool keep = step == 0 || step == steps ||
                          (state_stride > 0 && step % state_stride == 0);
        if (keep) {
            trace.state_times.push_back(t);
            trace.states.push_back(chi);
        }
    };

    CVector chi = initial;
    record(0, chi);
    for (std::size_t s = 1; s <= steps; ++s) {
        CVector rhs = chi - half_step * M.apply(chi);
        implicit.solve_in_place(rhs);
        chi = std::move(rhs);
        record(s, chi);
        const double ratio = trace.norms[s] / trace.norms[s - 1];
        if (!(ratio < 10.0 && ratio > 0.1))
            trace.warnings.push_back(
                fmt::format("unstable step {}: norm changed by a factor {}", s, ratio));
        if (!(trace.norms[s] > 0.0) || !std::isfinite(trace.norms[s]))
            throw std::runtime_error(fmt::format("norm became {} at step {}", trace.norms[s], s));
    }

    // least-squares slope of ln(norm) against t
    const auto count = static_cast<double>(trace.times.size());
    if (trace.times.size() >= 2) {
        const double tbar = std::accumulate(trace.times.begin(), trace.times.end(), 0.0) / count;
        double ybar = 0.0;
        for (double nrm : trace.norms) ybar += std::log(nrm);
        ybar /= count;
        double sxy = 0.0;
        double sxx = 0.0;
        for (std::size_t i = 0; i < trace.times.size(); ++i) {
            const double dx = trace.times[i] - tbar;
            sxy += dx * (std::log(trace.norms[i]) - ybar);
            sxx += dx * dx;
        }
        trace.log_norm_slope = sxy / sxx;
    }
    return trace;
}

namespace {

// Measure anti-Hermitian part W^-1 ((W M) - (W M)^H) / 2 as a tridiagonal.
Tridiagonal anti_hermitian(const TangentialOperator& op)
{
    const Tridiagonal& M = op.matrix;
    const Eigen::VectorXd& w = op.measure_weights;
    const Eigen::Index n = M.size();
    Tridiagonal K;
    K.diag.resize(n);
    K.upper.resize(std::max<Eigen::Index>(n - 1, 0));
    K.lower.resize(std::max<Eigen::Index>(n - 1, 0));
    for (Eigen::Index j = 0; j < n; ++j) K.diag(j) = cplx{0.0, M.diag(j).imag()};
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const cplx wu = w(j) * M.upper(j);
        const cplx wl = w(j + 1) * M.lower(j);
        K.upper(j) = (wu - std::conj(wl)) / (2.0 * w(j));
        K.lower(j) = (wl - std::conj(wu)) / (2.0 * w(j + 1));
    }
    return K;
}

}  // namespace

HermiticityReport hermiticity_report(const TangentialOperator& op)
{
    const Tridiagonal& M = op.matrix;
    const Eigen::VectorXd& w = op.measure_weights;
    const Eigen::Index n = M.size();

    HermiticityReport r;
    for (Eigen::Index j = 0; j < n; ++j)
        r.max_asymmetry = std::max(r.max_asymmetry, 2.0 * w(j) * std::abs(M.diag(j).imag()));
    for (Eigen::Index j = 0; j + 1 < n; ++j)
        r.max_asymmetry =
            std::max(r.max_asymmetry, std::abs(w(j) * M.upper(j) - std::conj(w(j + 1) * M.lower(j))));

    const Tridiagonal K = anti_hermitian(op);
    r.anti_hermitian_norm = std::sqrt(K.diag.squaredNorm() + K.upper.squaredNorm() + K.lower.squaredNorm());
    for (Eigen::Index j = 0; j < n; ++j)
        r.coupling_mismatch = std::max(r.coupling_mismatch, std::abs(K.diag(j) - cplx{0.0, op.coupling(j)}));
    if (n > 1) {
        r.coupling_mismatch = std::max(r.coupling_mismatch, K.upper.cwiseAbs().maxCoeff());
        r.coupling_mismatch = std::max(r.coupling_mismatch, K.lower.cwiseAbs().maxCoeff());
    }
    // off-diagonal entries are differences of O(1/dr^2) numbers, so judge them on that scale
    double scale = 1.0;
    if (n > 0) scale = std::max(scale, M.diag.cwiseAbs().maxCoeff());
    if (n > 1) scale = std::max({scale, M.upper.cwiseAbs().maxCoeff(), M.lower.cwiseAbs().maxCoeff()});
    r.coupling_mismatch /= scale;
    r.anti_hermitian_is_coupling = r.coupling_mismatch <= kHermiticityTolerance;
    return r;
}

TangentialOperator hermitian_part(const TangentialOperator& op)
{
    TangentialOperator h = op;
    const Tridiagonal K = anti_hermitian(op);
    h.matrix.diag -= K.diag;
    h.matrix.upper -= K.upper;
    h.matrix.lower -= K.lower;
    h.potential = h.potential.real().cast<cplx>();
    h.coupling.setZero();
    return h;
}

std::vector<CombinedLevel> total_energy(const Spectrum& spectrum, double omega,
                                        std::span<const std::pair<std::size_t, int>> requests)
{
    std::vector<CombinedLevel> out;
    out.reserve(requests.size());
    for (const auto& [index, level] : requests) {
        if (index >= spectrum.eigenvalues.size())
            throw std::out_of_range(fmt::format("tangential index {} beyond the {} computed levels",
                                                index, spectrum.eigenvalues.size()));
        CombinedLevel c;
        c.tangential_index = index;
        c.normal_level = level;
        c.tangential = spectrum.eigenvalues[index];
        c.normal = normal_energy(omega, level);
        c.total = c.tangential + c.normal;
        out.push_back(c);
    }
    return out;
}

}  // namespace curvband
