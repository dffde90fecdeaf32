#include <doctest.h>

#include <cmath>
#include <vector>

#include "curvband/operator.hpp"
#include "curvband/solver.hpp"
#include "oracles.hpp"

using namespace curvband;

namespace {

TangentialOperator flat_disc(std::size_t n, int m, double R = 1.0)
{
    return build_tangential(SurfaceProfile::flat(R), VectorPotentialSpec::zero(), m, RadialGrid(n, R),
                            OperatorMode::hermitian_corrected, 1.0);
}

TangentialOperator shifted(TangentialOperator op, cplx s)
{
    op.matrix.diag.array() += s;
    return op;
}

}  // namespace

TEST_CASE("Bessel-zero oracle")
{
    CHECK(oracle::bessel_zero(0, 1) == doctest::Approx(2.404825557695773).epsilon(1e-13));
    CHECK(oracle::bessel_zero(1, 1) == doctest::Approx(3.831705970207512).epsilon(1e-13));
    CHECK(oracle::bessel_zero(2, 3) == doctest::Approx(11.61984117214906).epsilon(1e-12));
}

TEST_CASE("flat disc ground states match Bessel zeros")
{
    for (int m : {0, 1}) {
        const auto spec = eigen_solve(flat_disc(2000, m), 3);
        CHECK(spec.method == EigenMethod::symmetrizable);
        const double exact = oracle::disc_eigenvalue(m, 1);
        CHECK(std::abs(spec.eigenvalues[0].real() - exact) / exact < 1e-4);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(spec.residuals[i] < 1e-8);
            CHECK(std::abs(spec.eigenvalues[i].imag()) < 1e-9);
        }
    }
    CHECK(oracle::disc_eigenvalue(0, 1) == doctest::Approx(2.891592).epsilon(1e-6));
    CHECK(oracle::disc_eigenvalue(1, 1) == doctest::Approx(7.340985).epsilon(1e-6));
}

TEST_CASE("centrifugal barrier raises the ground state")
{
    const double e0 = eigen_solve(flat_disc(400, 0), 1).eigenvalues[0].real();
    for (int m : {1, -1, 2, 5}) CHECK(eigen_solve(flat_disc(400, m), 1).eigenvalues[0].real() > e0);
}

TEST_CASE("second-order convergence on the flat disc")
{
    const double exact = oracle::disc_eigenvalue(0, 1);
    std::vector<double> err;
    for (std::size_t n : {250, 500, 1000, 2000})
        err.push_back(std::abs(eigen_solve(flat_disc(n, 0), 1).eigenvalues[0].real() - exact));
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double ratio = err[i - 1] / err[i];
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
    }
}

TEST_CASE("eigenvectors are normalized and ordered")
{
    const auto op = flat_disc(300, 1);
    const auto spec = eigen_solve(op, 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(surface_norm(op, spec.eigenvectors.col(static_cast<Eigen::Index>(i))) == doctest::Approx(1.0));
        if (i > 0) CHECK(spec.eigenvalues[i - 1].real() <= spec.eigenvalues[i].real());
    }
    // repeat runs are bitwise identical
    const auto again = eigen_solve(op, 5);
    CHECK(again.eigenvalues == spec.eigenvalues);
}

TEST_CASE("shift covariance on every path")
{
    const auto para = SurfaceProfile::paraboloid(0.5, 1.0);
    const auto base = build_tangential(para, VectorPotentialSpec::zero(), 1, RadialGrid(120, 1.0),
                                       OperatorMode::hermitian_corrected, 1.0);
    const cplx s{0.37, -0.21};
    const std::size_t n = 120;

    const auto a = eigen_solve(base, n);
    const auto b = eigen_solve(shifted(base, s), n);
    CHECK(a.method == EigenMethod::symmetrizable);
    CHECK(b.method == EigenMethod::symmetrizable);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(b.eigenvalues[i] - a.eigenvalues[i] - s));
    CHECK(worst < 1e-10);

    EigenOptions dense;
    dense.allow_symmetrizable = false;
    const auto c = eigen_solve(base, 10, dense);
    const auto d = eigen_solve(shifted(base, s), 10, dense);
    CHECK(c.method == EigenMethod::dense);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(std::abs(d.eigenvalues[i] - c.eigenvalues[i] - s) < 1e-9);
        CHECK(std::abs(c.eigenvalues[i] - a.eigenvalues[i]) < 1e-9);
    }
}

TEST_CASE("uniform coupling shifts the spectrum by i e c + e^2 A3^2 / 2")
{
    const double Rs = 2.0;
    const auto cap = SurfaceProfile::sphere_cap(Rs, 1.5);
    const RadialGrid grid(150, 1.5);
    const double c = 0.2;
    const double e = 1.0;
    const auto bare = build_tangential(cap, VectorPotentialSpec::zero(), 0, grid, OperatorMode::hermitian_corrected, e);
    const auto coupled = build_tangential(cap, VectorPotentialSpec::uniform_coupling(cap, c), 0, grid,
                                          OperatorMode::hermitian_corrected, e);
    const double a3 = c * Rs;  // H = 1/Rs on the cap
    const cplx expected{0.5 * e * e * a3 * a3, e * c};
    const auto s0 = eigen_solve(bare, 20);
    const auto s1 = eigen_solve(coupled, 20);
    for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(s1.eigenvalues[i] - s0.eigenvalues[i] - expected) < 1e-10);
}

TEST_CASE("non-normal operators: dense and shift-invert agree")
{
    const auto para = SurfaceProfile::paraboloid(0.5, 1.0);
    const auto A = VectorPotentialSpec::frame_synthetic(nullptr, nullptr, [](double, double) { return 2.0; },
                                                        GammaInterval{0.3, 0.7});
    const auto op = build_tangential(para, A, 0, RadialGrid(300, 1.0), OperatorMode::hermitian_corrected, 1.0);

    const auto dense = eigen_solve(op, 6);
    CHECK(dense.method == EigenMethod::dense);
    bool any_complex = false;
    for (const auto& v : dense.eigenvalues) any_complex = any_complex || std::abs(v.imag()) > 1e-6;
    CHECK(any_complex);

    EigenOptions opts;
    opts.dense_limit = 100;
    const auto iter = eigen_solve(op, 6, opts);
    CHECK(iter.method == EigenMethod::shift_invert);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(std::abs(iter.eigenvalues[i] - dense.eigenvalues[i]) < 1e-8);
        CHECK(iter.residuals[i] < 1e-8);
    }

    // as-written mode on a curved profile is a real non-symmetric tridiagonal
    const auto written = build_tangential(para, VectorPotentialSpec::zero(), 0, RadialGrid(300, 1.0),
                                          OperatorMode::as_written, 1.0);
    const auto sw = eigen_solve(written, 4);
    for (double r : sw.residuals) CHECK(r < 1e-8);
}

TEST_CASE("eigen_solve argument checks")
{
    const auto op = flat_disc(20, 0);
    CHECK_THROWS_AS(eigen_solve(op, 0), std::invalid_argument);
    CHECK_THROWS_AS(eigen_solve(op, 21), std::invalid_argument);
    CHECK(eigen_solve(op, 20).eigenvalues.size() == 20);
}

TEST_CASE("Crank-Nicolson conserves the norm of Hermitian generators")
{
    const auto para = SurfaceProfile::paraboloid(0.5, 1.0);
    const auto op = build_tangential(para, VectorPotentialSpec::zero(), 0, RadialGrid(100, 1.0),
                                     OperatorMode::hermitian_corrected, 1.0);
    // a non-stationary start: mix of the two lowest modes
    const auto spec = eigen_solve(op, 2);
    const CVector start = normalized(op, spec.eigenvectors.col(0) + 0.5 * spec.eigenvectors.col(1));
    const auto trace = evolve(op, start, 1e-3, 10000, 0);
    double drift = 0.0;
    for (double n : trace.norms) drift = std::max(drift, std::abs(n - trace.norms[0]) / trace.norms[0]);
    CHECK(drift < 1e-9);
    CHECK(std::abs(trace.log_norm_slope) < 1e-9);
    CHECK(trace.states.size() == 2);
    CHECK(trace.times.size() == 10001);
    CHECK(trace.warnings.empty());
}

TEST_CASE("uniform imaginary coupling grows or decays the norm as exp(c t)")
{
    const auto cap = SurfaceProfile::sphere_cap(2.0, 1.5);
    const RadialGrid grid(200, 1.5);
    for (double c : {0.2, -0.2}) {
        const auto op = build_tangential(cap, VectorPotentialSpec::uniform_coupling(cap, c), 0, grid,
                                         OperatorMode::hermitian_corrected, 1.0);
        const CVector start = eigen_solve(hermitian_part(op), 1).eigenvectors.col(0);
        const auto trace = evolve(op, start, 1e-3, 1000, 100);
        CHECK(std::abs(trace.log_norm_slope - c) / std::abs(c) < 1e-4);
        CHECK(trace.norms.back() / trace.norms.front() == doctest::Approx(std::exp(c)).epsilon(1e-4));
        for (double w : trace.weighted_coupling) CHECK(w == doctest::Approx(c).epsilon(1e-12));
        CHECK(trace.states.size() == 11);
    }
}

TEST_CASE("localized coupling: slope tracks the |chi|^2-weighted coupling")
{
    const auto para = SurfaceProfile::paraboloid(0.5, 1.0);
    const auto A = VectorPotentialSpec::frame_synthetic(nullptr, nullptr, [](double, double) { return 0.5; },
                                                        GammaInterval{0.2, 0.6});
    const auto op = build_tangential(para, A, 0, RadialGrid(200, 1.0), OperatorMode::hermitian_corrected, 1.0);
    const CVector start = eigen_solve(hermitian_part(op), 1).eigenvectors.col(0);
    const auto trace = evolve(op, start, 1e-3, 500, 0);
    // ln |chi(T)| - ln |chi(0)| is the time integral of the weighted coupling
    double integral = 0.0;
    for (std::size_t i = 1; i < trace.times.size(); ++i)
        integral += 0.5 * (trace.weighted_coupling[i] + trace.weighted_coupling[i - 1]) *
                    (trace.times[i] - trace.times[i - 1]);
    const double growth = std::log(trace.norms.back() / trace.norms.front());
    CHECK(growth < 0.0);  // H < 0 on the paraboloid, so e A3 H < 0: decay
    CHECK(std::abs(growth - integral) < 1e-4 * std::abs(integral));
    for (double w : trace.weighted_coupling) CHECK(w < 0.0);
}

TEST_CASE("evolve preconditions and instability warning")
{
    const auto op = flat_disc(50, 0);
    const CVector ones = CVector::Ones(op.size());
    CHECK_THROWS_AS(evolve(op, ones, 1e-3, 10), std::invalid_argument);
    const CVector unit = normalized(op, ones);
    CHECK_THROWS_AS(evolve(op, unit, 0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(evolve(op, CVector::Ones(3), 1e-3, 10), std::invalid_argument);

    // a large imaginary diagonal makes a single CN step amplify by about 39
    auto wild = flat_disc(50, 0);
    wild.matrix.diag.array() += cplx{0.0, 1900.0};
    wild.coupling.array() += 1900.0;
    const CVector start = eigen_solve(flat_disc(50, 0), 1).eigenvectors.col(0);
    const auto trace = evolve(wild, start, 1e-3, 2);
    CHECK_FALSE(trace.warnings.empty());
}

TEST_CASE("hermitian part drops the coupling")
{
    const auto cap = SurfaceProfile::sphere_cap(2.0, 1.5);
    const auto op = build_tangential(cap, VectorPotentialSpec::uniform_coupling(cap, 0.3), 1, RadialGrid(64, 1.5),
                                     OperatorMode::hermitian_corrected, 1.0);
    const auto h = hermitian_part(op);
    CHECK(hermiticity_report(h).max_asymmetry < 1e-12);
    CHECK(h.coupling.cwiseAbs().maxCoeff() == 0.0);
    CHECK((op.matrix.diag - h.matrix.diag).real().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("combined tangential and normal levels")
{
    const auto spec = eigen_solve(flat_disc(2000, 0), 2);
    const std::vector<std::pair<std::size_t, int>> req{{0, 0}};
    const auto t = total_energy(spec, 1.0, req);
    CHECK(t[0].total.real() == doctest::Approx(3.391592).epsilon(1e-4));
    CHECK(t[0].normal == 0.5);

    const std::vector<std::pair<std::size_t, int>> req10{{0, 1}};
    CHECK(total_energy(spec, 10.0, req10)[0].total.real() == doctest::Approx(17.891592).epsilon(1e-4));

    Spectrum zero;
    zero.eigenvalues = {cplx{0.0, 0.0}};
    const std::vector<std::pair<std::size_t, int>> req3{{0, 3}};
    CHECK(total_energy(zero, 2.0, req3)[0].total == cplx{7.0, 0.0});

    const std::vector<std::pair<std::size_t, int>> bad{{5, 0}};
    CHECK_THROWS_AS(total_energy(spec, 1.0, bad), std::out_of_range);
}
