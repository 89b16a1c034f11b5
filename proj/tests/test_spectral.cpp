#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oseen/spectral.hpp"

using namespace oseen;

TEST_CASE("eigenvalues: beta = 0 ladders on Z and Z_0") {
    auto grid = build_grid(200, 30.0);
    SpectrumResult s2 = eigenvalues(assemble_L_n(grid, 2));
    CHECK(std::abs(s2.eigenvalues.front().real() - 1.0) < 1e-8);
    for (const auto& ev : s2.eigenvalues) CHECK(std::abs(ev.imag()) < 1e-9);

    SpectrumResult s1 = eigenvalues(assemble_L_n(grid, 1), Subspace::z0);
    CHECK(std::abs(s1.eigenvalues.front().real() - 1.5) < 1e-7);
}

TEST_CASE("rg direction stays at 1/2 for any beta (M_1 rg = 0)") {
    auto grid = build_grid(200, 30.0);
    for (double beta : {0.0, 10.0, 1000.0}) {
        SpectrumResult s = eigenvalues(assemble_H(grid, 1, beta));
        bool found = false;
        for (const auto& ev : s.eigenvalues)
            if (std::abs(ev - std::complex<double>(0.5, 0.0)) < 1e-8) found = true;
        CHECK(found);
    }
}

TEST_CASE("eigenvalue real parts respect dissipativity bounds") {
    auto grid = build_grid(160, 30.0);
    for (double beta : {50.0, 500.0}) {
        SpectrumResult s = eigenvalues(assemble_H(grid, 2, beta));
        CHECK(s.eigenvalues.front().real() >= 1.0 - 1e-7);
        SpectrumResult s1 = eigenvalues(assemble_H(grid, 1, beta), Subspace::z0);
        CHECK(s1.eigenvalues.front().real() >= 1.0 - 1e-7);
    }
}

TEST_CASE("conjugation symmetry: sigma(H_{-n,-beta}) = conj sigma(H_{n,beta})") {
    auto grid = build_grid(120, 30.0);
    SpectrumResult a = eigenvalues(assemble_H(grid, 2, 300.0));
    SpectrumResult b = eigenvalues(assemble_H(grid, -2, -300.0));
    REQUIRE(a.eigenvalues.size() == b.eigenvalues.size());
    for (std::size_t i = 0; i < std::min<std::size_t>(a.eigenvalues.size(), 20); ++i) {
        CHECK(std::abs(a.eigenvalues[i].real() - b.eigenvalues[i].real()) < 1e-10 *
              std::max(1.0, std::abs(a.eigenvalues[i].real())));
        CHECK(std::abs(a.eigenvalues[i].imag() + b.eigenvalues[i].imag()) < 1e-10 *
              std::max(1.0, std::abs(a.eigenvalues[i].imag())));
    }
}

TEST_CASE("resolvent norm: LU-Lanczos path matches the dense SVD oracle") {
    auto grid = build_grid(160, 30.0);
    ModeOperator op = assemble_H(grid, 2, 1000.0);
    Eigen::MatrixXcd h = op.h_matrix();
    for (double lam : {0.0, 3.0, 12.0, 40.0}) {
        double a = resolvent_norm(h, lam);
        double b = resolvent_norm_svd(h, lam);
        CHECK(a == doctest::Approx(b).epsilon(1e-7));
    }
}

TEST_CASE("selfadjoint resolvent equality at beta = 0") {
    auto grid = build_grid(200, 30.0);
    ResolventSweep sw = pseudospectral_sup(assemble_L_n(grid, 2));
    CHECK(sw.sup_norm == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(sw.argmax_lambda) < 1e-3);

    ResolventSweep s1 = pseudospectral_sup(assemble_L_n(grid, 1), Subspace::z0);
    CHECK(s1.sup_norm == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("resolvent lower bound 1/dist holds at sampled lambdas") {
    auto grid = build_grid(160, 30.0);
    ModeOperator op = assemble_H(grid, 2, 500.0);
    SpectrumResult s = eigenvalues(op);
    ResolventSweep sw = pseudospectral_sup(op);
    for (std::size_t i = 0; i < sw.lambda_samples.size(); i += 7) {
        double lam = sw.lambda_samples[i];
        double dist = 1e300;
        for (const auto& ev : s.eigenvalues)
            dist = std::min(dist, std::abs(ev - std::complex<double>(0.0, lam)));
        CHECK(sw.norms[i] >= 1.0 / dist - 1e-6 * sw.norms[i]);
    }
    // and the sup dominates every sample
    for (double v : sw.norms) CHECK(sw.sup_norm >= v * (1.0 - 1e-9));
}

TEST_CASE("sup is monotone under Z_0 restriction for n = 1") {
    auto grid = build_grid(160, 30.0);
    ModeOperator op = assemble_H(grid, 1, 200.0);
    double full = pseudospectral_sup(op).sup_norm;
    double z0 = pseudospectral_sup(op, Subspace::z0).sup_norm;
    CHECK(z0 <= full * (1.0 + 1e-9));
}

TEST_CASE("fit_scaling: exact power law, noisy law, validation") {
    std::vector<double> x, y;
    for (int i = 0; i < 8; ++i) {
        double xi = std::pow(10.0, 1.0 + 0.5 * i);
        x.push_back(xi);
        y.push_back(std::sqrt(xi));
    }
    ScalingFit f = fit_scaling(x, y);
    CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> un(-0.01, 0.01);
    std::vector<double> y2;
    for (std::size_t i = 0; i < x.size(); ++i)
        y2.push_back(2.7 * std::pow(x[i], -1.0 / 3.0) * (1.0 + un(rng)));
    ScalingFit f2 = fit_scaling(x, y2);
    CHECK(std::abs(f2.slope + 1.0 / 3.0) < 0.02);

    CHECK_THROWS_AS(fit_scaling({1, 2, 3}, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(fit_scaling({1, 2, 3, 4}, {1, -2, 3, 4}), std::invalid_argument);
    CHECK_THROWS_AS(fit_scaling({1, 2, 2, 4}, {1, 2, 3, 4}), std::invalid_argument);
}

TEST_CASE("sigma at alpha = 0 equals the spectral gap 1") {
    SigmaOptions opt;
    opt.n_max = 3;
    opt.base_points = 200;
    opt.workers = 3;
    SigmaResult s = spectral_bound_sigma(0.0, opt);
    CHECK(s.sigma == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(s.trusted);
}

TEST_CASE("numerical range: beta = 0 real quotients; containment at beta = 1000") {
    auto grid = build_grid(160, 30.0);
    NumericalRangeReport r0 = numerical_range_check(assemble_L_n(grid, 2), 100);
    CHECK(r0.max_abs_im < 1e-10 * std::max(1.0, std::abs(r0.min_re)));
    CHECK(r0.re_bound_ok);

    NumericalRangeReport r1 = numerical_range_check(assemble_H(grid, 2, 1000.0), 500);
    CHECK(r1.re_bound_ok);
    CHECK(r1.im_bound_ok);
    CHECK(r1.c8_hat >= 0.0);
    CHECK(std::isfinite(r1.c9_hat));
    CHECK_THROWS_AS(numerical_range_check(assemble_L_n(grid, 2), 10),
                    std::invalid_argument);
}

TEST_CASE("Lemma-3.4 constants are stable across beta") {
    auto grid = build_grid(160, 30.0);
    double c8_lo = 1e300, c8_hi = 0.0;
    for (double beta : {300.0, 3000.0, 30000.0}) {
        NumericalRangeReport r = numerical_range_check(assemble_H(grid, 2, beta), 300);
        // with Re(z) large, |Im z| / sqrt(Re z) stays O(|alpha|):
        c8_lo = std::min(c8_lo, r.c8_hat);
        c8_hi = std::max(c8_hi, r.c8_hat + r.c9_hat);
    }
    CHECK(c8_hi < 1.0);  // |alpha|-normalised slope stays O(1)
}
