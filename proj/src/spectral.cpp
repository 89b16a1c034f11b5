#include "oseen/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "oseen/parallel.hpp"

namespace oseen {

namespace {

// Largest singular value of A^{-1} via Lanczos on A^{-H} A^{-1} using a
// prefactorised LU. Returns nan on stagnation.
double inv_norm_lanczos(const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu, int dim,
                        double tol = 1e-11, int max_steps = 140) {
    std::mt19937_64 rng(0x9d2c5680u ^ static_cast<unsigned>(dim));
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = {gauss(rng), gauss(rng)};
    v.normalize();

    std::vector<Eigen::VectorXcd> basis;
    std::vector<double> alpha, beta;
    Eigen::VectorXcd prev = Eigen::VectorXcd::Zero(dim);
    double est_old = 0.0;
    for (int k = 0; k < max_steps; ++k) {
        basis.push_back(v);
        Eigen::VectorXcd w = lu.solve(v);
        w = lu.adjoint().solve(w);  // w = A^{-H} A^{-1} v
        std::complex<double> a = v.adjoint() * w;
        w -= a.real() * v;
        if (k > 0) w -= beta.back() * prev;
        // full reorthogonalisation keeps the extreme Ritz value clean
        for (const auto& b : basis) w -= (b.adjoint() * w) * b;
        alpha.push_back(a.real());
        double bnorm = w.norm();
        // tridiagonal Ritz estimate
        int m = static_cast<int>(alpha.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        double est = es.eigenvalues().maxCoeff();
        if (k > 4 && std::abs(est - est_old) < tol * est) return std::sqrt(est);
        est_old = est;
        if (bnorm < 1e-300) return std::sqrt(est);
        beta.push_back(bnorm);
        prev = basis.back();
        v = w / bnorm;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

Eigen::MatrixXcd shifted(const Eigen::MatrixXcd& h, double lambda) {
    Eigen::MatrixXcd a = h;
    a.diagonal().array() -= std::complex<double>(0.0, lambda);
    return a;
}

}  // namespace

SpectrumResult eigenvalues(const ModeOperator& op, Subspace subspace) {
    SpectrumResult out;
    out.mode = op.mode();
    out.beta = op.beta();
    out.subspace = subspace;
    out.n_points = op.grid()->size();
    out.r_max = op.grid()->r_max();

    Eigen::MatrixXcd h = op.h_matrix(subspace);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalues: complex eigensolver failed (mode " +
                                 std::to_string(op.mode()) + ", beta " +
                                 std::to_string(op.beta()) + ")");
    const auto& ev = es.eigenvalues();
    std::vector<int> order(ev.size());
    for (int i = 0; i < ev.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return ev(a).real() < ev(b).real(); });
    for (int idx : order) {
        out.eigenvalues.push_back(ev(idx));
        Eigen::VectorXcd v = es.eigenvectors().col(idx);
        out.residuals.push_back((h * v - ev(idx) * v).norm() / v.norm());
    }
    return out;
}

double resolvent_norm(const Eigen::MatrixXcd& h, double lambda) {
    Eigen::MatrixXcd a = shifted(h, lambda);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    double v = inv_norm_lanczos(lu, static_cast<int>(a.rows()));
    if (std::isnan(v)) return resolvent_norm_svd(h, lambda);
    return v;
}

double resolvent_norm(const ModeOperator& op, double lambda, Subspace subspace) {
    return resolvent_norm(op.h_matrix(subspace), lambda);
}

double resolvent_norm_svd(const Eigen::MatrixXcd& h, double lambda) {
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(shifted(h, lambda));
    return 1.0 / svd.singularValues().tail(1)(0);
}

ResolventSweep pseudospectral_sup(const ModeOperator& op, Subspace subspace,
                                  const SupOptions& opts) {
    ResolventSweep out;
    out.mode = op.mode();
    out.beta = op.beta();
    out.subspace = subspace;

    const Eigen::MatrixXcd h = op.h_matrix(subspace);
    const double beta = std::abs(op.beta());
    const double c6 = op.has_coupling() ? op.m_norm() : 0.0;

    double hi = (beta > 0.0 && c6 > 0.0) ? 2.0 * c6 * beta : 5.0 * std::max(1, std::abs(op.mode()));

    auto build_grid_lams = [&](double window) {
        std::vector<double> lams;
        int half = (opts.coarse_points - 1) / 2;
        double lo = std::max(1e-3, 1e-4 * window);
        lams.push_back(0.0);
        for (int i = 0; i < half; ++i) {
            double t = lo * std::pow(window / lo, static_cast<double>(i) / (half - 1));
            lams.push_back(t);
            lams.push_back(-t);
        }
        std::sort(lams.begin(), lams.end());
        return lams;
    };

    auto eval = [&](double lam) { return resolvent_norm(h, lam); };

    bool doubled = false;
    std::vector<double> lams, vals;
    while (true) {
        lams = build_grid_lams(hi);
        vals.assign(lams.size(), 0.0);
        parallel_for(lams.size(), opts.workers, [&](std::size_t i) { vals[i] = eval(lams[i]); });
        std::size_t best = std::distance(vals.begin(), std::max_element(vals.begin(), vals.end()));
        if (best != 0 && best != lams.size() - 1) break;
        hi *= 2.0;  // argmax at the window edge: widen and retry
        doubled = true;
    }
    out.window_was_doubled = doubled;
    out.lambda_samples = lams;
    out.norms = vals;

    // refine every interior local maximum by golden section
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double sup = 0.0, arg = 0.0;
    for (std::size_t i = 0; i < lams.size(); ++i) {
        bool loc_max = (i == 0 || vals[i] >= vals[i - 1]) &&
                       (i + 1 == lams.size() || vals[i] >= vals[i + 1]);
        if (!loc_max) continue;
        double a = (i == 0) ? lams[0] : lams[i - 1];
        double b = (i + 1 == lams.size()) ? lams.back() : lams[i + 1];
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = eval(x1), f2 = eval(x2);
        while (b - a > opts.rel_tol * std::max(1.0, std::abs(a) + std::abs(b))) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = eval(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = eval(x1);
            }
        }
        double fm = std::max(std::max(f1, f2), vals[i]);
        double am = (f1 > f2) ? x1 : x2;
        if (vals[i] >= f1 && vals[i] >= f2) am = lams[i];
        if (fm > sup) {
            sup = fm;
            arg = am;
        }
    }
    out.sup_norm = sup;
    out.argmax_lambda = arg;
    return out;
}

ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 4) throw std::invalid_argument("fit_scaling: need at least 4 points");
    if (x.size() != y.size()) throw std::invalid_argument("fit_scaling: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0)
            throw std::invalid_argument("fit_scaling: values must be positive");
        if (i > 0 && x[i] <= x[i - 1])
            throw std::invalid_argument("fit_scaling: x must be strictly increasing");
    }
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        syy += ly * ly;
    }
    double denom = n * sxx - sx * sx;
    ScalingFit fit;
    fit.x = x;
    fit.y = y;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0.0, mean_y = sy / n, ss_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double ly = std::log(y[i]);
        double pred = fit.intercept + fit.slope * std::log(x[i]);
        ss_res += (ly - pred) * (ly - pred);
        ss_tot += (ly - mean_y) * (ly - mean_y);
    }
    fit.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

namespace {
double min_re_eig(double alpha, int n, int n_points) {
    double rmax = recommended_r_max(alpha);
    double cluster = std::abs(alpha) >= 3.0e4 ? 8.0 : 4.0;
    auto grid = build_grid(n_points, rmax, MapKind::algebraic, cluster);
    ModeOperator op = assemble_H(grid, n, n * alpha);
    Subspace sub = (std::abs(n) == 1) ? Subspace::z0 : Subspace::full;
    SpectrumResult sp = eigenvalues(op, sub);
    return sp.eigenvalues.front().real();
}
}  // namespace

SigmaResult spectral_bound_sigma(double alpha, const SigmaOptions& opts) {
    if (opts.n_max < 2) throw std::invalid_argument("spectral_bound_sigma: n_max >= 2");
    SigmaResult out;
    out.alpha = alpha;

    int base = opts.base_points;
    if (base == 0) {
        double a = std::abs(alpha);
        base = a <= 1.0e3 ? 220 : (a <= 1.0e4 ? 320 : (a <= 2.0e5 ? 480 : 640));
    }

    std::vector<SigmaModeEntry> entries(opts.n_max);
    parallel_for(static_cast<std::size_t>(opts.n_max), opts.workers, [&](std::size_t i) {
        int n = static_cast<int>(i) + 1;
        SigmaModeEntry e;
        e.mode = n;
        e.beta = n * alpha;
        e.n_points = base;
        e.min_re_coarse = min_re_eig(alpha, n, base);
        e.min_re_fine = min_re_eig(alpha, n, 2 * base);
        e.trusted = std::abs(e.min_re_fine - e.min_re_coarse) <=
                    opts.trust_rel_tol * std::abs(e.min_re_fine);
        entries[i] = e;
    });
    out.per_mode = entries;

    double best = std::numeric_limits<double>::infinity();
    bool best_trusted = false;
    for (const auto& e : entries)
        if (e.min_re_fine < best) {
            best = e.min_re_fine;
            best_trusted = e.trusted;
        }
    out.sigma = best;
    out.trusted = best_trusted;
    for (const auto& e : entries)
        if (!e.trusted && e.min_re_fine < best * (1.0 + 1e-3)) out.trusted = false;
    return out;
}

NumericalRangeReport numerical_range_check(const ModeOperator& op, int sample_count,
                                           unsigned seed, Subspace subspace) {
    if (sample_count < 100)
        throw std::invalid_argument("numerical_range_check: sample_count >= 100");
    NumericalRangeReport rep;
    rep.mode = op.mode();
    rep.beta = op.beta();
    rep.samples = sample_count;

    Eigen::MatrixXd negl = op.neg_l(subspace);
    Eigen::MatrixXcd h = op.h_matrix(subspace);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(negl);
    const auto& lam = es.eigenvalues();
    const auto& u = es.eigenvectors();
    const int dim = static_cast<int>(lam.size());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    double min_re = std::numeric_limits<double>::infinity();
    double max_im = 0.0;
    std::vector<double> xs, ys;  // sqrt(Re z), |Im z| / |alpha|
    const double alpha_abs =
        (op.mode() != 0) ? std::abs(op.beta() / op.mode()) : std::abs(op.beta());

    // layered smoothness scales: random vectors in span{ lambda_k <= s }
    std::vector<double> scales;
    for (double s = 8.0 * std::max(1, std::abs(op.mode())); s < lam(dim - 1); s *= 3.0)
        scales.push_back(s);
    if (scales.empty()) scales.push_back(lam(dim - 1));

    for (int i = 0; i < sample_count; ++i) {
        double s = scales[i % scales.size()];
        int k = 0;
        while (k < dim && lam(k) <= s) ++k;
        k = std::max(k, 2);
        Eigen::VectorXcd coef(k);
        for (int j = 0; j < k; ++j) coef(j) = {gauss(rng), gauss(rng)};
        Eigen::VectorXcd v = u.leftCols(k) * coef;
        v.normalize();
        std::complex<double> z = (v.adjoint() * (h * v))(0);
        min_re = std::min(min_re, z.real());
        max_im = std::max(max_im, std::abs(z.imag()));
        if (alpha_abs > 0.0) {
            xs.push_back(std::sqrt(std::max(z.real(), 0.0)));
            ys.push_back(std::abs(z.imag()) / alpha_abs);
        }
    }
    rep.min_re = min_re;
    rep.max_abs_im = max_im;
    double floor_re = (subspace == Subspace::z0 && std::abs(op.mode()) == 1)
                          ? 1.0
                          : 0.5 * std::abs(op.mode());
    rep.re_bound_ok = min_re >= floor_re - 1e-8 * std::max(1.0, std::abs(min_re));
    double c6 = op.has_coupling() ? op.m_norm() : 0.0;
    rep.im_bound_ok = max_im <= c6 * std::abs(op.beta()) * (1.0 + 1e-8) + 1e-10;

    if (!xs.empty()) {
        // slope through the origin on the upper envelope, then the smallest
        // offset that covers every sample
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            num += xs[i] * ys[i];
            den += xs[i] * xs[i];
        }
        rep.c8_hat = den > 0.0 ? num / den : 0.0;
        double c9 = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            c9 = std::max(c9, ys[i] - rep.c8_hat * xs[i]);
        rep.c9_hat = c9;
    }
    return rep;
}

}  // namespace oseen
