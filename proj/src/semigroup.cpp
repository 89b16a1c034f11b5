#include "oseen/semigroup.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

#include "oseen/profiles.hpp"
#include "oseen/spectral.hpp"

namespace oseen {

namespace {
constexpr double kPi = 3.14159265358979323846;

double auto_lambda_cut(const ModeOperator& op, const PropagatorOptions& opts) {
    if (opts.lambda_cut > 0.0) return opts.lambda_cut;
    double c6b = op.has_coupling() ? 25.0 * op.m_norm() * std::abs(op.beta()) : 0.0;
    return std::max({2000.0, c6b, 4.0 * op.mode() * op.mode()});
}
}  // namespace

Propagator::Propagator(const ModeOperator& op, Subspace subspace,
                       const PropagatorOptions& opts) {
    Eigen::MatrixXd negl = op.neg_l(subspace);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(negl);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("Propagator: eigensolver failed");
    lambda_cut_ = auto_lambda_cut(op, opts);
    const auto& lam = es.eigenvalues();
    int m = 0;
    while (m < lam.size() && lam(m) <= lambda_cut_) ++m;
    m = std::max(m, 4);
    lambda_next_ = (m < lam.size()) ? lam(m) : std::numeric_limits<double>::infinity();
    basis_ = es.eigenvectors().leftCols(m);
    h_trunc_ = Eigen::MatrixXcd(lam.head(m).asDiagonal());
    if (op.beta() != 0.0 && op.has_coupling()) {
        Eigen::MatrixXd mm = basis_.transpose() * op.m(subspace) * basis_;
        h_trunc_ += std::complex<double>(0.0, op.beta()) * mm.cast<std::complex<double>>();
    }
}

double Propagator::norm(double tau) const {
    Eigen::MatrixXcd e = (-tau * h_trunc_).exp();
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(e);
    double trunc_part = svd.singularValues()(0);
    double dropped = std::isinf(lambda_next_) ? 0.0 : std::exp(-tau * lambda_next_);
    return std::max(trunc_part, dropped);
}

Eigen::MatrixXcd Propagator::matrix_metric(double tau) const {
    Eigen::MatrixXcd e = (-tau * h_trunc_).exp();
    return basis_.cast<std::complex<double>>() * e *
           basis_.transpose().cast<std::complex<double>>();
}

Eigen::VectorXcd Propagator::apply_metric(const Eigen::VectorXcd& x, double tau) const {
    Eigen::MatrixXcd e = (-tau * h_trunc_).exp();
    return basis_.cast<std::complex<double>>() *
           (e * (basis_.transpose().cast<std::complex<double>>() * x));
}

double propagator_norm(const ModeOperator& op, double tau, Subspace subspace,
                       const PropagatorOptions& opts) {
    if (!(tau > 0.0)) throw std::invalid_argument("propagator_norm: tau must be > 0");
    return Propagator(op, subspace, opts).norm(tau);
}

DecayEnvelope fit_decay_envelope(const ModeOperator& op, const std::vector<double>& taus,
                                 Subspace subspace, const PropagatorOptions& opts) {
    DecayEnvelope env;
    env.mode = op.mode();
    env.beta = op.beta();
    env.subspace = subspace;
    env.contraction_rate =
        (subspace == Subspace::z0 && std::abs(op.mode()) == 1) ? 1.0 : 0.5 * std::abs(op.mode());

    Propagator prop(op, subspace, opts);
    env.tau_samples = taus;
    env.norms.resize(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) env.norms[i] = prop.norm(taus[i]);

    env.contraction_ok = true;
    for (std::size_t i = 0; i < taus.size(); ++i)
        if (env.norms[i] > std::exp(-env.contraction_rate * taus[i]) * (1.0 + 1e-6))
            env.contraction_ok = false;

    const double beta = std::abs(op.beta());
    if (beta < 1.0) {
        // degenerate fit: the envelope reduces to the contraction branch
        env.c5_hat = 0.0;
        env.c4_hat = 1.0;
        env.envelope_holds = env.contraction_ok;
        env.fit_r_squared = 1.0;
        return env;
    }

    // enhanced-decay window: below the contraction branch by a margin, above
    // the precision floor
    std::vector<double> xs, ys;
    double floor = 1e-11;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        double contraction = std::exp(-env.contraction_rate * taus[i]);
        if (env.norms[i] < 0.25 * contraction && env.norms[i] > floor) {
            xs.push_back(taus[i]);
            ys.push_back(std::log(env.norms[i]));
        }
    }
    if (xs.size() >= 3) {
        double n = static_cast<double>(xs.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        double icpt = (sy - slope * sx) / n;
        double ss_res = 0, ss_tot = 0, my = sy / n;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double p = icpt + slope * xs[i];
            ss_res += (ys[i] - p) * (ys[i] - p);
            ss_tot += (ys[i] - my) * (ys[i] - my);
        }
        env.fit_r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
        env.c5_hat = -slope / std::cbrt(beta);
        env.window_lo = xs.front();
        env.window_hi = xs.back();
    } else {
        env.c5_hat = env.contraction_rate / std::cbrt(beta);
        env.fit_r_squared = 0.0;
    }

    // smallest c4 making the second branch cover every sample
    double c4 = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (env.norms[i] <= floor) continue;
        double needed = env.norms[i] * std::exp(env.c5_hat * std::cbrt(beta) * taus[i]) /
                        std::pow(beta, 2.0 / 3.0);
        c4 = std::max(c4, needed);
    }
    env.c4_hat = c4;
    env.envelope_holds = env.contraction_ok;  // second branch holds by choice of c4
    return env;
}

ContourResult laplace_contour_propagator(const ModeOperator& op, double tau,
                                         const ContourSpec& spec, Subspace subspace) {
    if (!(tau > 0.0)) throw std::invalid_argument("contour propagator: tau must be > 0");

    Eigen::MatrixXcd h = op.h_matrix(subspace);
    const int dim = static_cast<int>(h.rows());

    // contour admissibility: computed spectrum strictly right of x0
    SpectrumResult sp = eigenvalues(op, subspace);
    if (sp.eigenvalues.front().real() <= spec.x0)
        throw std::invalid_argument(
            "contour propagator: x0 = " + std::to_string(spec.x0) +
            " is not left of the computed spectrum (min Re = " +
            std::to_string(sp.eigenvalues.front().real()) + ")");

    ContourResult out;
    out.propagator = Eigen::MatrixXcd::Zero(dim, dim);
    const std::complex<double> itwo_pi(0.0, 2.0 * kPi);

    auto resolvent_at = [&](std::complex<double> z) -> Eigen::MatrixXcd {
        Eigen::MatrixXcd a = h;
        a.diagonal().array() -= z;
        ++out.resolvent_evaluations;
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
        return lu.inverse();
    };

    // vertical segment z = x0 + i y, y in [-y0, y0], dz = i dy: trapezoid
    // with node doubling (reusing previous nodes) until the segment
    // contribution settles to target_rel
    if (spec.y0 > 0.0) {
        int n2 = spec.vertical_points;
        if (n2 <= 0)
            n2 = std::max(129, static_cast<int>(std::ceil(8.0 * spec.y0 * tau / kPi)) | 1);
        auto seg_value = [&](double y) -> Eigen::MatrixXcd {
            std::complex<double> z(spec.x0, y);
            return std::complex<double>(0.0, 1.0) / itwo_pi * std::exp(-z * tau) *
                   resolvent_at(z);
        };
        double dy = 2.0 * spec.y0 / (n2 - 1);
        Eigen::MatrixXcd seg = 0.5 * (seg_value(-spec.y0) + seg_value(spec.y0));
        for (int k = 1; k < n2 - 1; ++k) seg += seg_value(-spec.y0 + k * dy);
        seg *= dy;
        for (int pass = 0; pass < 5; ++pass) {
            // midpoints of the current spacing refine the trapezoid in place
            Eigen::MatrixXcd mids = Eigen::MatrixXcd::Zero(dim, dim);
            int m = n2 - 1;
            for (int k = 0; k < m; ++k) mids += seg_value(-spec.y0 + (k + 0.5) * dy);
            Eigen::MatrixXcd refined = 0.5 * seg + 0.5 * dy * mids;
            double change = (refined - seg).norm() / std::max(refined.norm(), 1e-300);
            seg = refined;
            n2 = 2 * n2 - 1;
            dy *= 0.5;
            if (change < spec.target_rel / 3.0) break;
        }
        out.propagator += seg;
    }

    // rays z = x0 +- i y0 + (1 +- i) s, s >= 0; geometric Gauss panels
    const int gp = spec.ray_panel_points;
    Eigen::VectorXd gx(gp), gw(gp);
    for (int i = 0; i < gp; ++i) {  // Gauss-Legendre by Newton on P_gp
        double x = std::cos(kPi * (i + 0.75) / (gp + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= gp; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = gp * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= gp; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = gp * (x * p1 - p0) / (x * x - 1.0);
        gx(i) = x;
        gw(i) = 2.0 / ((1.0 - x * x) * dp * dp);
    }

    double s_max = spec.tail_cut / tau;
    double width0 = std::min(0.5 / tau, s_max / 8.0);
    for (int sign = -1; sign <= 1; sign += 2) {
        // points: z = x0 + i sign y0 + (1 + i sign) s, s >= 0 (both rays open
        // to the right). Orientation: the upper ray is traversed outward
        // (dz = (1+i) ds); the lower one inward from infinity, so written as
        // an outward integral its measure picks up a minus sign.
        std::complex<double> zdir(1.0, static_cast<double>(sign));
        std::complex<double> measure = static_cast<double>(sign) * zdir;
        std::complex<double> z0(spec.x0, sign * spec.y0);
        double lo = 0.0, width = width0;
        Eigen::MatrixXcd last_panel = Eigen::MatrixXcd::Zero(dim, dim);
        while (lo < s_max) {
            double hi = std::min(lo + width, s_max);
            double c = 0.5 * (hi + lo), hw = 0.5 * (hi - lo);
            last_panel.setZero();
            for (int i = 0; i < gp; ++i) {
                double s = c + hw * gx(i);
                std::complex<double> z = z0 + zdir * s;
                last_panel += (hw * gw(i) / itwo_pi) * measure * std::exp(-z * tau) *
                              resolvent_at(z);
            }
            out.propagator += last_panel;
            lo = hi;
            width *= 2.0;
        }
        out.tail_estimate = std::max(out.tail_estimate, last_panel.norm());
    }
    return out;
}

WeightedRadialFunction mehler_apply(const WeightedRadialFunction& w, double tau,
                                    int n_phi) {
    if (tau < 1e-3)
        throw std::invalid_argument(
            "mehler_apply: tau below 1e-3 (kernel too singular for the fixed "
            "product rule; use the matrix exponential)");
    const auto& grid = *w.grid();
    const int N = grid.size();
    const int n = w.mode();
    const double a = -std::expm1(-tau);  // 1 - e^{-tau}
    const double c = std::exp(-0.5 * tau);

    // angular factors cos(n phi) and the shared phi grid
    Eigen::VectorXd cphi(n_phi), cn(n_phi);
    for (int k = 0; k < n_phi; ++k) {
        double phi = 2.0 * kPi * k / n_phi;
        cphi(k) = std::cos(phi);
        cn(k) = std::cos(n * phi);
    }
    const double dphi = 2.0 * kPi / n_phi;

    const auto& r = grid.nodes();
    const auto& W = grid.weights();
    Eigen::VectorXcd out(N);
    for (int i = 0; i < N; ++i) {
        double ri = r(i);
        std::complex<double> acc{0.0, 0.0};
        for (int j = 0; j < N; ++j) {
            double rj = r(j);
            // stable exponent: r^2/8 - rho^2/8 - (r - rho c)^2/(4a) + z(cos-1)
            double base = ri * ri / 8.0 - rj * rj / 8.0 -
                          (ri - rj * c) * (ri - rj * c) / (4.0 * a);
            if (base < -60.0) continue;  // kernel zero to double precision
            double z = ri * rj * c / (2.0 * a);
            double ang = 0.0;
            for (int k = 0; k < n_phi; ++k) {
                double ex = base + z * (cphi(k) - 1.0);
                if (ex > -700.0) ang += std::exp(ex) * cn(k);
            }
            acc += (W(j) * rj * dphi / (4.0 * kPi * a)) * ang * w.scaled_values()(j);
        }
        out(i) = acc;
    }
    return WeightedRadialFunction::from_scaled(w.grid(), n, std::move(out));
}

namespace {
// G^{-1/2}-weighted L^p norm of a mode-0 radial profile given in the scaled
// representation (G^{-1/2} w = sqrt(4 pi) psi):
double weighted_lp(const RadialGrid& grid, const Eigen::VectorXcd& psi, double p) {
    double s = 0.0;
    for (int i = 0; i < grid.size(); ++i)
        s += grid.weights()(i) * grid.nodes()(i) *
             std::pow(std::sqrt(4.0 * kPi) * std::abs(psi(i)), p);
    return std::pow(2.0 * kPi * s, 1.0 / p);
}
}  // namespace

SmoothingReport smoothing_check(const GridPtr& grid, double p, double q, bool gradient,
                                const std::vector<double>& taus_in) {
    if (!(p >= 1.0 && q >= p))
        throw std::invalid_argument("smoothing_check: need 1 <= p <= q");
    SmoothingReport rep;
    rep.p = p;
    rep.q = q;
    rep.gradient = gradient;
    rep.expected_exponent = 1.0 / p - 1.0 / q + (gradient ? 0.5 : 0.0);
    rep.taus = taus_in;
    if (rep.taus.empty())
        for (int i = 0; i < 8; ++i)
            rep.taus.push_back(2e-3 * std::pow(25.0, i / 7.0));

    const auto& r = grid->nodes();
    const auto& D = grid->diff();
    for (double tau : rep.taus) {
        double a = -std::expm1(-tau);
        double delta = std::sqrt(a);
        Eigen::VectorXcd w_phys(grid->size());
        for (int i = 0; i < grid->size(); ++i)
            w_phys(i) = std::exp(-r(i) * r(i) / (2.0 * delta * delta));
        auto w = WeightedRadialFunction::from_physical(grid, 0, w_phys);
        double denom = weighted_lp(*grid, w.scaled_values(), p);
        auto ew = mehler_apply(w, tau);
        double num;
        if (!gradient) {
            num = weighted_lp(*grid, ew.scaled_values(), q);
        } else {
            // G^{-1/2} d_r(e^{tau L} w) = sqrt(4 pi) (psi' - (r/4) psi);
            // the r = 0 value comes from the even-symmetry condition psi'(0) = 0
            Eigen::VectorXcd psi_full(grid->size() + 1);
            psi_full.tail(grid->size()) = ew.scaled_values();
            std::complex<double> s0{0.0, 0.0};
            for (int j = 1; j <= grid->size(); ++j) s0 += D(0, j) * psi_full(j);
            psi_full(0) = -s0 / D(0, 0);
            Eigen::VectorXcd dpsi = (D * psi_full).tail(grid->size());
            Eigen::VectorXcd gvec(grid->size());
            for (int i = 0; i < grid->size(); ++i)
                gvec(i) = dpsi(i) - 0.25 * r(i) * ew.scaled_values()(i);
            num = weighted_lp(*grid, gvec, q);
        }
        rep.ratios.push_back(num / denom);
    }

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < rep.taus.size(); ++i) {
        xs.push_back(-std::expm1(-rep.taus[i]));
        ys.push_back(rep.ratios[i]);
    }
    ScalingFit fit = fit_scaling(xs, ys);
    rep.fitted_exponent = -fit.slope;
    return rep;
}

DuhamelReport duhamel_div_bound_check(const GridPtr& grid, double alpha,
                                      const std::vector<TestVectorField>& fields,
                                      double t_final, int steps) {
    DuhamelReport rep;
    rep.alpha = alpha;
    rep.samples = static_cast<int>(fields.size());
    if (fields.empty()) return rep;

    const int N = grid->size();
    const auto& r = grid->nodes();
    const auto& D = grid->diff();
    const auto& s = grid->metric_scale();

    int n_max = static_cast<int>(fields.front().f_r.size()) - 1;
    std::vector<Propagator> props;
    for (int n = 0; n <= n_max; ++n) {
        ModeOperator op = assemble_H(grid, n, n * alpha);
        props.emplace_back(op);
    }

    // (div f)_n in scaled interior coordinates:
    //   psi_div = psi_fr' + (1/r - r/4) psi_fr + (i n / r) psi_ftheta
    auto div_mode = [&](const WeightedRadialFunction& fr,
                        const WeightedRadialFunction& ft, int n) {
        Eigen::VectorXcd fr_full(N + 1);
        fr_full(0) = 0.0;
        fr_full.tail(N) = fr.scaled_values();
        Eigen::VectorXcd d = (D * fr_full).tail(N);
        Eigen::VectorXcd out(N);
        for (int i = 0; i < N; ++i) {
            double rr = r(i);
            out(i) = d(i) + (1.0 / rr - 0.25 * rr) * fr.scaled_values()(i) +
                     std::complex<double>(0.0, n) / rr * ft.scaled_values()(i);
        }
        return out;
    };

    auto run = [&](const TestVectorField& f, int nsteps, std::vector<double>& ratio_out) {
        double h = t_final / nsteps;
        std::vector<Eigen::MatrixXcd> eh, ehalf;
        for (int n = 0; n <= n_max; ++n) {
            eh.push_back(props[n].matrix_metric(h));
            ehalf.push_back(props[n].matrix_metric(0.5 * h));
        }
        std::vector<Eigen::VectorXcd> w(n_max + 1,
                                        Eigen::VectorXcd::Zero(grid->interior_size()));
        double f2_int = 0.0;
        double fnorm2_const = 0.0;
        for (int n = 0; n <= n_max; ++n) {
            double mult = (n == 0) ? 1.0 : 2.0;
            fnorm2_const += mult * (std::norm(f.f_r[n].z_norm()) +
                                    std::norm(f.f_theta[n].z_norm()));
        }
        std::vector<Eigen::VectorXcd> divf(n_max + 1);
        for (int n = 0; n <= n_max; ++n) {
            Eigen::VectorXcd dv = div_mode(f.f_r[n], f.f_theta[n], n);
            Eigen::VectorXcd metric(grid->interior_size());
            for (int i = 0; i < grid->interior_size(); ++i) metric(i) = s(i) * dv(i);
            divf[n] = metric;
        }
        ratio_out.clear();
        for (int k = 0; k < nsteps; ++k) {
            double tmid = (k + 0.5) * h;
            double env = f.envelope(tmid);
            for (int n = 0; n <= n_max; ++n)
                w[n] = eh[n] * w[n] + h * env * (ehalf[n] * divf[n]);
            f2_int += h * f.envelope(tmid) * f.envelope(tmid) * fnorm2_const;
            double w2 = 0.0;
            for (int n = 0; n <= n_max; ++n) {
                double mult = (n == 0) ? 1.0 : 2.0;
                w2 += mult * w[n].squaredNorm();
            }
            if (f2_int > 0.0) ratio_out.push_back(w2 / f2_int);
        }
    };

    double c0 = 0.0, c0_half = 0.0;
    for (const auto& f : fields) {
        std::vector<double> ratios;
        run(f, steps, ratios);
        for (double v : ratios) c0 = std::max(c0, v);
        std::vector<double> ratios2;
        run(f, 2 * steps, ratios2);
        for (double v : ratios2) c0_half = std::max(c0_half, v);
    }
    rep.c0_hat = c0_half;
    rep.refine_drift = std::abs(c0_half - c0) / std::max(c0_half, 1e-300);
    return rep;
}

}  // namespace oseen
