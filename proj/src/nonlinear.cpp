#include "oseen/nonlinear.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

#include "oseen/profiles.hpp"
#include "oseen/semigroup.hpp"

namespace oseen {

namespace {
constexpr double kPi = 3.14159265358979323846;

int pick_nphi(int n_theta) {
    int n = 8;
    while (n < 3 * n_theta + 1) n *= 2;
    return n;
}

// Pseudospectral evaluator of the quadratic advection term. Holds the
// factorised streamfunction solves and the angular transform tables for a
// fixed (grid, n_theta, n_phi).
class AdvectionEvaluator {
  public:
    AdvectionEvaluator(GridPtr grid, int n_theta, int n_phi)
        : grid_(std::move(grid)), n_theta_(n_theta), n_phi_(n_phi) {
        const int N = grid_->size();
        for (int n = 0; n <= n_theta_; ++n)
            ops_.push_back(n == 0 ? assemble_L_n(grid_, 0) : assemble_M_n(grid_, n));
        // mode-0 azimuthal velocity: q' = r w, q(0) = 0
        Eigen::MatrixXd A = grid_->diff();
        A.row(0).setZero();
        A(0, 0) = 1.0;
        cumulative_ = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXd>>(A);
        exp_half_.resize(N);
        for (int i = 0; i < N; ++i)
            exp_half_(i) = std::exp(-grid_->nodes()(i) * grid_->nodes()(i) / 8.0);
        phase_.resize(n_theta_ + 1, n_phi_);
        for (int n = 0; n <= n_theta_; ++n)
            for (int k = 0; k < n_phi_; ++k)
                phase_(n, k) = std::polar(1.0, 2.0 * kPi * n * k / n_phi_);
    }

    // minus the advection term, as a scaled-values mode family (the sign
    // convention matches d psi / d tau = linear + this)
    std::vector<Eigen::VectorXcd> minus_advection(
        const std::vector<Eigen::VectorXcd>& psi) const {
        const int N = grid_->size();
        const auto& r = grid_->nodes();
        const auto& D = grid_->diff();

        // velocities and radial-derivative profiles per mode
        std::vector<Eigen::VectorXcd> ur(n_theta_ + 1), ut(n_theta_ + 1),
            spsi(n_theta_ + 1);
        for (int n = 0; n <= n_theta_; ++n) {
            Eigen::VectorXcd w_phys = exp_half_.asDiagonal() * psi[n];
            if (n == 0) {
                Eigen::VectorXcd rhs(N + 1);
                rhs(0) = 0.0;
                for (int i = 0; i < N; ++i) rhs(i + 1) = r(i) * w_phys(i);
                Eigen::VectorXd qr = cumulative_->solve(rhs.real().eval());
                Eigen::VectorXd qi = cumulative_->solve(rhs.imag().eval());
                ur[0] = Eigen::VectorXcd::Zero(N);
                ut[0].resize(N);
                for (int i = 0; i < N; ++i)
                    ut[0](i) = std::complex<double>(qr(i + 1), qi(i + 1)) / r(i);
            } else {
                Eigen::VectorXcd sf = ops_[n].solve_streamfunction(w_phys);
                Eigen::VectorXcd sf_full(N + 1);
                sf_full(0) = 0.0;
                sf_full.tail(N) = sf;
                Eigen::VectorXcd dsf = (D * sf_full).tail(N);
                ur[n].resize(N);
                ut[n].resize(N);
                for (int i = 0; i < N; ++i) {
                    ur[n](i) = std::complex<double>(0.0, n) / r(i) * sf(i);
                    ut[n](i) = -dsf(i);
                }
            }
            // S psi = psi' - (r/4) psi, with the r = 0 value from the mode's
            // origin behaviour (Neumann for n = 0, zero otherwise)
            Eigen::VectorXcd pf(N + 1);
            pf.tail(N) = psi[n];
            if (n == 0) {
                std::complex<double> s{0.0, 0.0};
                for (int j = 1; j <= N; ++j) s += D(0, j) * pf(j);
                pf(0) = -s / D(0, 0);
            } else {
                pf(0) = 0.0;
            }
            Eigen::VectorXcd dp = (D * pf).tail(N);
            spsi[n].resize(N);
            for (int i = 0; i < N; ++i) spsi[n](i) = dp(i) - 0.25 * r(i) * psi[n](i);
        }

        // angular slices (all real fields)
        Eigen::MatrixXd Ur(N, n_phi_), Ut(N, n_phi_), Sp(N, n_phi_), Dt(N, n_phi_),
            Ps(N, n_phi_);
        for (int k = 0; k < n_phi_; ++k)
            for (int i = 0; i < N; ++i) {
                std::complex<double> a = ur[0](i), b = ut[0](i), c = spsi[0](i),
                                     d{0.0, 0.0}, p = psi[0](i);
                for (int n = 1; n <= n_theta_; ++n) {
                    std::complex<double> ph = phase_(n, k);
                    a += 2.0 * (ur[n](i) * ph);
                    b += 2.0 * (ut[n](i) * ph);
                    c += 2.0 * (spsi[n](i) * ph);
                    d += 2.0 * (std::complex<double>(0.0, n) * psi[n](i) * ph);
                    p += 2.0 * (psi[n](i) * ph);
                }
                Ur(i, k) = a.real();
                Ut(i, k) = b.real();
                Sp(i, k) = c.real();
                Dt(i, k) = d.real();
                Ps(i, k) = p.real();
            }

        // F = u_r (psi' - r psi / 4) + (u_theta / r) psi_theta, and the
        // radial flux u_r psi for the divergence-form mode-0 update
        Eigen::MatrixXd F(N, n_phi_);
        Eigen::VectorXd zhat = Eigen::VectorXd::Zero(N);
        for (int k = 0; k < n_phi_; ++k)
            for (int i = 0; i < N; ++i) {
                F(i, k) = Ur(i, k) * Sp(i, k) + Ut(i, k) / r(i) * Dt(i, k);
                zhat(i) += Ur(i, k) * Ps(i, k);
            }
        zhat /= n_phi_;

        std::vector<Eigen::VectorXcd> out(n_theta_ + 1);
        // mode 0 in divergence form: -(d_r + 1/r - r/4) zhat
        Eigen::VectorXd zfull(N + 1);
        zfull(0) = 0.0;  // radial flux vanishes like r at the origin
        zfull.tail(N) = zhat;
        Eigen::VectorXd dz = (D * zfull).tail(N);
        out[0].resize(N);
        for (int i = 0; i < N; ++i)
            out[0](i) = -(dz(i) + (1.0 / r(i) - 0.25 * r(i)) * zhat(i));

        for (int n = 1; n <= n_theta_; ++n) {
            out[n].resize(N);
            for (int i = 0; i < N; ++i) {
                std::complex<double> s{0.0, 0.0};
                for (int k = 0; k < n_phi_; ++k) s += F(i, k) * std::conj(phase_(n, k));
                out[n](i) = -s / static_cast<double>(n_phi_);
            }
        }
        return out;
    }

    const ModeOperator& op(int n) const { return ops_.at(n); }

  private:
    GridPtr grid_;
    int n_theta_, n_phi_;
    std::vector<ModeOperator> ops_;
    std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> cumulative_;
    Eigen::VectorXd exp_half_;
    Eigen::MatrixXcd phase_;
};

double x_norm_of(const std::vector<Eigen::VectorXcd>& psi, const RadialGrid& grid) {
    double s = 0.0;
    for (std::size_t n = 0; n < psi.size(); ++n) {
        double z2 = 0.0;
        for (int i = 0; i < grid.size(); ++i)
            z2 += grid.weights()(i) * grid.nodes()(i) * std::norm(psi[n](i));
        s += (n == 0 ? 1.0 : 2.0) * 8.0 * kPi * kPi * z2;
    }
    return std::sqrt(s);
}
}  // namespace

VortexState normalize_perturbation(const ModeField& w0, double alpha) {
    const GridPtr& grid = w0.grid();
    const int N = grid->size();

    // circulation reassignment removes the mean
    double mean = w0.mean();
    double alpha_hat = alpha + mean;
    ModeField shifted(grid, w0.n_max());
    for (int n = 0; n <= w0.n_max(); ++n) shifted.scaled(n) = w0.scaled(n);
    for (int i = 0; i < N; ++i) {
        double r = grid->nodes()(i);
        shifted.scaled(0)(i) -= mean * profiles::g(r) * std::exp(r * r / 8.0);
    }

    Eigen::Vector2d p = shifted.first_moment();
    VortexState out{alpha_hat, 0.0, ModeField(grid, w0.n_max())};
    if (p.norm() < 1e-14 * std::max(1.0, shifted.x_norm())) {
        out.modes = shifted;
        return out;
    }
    if (alpha_hat == 0.0)
        throw std::invalid_argument(
            "normalize_perturbation: zero circulation with nonzero first moment; "
            "the recentering shift is undefined");
    Eigen::Vector2d eta = p / alpha_hat;

    // re-expand w_hat(xi) = alpha (G(xi + eta) - G(xi)) + w_shifted(xi + eta)
    std::vector<Eigen::VectorXcd> full(w0.n_max() + 1);
    for (int n = 0; n <= w0.n_max(); ++n) {
        full[n].resize(N + 1);
        full[n](0) = (n == 0) ? shifted.scaled(0)(0) : std::complex<double>(0, 0);
        full[n].tail(N) = shifted.scaled(n);
    }
    int n_phi = pick_nphi(w0.n_max()) * 2;
    Eigen::MatrixXd slice(N, n_phi);
    for (int k = 0; k < n_phi; ++k) {
        double th = 2.0 * kPi * k / n_phi;
        for (int i = 0; i < N; ++i) {
            double r = grid->nodes()(i);
            Eigen::Vector2d xi{r * std::cos(th), r * std::sin(th)};
            Eigen::Vector2d y = xi + eta;
            double ry = y.norm();
            double thy = std::atan2(y(1), y(0));
            std::complex<double> v = grid->interpolate(full[0], ry);
            for (int n = 1; n <= w0.n_max(); ++n)
                v += 2.0 * grid->interpolate(full[n], ry) * std::polar(1.0, n * thy);
            double w_val = v.real() * std::exp(-ry * ry / 8.0);
            w_val += alpha_hat * (profiles::gaussian_profile(ry) -
                                  profiles::gaussian_profile(r));
            slice(i, k) = w_val;
        }
    }
    for (int n = 0; n <= w0.n_max(); ++n) {
        Eigen::VectorXcd m(N);
        for (int i = 0; i < N; ++i) {
            std::complex<double> s{0.0, 0.0};
            for (int k = 0; k < n_phi; ++k)
                s += slice(i, k) * std::polar(1.0, -2.0 * kPi * n * k / n_phi);
            double r = grid->nodes()(i);
            m(i) = s / static_cast<double>(n_phi) * std::exp(r * r / 8.0);
        }
        out.modes.scaled(n) = m;
    }
    return out;
}

std::pair<ModeField, ModeField> split_radial(const VortexState& state) {
    ModeField wr(state.modes.grid(), state.modes.n_max());
    ModeField wp(state.modes.grid(), state.modes.n_max());
    wr.scaled(0) = state.modes.scaled(0);
    for (int n = 1; n <= state.modes.n_max(); ++n) wp.scaled(n) = state.modes.scaled(n);
    return {wr, wp};
}

ModeField nonlinear_rhs(const VortexState& state) {
    const GridPtr& grid = state.modes.grid();
    int n_theta = state.modes.n_max();
    AdvectionEvaluator adv(grid, n_theta, pick_nphi(n_theta));

    std::vector<Eigen::VectorXcd> psi(n_theta + 1);
    for (int n = 0; n <= n_theta; ++n) psi[n] = state.modes.scaled(n);
    std::vector<Eigen::VectorXcd> quad = adv.minus_advection(psi);

    ModeField out(grid, n_theta);
    for (int n = 0; n <= n_theta; ++n) {
        ModeOperator op = (n == 0) ? assemble_L_n(grid, 0) : assemble_H(grid, n, n * state.alpha);
        auto w = state.modes.mode(n);
        auto lw = op.apply_neg_l(w);  // -L_n w
        Eigen::VectorXcd rhs = -lw.scaled_values();
        if (n != 0) {
            auto mw = op.apply_m(w);
            rhs -= std::complex<double>(0.0, n * state.alpha) * mw.scaled_values();
        }
        rhs += quad[n];
        out.scaled(n) = rhs;
    }
    return out;
}

TrajectoryRecord evolve(const VortexState& state0, double t_final,
                        const EvolveOptions& opts) {
    if (!(t_final > 0.0) || t_final > 20.0)
        throw std::invalid_argument("evolve: need 0 < T <= 20 (rescaled time)");
    const GridPtr& grid = state0.modes.grid();
    const int N = grid->size();
    const int n_theta = state0.modes.n_max();
    const double alpha = state0.alpha;

    TrajectoryRecord rec;
    rec.alpha = alpha;

    const double c6 = 1.0 / (8.0 * kPi);  // scale of ||M_n||
    double dt = std::min(opts.dt_max, opts.cfl / (1.0 + std::abs(alpha) * c6 * n_theta));
    int steps = static_cast<int>(std::ceil(t_final / dt));
    dt = t_final / steps;
    rec.dt = dt;
    int stride = opts.record_stride > 0 ? opts.record_stride
                                        : std::max(1, steps / 400);

    int n_phi = opts.n_phi > 0 ? opts.n_phi : pick_nphi(n_theta);
    AdvectionEvaluator adv(grid, n_theta, n_phi);

    // per-mode exponential-integrator tables in the truncated eigenbasis
    const auto& s = grid->metric_scale();
    struct ModeTable {
        Eigen::MatrixXd basis;       // metric -> eigen coords
        Eigen::MatrixXcd e, phi1, phi2;
    };
    std::vector<ModeTable> tab(n_theta + 1);
    for (int n = 0; n <= n_theta; ++n) {
        ModeOperator op =
            (n == 0) ? assemble_L_n(grid, 0) : assemble_H(grid, n, n * alpha);
        PropagatorOptions popt;
        popt.lambda_cut = opts.lambda_cut;
        Propagator prop(op, Subspace::full, popt);
        const Eigen::MatrixXcd& ht = prop.h_truncated();
        int m = static_cast<int>(ht.rows());
        Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(3 * m, 3 * m);
        block.topLeftCorner(m, m) = -dt * ht;
        block.block(0, m, m, m) = Eigen::MatrixXcd::Identity(m, m);
        block.block(m, 2 * m, m, m) = Eigen::MatrixXcd::Identity(m, m);
        Eigen::MatrixXcd eb = block.exp();
        tab[n].basis = prop.basis();
        tab[n].e = eb.topLeftCorner(m, m);
        tab[n].phi1 = dt * eb.block(0, m, m, m);
        tab[n].phi2 = dt * eb.block(0, 2 * m, m, m);
    }

    // Carlen-Loss a priori bound for the full field alpha G + w, in logs
    auto x_norm_full = [&](const std::vector<Eigen::VectorXcd>& psi) {
        std::vector<Eigen::VectorXcd> tmp = psi;
        for (int i = 0; i < N; ++i) {
            double r = grid->nodes()(i);
            tmp[0](i) += alpha * profiles::g(r) * std::exp(r * r / 8.0);
        }
        return x_norm_of(tmp, *grid);
    };
    std::vector<Eigen::VectorXcd> psi(n_theta + 1);
    for (int n = 0; n <= n_theta; ++n) psi[n] = state0.modes.scaled(n);

    double l1_full;
    {
        ModeField full0(grid, n_theta);
        for (int n = 0; n <= n_theta; ++n) full0.scaled(n) = psi[n];
        for (int i = 0; i < N; ++i) {
            double r = grid->nodes()(i);
            full0.scaled(0)(i) += alpha * profiles::g(r) * std::exp(r * r / 8.0);
        }
        l1_full = lp_norm(full0, 1.0);
    }
    double log_cl_bound;
    {
        double x0_norm = x_norm_full(psi);
        auto log_bound_of = [&](double b) {
            return std::log(2.0) + b / (1.0 - b) * l1_full * l1_full / (2.0 * kPi * kPi) -
                   0.5 * std::log(2.0 * b - 1.0) + std::log(std::max(x0_norm, 1e-300));
        };
        double lo = 0.5 + 1e-6, hi = 1.0 - 1e-6;
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = log_bound_of(x1), f2 = log_bound_of(x2);
        for (int it = 0; it < 120; ++it) {
            if (f1 > f2) {
                lo = x1; x1 = x2; f1 = f2; x2 = lo + gr * (hi - lo); f2 = log_bound_of(x2);
            } else {
                hi = x2; x2 = x1; f2 = f1; x1 = hi - gr * (hi - lo); f1 = log_bound_of(x1);
            }
        }
        log_cl_bound = std::min(f1, f2);
    }

    // energy form matrices for the E[w] diagnostic
    std::vector<Eigen::MatrixXd> negl(n_theta + 1);
    for (int n = 0; n <= n_theta; ++n)
        negl[n] = (n == 0 ? assemble_L_n(grid, 0) : assemble_L_n(grid, n)).neg_l();

    auto record_state = [&](double tau) {
        double nr = 0.0, np = 0.0, en = 0.0;
        for (int n = 0; n <= n_theta; ++n) {
            double z2 = 0.0;
            for (int i = 0; i < N; ++i)
                z2 += grid->weights()(i) * grid->nodes()(i) * std::norm(psi[n](i));
            z2 *= 8.0 * kPi * kPi;
            if (n == 0) nr += z2;
            else np += 2.0 * z2;
            Eigen::VectorXcd x(grid->interior_size());
            for (int i = 0; i < grid->interior_size(); ++i) x(i) = s(i) * psi[n](i);
            double e = (x.adjoint() * (negl[n] * x))(0).real();
            en += (n == 0 ? 1.0 : 2.0) * e;
        }
        nr = std::sqrt(nr);
        np = std::sqrt(np);
        rec.taus.push_back(tau);
        rec.norm_r.push_back(nr);
        rec.norm_perp.push_back(np);
        rec.energy.push_back(en);
        double m_now = (opts.tau0 > 0.0) ? nr + std::exp(tau / opts.tau0) * np : 0.0;
        double m_prev = rec.m_values.empty() ? 0.0 : rec.m_values.back();
        rec.m_values.push_back(std::max(m_prev, m_now));
        rec.cl_log_margin.push_back(std::log(std::max(x_norm_full(psi), 1e-300)) -
                                    log_cl_bound);

        ModeField f(grid, n_theta);
        for (int n = 0; n <= n_theta; ++n) f.scaled(n) = psi[n];
        rec.mean_drift = std::max(rec.mean_drift, std::abs(f.mean()));
        rec.moment_drift = std::max(rec.moment_drift, f.first_moment().norm());
        if (np > 0.0) {
            double top = 0.0;
            for (int i = 0; i < N; ++i)
                top += grid->weights()(i) * grid->nodes()(i) * std::norm(psi[n_theta](i));
            top *= 2.0 * 8.0 * kPi * kPi;
            if (top > 1e-6 * (np * np + nr * nr)) rec.resolution_alarm = true;
        }
    };

    auto to_eigen = [&](const std::vector<Eigen::VectorXcd>& nodal,
                        std::vector<Eigen::VectorXcd>& eig) {
        for (int n = 0; n <= n_theta; ++n) {
            Eigen::VectorXcd x(grid->interior_size());
            for (int i = 0; i < grid->interior_size(); ++i) x(i) = s(i) * nodal[n](i);
            eig[n] = tab[n].basis.transpose() * x;
        }
    };
    auto to_nodal = [&](const std::vector<Eigen::VectorXcd>& eig,
                        std::vector<Eigen::VectorXcd>& nodal) {
        for (int n = 0; n <= n_theta; ++n) {
            Eigen::VectorXcd x = tab[n].basis * eig[n];
            nodal[n].resize(N);
            for (int i = 0; i < grid->interior_size(); ++i) nodal[n](i) = x(i) / s(i);
            nodal[n](N - 1) = 0.0;
        }
    };

    std::vector<Eigen::VectorXcd> y(n_theta + 1), ny1(n_theta + 1), ny2(n_theta + 1),
        a(n_theta + 1), nodal_a(n_theta + 1);
    to_eigen(psi, y);
    to_nodal(y, psi);  // project the initial state onto the integrator basis
    record_state(state0.tau);

    for (int k = 0; k < steps; ++k) {
        // two-stage exponential integrator:
        //   a  = E y + Phi1 N(y),  y+ = a + Phi2 (N(a) - N(y))
        std::vector<Eigen::VectorXcd> q1 = adv.minus_advection(psi);
        to_eigen(q1, ny1);
        for (int n = 0; n <= n_theta; ++n)
            a[n] = tab[n].e * y[n] + tab[n].phi1 * ny1[n];
        to_nodal(a, nodal_a);
        std::vector<Eigen::VectorXcd> q2 = adv.minus_advection(nodal_a);
        to_eigen(q2, ny2);
        for (int n = 0; n <= n_theta; ++n) y[n] = a[n] + tab[n].phi2 * (ny2[n] - ny1[n]);
        to_nodal(y, psi);

        double tau = state0.tau + (k + 1) * dt;
        if ((k + 1) % stride == 0 || k + 1 == steps) {
            record_state(tau);
            double xn = x_norm_full(psi);
            if (!std::isfinite(xn))
                throw std::runtime_error("evolve: state became non-finite at tau = " +
                                         std::to_string(tau));
            if (std::log(xn) > log_cl_bound + std::log(opts.blowup_factor))
                throw std::runtime_error(
                    "evolve: X norm exceeded the Carlen-Loss a priori bound by the "
                    "blow-up factor at tau = " + std::to_string(tau) +
                    " (numerical instability)");
        }
    }
    return rec;
}

RelaxationFit measure_relaxation(
    const std::vector<std::pair<double, TrajectoryRecord>>& runs, double c5_hat,
    double c7_hat) {
    if (runs.size() < 1) throw std::invalid_argument("measure_relaxation: no runs");
    RelaxationFit out;

    auto fit_window = [](const std::vector<double>& t, const std::vector<double>& v,
                         double lo, double hi, double* r2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] < lo || t[i] > hi || v[i] <= 0.0) continue;
            double x = t[i], y = std::log(v[i]);
            sx += x; sy += y; sxx += x * x; sxy += x * y;
            ++n;
        }
        if (n < 4) return std::numeric_limits<double>::quiet_NaN();
        double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        double icpt = (sy - slope * sx) / n;
        double ss_res = 0, ss_tot = 0, my = sy / n;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] < lo || t[i] > hi || v[i] <= 0.0) continue;
            double y = std::log(v[i]);
            double p = icpt + slope * t[i];
            ss_res += (y - p) * (y - p);
            ss_tot += (y - my) * (y - my);
        }
        if (r2) *r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
        return -slope;
    };

    std::vector<double> xs, ys;
    for (const auto& [alpha, rec] : runs) {
        RelaxationEntry e;
        e.alpha = alpha;
        double t_end = rec.taus.back();
        if (alpha > 0.0) {
            double mu = c5_hat * std::cbrt(alpha);
            double tau0 = std::log(c7_hat * std::pow(alpha, 2.0 / 3.0)) / mu;
            e.window_lo = 2.0 * tau0;
            e.window_hi = std::min(6.0 * tau0, t_end);
        } else {
            e.window_lo = 1.0;
            e.window_hi = std::min(6.0, t_end);
        }
        double r2 = 0.0;
        e.rho = fit_window(rec.taus, rec.norm_perp, e.window_lo, e.window_hi, &r2);
        e.r_squared = r2;
        if (!std::isfinite(e.rho) || r2 < 0.95)
            throw std::runtime_error(
                "measure_relaxation: rate fit rejected (r^2 = " + std::to_string(r2) +
                ") at alpha = " + std::to_string(alpha));
        if (alpha > 0.0)
            e.rho_scaled = e.rho * std::log(alpha) / std::cbrt(alpha);
        // radial component decays at the unit rate after the quadratic pump
        double r2r = 0.0;
        e.rate_r = fit_window(rec.taus, rec.norm_r, std::max(2.0, e.window_lo),
                              std::max(4.0, std::min(t_end, e.window_hi + 2.0)), &r2r);
        out.entries.push_back(e);
        if (alpha > 0.0) {
            xs.push_back(alpha);
            ys.push_back(e.rho);
        }
    }
    if (xs.size() >= 4) out.rho_fit = fit_scaling(xs, ys);
    double lo = 1e300, hi = 0.0;
    for (const auto& e : out.entries)
        if (e.alpha > 0.0) {
            lo = std::min(lo, e.rho_scaled);
            hi = std::max(hi, e.rho_scaled);
        }
    if (hi > 0.0) out.rho_scaled_spread = (hi - lo) / (0.5 * (hi + lo));
    return out;
}

EnergyReport energy_inequality_check(const ModeField& w, CorpusSpace space) {
    const GridPtr& grid = w.grid();
    const int N = grid->size();
    const auto& r = grid->nodes();
    const auto& D = grid->diff();
    EnergyReport rep;
    for (int n = 0; n <= w.n_max(); ++n) {
        double mult = (n == 0) ? 1.0 : 2.0;
        const auto& psi = w.scaled(n);
        Eigen::VectorXcd pf(N + 1);
        pf.tail(N) = psi;
        if (n == 0) {
            std::complex<double> s0{0.0, 0.0};
            for (int j = 1; j <= N; ++j) s0 += D(0, j) * pf(j);
            pf(0) = -s0 / D(0, 0);
        } else {
            pf(0) = 0.0;
        }
        Eigen::VectorXcd dp = (D * pf).tail(N);
        for (int i = 0; i < N; ++i) {
            double wq = 8.0 * kPi * kPi * grid->weights()(i) * r(i);
            double grad2 = std::norm(dp(i) - 0.25 * r(i) * psi(i)) +
                           (n > 0 ? n * n / (r(i) * r(i)) * std::norm(psi(i)) : 0.0);
            rep.grad_norm2 += mult * wq * grad2;
            rep.xi_norm2 += mult * wq * r(i) * r(i) * std::norm(psi(i));
            rep.norm2 += mult * wq * std::norm(psi(i));
        }
    }
    rep.energy = rep.grad_norm2 - rep.norm2;  // E[w] = ||grad w||^2 - ||w||^2 in X

    double a = (space == CorpusSpace::x1) ? 0.25 : 1.0 / 6.0;
    double b = (space == CorpusSpace::x1) ? 1.0 / 64.0 : 1.0 / 96.0;
    double c = (space == CorpusSpace::x1) ? 0.125 : 1.0 / 12.0;
    double gap = (space == CorpusSpace::x1) ? 1.0 : 0.5;
    double tol = 1e-8 * std::max(1.0, rep.grad_norm2);
    rep.coercivity_ok =
        rep.energy >= a * rep.grad_norm2 + b * rep.xi_norm2 + c * rep.norm2 - tol;
    rep.gap_ok = rep.energy >= gap * rep.norm2 - tol;
    return rep;
}

}  // namespace oseen
