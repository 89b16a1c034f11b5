#include "oseen/biot_savart.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "oseen/profiles.hpp"

namespace oseen {

namespace {
constexpr double kPi = 3.14159265358979323846;

int default_nphi(const ModeField& w) {
    int n = 8;
    while (n < 4 * w.n_max() + 16) n *= 2;
    return n;
}
}  // namespace

ModeField::ModeField(GridPtr grid, int n_max) : grid_(std::move(grid)) {
    modes_.assign(n_max + 1, Eigen::VectorXcd::Zero(grid_->size()));
}

void ModeField::set_mode(const WeightedRadialFunction& w) {
    int n = std::abs(w.mode());
    if (n >= static_cast<int>(modes_.size()))
        throw std::invalid_argument("ModeField::set_mode: mode exceeds n_max");
    modes_[n] = (w.mode() >= 0) ? w.scaled_values() : w.scaled_values().conjugate();
}

double ModeField::x_norm() const {
    double s = 0.0;
    for (int n = 0; n <= n_max(); ++n) {
        double zn = mode(n).z_norm();
        s += (n == 0 ? 1.0 : 2.0) * zn * zn;
    }
    return std::sqrt(s);
}

Eigen::MatrixXd ModeField::physical_slice(int n_phi) const {
    const int N = grid_->size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, n_phi);
    for (int k = 0; k < n_phi; ++k) {
        double th = 2.0 * kPi * k / n_phi;
        for (int i = 0; i < N; ++i) {
            double r = grid_->nodes()(i);
            double e = std::exp(-r * r / 8.0);
            std::complex<double> v = modes_[0](i);
            for (int n = 1; n <= n_max(); ++n)
                v += 2.0 * modes_[n](i) * std::polar(1.0, n * th);
            out(i, k) = e * v.real();
        }
    }
    return out;
}

double ModeField::mean() const {
    // int w dxi = 2 pi int w_0(r) r dr
    Eigen::VectorXd f(grid_->size());
    for (int i = 0; i < grid_->size(); ++i) {
        double r = grid_->nodes()(i);
        f(i) = (modes_[0](i) * std::exp(-r * r / 8.0)).real() * r;
    }
    return 2.0 * kPi * grid_->quad(f);
}

Eigen::Vector2d ModeField::first_moment() const {
    // int xi w dxi = 2 pi (Re, Im) int r^2 w_1(r) dr
    if (n_max() < 1) return Eigen::Vector2d::Zero();
    std::complex<double> m{0.0, 0.0};
    for (int i = 0; i < grid_->size(); ++i) {
        double r = grid_->nodes()(i);
        m += grid_->weights()(i) * r * r * modes_[1](i) * std::exp(-r * r / 8.0);
    }
    return {2.0 * kPi * m.real(), 2.0 * kPi * m.imag()};
}

ModeVelocity velocity_from_mode(const WeightedRadialFunction& w) {
    const auto& grid = *w.grid();
    const int N = grid.size();
    const int n = w.mode();
    ModeVelocity v;
    v.mode = n;
    v.u_r = Eigen::VectorXcd::Zero(N);
    v.u_theta = Eigen::VectorXcd::Zero(N);
    if (n == 0) {
        // u_theta = (1/r) int_0^r s w(s) ds: integrate q' = r w, q(0) = 0
        // by a collocation solve with the derivative matrix
        const auto& D = grid.diff();
        Eigen::MatrixXd A = D;
        A.row(0).setZero();
        A(0, 0) = 1.0;
        Eigen::VectorXcd rhs(N + 1);
        rhs(0) = 0.0;
        Eigen::VectorXcd w_phys = w.physical_values();
        for (int i = 0; i < N; ++i) rhs(i + 1) = grid.nodes()(i) * w_phys(i);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        Eigen::VectorXd qr = lu.solve(rhs.real().eval());
        Eigen::VectorXd qi = lu.solve(rhs.imag().eval());
        for (int i = 0; i < N; ++i)
            v.u_theta(i) = std::complex<double>(qr(i + 1), qi(i + 1)) / grid.nodes()(i);
        return v;
    }
    ModeOperator op = assemble_M_n(w.grid(), n);
    Eigen::VectorXcd psi = op.solve_streamfunction(w.physical_values());
    Eigen::VectorXcd psi_full(N + 1);
    psi_full(0) = 0.0;
    psi_full.tail(N) = psi;
    Eigen::VectorXcd dpsi_all = grid.diff() * psi_full;
    for (int i = 0; i < N; ++i) {
        v.u_r(i) = std::complex<double>(0.0, n) / grid.nodes()(i) * psi(i);
        v.u_theta(i) = -dpsi_all(i + 1);
    }
    if (std::abs(n) == 1) {
        // Psi ~ Psi'(0) r near the origin, so u_r -> i n Psi'(0), u_theta -> -Psi'(0)
        v.u_r_origin = std::complex<double>(0.0, n) * dpsi_all(0);
        v.u_theta_origin = -dpsi_all(0);
    }
    return v;
}

double divergence_residual(const ModeVelocity& v, const RadialGrid& grid) {
    const int N = grid.size();
    Eigen::VectorXcd rur(N + 1);
    rur(0) = 0.0;
    for (int i = 0; i < N; ++i) rur(i + 1) = grid.nodes()(i) * v.u_r(i);
    Eigen::VectorXcd d = (grid.diff() * rur).tail(N);
    double num = 0.0, den = 1e-300;
    for (int i = 0; i < N; ++i) {
        double r = grid.nodes()(i);
        std::complex<double> div =
            d(i) / r + std::complex<double>(0.0, v.mode) / r * v.u_theta(i);
        num = std::max(num, std::abs(div));
        den = std::max(den, std::abs(v.u_r(i)) + std::abs(v.u_theta(i)));
    }
    return num / den;
}

namespace {
// p-norm over the plane of samples given on the (node, angle) tensor grid
double tensor_lp(const RadialGrid& grid, const Eigen::MatrixXd& vals, double p) {
    const int n_phi = static_cast<int>(vals.cols());
    double dphi = 2.0 * kPi / n_phi;
    double s = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        double ang = 0.0;
        for (int k = 0; k < n_phi; ++k) ang += std::pow(std::abs(vals(i, k)), p);
        s += grid.weights()(i) * grid.nodes()(i) * ang * dphi;
    }
    return std::pow(s, 1.0 / p);
}
}  // namespace

double lp_norm(const ModeField& w, double p, int n_phi) {
    if (n_phi <= 0) n_phi = default_nphi(w);
    Eigen::MatrixXd vals = w.physical_slice(n_phi);
    if (std::isinf(p)) {
        double m = vals.cwiseAbs().maxCoeff();
        // one Richardson-style off-grid probe near the core maximum
        const auto& grid = *w.grid();
        Eigen::VectorXcd full(grid.size() + 1);
        for (int k = 0; k < n_phi; ++k) {
            double th = 2.0 * kPi * k / n_phi;
            full(0) = w.scaled(0)(0);
            for (int i = 0; i < grid.size(); ++i) {
                double r = grid.nodes()(i);
                std::complex<double> v = w.scaled(0)(i);
                for (int n = 1; n <= w.n_max(); ++n)
                    v += 2.0 * w.scaled(n)(i) * std::polar(1.0, n * th);
                full(i + 1) = v * std::exp(-r * r / 8.0);
            }
            for (double r = 0.4; r < 4.0; r += 0.17)
                m = std::max(m, std::abs(grid.interpolate(full, r)));
        }
        return m;
    }
    return tensor_lp(*w.grid(), vals, p);
}

namespace {
Eigen::MatrixXd velocity_slice(const ModeField& w, int n_phi, Eigen::MatrixXd* u2_out) {
    const auto& grid = *w.grid();
    const int N = grid.size();
    std::vector<ModeVelocity> vel;
    for (int n = 0; n <= w.n_max(); ++n) vel.push_back(velocity_from_mode(w.mode(n)));
    Eigen::MatrixXd mag(N, n_phi);
    for (int k = 0; k < n_phi; ++k) {
        double th = 2.0 * kPi * k / n_phi;
        for (int i = 0; i < N; ++i) {
            std::complex<double> ur = vel[0].u_r(i), ut = vel[0].u_theta(i);
            for (int n = 1; n <= w.n_max(); ++n) {
                ur += 2.0 * vel[n].u_r(i) * std::polar(1.0, n * th);
                ut += 2.0 * vel[n].u_theta(i) * std::polar(1.0, n * th);
            }
            mag(i, k) = std::hypot(ur.real(), ut.real());
            if (u2_out) (*u2_out)(i, k) = ur.real();
        }
    }
    return mag;
}
}  // namespace

double velocity_lp_norm(const ModeField& w, double p, int n_phi) {
    if (n_phi <= 0) n_phi = default_nphi(w);
    Eigen::MatrixXd mag = velocity_slice(w, n_phi, nullptr);
    if (std::isinf(p)) return mag.maxCoeff();
    return tensor_lp(*w.grid(), mag, p);
}

Eigen::Vector2d velocity_at_point(const ModeField& w, const Eigen::Vector2d& x) {
    const auto& grid = *w.grid();
    double r = x.norm(), th = std::atan2(x(1), x(0));
    std::complex<double> ur{0, 0}, ut{0, 0};
    for (int n = 0; n <= w.n_max(); ++n) {
        ModeVelocity v = velocity_from_mode(w.mode(n));
        Eigen::VectorXcd fur(grid.size() + 1), fut(grid.size() + 1);
        fur(0) = v.u_r_origin;
        fut(0) = v.u_theta_origin;
        fur.tail(grid.size()) = v.u_r;
        fut.tail(grid.size()) = v.u_theta;
        std::complex<double> ph = std::polar(1.0, n * th);
        double mult = (n == 0) ? 1.0 : 2.0;
        ur += mult * grid.interpolate(fur, r) * ph;
        ut += mult * grid.interpolate(fut, r) * ph;
    }
    double urr = ur.real(), utt = ut.real();
    return {urr * std::cos(th) - utt * std::sin(th),
            urr * std::sin(th) + utt * std::cos(th)};
}

Eigen::Vector2d biot_savart_direct(const ModeField& w, const Eigen::Vector2d& x,
                                   int n_s, int n_phi) {
    // u(x) = -(1/2pi) int_0^{2pi} int_0^inf e(phi)^perp w(x + s e(phi)) ds dphi
    const auto& grid = *w.grid();
    const int N = grid.size();
    int nm = w.n_max();
    std::vector<Eigen::VectorXcd> full(nm + 1);  // mode profiles with r = 0 value
    for (int n = 0; n <= nm; ++n) {
        full[n].resize(N + 1);
        full[n](0) = (n == 0) ? w.scaled(0)(0) : std::complex<double>(0, 0);
        full[n].tail(N) = w.scaled(n);
    }
    auto eval_w = [&](const Eigen::Vector2d& y) {
        double r = y.norm();
        if (r > grid.r_max()) return 0.0;
        double th = std::atan2(y(1), y(0));
        std::complex<double> v = grid.interpolate(full[0], r);
        for (int n = 1; n <= nm; ++n)
            v += 2.0 * grid.interpolate(full[n], r) * std::polar(1.0, n * th);
        return v.real() * std::exp(-r * r / 8.0);
    };
    // radial line integrals by composite Gauss panels (trapezoid in the
    // periodic angle is already spectral)
    const int gp = 12;
    static const double gx12[6] = {0.1252334085, 0.3678314990, 0.5873179543,
                                   0.7699026742, 0.9041172564, 0.9815606342};
    static const double gw12[6] = {0.2491470458, 0.2334925365, 0.2031674267,
                                   0.1600783285, 0.1069393260, 0.0471753364};
    double s_max = grid.r_max() + x.norm();
    int panels = std::max(8, n_s / gp);
    double pw = s_max / panels;
    double dphi = 2.0 * kPi / n_phi;
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
    for (int k = 0; k < n_phi; ++k) {
        double phi = (k + 0.5) * dphi;
        Eigen::Vector2d e{std::cos(phi), std::sin(phi)};
        Eigen::Vector2d eperp{-e(1), e(0)};
        double line = 0.0;
        for (int p = 0; p < panels; ++p) {
            double c = (p + 0.5) * pw, h = 0.5 * pw;
            for (int j = 0; j < 6; ++j) {
                line += h * gw12[j] * (eval_w(x + (c + h * gx12[j]) * e) +
                                       eval_w(x + (c - h * gx12[j]) * e));
            }
        }
        acc -= eperp * line * dphi;
    }
    return acc / (2.0 * kPi);
}

HlsReport check_hls_ratio(const ModeField& w, double p, double q) {
    if (!(p > 1.0 && p < 2.0 && q > 2.0 && std::abs(1.0 / q - (1.0 / p - 0.5)) < 1e-12))
        throw std::invalid_argument("check_hls_ratio: need 1<p<2<q with 1/q = 1/p - 1/2");
    HlsReport rep;
    rep.p = p;
    rep.q = q;
    rep.lhs = velocity_lp_norm(w, q);
    rep.rhs = lp_norm(w, p);
    rep.ratio = rep.lhs / rep.rhs;
    return rep;
}

HlsReport check_hls_uniform(const ModeField& w, double p, double q) {
    if (!(p >= 1.0 && p < 2.0 && q > 2.0))
        throw std::invalid_argument("check_hls_uniform: need 1 <= p < 2 < q");
    HlsReport rep;
    rep.p = p;
    rep.q = q;
    rep.lhs = velocity_lp_norm(w, std::numeric_limits<double>::infinity());
    double wq = lp_norm(w, q), wp = lp_norm(w, p);
    // two-term Hoelder split of the convolution at radius R:
    //   |u| <= A R^{1-2/q} ||w||_q + B R^{1-2/p} ||w||_p,
    //   A = (1/2pi) (2pi/(2-q'))^{1/q'},  B = (1/2pi) (2pi/(p'-2))^{1/p'}
    double qp = q / (q - 1.0), pp = p / (p - 1.0);
    double A = std::pow(2.0 * kPi / (2.0 - qp), 1.0 / qp) / (2.0 * kPi);
    double B = std::pow(2.0 * kPi / (pp - 2.0), 1.0 / pp) / (2.0 * kPi);
    auto bound = [&](double R) {
        return A * std::pow(R, 1.0 - 2.0 / q) * wq + B * std::pow(R, 1.0 - 2.0 / p) * wp;
    };
    // golden-section minimum over the split radius
    double a = 1e-6, b = 1e6;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = bound(x1), f2 = bound(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-9 * b; ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2; x2 = a + gr * (b - a); f2 = bound(x2);
        } else {
            b = x2; x2 = x1; f2 = f1; x1 = b - gr * (b - a); f1 = bound(x1);
        }
    }
    rep.rhs = std::min(f1, f2);
    rep.ratio = rep.lhs / rep.rhs;
    return rep;
}

double check_log_bound(const ModeField& w) {
    double uinf = velocity_lp_norm(w, std::numeric_limits<double>::infinity());
    double w1 = lp_norm(w, 1.0), w2 = lp_norm(w, 2.0), w3 = lp_norm(w, 3.0);
    double w12 = std::max(w1, w2);
    double logp = std::max(0.0, std::log(w3 / w12));
    return uinf / (w12 * std::sqrt(1.0 + logp));
}

double check_product_bound(const ModeField& w1, const ModeField& w2) {
    // ||w1 u2||_2 via the tensor grid
    int n_phi = std::max(default_nphi(w1), default_nphi(w2));
    Eigen::MatrixXd w1v = w1.physical_slice(n_phi);
    const auto& grid = *w1.grid();
    std::vector<ModeVelocity> vel;
    for (int n = 0; n <= w2.n_max(); ++n) vel.push_back(velocity_from_mode(w2.mode(n)));
    double s = 0.0;
    double dphi = 2.0 * kPi / n_phi;
    for (int k = 0; k < n_phi; ++k) {
        double th = 2.0 * kPi * k / n_phi;
        for (int i = 0; i < grid.size(); ++i) {
            std::complex<double> ur = vel[0].u_r(i), ut = vel[0].u_theta(i);
            for (int n = 1; n <= w2.n_max(); ++n) {
                ur += 2.0 * vel[n].u_r(i) * std::polar(1.0, n * th);
                ut += 2.0 * vel[n].u_theta(i) * std::polar(1.0, n * th);
            }
            double mag = std::hypot(ur.real(), ut.real());
            s += grid.weights()(i) * grid.nodes()(i) * dphi *
                 w1v(i, k) * w1v(i, k) * mag * mag;
        }
    }
    double lhs = std::sqrt(s);
    double n1_2 = lp_norm(w1, 2.0), n1_3 = lp_norm(w1, 3.0);
    double n2_12 = std::max(lp_norm(w2, 1.0), lp_norm(w2, 2.0));
    double logp = std::max(0.0, std::log(n1_3 / n1_2));
    return lhs / (n1_2 * n2_12 * std::sqrt(1.0 + logp));
}

double lambda_skew_defect(const ModeField& w1, const ModeField& w2) {
    // <Lambda a, b>_X + <a, Lambda b>_X over the mode family,
    // Lambda_n = i n M_n and the negative modes contribute conjugates
    const GridPtr& grid = w1.grid();
    int nm = std::min(w1.n_max(), w2.n_max());
    std::complex<double> total{0.0, 0.0};
    for (int n = 1; n <= nm; ++n) {
        ModeOperator op = assemble_M_n(grid, n);
        auto a = w1.mode(n), b = w2.mode(n);
        auto ma = op.apply_m(a), mb = op.apply_m(b);
        std::complex<double> in{0.0, static_cast<double>(n)};
        // positive mode pairing + its conjugate (negative mode)
        std::complex<double> term =
            std::conj(in) * ma.z_dot(b) + in * a.z_dot(mb);
        total += term + std::conj(term);
    }
    return std::abs(total) / (w1.x_norm() * w2.x_norm());
}

Eigen::VectorXcd hermite_mode(const RadialGrid& grid, int n, int j) {
    const int an = std::abs(n);
    Eigen::VectorXcd out(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
        double r = grid.nodes()(i), s = r * r / 4.0;
        double l0 = 1.0, l1 = 1.0 + an - s, lj = (j == 0) ? l0 : l1;
        for (int k = 2; k <= j; ++k) {
            double lk = ((2.0 * k - 1.0 + an - s) * l1 - (k - 1.0 + an) * l0) / k;
            l0 = l1;
            l1 = lk;
            lj = lk;
        }
        out(i) = std::pow(r, an) * lj * std::exp(-r * r / 8.0);
    }
    double z2 = 0.0;
    for (int i = 0; i < grid.size(); ++i)
        z2 += grid.weights()(i) * grid.nodes()(i) * std::norm(out(i));
    return out / std::sqrt(8.0 * kPi * kPi * z2);
}

std::vector<ModeField> random_corpus(const GridPtr& grid, int count, unsigned seed,
                                     CorpusSpace space, int mode_cap, int levels) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<ModeField> out;
    out.reserve(count);
    for (int c = 0; c < count; ++c) {
        ModeField f(grid, mode_cap);
        for (int n = 0; n <= mode_cap; ++n) {
            Eigen::VectorXcd v = Eigen::VectorXcd::Zero(grid->size());
            for (int j = 0; j < levels; ++j) {
                bool skip = false;
                if (space != CorpusSpace::x && n == 0 && j == 0) skip = true;  // mean
                if (space == CorpusSpace::x1 && n == 1 && j == 0) skip = true;  // moment
                if (skip) continue;
                std::complex<double> coef =
                    (n == 0) ? std::complex<double>(gauss(rng), 0.0)
                             : std::complex<double>(gauss(rng), gauss(rng));
                v += coef / (1.0 + j) * hermite_mode(*grid, n, j);
            }
            f.scaled(n) = v;
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace oseen
