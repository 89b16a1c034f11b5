#include "oseen/mode_operator.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "oseen/profiles.hpp"

namespace oseen {

namespace {
constexpr double kPi = 3.14159265358979323846;

struct Forms {
    Eigen::MatrixXd neg_l;  // interior, symmetric
    Eigen::MatrixXd m;      // interior, symmetric (n != 0)
    std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> bvp_strong;  // nodes 1..N
};

// Collocation matrix of the Green BVP  -X'' - X'/r + n^2/r^2 X = w  on the
// nodes r_1..r_N, with X(0) = 0 through the basis and the Robin closure
// r X' + |n| X = 0 collocated at R_max (exact for sources inside the
// domain, where the exterior solution is r^{-|n|}).
Eigen::MatrixXd strong_bvp_matrix(const RadialGrid& grid, int n) {
    const int N = grid.size();
    const int an = std::abs(n);
    const auto& D = grid.diff();
    Eigen::MatrixXd D2 = D * D;
    Eigen::MatrixXd A(N, N);
    const auto& r = grid.nodes();
    for (int i = 0; i < N - 1; ++i)
        for (int j = 0; j < N; ++j) {
            double v = -D2(i + 1, j + 1) - D(i + 1, j + 1) / r(i);
            if (i == j) v += static_cast<double>(an) * an / (r(i) * r(i));
            A(i, j) = v;
        }
    for (int j = 0; j < N; ++j) A(N - 1, j) = grid.r_max() * D(N, j + 1);
    A(N - 1, N - 1) += static_cast<double>(an);
    return A;
}

// Quadrature Galerkin assembly in the psi-representation, where
//   -L_n^psi = -(1/r)(r psi')' + (r^2/16 + n^2/r^2 - 1/2) psi
// against the measure r dr. The stiffness quadrature runs over all Lobatto
// nodes (the r = 0 weight vanishes with the measure), trial/test space is
// the interior nodal basis, psi(0) = 0 essential for n >= 1 and condensed
// out for n = 0, psi(R_max) = 0 essential always.
Forms assemble_forms(const RadialGrid& grid, int n) {
    const int N = grid.size();
    const auto& rf = grid.full_nodes();
    const auto& Wf = grid.full_weights();
    const auto& D = grid.diff();

    Eigen::VectorXd wr = Wf.cwiseProduct(rf);  // zero at r = 0
    Eigen::MatrixXd K = D.transpose() * wr.asDiagonal() * D;

    const int an = std::abs(n);
    Eigen::VectorXd pot(N + 1);
    pot(0) = 0.0;  // carries zero weight
    for (int k = 1; k <= N; ++k) {
        double r = rf(k);
        pot(k) = r * r / 16.0 + static_cast<double>(an) * an / (r * r) - 0.5;
    }
    Eigen::MatrixXd A = K;
    A.diagonal() += wr.cwiseProduct(pot);

    Forms f;
    if (n == 0) {
        // keep the r = 0 dof in the form, then condense it (zero mass row)
        Eigen::MatrixXd sub = A.topLeftCorner(N, N);
        Eigen::VectorXd k0 = sub.row(0).segment(1, N - 1);
        f.neg_l = sub.block(1, 1, N - 1, N - 1) - (k0 * k0.transpose()) / sub(0, 0);
    } else {
        f.neg_l = A.block(1, 1, N - 1, N - 1);
    }
    // symmetrise away assembly roundoff
    f.neg_l = 0.5 * (f.neg_l + f.neg_l.transpose()).eval();

    // neg_l currently is the bilinear form; convert to M^{-1/2} K M^{-1/2}
    // with M = diag(W_i r_i) (the 8 pi^2 factors cancel in the similarity).
    Eigen::VectorXd m_half_inv(N - 1);
    const auto& r = grid.nodes();
    const auto& W = grid.weights();
    for (int i = 0; i < N - 1; ++i) m_half_inv(i) = 1.0 / std::sqrt(W(i) * r(i));
    f.neg_l = (m_half_inv.asDiagonal() * f.neg_l * m_half_inv.asDiagonal()).eval();
    f.neg_l = 0.5 * (f.neg_l + f.neg_l.transpose()).eval();

    if (n != 0) {
        // Weak Green-kernel BVP on nodes 1..N with the same Robin closure:
        //   int (X' v' + n^2/r^2 X v) r dr + |n| X(R) v(R) = int w v r dr
        Eigen::MatrixXd KB = K.block(1, 1, N, N);
        for (int k = 0; k < N; ++k) {
            double rr = r(k);
            KB(k, k) += W(k) * rr * (static_cast<double>(an) * an / (rr * rr));
        }
        KB(N - 1, N - 1) += static_cast<double>(an);
        KB = 0.5 * (KB + KB.transpose()).eval();
        Eigen::LLT<Eigen::MatrixXd> llt(KB);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("mode operator: BVP form not positive definite");

        // Bilinear form of M_n in the r dr metric:
        //   <v, M w> = int phi v w r dr - (1/8 pi) E G E with
        //   E = diag(W_i r_i e^{-r_i^2/8}) and G the interior block of the
        //   Green solve (the 1/2 turns the Green kernel into the coupling
        //   kernel). Symmetry is exact because G is.
        Eigen::VectorXd e(N - 1);
        for (int i = 0; i < N - 1; ++i)
            e(i) = W(i) * r(i) * std::exp(-r(i) * r(i) / 8.0);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(N, N - 1);
        rhs.topLeftCorner(N - 1, N - 1) = Eigen::MatrixXd(e.asDiagonal());
        Eigen::MatrixXd green = llt.solve(rhs).topRows(N - 1);
        Eigen::MatrixXd mform = (0.5 / (4.0 * kPi)) * (e.asDiagonal() * green);
        mform = 0.5 * (mform + mform.transpose()).eval();
        Eigen::VectorXd phi_w(N - 1);
        for (int i = 0; i < N - 1; ++i) phi_w(i) = W(i) * r(i) * profiles::phi(r(i));
        Eigen::MatrixXd mb = Eigen::MatrixXd(phi_w.asDiagonal()) - mform;
        f.m = (m_half_inv.asDiagonal() * mb * m_half_inv.asDiagonal()).eval();
        f.m = 0.5 * (f.m + f.m.transpose()).eval();

        f.bvp_strong = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(
            strong_bvp_matrix(grid, n));
    }
    return f;
}
}  // namespace

Eigen::VectorXcd rg_scaled(const RadialGrid& grid) {
    const auto& r = grid.nodes();
    Eigen::VectorXcd v(grid.size());
    for (int i = 0; i < grid.size(); ++i)
        v(i) = r(i) * std::exp(-r(i) * r(i) / 8.0) / (4.0 * kPi);
    return v;
}

WeightedRadialFunction project_Z0(const WeightedRadialFunction& w) {
    if (std::abs(w.mode()) != 1)
        throw std::invalid_argument("project_Z0: only defined for |mode| = 1");
    WeightedRadialFunction rg(w.grid(), w.mode(), rg_scaled(*w.grid()));
    auto coef = rg.z_dot(w) / rg.z_dot(rg).real();
    Eigen::VectorXcd out = w.scaled_values() - coef * rg.scaled_values();
    return WeightedRadialFunction::from_scaled(w.grid(), w.mode(), std::move(out));
}

const Eigen::MatrixXd& ModeOperator::m() const {
    if (!m_sym_) throw std::logic_error("ModeOperator: M_n is not defined for n = 0");
    return *m_sym_;
}

Eigen::MatrixXcd ModeOperator::h_matrix() const {
    Eigen::MatrixXcd h = neg_l().cast<std::complex<double>>();
    if (beta_ != 0.0 && m_sym_)
        h += std::complex<double>(0.0, beta_) * m_sym_->cast<std::complex<double>>();
    return h;
}

Eigen::VectorXd ModeOperator::z0_direction() const {
    if (std::abs(mode_) != 1)
        throw std::invalid_argument("z0_direction: only defined for |mode| = 1");
    const auto& s = grid_->metric_scale();
    Eigen::VectorXcd rg = rg_scaled(*grid_);
    Eigen::VectorXd q(grid_->interior_size());
    for (int i = 0; i < q.size(); ++i) q(i) = s(i) * rg(i).real();
    q.normalize();
    return q;
}

Eigen::MatrixXcd ModeOperator::h_matrix(Subspace s) const {
    Eigen::MatrixXcd h = h_matrix();
    if (s == Subspace::z0) return deflate_direction(h, z0_direction());
    return h;
}

Eigen::MatrixXd ModeOperator::neg_l(Subspace s) const {
    if (s == Subspace::z0) return deflate_direction(neg_l(), z0_direction());
    return neg_l();
}

Eigen::MatrixXd ModeOperator::m(Subspace s) const {
    if (s == Subspace::z0) return deflate_direction(m(), z0_direction());
    return m();
}

double ModeOperator::m_norm() const {
    if (!m_norm_cache_) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(m());
        m_norm_cache_ = svd.singularValues()(0);
    }
    return *m_norm_cache_;
}

ModeOperator ModeOperator::with_beta(double beta) const {
    ModeOperator out = *this;
    out.beta_ = beta;
    return out;
}

WeightedRadialFunction ModeOperator::apply_neg_l(const WeightedRadialFunction& w) const {
    const auto& grid = *grid_;
    const int N = grid.size();
    const auto& D = grid.diff();
    Eigen::VectorXcd psi_full(N + 1);
    psi_full.tail(N) = w.scaled_values();
    // boundary value at r = 0 from the origin behaviour
    if (mode_ == 0) {
        // psi'(0) = 0: eliminate with the derivative row
        std::complex<double> s{0.0, 0.0};
        for (int j = 1; j <= N; ++j) s += D(0, j) * psi_full(j);
        psi_full(0) = -s / D(0, 0);
    } else {
        psi_full(0) = {0.0, 0.0};
    }
    Eigen::VectorXcd d1 = D * psi_full;
    Eigen::VectorXcd d2 = D * d1;
    const int an = std::abs(mode_);
    Eigen::VectorXcd out(N);
    const auto& r = grid.nodes();
    for (int i = 0; i < N; ++i) {
        double rr = r(i);
        double pot = 0.5 - rr * rr / 16.0 - static_cast<double>(an) * an / (rr * rr);
        out(i) = -(d2(i + 1) + d1(i + 1) / rr + pot * psi_full(i + 1));
    }
    return WeightedRadialFunction::from_scaled(grid_, mode_, std::move(out));
}

Eigen::VectorXcd ModeOperator::solve_streamfunction(const Eigen::VectorXcd& w_phys) const {
    if (!bvp_strong_) throw std::logic_error("solve_streamfunction: needs n != 0");
    const int N = grid_->size();
    Eigen::VectorXd re(N), im(N);
    for (int i = 0; i < N - 1; ++i) {
        re(i) = w_phys(i).real();
        im(i) = w_phys(i).imag();
    }
    re(N - 1) = im(N - 1) = 0.0;  // Robin row
    Eigen::VectorXd xr = bvp_strong_->solve(re), xi = bvp_strong_->solve(im);
    Eigen::VectorXcd out(N);
    for (int i = 0; i < N; ++i) out(i) = {xr(i), xi(i)};
    return out;
}

Eigen::VectorXcd ModeOperator::omega(const Eigen::VectorXcd& w_phys) const {
    return 0.5 * solve_streamfunction(w_phys);
}

WeightedRadialFunction ModeOperator::apply_m(const WeightedRadialFunction& w) const {
    if (!bvp_strong_) throw std::logic_error("apply_m: M_n is not defined for n = 0");
    const auto& grid = *grid_;
    const int N = grid.size();
    const auto& r = grid.nodes();
    Eigen::VectorXcd om = omega(w.physical_values());
    Eigen::VectorXcd out(N);
    for (int i = 0; i < N; ++i) {
        double rr = r(i);
        // psi-representation of  phi w - g Omega[w]
        out(i) = profiles::phi(rr) * w.scaled_values()(i) -
                 std::exp(-rr * rr / 8.0) / (4.0 * kPi) * om(i);
    }
    return WeightedRadialFunction::from_scaled(grid_, mode_, std::move(out));
}

ModeOperator assemble_H(GridPtr grid, int n, double beta) {
    ModeOperator op;
    op.mode_ = n;
    op.beta_ = beta;
    op.grid_ = std::move(grid);
    Forms f = assemble_forms(*op.grid_, n);
    op.neg_l_sym_ = std::make_shared<const Eigen::MatrixXd>(std::move(f.neg_l));
    if (n != 0) {
        op.m_sym_ = std::make_shared<const Eigen::MatrixXd>(std::move(f.m));
        op.bvp_strong_ = std::move(f.bvp_strong);
    }
    return op;
}

ModeOperator assemble_L_n(GridPtr grid, int n) { return assemble_H(std::move(grid), n, 0.0); }

ModeOperator assemble_M_n(GridPtr grid, int n) {
    if (n == 0) throw std::invalid_argument("assemble_M_n: n must be nonzero");
    return assemble_H(std::move(grid), n, 0.0);
}

Eigen::VectorXcd omega_via_kernel_quadrature(const RadialGrid& grid, int n,
                                             const Eigen::VectorXcd& w_phys,
                                             int panel_points) {
    if (n == 0) throw std::invalid_argument("omega kernel: n must be nonzero");
    const int an = std::abs(n);
    const int N = grid.size();
    Eigen::VectorXcd w_full(N + 1);
    w_full(0) = (an == 0) ? w_phys(0) : std::complex<double>(0, 0);
    w_full.tail(N) = w_phys;

    // Gauss-Legendre nodes on [-1,1] (fixed order), mapped per panel.
    // Weights generated by Newton iteration on Legendre polynomials.
    const int m = panel_points;
    Eigen::VectorXd gx(m), gw(m);
    for (int i = 0; i < m; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (m + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = m * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= m; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = m * (x * p1 - p0) / (x * x - 1.0);
        gx(i) = x;
        gw(i) = 2.0 / ((1.0 - x * x) * dp * dp);
    }

    const double R = grid.r_max();
    auto integrate = [&](double a, double b, auto&& f) {
        // composite: split [a,b] into panels growing geometrically from a
        std::complex<double> total{0.0, 0.0};
        int panels = std::max(2, static_cast<int>(std::ceil((b - a) / 2.0)));
        if (panels > 24) panels = 24;
        double step = (b - a) / panels;
        for (int p = 0; p < panels; ++p) {
            double lo = a + p * step, hi = lo + step;
            double c = 0.5 * (hi + lo), h = 0.5 * (hi - lo);
            for (int i = 0; i < m; ++i) total += h * gw(i) * f(c + h * gx(i));
        }
        return total;
    };

    Eigen::VectorXcd out(N);
    const auto& r = grid.nodes();
    for (int i = 0; i < N; ++i) {
        double ri = r(i);
        auto inner = integrate(0.0, ri, [&](double rp) {
            return std::pow(rp / ri, an) * rp * grid.interpolate(w_full, rp);
        });
        auto outer = integrate(ri, R, [&](double rp) {
            return std::pow(ri / rp, an) * rp * grid.interpolate(w_full, rp);
        });
        out(i) = (inner + outer) / (4.0 * an);
    }
    return out;
}

Eigen::MatrixXd deflate_direction(const Eigen::MatrixXd& a, const Eigen::VectorXd& q) {
    const int n = static_cast<int>(q.size());
    Eigen::VectorXd v = q;
    v(0) += (q(0) >= 0.0 ? 1.0 : -1.0) * q.norm();
    v.normalize();
    Eigen::MatrixXd h = a - v * (v.transpose() * a) * 2.0;
    h = h - (h * v) * v.transpose() * 2.0;
    return h.block(1, 1, n - 1, n - 1);
}

Eigen::MatrixXcd deflate_direction(const Eigen::MatrixXcd& a, const Eigen::VectorXd& q) {
    const int n = static_cast<int>(q.size());
    Eigen::VectorXd v = q;
    v(0) += (q(0) >= 0.0 ? 1.0 : -1.0) * q.norm();
    v.normalize();
    Eigen::VectorXcd vc = v.cast<std::complex<double>>();
    Eigen::MatrixXcd h = a - vc * (vc.adjoint() * a) * 2.0;
    h = h - (h * vc) * vc.adjoint() * 2.0;
    return h.block(1, 1, n - 1, n - 1);
}

void dump_operator(const ModeOperator& op, const std::string& path_prefix) {
    const Eigen::MatrixXcd h = op.h_matrix();
    {
        std::ofstream bin(path_prefix + ".bin", std::ios::binary);
        for (int i = 0; i < h.rows(); ++i)
            for (int j = 0; j < h.cols(); ++j) {
                double re = h(i, j).real(), im = h(i, j).imag();
                bin.write(reinterpret_cast<const char*>(&re), sizeof(double));
                bin.write(reinterpret_cast<const char*>(&im), sizeof(double));
            }
    }
    std::ofstream meta(path_prefix + ".json");
    meta << "{\n  \"mode\": " << op.mode() << ",\n  \"beta\": " << op.beta()
         << ",\n  \"dim\": " << h.rows() << ",\n  \"layout\": \"row-major re,im pairs\""
         << ",\n  \"n_points\": " << op.grid()->size()
         << ",\n  \"r_max\": " << op.grid()->r_max() << "\n}\n";
}

}  // namespace oseen
