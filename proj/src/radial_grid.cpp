#include "oseen/radial_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace oseen {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Clenshaw-Curtis weights for the N+1 Lobatto nodes cos(k pi / N),
// symmetric in k so node ordering does not matter.
Eigen::VectorXd cc_weights(int N) {
    Eigen::VectorXd w(N + 1);
    for (int k = 0; k <= N; ++k) {
        double s = 0.0;
        for (int j = 1; j <= N / 2; ++j) {
            double b = (2 * j < N) ? 2.0 : 1.0;
            s += b / (4.0 * j * j - 1.0) * std::cos(2.0 * j * k * kPi / N);
        }
        w(k) = 2.0 / N * (1.0 - s);
    }
    w(0) *= 0.5;
    w(N) *= 0.5;
    return w;
}
}  // namespace

RadialGrid::RadialGrid(int n_points, double r_max, MapKind kind, double cluster_scale)
    : n_(n_points), r_max_(r_max), kind_(kind), cluster_(cluster_scale) {
    if (n_points < 16) throw std::invalid_argument("RadialGrid: n_points must be >= 16");
    if (r_max < 15.0)
        throw std::invalid_argument(
            "RadialGrid: R_max must be >= 15 to hold the Gaussian weight tail");
    if (cluster_ <= 0.0) throw std::invalid_argument("RadialGrid: cluster_scale must be > 0");

    const int N = n_;
    x_.resize(N + 1);
    bary_.resize(N + 1);
    for (int k = 0; k <= N; ++k) {
        x_(k) = -std::cos(kPi * k / N);  // ascending
        bary_(k) = (k % 2 == 0 ? 1.0 : -1.0);
    }
    bary_(0) *= 0.5;
    bary_(N) *= 0.5;

    full_nodes_.resize(N + 1);
    Eigen::VectorXd drdx(N + 1);
    if (kind_ == MapKind::algebraic) {
        const double L = cluster_, eps = 2.0 * L / r_max_;
        for (int k = 0; k <= N; ++k) {
            full_nodes_(k) = L * (1.0 + x_(k)) / (1.0 - x_(k) + eps);
            drdx(k) = L * (2.0 + eps) / std::pow(1.0 - x_(k) + eps, 2);
        }
    } else {
        for (int k = 0; k <= N; ++k) {
            full_nodes_(k) = 0.5 * r_max_ * (1.0 + x_(k));
            drdx(k) = 0.5 * r_max_;
        }
    }
    full_nodes_(0) = 0.0;
    full_nodes_(N) = r_max_;

    full_weights_ = cc_weights(N).cwiseProduct(drdx);

    // Differentiation matrix in x (Trefethen form, negative-sum diagonal),
    // then chain rule to r.
    Eigen::MatrixXd Dx = Eigen::MatrixXd::Zero(N + 1, N + 1);
    Eigen::VectorXd c(N + 1);
    for (int k = 0; k <= N; ++k) c(k) = (k == 0 || k == N) ? 2.0 : 1.0;
    for (int k = 0; k <= N; ++k) c(k) *= (k % 2 == 0 ? 1.0 : -1.0);
    for (int i = 0; i <= N; ++i)
        for (int j = 0; j <= N; ++j)
            if (i != j) Dx(i, j) = (c(i) / c(j)) / (x_(i) - x_(j));
    for (int i = 0; i <= N; ++i) Dx(i, i) = -Dx.row(i).sum();
    diff_ = drdx.cwiseInverse().asDiagonal() * Dx;

    nodes_ = full_nodes_.tail(N);
    weights_ = full_weights_.tail(N);

    metric_scale_.resize(N - 1);
    for (int i = 0; i < N - 1; ++i)
        metric_scale_(i) =
            std::sqrt(8.0 * kPi * kPi * weights_(i) * nodes_(i));
}

double RadialGrid::map_x_of_r(double r) const {
    if (kind_ == MapKind::algebraic) {
        const double L = cluster_, eps = 2.0 * L / r_max_;
        return (r * (1.0 + eps) - L) / (r + L);
    }
    return 2.0 * r / r_max_ - 1.0;
}

template <typename Vec>
static typename Vec::Scalar bary_eval(const Eigen::VectorXd& x, const Eigen::VectorXd& bw,
                                      const Vec& vals, double xq) {
    using Scalar = typename Vec::Scalar;
    Scalar num = Scalar(0);
    double den = 0.0;
    for (int j = 0; j < x.size(); ++j) {
        double dx = xq - x(j);
        if (std::abs(dx) < 1e-300) return vals(j);
        double t = bw(j) / dx;
        num += t * vals(j);
        den += t;
    }
    return num / den;
}

double RadialGrid::interpolate(const Eigen::VectorXd& full_values, double r) const {
    if (r > r_max_ || r < 0.0) return 0.0;
    return bary_eval(x_, bary_, full_values, map_x_of_r(r));
}

std::complex<double> RadialGrid::interpolate(const Eigen::VectorXcd& full_values,
                                             double r) const {
    if (r > r_max_ || r < 0.0) return {0.0, 0.0};
    return bary_eval(x_, bary_, full_values, map_x_of_r(r));
}

GridPtr build_grid(int n_points, double r_max, MapKind kind, double cluster_scale) {
    return std::make_shared<const RadialGrid>(n_points, r_max, kind, cluster_scale);
}

}  // namespace oseen
