#ifndef OSEEN_RADIAL_FUNCTION_HPP
#define OSEEN_RADIAL_FUNCTION_HPP

#include <complex>

#include "oseen/radial_grid.hpp"

namespace oseen {

// One azimuthal-mode radial profile w_n(r), stored in the half-weighted
// representation psi = e^{r^2/8} w on the public nodes. The Z-metric
//    ||w||_Z^2 = 2 pi int_0^inf g(r)^{-1} r |w|^2 dr = 8 pi^2 int r |psi|^2 dr
// is then polynomially weighted; with this normalisation the Z-norm of a
// single mode equals the X-norm of the corresponding 2-d field, and
// ||w||_X^2 = sum_n ||w_n||_Z^2 over all modes n in Z.
class WeightedRadialFunction {
  public:
    WeightedRadialFunction(GridPtr grid, int mode, Eigen::VectorXcd scaled)
        : grid_(std::move(grid)), mode_(mode), scaled_(std::move(scaled)) {}

    static WeightedRadialFunction from_scaled(GridPtr grid, int mode,
                                              Eigen::VectorXcd psi) {
        return {std::move(grid), mode, std::move(psi)};
    }
    static WeightedRadialFunction from_physical(GridPtr grid, int mode,
                                                const Eigen::VectorXcd& w) {
        Eigen::VectorXcd psi(w.size());
        const auto& r = grid->nodes();
        for (int i = 0; i < w.size(); ++i) psi(i) = std::exp(r(i) * r(i) / 8.0) * w(i);
        return {std::move(grid), mode, std::move(psi)};
    }
    static WeightedRadialFunction zero(GridPtr grid, int mode) {
        int n = grid->size();
        return {std::move(grid), mode, Eigen::VectorXcd::Zero(n)};
    }

    int mode() const { return mode_; }
    const GridPtr& grid() const { return grid_; }
    const Eigen::VectorXcd& scaled_values() const { return scaled_; }
    Eigen::VectorXcd& scaled_values() { return scaled_; }

    Eigen::VectorXcd physical_values() const {
        Eigen::VectorXcd w(scaled_.size());
        const auto& r = grid_->nodes();
        for (int i = 0; i < w.size(); ++i) w(i) = std::exp(-r(i) * r(i) / 8.0) * scaled_(i);
        return w;
    }

    double z_norm() const { return std::sqrt(std::abs(z_dot(*this).real())); }

    std::complex<double> z_dot(const WeightedRadialFunction& other) const {
        constexpr double eight_pi2 = 8.0 * 3.14159265358979323846 * 3.14159265358979323846;
        const auto& r = grid_->nodes();
        const auto& w = grid_->weights();
        std::complex<double> s{0.0, 0.0};
        for (int i = 0; i < scaled_.size(); ++i)
            s += w(i) * r(i) * std::conj(scaled_(i)) * other.scaled_(i);
        return eight_pi2 * s;
    }

    WeightedRadialFunction& operator+=(const WeightedRadialFunction& o) {
        scaled_ += o.scaled_;
        return *this;
    }
    WeightedRadialFunction& operator*=(std::complex<double> c) {
        scaled_ *= c;
        return *this;
    }

  private:
    GridPtr grid_;
    int mode_;
    Eigen::VectorXcd scaled_;  // psi at public nodes r_1..r_N
};

/// psi-representation of r g(r), the kernel direction of the |n| = 1
/// coupling operator: psi = r e^{-r^2/8} / (4 pi).
Eigen::VectorXcd rg_scaled(const RadialGrid& grid);

/// Orthogonal projection (in Z) onto Z_0 = { w : int r^2 w dr = 0 } for
/// |mode| = 1; removes the component along r g. Throws for other modes.
WeightedRadialFunction project_Z0(const WeightedRadialFunction& w);

}  // namespace oseen

#endif
