#ifndef OSEEN_RADIAL_GRID_HPP
#define OSEEN_RADIAL_GRID_HPP

#include <Eigen/Dense>
#include <memory>

namespace oseen {

enum class MapKind { algebraic, linear };

// Collocation grid on (0, R_max]. Internally a Chebyshev-Lobatto grid in
// x in [-1,1] mapped to r in [0, R_max]; the r = 0 endpoint is machinery
// only (boundary handling), the public nodes are r_1..r_N > 0. Quadrature
// weights are Clenshaw-Curtis times the map Jacobian and approximate
// int_0^{R_max} f(r) dr spectrally for smooth f.
//
// Functions are carried in the half-weighted representation
//    psi(r) = e^{r^2/8} w(r),
// in which the Z-metric weight g^{-1} r dr becomes 4 pi r dr and no
// exponentially large factor is ever formed (R_max up to ~100 is safe).
class RadialGrid {
  public:
    // n_points >= 16 public nodes, R_max >= 15. cluster_scale sets the
    // algebraic map r = L(1+x) / (1-x+2L/R_max): about half the nodes land
    // in r < L, covering the vortex core; Chebyshev clustering supplies
    // extra density near r = 0 and r = R_max.
    RadialGrid(int n_points, double r_max, MapKind kind = MapKind::algebraic,
               double cluster_scale = 4.0);

    int size() const { return n_; }                     // public node count N
    int interior_size() const { return n_ - 1; }        // operator dof count
    double r_max() const { return r_max_; }
    MapKind map_kind() const { return kind_; }
    double cluster_scale() const { return cluster_; }

    // Public nodes r_1..r_N (strictly increasing, last = R_max) and weights.
    const Eigen::VectorXd& nodes() const { return nodes_; }
    const Eigen::VectorXd& weights() const { return weights_; }

    // Full Lobatto data including the r = 0 node (index 0).
    const Eigen::VectorXd& full_nodes() const { return full_nodes_; }
    const Eigen::VectorXd& full_weights() const { return full_weights_; }
    const Eigen::MatrixXd& diff() const { return diff_; }  // d/dr, full grid

    // sqrt(8 pi^2 W_i r_i) on interior nodes: maps interior psi-values to
    // coordinates in which the Z-norm is Euclidean.
    const Eigen::VectorXd& metric_scale() const { return metric_scale_; }

    // Quadrature of a function sampled on the public nodes.
    double quad(const Eigen::VectorXd& f) const { return weights_.dot(f); }

    // Barycentric interpolation of full-grid samples at an off-grid radius.
    // Returns 0 beyond R_max.
    double interpolate(const Eigen::VectorXd& full_values, double r) const;
    std::complex<double> interpolate(const Eigen::VectorXcd& full_values,
                                     double r) const;

  private:
    double map_x_of_r(double r) const;

    int n_;
    double r_max_;
    MapKind kind_;
    double cluster_;
    Eigen::VectorXd x_;            // Lobatto nodes in [-1,1], ascending
    Eigen::VectorXd bary_;         // barycentric weights on x_
    Eigen::VectorXd full_nodes_, full_weights_;
    Eigen::VectorXd nodes_, weights_;
    Eigen::MatrixXd diff_;
    Eigen::VectorXd metric_scale_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr build_grid(int n_points, double r_max, MapKind kind = MapKind::algebraic,
                   double cluster_scale = 4.0);

/// Domain size policy for large-circulation sweeps: the crossover radius
/// grows like |alpha|^{1/6}, so the truncation radius follows it.
inline double recommended_r_max(double alpha) {
    double r = 6.0 * std::pow(std::abs(alpha), 1.0 / 6.0) + 20.0;
    return r < 30.0 ? 30.0 : r;
}

}  // namespace oseen

#endif
