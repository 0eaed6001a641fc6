#pragma once

#include "geometry.hpp"
#include "mesh.hpp"

#include <Eigen/Sparse>

#include <array>
#include <memory>
#include <vector>

namespace wwc {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Operators on the fixed reference triangulation that every moved-domain solve reuses.
class ReferenceDomain {
public:
    ReferenceDomain(const ReferenceSurface& ref, const Mesh& mesh);

    const ReferenceSurface& ref() const { return *ref_; }
    const Mesh& mesh() const { return *mesh_; }
    /// Piecewise-linear interpolation from collocation nodes to the mesh surface vertices.
    const MatrixXd& transfer() const { return transfer_; }

    /// Componentwise Laplace extension of boundary displacements on the reference mesh.
    std::vector<Vec2> extend_boundary_displacement(const std::vector<Vec2>& boundary_disp) const;

    /// Bottom vertex displacement induced by moved contact points.
    std::vector<Vec2> bottom_slide(double d_left, double d_right) const;

    /// Displacement of every mesh vertex under T_S for the surface displacement d (linear in d).
    std::vector<Vec2> vertex_displacement(const VectorXd& d) const;

private:
    const ReferenceSurface* ref_;
    const Mesh* mesh_;
    MatrixXd transfer_;                 ///< dense for simplicity; at most two entries per row
    std::vector<int> interior_index_;   ///< vertex to interior unknown, -1 on the boundary
    SparseMatrix k_ib_;                 ///< interior-boundary coupling
    std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> k_ii_;
};

/// Neumann data on the bottom, linear along each bottom edge (values at the edge ends).
using BottomData = std::vector<std::array<double, 2>>;

/// Right-hand side h of Delta u = h, either nodal (P1) or one value per triangle.
struct Source {
    VectorXd nodal;
    VectorXd per_triangle;
};

/// T_S on the fixed mesh together with the stiffness of the moved domain.
class HarmonicMap {
public:
    HarmonicMap(const ReferenceDomain& domain, const CurveFrame& frame);

    const ReferenceDomain& domain() const { return *domain_; }
    const Mesh& mesh() const { return domain_->mesh(); }
    const CurveFrame& frame() const { return frame_; }

    const std::vector<Vec2>& xy() const { return xy_; }
    const std::vector<Mat2>& jacobian() const { return jac_; }
    const std::vector<double>& det() const { return det_; }
    /// (det J) J^-1 J^-T per triangle.
    const std::vector<Mat2>& coefficient() const { return coef_; }
    /// Area of each moved triangle.
    const std::vector<double>& area() const { return area_; }
    double volume() const { return volume_; }
    /// Surface inner-product weights at the collocation nodes: integrals of the test functions.
    const VectorXd& surface_weights() const { return weights_; }

    const SparseMatrix& stiffness() const { return k_; }
    const SparseMatrix& mass() const { return mass_; }
    /// Gradient of a nodal field on each triangle of the moved mesh.
    std::vector<Vec2> gradient(const VectorXd& u) const;

    /// Solve with Dirichlet data on the surface vertices; rhs is the load on all vertices.
    VectorXd solve_dirichlet(const VectorXd& surface_values, const VectorXd& load) const;
    /// Solve the pure Neumann problem K u = load with the zero-mean gauge.
    VectorXd solve_neumann(const VectorXd& load) const;
    /// L2 projection of per-triangle values to nodes.
    VectorXd project(const VectorXd& per_triangle) const;

    /// Load vector of a source term.
    VectorXd source_load(const Source& h) const;
    /// Load vector of Neumann data on the bottom edges.
    VectorXd bottom_load(const BottomData& g) const;
    /// Load vector of Neumann data on the surface given at the collocation nodes.
    VectorXd surface_load(const VectorXd& g) const;
    /// Collocation-node flux from the boundary residual on the surface vertices.
    VectorXd surface_flux(const VectorXd& residual) const;

    /// Derivative of the flux of the harmonic extension u when the vertices move with the given
    /// velocity and the surface values of u stay fixed.
    VectorXd flux_shape_derivative(const VectorXd& u, const std::vector<Vec2>& velocity) const;

private:
    const ReferenceDomain* domain_;
    CurveFrame frame_;
    std::vector<Vec2> xy_;
    std::vector<Mat2> jac_;
    std::vector<Mat2> coef_;
    std::vector<double> det_;
    std::vector<double> area_;
    double volume_ = 0.0;
    VectorXd weights_;
    SparseMatrix k_;
    SparseMatrix mass_;
    std::vector<int> free_index_;
    std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> k_ff_;
    mutable std::shared_ptr<Eigen::SparseLU<SparseMatrix>> neumann_;
    mutable std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> mass_solver_;
};

/// Nodal field on the mesh with its traces at the collocation nodes.
struct FieldOnDomain {
    VectorXd values;
    VectorXd trace;    ///< values at the collocation nodes
    VectorXd flux;     ///< outward normal derivative at the collocation nodes
};

FieldOnDomain solve_mixed(const HarmonicMap& map, const Source& h, const VectorXd& f, const BottomData& g);
FieldOnDomain harmonic_extension(const HarmonicMap& map, const VectorXd& f);
FieldOnDomain delta_inverse(const HarmonicMap& map, const Source& h, const BottomData& g);

/// Bottom Neumann data equal to N_b . g_vec on every (straight) bottom edge.
BottomData gravity_bottom_data(const HarmonicMap& map, const Vec2& g_vec);

/// P_vv from a nodal velocity field (one row per vertex).
FieldOnDomain solve_pvv(const HarmonicMap& map, const PointList& v, const Vec2& g_vec);

struct PhiSolution {
    FieldOnDomain phi;
    PointList v;           ///< L2-projected nodal gradient
    VectorXd neumann;      ///< (w mu).N at the collocation nodes
    double xi = 0.0;
    double gamma = 0.0;
    double flux_defect = 0.0; ///< relative discrete flux balance defect
};

PhiSolution solve_phi(const HarmonicMap& map, const VectorXd& w);

/// Reference geometry, its mesh and the reference operators, kept at stable addresses.
struct Discretization {
    ReferenceSurface ref;
    Mesh mesh;
    std::unique_ptr<ReferenceDomain> domain;
};

std::unique_ptr<Discretization> make_discretization(const GeometryConfig& geometry, int m, double h, double grading);

}  // namespace wwc
