#pragma once

#include "chebyshev.hpp"
#include "config.hpp"

#include <vector>

namespace wwc {

/// Fixed reference configuration: flat upper surface between the contact points,
/// straight-walled tank below it, and the transversal field mu on the surface.
struct ReferenceSurface {
    ChebyshevGrid grid;
    PointList gamma_star;           ///< nodes of the reference surface, left to right
    PointList normal_star;          ///< outward unit normal at the nodes
    PointList mu;                   ///< unit transversal field at the nodes
    std::vector<Vec2> gamma_b_star; ///< wetted bottom polyline from p_l* to p_r*
    std::vector<Vec2> gamma_fix;    ///< bottom polyline including the dry wall above each contact point
    Vec2 p_left, p_right;
    Vec2 tau_b_left;                ///< bottom tangent at p_l*, pointing down the left wall
    Vec2 tau_b_right;               ///< bottom tangent at p_r*, pointing up the right wall
    double straight_left = 0.0;     ///< straight wetted wall from p_l* to the first kink
    double straight_right = 0.0;
    double dry_left = 0.0;          ///< straight dry wall above each contact point
    double dry_right = 0.0;
    double omega_left = 0.0;        ///< reference contact angles
    double omega_right = 0.0;
    double c0 = 0.1;
    double delta = 0.02;
    double area = 0.0;              ///< area of the reference domain
    double bottom_length = 0.0;     ///< length of gamma_b_star
    bool symmetric = false;         ///< left-right mirror symmetric about x = 0

    int size() const { return grid.size(); }
    double length() const { return grid.length(); }
};

ReferenceSurface build_reference(const GeometryConfig& cfg, int m);

/// Moved surface Phi_S(p) = p + d(p) mu(p) and its differential quantities.
struct CurveFrame {
    const ReferenceSurface* ref = nullptr;
    VectorXd d;
    PointList points;
    PointList dpoints;              ///< derivative in the reference arclength
    PointList ddpoints;
    PointList tau;
    PointList normal;
    VectorXd kappa;
    VectorXd metric;
    double omega_left = 0.0;
    double omega_right = 0.0;
};

CurveFrame evaluate_frame(const ReferenceSurface& ref, const VectorXd& d);

/// Interior angles at the contact points, measured inside the fluid.
std::pair<double, double> contact_angles(const CurveFrame& frame);

VectorXd surface_gradient(const CurveFrame& frame, const VectorXd& f);
VectorXd surface_laplacian(const CurveFrame& frame, const VectorXd& f);
PointList surface_gradient_field(const CurveFrame& frame, const PointList& f);
PointList surface_laplacian_field(const CurveFrame& frame, const PointList& f);

/// Curvature recomputed as the tangential derivative of the normal along the tangent.
VectorXd curvature_from_normal(const CurveFrame& frame);

/// Jacobian of the nodal curvature with respect to the nodal displacement d.
MatrixXd curvature_jacobian(const CurveFrame& frame);

/// Surface integral of nodal values using Clenshaw–Curtis weights times the metric.
double surface_integral(const CurveFrame& frame, const VectorXd& f);
double surface_length(const CurveFrame& frame);

/// Throws InadmissibleState when d leaves the admissible neighbourhood.
void check_admissible(const ReferenceSurface& ref, const CurveFrame& frame);

/// Largest contact angle each Sobolev index s >= 2 tolerates in the elliptic estimates.
double angle_gate(double s);

inline double dot_row(const PointList& a, const PointList& b, Eigen::Index i) {
    return a(i, 0) * b(i, 0) + a(i, 1) * b(i, 1);
}

}  // namespace wwc
