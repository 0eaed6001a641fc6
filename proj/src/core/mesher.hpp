#pragma once

#include "common.hpp"

#include <array>
#include <functional>
#include <vector>

namespace wwc {

/// Quality-refined triangulation of a convex polygon whose boundary points are fixed.
/// Boundary points are given counter-clockwise; only interior points are added.
struct PlanarMesh {
    std::vector<Vec2> points;                 ///< boundary points first, in input order
    std::vector<std::array<int, 3>> triangles; ///< counter-clockwise
    std::vector<bool> on_boundary;
};

struct MesherOptions {
    double max_ratio = 1.40;     ///< circumradius to shortest edge
    double size_slack = 1.15;    ///< accept triangles up to this multiple of the size field
    double min_split = 0.3;      ///< boundary edges shorter than this multiple of the size field are kept
    int max_points = 400000;
    int smoothing_sweeps = 6;
};

/// splittable[i] marks whether the boundary edge from point i to point i+1 may receive
/// new points; split points land on the boundary.
PlanarMesh refine_convex_polygon(const std::vector<Vec2>& boundary, const std::vector<bool>& splittable,
                                 const std::function<double(const Vec2&)>& size,
                                 const MesherOptions& opt = {});

double triangle_min_angle(const Vec2& a, const Vec2& b, const Vec2& c);

}  // namespace wwc
