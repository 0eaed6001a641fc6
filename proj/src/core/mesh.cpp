#include "mesh.hpp"

#include "mesher.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace wwc {
namespace {

struct SizeField {
    const ReferenceSurface* ref;
    double h, grading, radius;
    std::vector<Vec2> nodes;
    std::vector<double> spacing;

    double slope_left, slope_right, floor_left, floor_right;

    SizeField(const ReferenceSurface& r, double h_, double g_) : ref(&r), h(h_), grading(g_), radius(0.25 * r.length()) {
        const int n = r.size();
        for (int j = 0; j < n; ++j) nodes.push_back(row(r.gamma_star, j));
        for (int j = 0; j < n; ++j) {
            const int lo = std::max(0, j - 1), hi = std::min(n - 1, j + 1);
            spacing.push_back((nodes[hi] - nodes[lo]).norm() / (hi - lo));
        }
        // a corner of angle w leaves room for elements of size ~ r tan(w) at distance r
        slope_left = r.omega_left < 0.45 * kPi ? std::tan(r.omega_left) : 1e300;
        slope_right = r.omega_right < 0.45 * kPi ? std::tan(r.omega_right) : 1e300;
        floor_left = 0.1 * (nodes[1] - nodes[0]).norm();
        floor_right = 0.1 * (nodes[n - 1] - nodes[n - 2]).norm();
    }

    /// One element out to the floor radius, then geometric growth along the corner.
    static double corner(double r, double slope, double floor) {
        if (slope > 1e10) return 1e300;
        return r < floor ? floor : 1.2 * slope * r;
    }

    double operator()(const Vec2& x) const {
        const double rl = (x - ref->p_left).norm(), rr = (x - ref->p_right).norm();
        double s = h * (grading + (1.0 - grading) * std::min(1.0, std::min(rl, rr) / radius));
        for (std::size_t j = 0; j < nodes.size(); ++j) s = std::min(s, spacing[j] + 0.4 * (x - nodes[j]).norm());
        s = std::min(s, corner(rl, slope_left, floor_left));
        s = std::min(s, corner(rr, slope_right, floor_right));
        return s;
    }
};

/// Interior points of [a, b] equidistributed in the integral of 1/size.
std::vector<double> discretize_segment(const Vec2& a, const Vec2& b, const SizeField& size) {
    const double len = (b - a).norm();
    // march with steps a fraction of the local size so tiny corner elements are resolved
    std::vector<double> ts{0.0}, cum{0.0};
    while (ts.back() < 1.0) {
        const double t0 = ts.back();
        const double step = std::min(1.0 - t0, 0.125 * size(a + t0 * (b - a)) / len);
        const double tm = t0 + 0.5 * step;
        ts.push_back(t0 + step);
        cum.push_back(cum.back() + step * len / size(a + tm * (b - a)));
    }
    ts.back() = 1.0;
    const int pieces = std::max(1, static_cast<int>(std::ceil(cum.back() - 1e-9)));
    std::vector<double> out;
    for (int i = 1; i < pieces; ++i) {
        const double target = cum.back() * i / pieces;
        const auto it = std::lower_bound(cum.begin(), cum.end(), target);
        const auto k = it - cum.begin();
        const double frac = (target - cum[k - 1]) / (cum[k] - cum[k - 1]);
        out.push_back(ts[k - 1] + frac * (ts[k] - ts[k - 1]));
    }
    return out;
}

struct Labelled {
    Vec2 x;
    int top = -1;          ///< collocation index for collocation points
    double param = -1.0;   ///< bottom arclength for bottom points
    double surf = -1.0;    ///< reference arclength for surface points
};

double bottom_param_of(const ReferenceSurface& ref, const Vec2& x) {
    double acc = 0.0;
    double best = 1e300, best_param = -1.0;
    for (std::size_t i = 0; i + 1 < ref.gamma_b_star.size(); ++i) {
        const Vec2 a = ref.gamma_b_star[i], b = ref.gamma_b_star[i + 1];
        const double len = (b - a).norm();
        const double t = std::clamp((x - a).dot(b - a) / (len * len), 0.0, 1.0);
        const double dist = (a + t * (b - a) - x).norm();
        if (dist < best) {
            best = dist;
            best_param = acc + t * len;
        }
        acc += len;
    }
    return best < 1e-9 * ref.length() ? best_param : -1.0;
}

int segment_of_param(const ReferenceSurface& ref, double param) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < ref.gamma_b_star.size(); ++i) {
        acc += (ref.gamma_b_star[i + 1] - ref.gamma_b_star[i]).norm();
        if (param <= acc) return static_cast<int>(i);
    }
    return static_cast<int>(ref.gamma_b_star.size()) - 2;
}

/// Orders vertices as collocation, extra surface, bottom, interior and fills the bookkeeping.
Mesh assemble(const ReferenceSurface& ref, const std::vector<Labelled>& pts, const std::vector<std::array<int, 3>>& tris,
              double h, double grading) {
    const int n = static_cast<int>(pts.size());
    const int m = ref.size() - 1;
    std::vector<int> top(m + 1, -1), extra_ids, bottom_ids, interior_ids;
    for (int i = 0; i < n; ++i) {
        if (pts[i].top >= 0) top[pts[i].top] = i;
        else if (pts[i].surf >= 0) extra_ids.push_back(i);
        else if (pts[i].param >= 0) bottom_ids.push_back(i);
        else interior_ids.push_back(i);
    }
    for (int j = 0; j <= m; ++j)
        if (top[j] < 0) throw Error(ErrorCode::numerical, fmt::format("meshing lost surface node {}", j));
    auto by_surf = [&](int a, int b) { return pts[a].surf < pts[b].surf; };
    std::stable_sort(extra_ids.begin(), extra_ids.end(), by_surf);
    std::stable_sort(bottom_ids.begin(), bottom_ids.end(), [&](int a, int b) { return pts[a].param < pts[b].param; });

    std::vector<int> order = top;
    order.insert(order.end(), extra_ids.begin(), extra_ids.end());
    order.insert(order.end(), bottom_ids.begin(), bottom_ids.end());
    order.insert(order.end(), interior_ids.begin(), interior_ids.end());
    std::vector<int> newid(n);
    for (int k = 0; k < n; ++k) newid[order[k]] = k;

    Mesh mesh;
    mesh.h = h;
    mesh.grading = grading;
    mesh.n_surface = m + 1;
    for (int k = 0; k < n; ++k) {
        const auto& p = pts[order[k]];
        mesh.xy.push_back(p.x);
        if (p.top == 0 || p.top == m) mesh.tag.push_back(VertexTag::corner);
        else if (p.surf >= 0) mesh.tag.push_back(VertexTag::surface);
        else if (p.param >= 0) mesh.tag.push_back(VertexTag::bottom);
        else mesh.tag.push_back(VertexTag::interior);
    }
    for (const auto& t : tris) mesh.tri.push_back({newid[t[0]], newid[t[1]], newid[t[2]]});

    std::vector<int> surf_ids(top);
    surf_ids.insert(surf_ids.end(), extra_ids.begin(), extra_ids.end());
    std::stable_sort(surf_ids.begin(), surf_ids.end(), by_surf);
    for (int i : surf_ids) {
        mesh.surface.push_back(newid[i]);
        mesh.surface_param.push_back(pts[i].surf);
    }

    mesh.bottom.push_back(0);
    mesh.bottom_param.push_back(0.0);
    for (int i : bottom_ids) {
        mesh.bottom.push_back(newid[i]);
        mesh.bottom_param.push_back(pts[i].param);
    }
    mesh.bottom.push_back(m);
    mesh.bottom_param.push_back(ref.bottom_length);
    for (std::size_t k = 0; k + 1 < mesh.bottom.size(); ++k) {
        const double mid = 0.5 * (mesh.bottom_param[k] + mesh.bottom_param[k + 1]);
        mesh.bottom_edges.push_back({mesh.bottom[k], mesh.bottom[k + 1], segment_of_param(ref, mid)});
    }
    return mesh;
}

}  // namespace

Mesh triangulate_reference(const ReferenceSurface& ref, double h, double grading) {
    if (!(h > 0) || !(grading > 0 && grading <= 1)) throw Error(ErrorCode::invalid_argument, "bad mesh parameters");
    const SizeField size(ref, h, grading);
    const int m = ref.size() - 1;
    const bool half = ref.symmetric && m % 2 == 0;

    std::vector<Labelled> boundary;
    auto push_bottom_segment = [&](const Vec2& a, const Vec2& b, double param_a) {
        boundary.push_back({a, -1, param_a});
        for (double t : discretize_segment(a, b, size)) boundary.push_back({a + t * (b - a), -1, param_a + t * (b - a).norm()});
    };

    // counter-clockwise: down the bottom, then back along the surface
    boundary.push_back({ref.p_left, 0, -1, 0.0});
    double acc = 0.0;
    const auto& gb = ref.gamma_b_star;
    std::vector<Vec2> midline;
    for (std::size_t i = 0; i + 1 < gb.size(); ++i) {
        Vec2 a = gb[i], b = gb[i + 1];
        const double len = (b - a).norm();
        if (half && b.x() >= 0.0) {
            if (a.x() >= 0.0) break;
            b = a + (-a.x() / (b.x() - a.x())) * (b - a);
            b.x() = 0.0;
            if (i > 0) push_bottom_segment(a, b, acc);
            else for (double t : discretize_segment(a, b, size)) boundary.push_back({a + t * (b - a), -1, t * (b - a).norm()});
            acc += (b - a).norm();
            midline = {b, Vec2(0.0, 0.0)};
            break;
        }
        if (i > 0) push_bottom_segment(a, b, acc);
        else for (double t : discretize_segment(a, b, size)) boundary.push_back({a + t * (b - a), -1, t * len});
        acc += len;
    }
    // surface from node j_hi back to node 0, with extra points where the size field asks for them
    auto push_surface = [&](int j_hi) {
        for (int j = j_hi; j >= 1; --j) {
            const double s_hi = ref.grid.node(j), s_lo = ref.grid.node(j - 1);
            const Vec2 a = row(ref.gamma_star, j), b = row(ref.gamma_star, j - 1);
            if (j != j_hi || !half) boundary.push_back({a, j, -1, s_hi});
            for (double t : discretize_segment(a, b, size)) boundary.push_back({a + t * (b - a), -1, -1, s_hi + t * (s_lo - s_hi)});
        }
    };
    if (half) {
        const Vec2 a = midline[0], b = midline[1];
        boundary.push_back({a, -1, acc});
        for (double t : discretize_segment(a, b, size)) boundary.push_back({a + t * (b - a), -1, -1});
        boundary.push_back({row(ref.gamma_star, m / 2), m / 2, -1, ref.grid.node(m / 2)});
        push_surface(m / 2);
    } else {
        push_surface(m);
    }

    std::vector<Vec2> poly;
    std::vector<bool> splittable;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
        poly.push_back(boundary[i].x);
        splittable.push_back(boundary[i].surf < 0 || boundary[(i + 1) % boundary.size()].surf < 0);
    }
    const PlanarMesh pm = refine_convex_polygon(poly, splittable, size);

    std::vector<Labelled> pts(boundary);
    for (std::size_t k = boundary.size(); k < pm.points.size(); ++k) {
        const double param = pm.on_boundary[k] ? bottom_param_of(ref, pm.points[k]) : -1.0;
        pts.push_back({pm.points[k], -1, param});
    }
    std::vector<std::array<int, 3>> tris = pm.triangles;

    if (half) {
        const int nh = static_cast<int>(pts.size());
        std::vector<int> mirror(nh);
        for (int i = 0; i < nh; ++i) {
            if (pts[i].x.x() == 0.0) {
                mirror[i] = i;
                continue;
            }
            Labelled q = pts[i];
            q.x = Vec2(-q.x.x(), q.x.y());
            if (q.top >= 0) q.top = m - q.top;
            if (q.param >= 0) q.param = ref.bottom_length - q.param;
            if (q.surf >= 0) q.surf = ref.length() - q.surf;
            mirror[i] = static_cast<int>(pts.size());
            pts.push_back(q);
        }
        const std::size_t nt = tris.size();
        for (std::size_t k = 0; k < nt; ++k) {
            const auto& t = tris[k];
            tris.push_back({mirror[t[0]], mirror[t[2]], mirror[t[1]]});
        }
    }
    return assemble(ref, pts, tris, h, grading);
}

MeshQuality mesh_quality(const Mesh& mesh) {
    MeshQuality q;
    q.min_angle = q.min_angle_off_corner = kPi;
    q.min_edge = 1e300;
    double corner_sum = 0.0;
    int corner_count = 0;
    const int m = mesh.n_surface - 1;
    for (const auto& t : mesh.tri) {
        const Vec2 a = mesh.xy[t[0]], b = mesh.xy[t[1]], c = mesh.xy[t[2]];
        const double ang = triangle_min_angle(a, b, c);
        q.min_angle = std::min(q.min_angle, ang);
        const bool at_corner = std::any_of(t.begin(), t.end(), [&](int v) { return v == 0 || v == m; });
        if (!at_corner) q.min_angle_off_corner = std::min(q.min_angle_off_corner, ang);
        for (double e : {(a - b).norm(), (b - c).norm(), (c - a).norm()}) {
            q.max_edge = std::max(q.max_edge, e);
            q.min_edge = std::min(q.min_edge, e);
            if (at_corner) {
                corner_sum += e;
                ++corner_count;
            }
        }
    }
    q.corner_size = corner_count ? corner_sum / corner_count : 0.0;
    return q;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
    out << fmt::format("vertices {}\n", mesh.n_vertices());
    for (int i = 0; i < mesh.n_vertices(); ++i)
        out << fmt::format("{} {:.17g} {:.17g} {}\n", i, mesh.xy[i].x(), mesh.xy[i].y(), static_cast<int>(mesh.tag[i]));
    out << fmt::format("elements {}\n", mesh.n_triangles());
    for (int k = 0; k < mesh.n_triangles(); ++k)
        out << fmt::format("{} {} {} {}\n", k, mesh.tri[k][0], mesh.tri[k][1], mesh.tri[k][2]);
}

Mesh read_mesh(std::istream& in, const ReferenceSurface& ref) {
    std::string word;
    int nv = 0, ne = 0;
    if (!(in >> word >> nv) || word != "vertices") throw Error(ErrorCode::io, "mesh file: missing 'vertices' header");
    std::vector<Labelled> pts(nv);
    std::vector<int> tags(nv);
    const int m = ref.size() - 1;
    for (int i = 0; i < nv; ++i) {
        int id = 0, tag = 0;
        double x = 0, y = 0;
        if (!(in >> id >> x >> y >> tag) || id != i) throw Error(ErrorCode::io, fmt::format("mesh file: bad vertex line {}", i));
        pts[i].x = Vec2(x, y);
        tags[i] = tag;
        if (i <= m) {
            pts[i].top = i;
            pts[i].surf = ref.grid.node(i);
        } else if (tag == static_cast<int>(VertexTag::surface)) {
            pts[i].surf = x - ref.p_left.x();
        } else if (tag == static_cast<int>(VertexTag::bottom)) pts[i].param = bottom_param_of(ref, pts[i].x);
    }
    if (!(in >> word >> ne) || word != "elements") throw Error(ErrorCode::io, "mesh file: missing 'elements' header");
    std::vector<std::array<int, 3>> tris(ne);
    for (int k = 0; k < ne; ++k) {
        int id = 0;
        if (!(in >> id >> tris[k][0] >> tris[k][1] >> tris[k][2]) || id != k)
            throw Error(ErrorCode::io, fmt::format("mesh file: bad element line {}", k));
        for (int v : tris[k])
            if (v < 0 || v >= nv) throw Error(ErrorCode::io, fmt::format("mesh file: element {} references vertex {}", k, v));
    }
    return assemble(ref, pts, tris, 0.0, 1.0);
}

}  // namespace wwc
