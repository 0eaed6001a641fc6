#include "mesher.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace wwc {
namespace {

struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nb;  ///< neighbour across the edge opposite v[i]; -1 on the boundary
    bool alive = true;
    bool skip = false;
};

double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

bool in_circle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    using LD = long double;
    const LD adx = LD(a.x()) - d.x(), ady = LD(a.y()) - d.y();
    const LD bdx = LD(b.x()) - d.x(), bdy = LD(b.y()) - d.y();
    const LD cdx = LD(c.x()) - d.x(), cdy = LD(c.y()) - d.y();
    const LD det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) - (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                   (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
    const LD scale = (adx * adx + ady * ady + bdx * bdx + bdy * bdy + cdx * cdx + cdy * cdy);
    return det > 1e-14L * scale * scale;
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
    const Vec2 ba = b - a, ca = c - a;
    const double den = 2.0 * cross(ba, ca);
    const double b2 = ba.squaredNorm(), c2 = ca.squaredNorm();
    return a + Vec2(ca.y() * b2 - ba.y() * c2, ba.x() * c2 - ca.x() * b2) / den;
}

class Triangulation {
public:
    explicit Triangulation(std::vector<Vec2> pts) : pts_(std::move(pts)) {}

    std::vector<Vec2>& points() { return pts_; }
    std::vector<Tri>& tris() { return tris_; }

    void ear_clip(int nb) {
        std::vector<int> poly(nb);
        for (int i = 0; i < nb; ++i) poly[i] = i;
        std::vector<std::array<int, 3>> out;
        while (poly.size() > 3) {
            const int n = static_cast<int>(poly.size());
            int best = -1;
            double best_q = -1.0;
            for (int i = 0; i < n; ++i) {
                const int a = poly[(i + n - 1) % n], b = poly[i], c = poly[(i + 1) % n];
                const double ar = orient(pts_[a], pts_[b], pts_[c]);
                if (ar <= 1e-14 * (pts_[a] - pts_[c]).squaredNorm()) continue;
                bool empty = true;
                for (int k : poly) {
                    if (k == a || k == b || k == c) continue;
                    if (orient(pts_[a], pts_[b], pts_[k]) >= 0 && orient(pts_[b], pts_[c], pts_[k]) >= 0 &&
                        orient(pts_[c], pts_[a], pts_[k]) >= 0) {
                        empty = false;
                        break;
                    }
                }
                if (!empty) continue;
                const double q = triangle_min_angle(pts_[a], pts_[b], pts_[c]);
                if (q > best_q) {
                    best_q = q;
                    best = i;
                }
            }
            if (best < 0) throw Error(ErrorCode::numerical, "meshing failed: no ear in boundary polygon");
            const int a = poly[(best + n - 1) % n], b = poly[best], c = poly[(best + 1) % n];
            out.push_back({a, b, c});
            poly.erase(poly.begin() + best);
        }
        out.push_back({poly[0], poly[1], poly[2]});
        set_triangles(out);
    }

    void set_triangles(const std::vector<std::array<int, 3>>& t) {
        tris_.clear();
        for (const auto& v : t) tris_.push_back(Tri{v, {-1, -1, -1}});
        rebuild_adjacency();
    }

    void rebuild_adjacency() {
        std::map<std::pair<int, int>, std::pair<int, int>> edges;
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            if (!tris_[t].alive) continue;
            tris_[t].nb = {-1, -1, -1};
            for (int i = 0; i < 3; ++i) {
                const int a = tris_[t].v[(i + 1) % 3], b = tris_[t].v[(i + 2) % 3];
                auto key = std::minmax(a, b);
                auto it = edges.find(key);
                if (it == edges.end()) {
                    edges[key] = {t, i};
                } else {
                    tris_[t].nb[i] = it->second.first;
                    tris_[it->second.first].nb[it->second.second] = t;
                }
            }
        }
    }

    void compact() {
        std::vector<std::array<int, 3>> t;
        for (const auto& tr : tris_)
            if (tr.alive) t.push_back(tr.v);
        set_triangles(t);
    }

    /// Lawson flips until every interior edge is locally Delaunay.
    void make_delaunay() {
        bool changed = true;
        int guard = 0;
        while (changed && guard++ < 200) {
            changed = false;
            for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
                for (int i = 0; i < 3; ++i) {
                    if (try_flip(t, i)) {
                        changed = true;
                        break;
                    }
                }
            }
        }
    }

    bool try_flip(int t, int i) {
        const int u = tris_[t].nb[i];
        if (u < 0) return false;
        int j = 0;
        while (tris_[u].nb[j] != t) ++j;
        const int p = tris_[t].v[i], q = tris_[u].v[j];
        const int e1 = tris_[t].v[(i + 1) % 3], e2 = tris_[t].v[(i + 2) % 3];
        if (!in_circle(pts_[tris_[t].v[0]], pts_[tris_[t].v[1]], pts_[tris_[t].v[2]], pts_[q])) return false;
        if (orient(pts_[p], pts_[e1], pts_[q]) <= 0 || orient(pts_[q], pts_[e2], pts_[p]) <= 0) return false;
        auto idx = [&](int tri, int vert) {
            for (int k = 0; k < 3; ++k)
                if (tris_[tri].v[k] == vert) return k;
            return -1;
        };
        const int n_t_e2 = tris_[t].nb[idx(t, e2)];  // across (p, e1)
        const int n_t_e1 = tris_[t].nb[idx(t, e1)];  // across (e2, p)
        const int n_u_e2 = tris_[u].nb[idx(u, e2)];  // across (e1, q)
        const int n_u_e1 = tris_[u].nb[idx(u, e1)];  // across (q, e2)
        tris_[t].v = {p, e1, q};
        tris_[t].nb = {n_u_e2, u, n_t_e2};
        tris_[u].v = {q, e2, p};
        tris_[u].nb = {n_t_e1, t, n_u_e1};
        replace_neighbor(n_u_e2, u, t);
        replace_neighbor(n_t_e1, t, u);
        return true;
    }

    void replace_neighbor(int tri, int old_nb, int new_nb) {
        if (tri < 0) return;
        for (int k = 0; k < 3; ++k)
            if (tris_[tri].nb[k] == old_nb) tris_[tri].nb[k] = new_nb;
    }

    struct Located {
        int tri = -1;        ///< containing triangle, or the last one visited
        int exit_edge = -1;  ///< boundary edge index crossed when p lies outside
    };

    Located locate(const Vec2& p, int start) const {
        int t = start;
        for (std::size_t steps = 0; steps < 4 * tris_.size() + 10; ++steps) {
            int next = -2, edge = -1;
            for (int i = 0; i < 3; ++i) {
                const Vec2& a = pts_[tris_[t].v[(i + 1) % 3]];
                const Vec2& b = pts_[tris_[t].v[(i + 2) % 3]];
                if (orient(a, b, p) < 0) {
                    next = tris_[t].nb[i];
                    edge = i;
                    break;
                }
            }
            if (next == -2) return {t, -1};
            if (next == -1) return {t, edge};
            t = next;
        }
        throw Error(ErrorCode::numerical, "meshing failed: point location did not terminate");
    }

    struct Outcome {
        bool inserted = false;
        int owner = -1;  ///< triangle holding an encroached boundary edge
        int edge = -1;
    };

    /// Bowyer–Watson insertion starting from triangle t0. When split_edge >= 0 the point
    /// lies on that boundary edge of t0, which is replaced by its two halves. Nothing is
    /// modified unless the insertion succeeds.
    Outcome insert(const Vec2& p, int t0, int split_edge, bool guard_boundary, std::vector<int>& created) {
        std::vector<int> cavity{t0};
        std::vector<char> in(tris_.size(), 0);
        in[t0] = 1;
        for (std::size_t k = 0; k < cavity.size(); ++k) {
            const Tri& c = tris_[cavity[k]];
            for (int i = 0; i < 3; ++i) {
                const int u = c.nb[i];
                if (u < 0 || in[u]) continue;
                const Tri& tu = tris_[u];
                if (in_circle(pts_[tu.v[0]], pts_[tu.v[1]], pts_[tu.v[2]], p)) {
                    in[u] = 1;
                    cavity.push_back(u);
                }
            }
        }
        struct Face { int a, b, outside, from; };
        std::vector<Face> faces;
        for (int c : cavity) {
            for (int i = 0; i < 3; ++i) {
                const int u = tris_[c].nb[i];
                if (u >= 0 && in[u]) continue;
                if (c == t0 && i == split_edge) continue;
                const int a = tris_[c].v[(i + 1) % 3], b = tris_[c].v[(i + 2) % 3];
                const Vec2 &pa = pts_[a], &pb = pts_[b];
                if (u < 0 && guard_boundary) {
                    const Vec2 mid = 0.5 * (pa + pb);
                    if ((p - mid).squaredNorm() < 0.25 * (pa - pb).squaredNorm()) return {false, c, i};
                }
                if (orient(p, pa, pb) <= 1e-12 * (pa - pb).squaredNorm()) return {};
                faces.push_back({a, b, u, c});
            }
        }
        const int pid = static_cast<int>(pts_.size());
        pts_.push_back(p);
        for (int c : cavity) tris_[c].alive = false;
        std::map<int, int> by_a, by_b;
        const int base = static_cast<int>(tris_.size());
        for (std::size_t k = 0; k < faces.size(); ++k) {
            const auto& f = faces[k];
            const int id = base + static_cast<int>(k);
            tris_.push_back(Tri{{pid, f.a, f.b}, {f.outside, -1, -1}});
            by_a[f.a] = id;
            by_b[f.b] = id;
            replace_neighbor(f.outside, f.from, id);
        }
        auto find = [](const std::map<int, int>& m, int key) {
            const auto it = m.find(key);
            return it == m.end() ? -1 : it->second;
        };
        for (std::size_t k = 0; k < faces.size(); ++k) {
            Tri& t = tris_[base + k];
            t.nb[1] = find(by_a, t.v[2]);  // across (b, p)
            t.nb[2] = find(by_b, t.v[1]);  // across (p, a)
            created.push_back(base + static_cast<int>(k));
        }
        return {true, -1, -1};
    }

    void validate() const {
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            const Tri& x = tris_[t];
            if (!x.alive) continue;
            if (orient(pts_[x.v[0]], pts_[x.v[1]], pts_[x.v[2]]) <= 0) throw Error(ErrorCode::numerical, "debug: inverted triangle");
            for (int i = 0; i < 3; ++i) {
                const int u = x.nb[i];
                if (u < 0) continue;
                if (!tris_[u].alive) throw Error(ErrorCode::numerical, "debug: dead neighbour");
                int back = 0;
                for (int k = 0; k < 3; ++k) back += tris_[u].nb[k] == t;
                if (back != 1) throw Error(ErrorCode::numerical, "debug: asymmetric adjacency");
            }
        }
    }

private:
    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
};

}  // namespace

double triangle_min_angle(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
    auto ang = [](double opp, double s1, double s2) {
        return std::acos(std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2 * s1 * s2), -1.0, 1.0));
    };
    return std::min({ang(la, lb, lc), ang(lb, lc, la), ang(lc, la, lb)});
}

PlanarMesh refine_convex_polygon(const std::vector<Vec2>& boundary, const std::vector<bool>& splittable,
                                 const std::function<double(const Vec2&)>& size, const MesherOptions& opt) {
    const int nb = static_cast<int>(boundary.size());
    if (nb < 3) throw Error(ErrorCode::invalid_argument, "polygon needs at least three points");
    if (static_cast<int>(splittable.size()) != nb) throw Error(ErrorCode::invalid_argument, "one split flag per boundary edge");
    std::set<std::pair<int, int>> fixed;
    for (int i = 0; i < nb; ++i)
        if (!splittable[i]) fixed.insert(std::minmax(i, (i + 1) % nb));

    // triangles at input corners sharper than 60 degrees cannot be improved and are only size-refined
    std::vector<char> sharp(nb, 0);
    for (int i = 0; i < nb; ++i) {
        const Vec2 e1 = boundary[(i + 1) % nb] - boundary[i], e0 = boundary[(i + nb - 1) % nb] - boundary[i];
        sharp[i] = std::atan2(cross(e1, e0), e1.dot(e0)) < kPi / 3;
    }

    Triangulation tr(boundary);
    std::vector<char> on_boundary(nb, 1);
    tr.ear_clip(nb);
    tr.make_delaunay();

    std::deque<int> queue;
    for (int t = 0; t < static_cast<int>(tr.tris().size()); ++t) queue.push_back(t);
    std::vector<int> created;
    auto split = [&](int owner, int edge) {
        const auto v = tr.tris()[owner].v;
        const int a = v[(edge + 1) % 3], b = v[(edge + 2) % 3];
        const Vec2 pa = tr.points()[a], pb = tr.points()[b];
        const Vec2 mid = 0.5 * (pa + pb);
        if (fixed.count(std::minmax(a, b)) || (pa - pb).norm() < opt.min_split * size(mid)) return false;
        created.clear();
        const auto res = tr.insert(mid, owner, edge, false, created);
        if (!res.inserted) return false;
        on_boundary.resize(tr.points().size(), 0);
        on_boundary.back() = 1;
        for (int k : created) queue.push_back(k);
        return true;
    };
    while (!queue.empty()) {
        const int t = queue.front();
        queue.pop_front();
        if (!tr.tris()[t].alive || tr.tris()[t].skip) continue;
        const auto v = tr.tris()[t].v;
        const Vec2 a = tr.points()[v[0]], b = tr.points()[v[1]], c = tr.points()[v[2]];
        const Vec2 cc = circumcenter(a, b, c);
        const double r = (cc - a).norm();
        const double shortest = std::min({(a - b).norm(), (b - c).norm(), (c - a).norm()});
        const double longest = std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
        const Vec2 centroid = (a + b + c) / 3.0;
        const bool too_big = longest > opt.size_slack * size(centroid);
        const bool at_sharp = std::any_of(v.begin(), v.end(), [&](int k) { return k < nb && sharp[k]; });
        const bool poor = !at_sharp && r / shortest > opt.max_ratio;
        if (!too_big && !poor) continue;
        if (static_cast<int>(tr.points().size()) >= opt.max_points)
            throw Error(ErrorCode::numerical, "meshing failed: point budget exhausted");
        const auto loc = tr.locate(cc, t);
        if (loc.exit_edge >= 0) {
            if (!split(loc.tri, loc.exit_edge)) tr.tris()[t].skip = true;
            else if (tr.tris()[t].alive) queue.push_back(t);
            continue;
        }
        created.clear();
        const auto res = tr.insert(cc, loc.tri, -1, true, created);
        if (res.inserted) {
            on_boundary.resize(tr.points().size(), 0);
            for (int k : created) queue.push_back(k);
        } else if (res.owner >= 0 && split(res.owner, res.edge)) {
            if (tr.tris()[t].alive) queue.push_back(t);
        } else {
            tr.tris()[t].skip = true;
        }
    }
    tr.compact();
    tr.make_delaunay();

    // Laplacian smoothing of interior points; a move is kept only if the local minimum angle improves.
    auto& pts = tr.points();
    const int np = static_cast<int>(pts.size());
    for (int sweep = 0; sweep < opt.smoothing_sweeps; ++sweep) {
        std::vector<std::vector<int>> star(np);
        for (int t = 0; t < static_cast<int>(tr.tris().size()); ++t)
            for (int k : tr.tris()[t].v) star[k].push_back(t);
        for (int p = nb; p < np; ++p) {
            if (on_boundary[p]) continue;
            Vec2 avg = Vec2::Zero();
            int cnt = 0;
            double before = kPi;
            for (int t : star[p]) {
                const auto& v = tr.tris()[t].v;
                before = std::min(before, triangle_min_angle(pts[v[0]], pts[v[1]], pts[v[2]]));
                for (int k : v)
                    if (k != p) {
                        avg += pts[k];
                        ++cnt;
                    }
            }
            if (cnt == 0) continue;
            avg /= cnt;
            const Vec2 old = pts[p];
            pts[p] = avg;
            double after = kPi;
            bool valid = true;
            for (int t : star[p]) {
                const auto& v = tr.tris()[t].v;
                if (orient(pts[v[0]], pts[v[1]], pts[v[2]]) <= 0) {
                    valid = false;
                    break;
                }
                after = std::min(after, triangle_min_angle(pts[v[0]], pts[v[1]], pts[v[2]]));
            }
            if (!valid || after < before) pts[p] = old;
        }
        tr.make_delaunay();
    }

    PlanarMesh out;
    out.points = tr.points();
    out.on_boundary.assign(on_boundary.begin(), on_boundary.end());
    for (const auto& t : tr.tris())
        if (t.alive) out.triangles.push_back(t.v);
    return out;
}

}  // namespace wwc
