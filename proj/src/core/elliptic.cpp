#include "elliptic.hpp"

#include <fmt/format.h>

namespace wwc {

namespace {

using Triplet = Eigen::Triplet<double>;

bool on_surface(VertexTag t) { return t == VertexTag::surface || t == VertexTag::corner; }

/// Inverse-transpose edge matrix of a triangle; rows of the result are the hat-function gradients.
Eigen::Matrix<double, 3, 2> hat_gradients(const Vec2& a, const Vec2& b, const Vec2& c) {
    Mat2 e;
    e.col(0) = b - a;
    e.col(1) = c - a;
    const Mat2 inv_t = e.inverse().transpose();
    Eigen::Matrix<double, 3, 2> g;
    g.row(1) = inv_t.col(0).transpose();
    g.row(2) = inv_t.col(1).transpose();
    g.row(0) = -g.row(1) - g.row(2);
    return g;
}

SparseMatrix assemble_stiffness(const std::vector<Vec2>& xy, const std::vector<std::array<int, 3>>& tri) {
    std::vector<Triplet> trip;
    trip.reserve(9 * tri.size());
    for (const auto& t : tri) {
        const Vec2 a = xy[t[0]], b = xy[t[1]], c = xy[t[2]];
        const double area = 0.5 * cross(b - a, c - a);
        const auto g = hat_gradients(a, b, c);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], area * g.row(i).dot(g.row(j)));
    }
    SparseMatrix k(static_cast<Eigen::Index>(xy.size()), static_cast<Eigen::Index>(xy.size()));
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
}

SparseMatrix assemble_mass(const std::vector<Vec2>& xy, const std::vector<std::array<int, 3>>& tri) {
    std::vector<Triplet> trip;
    trip.reserve(9 * tri.size());
    for (const auto& t : tri) {
        const double area = 0.5 * cross(xy[t[1]] - xy[t[0]], xy[t[2]] - xy[t[0]]);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trip.emplace_back(t[i], t[j], area * (i == j ? 2.0 : 1.0) / 12.0);
    }
    SparseMatrix m(static_cast<Eigen::Index>(xy.size()), static_cast<Eigen::Index>(xy.size()));
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

/// Restriction of a square matrix to the rows/columns with a non-negative index.
SparseMatrix restrict(const SparseMatrix& k, const std::vector<int>& index, int n) {
    std::vector<Triplet> trip;
    for (int col = 0; col < k.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(k, col); it; ++it) {
            const int i = index[it.row()], j = index[it.col()];
            if (i >= 0 && j >= 0) trip.emplace_back(i, j, it.value());
        }
    SparseMatrix r(n, n);
    r.setFromTriplets(trip.begin(), trip.end());
    return r;
}

template <class Solver>
std::shared_ptr<Solver> factorize(const SparseMatrix& a, const char* what) {
    auto s = std::make_shared<Solver>();
    s->compute(a);
    if (s->info() != Eigen::Success) throw SolverError(fmt::format("factorization of the {} failed", what));
    return s;
}

}  // namespace

ReferenceDomain::ReferenceDomain(const ReferenceSurface& ref, const Mesh& mesh) : ref_(&ref), mesh_(&mesh) {
    const int ns = static_cast<int>(mesh.surface.size());
    transfer_ = MatrixXd::Zero(ns, ref.size());
    // hats on the collocation nodes: extra surface vertices interpolate linearly between neighbours
    int j = 0;
    for (int k = 0; k < ns; ++k) {
        const int v = mesh.surface[k];
        if (v < mesh.n_surface) {
            transfer_(k, v) = 1.0;
            j = v;
            continue;
        }
        const double s0 = ref.grid.node(j), s1 = ref.grid.node(j + 1);
        const double t = (mesh.surface_param[k] - s0) / (s1 - s0);
        transfer_(k, j) = 1.0 - t;
        transfer_(k, j + 1) = t;
    }

    const int nv = mesh.n_vertices();
    interior_index_.assign(nv, -1);
    int ni = 0;
    for (int i = 0; i < nv; ++i)
        if (mesh.tag[i] == VertexTag::interior) interior_index_[i] = ni++;
    const SparseMatrix k = assemble_stiffness(mesh.xy, mesh.tri);
    k_ii_ = factorize<Eigen::SimplicialLDLT<SparseMatrix>>(restrict(k, interior_index_, ni), "reference stiffness");
    std::vector<Triplet> trip;
    for (int col = 0; col < k.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(k, col); it; ++it)
            if (interior_index_[it.row()] >= 0 && interior_index_[it.col()] < 0)
                trip.emplace_back(interior_index_[it.row()], it.col(), it.value());
    k_ib_.resize(ni, nv);
    k_ib_.setFromTriplets(trip.begin(), trip.end());
}

std::vector<Vec2> ReferenceDomain::extend_boundary_displacement(const std::vector<Vec2>& boundary_disp) const {
    const int nv = mesh_->n_vertices();
    std::vector<Vec2> out(boundary_disp);
    for (int c = 0; c < 2; ++c) {
        VectorXd ub(nv);
        for (int i = 0; i < nv; ++i) ub[i] = interior_index_[i] < 0 ? boundary_disp[i][c] : 0.0;
        const VectorXd ui = k_ii_->solve(-(k_ib_ * ub));
        for (int i = 0; i < nv; ++i)
            if (interior_index_[i] >= 0) out[i][c] = ui[interior_index_[i]];
    }
    return out;
}

std::vector<Vec2> ReferenceDomain::bottom_slide(double d_left, double d_right) const {
    const Mesh& mesh = *mesh_;
    const ReferenceSurface& ref = *ref_;
    const int m = ref.size() - 1;
    const Vec2 mu_l = row(ref.mu, 0), mu_r = row(ref.mu, m);
    std::vector<Vec2> disp(mesh.n_vertices(), Vec2::Zero());
    for (std::size_t k = 0; k < mesh.bottom.size(); ++k) {
        const double u = mesh.bottom_param[k], u_r = ref.bottom_length - u;
        Vec2 s = Vec2::Zero();
        if (u < ref.straight_left) s += d_left * (1.0 - u / ref.straight_left) * mu_l;
        if (u_r < ref.straight_right) s += d_right * (1.0 - u_r / ref.straight_right) * mu_r;
        disp[mesh.bottom[k]] = s;
    }
    return disp;
}

std::vector<Vec2> ReferenceDomain::vertex_displacement(const VectorXd& d) const {
    const Mesh& mesh = *mesh_;
    const int m = ref_->size() - 1;
    std::vector<Vec2> disp = bottom_slide(d[0], d[m]);
    PointList dmu(ref_->size(), 2);
    for (int j = 0; j <= m; ++j) dmu.row(j) = d[j] * ref_->mu.row(j);
    const MatrixXd surf = transfer_ * dmu;
    for (std::size_t k = 0; k < mesh.surface.size(); ++k) disp[mesh.surface[k]] = surf.row(static_cast<Eigen::Index>(k)).transpose();
    return extend_boundary_displacement(disp);
}

HarmonicMap::HarmonicMap(const ReferenceDomain& domain, const CurveFrame& frame) : domain_(&domain), frame_(frame) {
    const Mesh& mesh = domain.mesh();
    const ReferenceSurface& ref = domain.ref();
    const int nv = mesh.n_vertices(), m = ref.size() - 1;

    const std::vector<Vec2> disp = domain.vertex_displacement(frame.d);
    xy_.resize(nv);
    for (int i = 0; i < nv; ++i) xy_[i] = mesh.xy[i] + disp[i];
    // collocation vertices sit exactly on the moved curve
    for (int j = 0; j <= m; ++j) xy_[j] = row(frame.points, j);

    const int nt = mesh.n_triangles();
    jac_.resize(nt);
    coef_.resize(nt);
    det_.resize(nt);
    area_.resize(nt);
    volume_ = 0.0;
    for (int t = 0; t < nt; ++t) {
        const auto& v = mesh.tri[t];
        Mat2 e0, e1;
        e0 << mesh.xy[v[1]] - mesh.xy[v[0]], mesh.xy[v[2]] - mesh.xy[v[0]];
        e1 << xy_[v[1]] - xy_[v[0]], xy_[v[2]] - xy_[v[0]];
        jac_[t] = e1 * e0.inverse();
        det_[t] = jac_[t].determinant();
        if (!(det_[t] > 0.0))
            throw InadmissibleState(fmt::format("harmonic map folds triangle {} (det = {:.3e})", t, det_[t]));
        const Mat2 ji = jac_[t].inverse();
        coef_[t] = det_[t] * ji * ji.transpose();
        area_[t] = 0.5 * cross(e1.col(0), e1.col(1));
        volume_ += area_[t];
    }

    // integral of each collocation test function along the moved surface polygon
    VectorXd hat = VectorXd::Zero(static_cast<Eigen::Index>(mesh.surface.size()));
    for (std::size_t k = 0; k + 1 < mesh.surface.size(); ++k) {
        const double len = (xy_[mesh.surface[k + 1]] - xy_[mesh.surface[k]]).norm();
        hat[static_cast<Eigen::Index>(k)] += 0.5 * len;
        hat[static_cast<Eigen::Index>(k) + 1] += 0.5 * len;
    }
    weights_ = domain.transfer().transpose() * hat;
    if (!(weights_.minCoeff() > 0.0)) throw SolverError("non-positive surface weight on the moved mesh");
    k_ = assemble_stiffness(xy_, mesh.tri);
    mass_ = assemble_mass(xy_, mesh.tri);
    free_index_.assign(nv, -1);
    int nf = 0;
    for (int i = 0; i < nv; ++i)
        if (!on_surface(mesh.tag[i])) free_index_[i] = nf++;
    k_ff_ = factorize<Eigen::SimplicialLDLT<SparseMatrix>>(restrict(k_, free_index_, nf), "moved stiffness");
}

std::vector<Vec2> HarmonicMap::gradient(const VectorXd& u) const {
    const Mesh& mesh = domain_->mesh();
    std::vector<Vec2> g(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& v = mesh.tri[t];
        const auto h = hat_gradients(xy_[v[0]], xy_[v[1]], xy_[v[2]]);
        g[t] = (u[v[0]] * h.row(0) + u[v[1]] * h.row(1) + u[v[2]] * h.row(2)).transpose();
    }
    return g;
}

VectorXd HarmonicMap::solve_dirichlet(const VectorXd& surface_values, const VectorXd& load) const {
    const Mesh& mesh = domain_->mesh();
    const int nv = mesh.n_vertices();
    VectorXd u = VectorXd::Zero(nv);
    for (std::size_t k = 0; k < mesh.surface.size(); ++k) u[mesh.surface[k]] = surface_values[static_cast<Eigen::Index>(k)];
    const VectorXd r = load - k_ * u;
    VectorXd rf(k_ff_->rows());
    for (int i = 0; i < nv; ++i)
        if (free_index_[i] >= 0) rf[free_index_[i]] = r[i];
    const VectorXd uf = k_ff_->solve(rf);
    if (k_ff_->info() != Eigen::Success) throw SolverError("Dirichlet solve failed");
    for (int i = 0; i < nv; ++i)
        if (free_index_[i] >= 0) u[i] = uf[free_index_[i]];
    return u;
}

VectorXd HarmonicMap::solve_neumann(const VectorXd& load) const {
    const int nv = static_cast<int>(xy_.size());
    if (!neumann_) {
        // bordered system with a Lagrange multiplier enforcing zero mean
        const VectorXd c = mass_ * VectorXd::Ones(nv);
        std::vector<Triplet> trip;
        for (int col = 0; col < k_.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(k_, col); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
        for (int i = 0; i < nv; ++i) {
            trip.emplace_back(i, nv, c[i]);
            trip.emplace_back(nv, i, c[i]);
        }
        SparseMatrix a(nv + 1, nv + 1);
        a.setFromTriplets(trip.begin(), trip.end());
        neumann_ = factorize<Eigen::SparseLU<SparseMatrix>>(a, "Neumann system");
    }
    VectorXd rhs(nv + 1);
    rhs << load, 0.0;
    const VectorXd sol = neumann_->solve(rhs);
    if (neumann_->info() != Eigen::Success) throw SolverError("Neumann solve failed");
    return sol.head(nv);
}

VectorXd HarmonicMap::project(const VectorXd& per_triangle) const {
    const Mesh& mesh = domain_->mesh();
    if (!mass_solver_) mass_solver_ = factorize<Eigen::SimplicialLDLT<SparseMatrix>>(mass_, "mass matrix");
    VectorXd rhs = VectorXd::Zero(mesh.n_vertices());
    for (int t = 0; t < mesh.n_triangles(); ++t)
        for (int v : mesh.tri[t]) rhs[v] += area_[t] * per_triangle[t] / 3.0;
    return mass_solver_->solve(rhs);
}

VectorXd HarmonicMap::source_load(const Source& h) const {
    const Mesh& mesh = domain_->mesh();
    VectorXd b = VectorXd::Zero(mesh.n_vertices());
    if (h.nodal.size() > 0) b += mass_ * h.nodal;
    if (h.per_triangle.size() > 0)
        for (int t = 0; t < mesh.n_triangles(); ++t)
            for (int v : mesh.tri[t]) b[v] += area_[t] * h.per_triangle[t] / 3.0;
    return b;
}

VectorXd HarmonicMap::bottom_load(const BottomData& g) const {
    const Mesh& mesh = domain_->mesh();
    VectorXd b = VectorXd::Zero(mesh.n_vertices());
    if (g.empty()) return b;
    if (g.size() != mesh.bottom_edges.size()) throw Error(ErrorCode::invalid_argument, "one Neumann pair per bottom edge");
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto& e = mesh.bottom_edges[k];
        const double len = (xy_[e.b] - xy_[e.a]).norm();
        b[e.a] += len * (2.0 * g[k][0] + g[k][1]) / 6.0;
        b[e.b] += len * (g[k][0] + 2.0 * g[k][1]) / 6.0;
    }
    return b;
}

VectorXd HarmonicMap::surface_load(const VectorXd& g) const {
    const Mesh& mesh = domain_->mesh();
    const VectorXd gm = domain_->transfer() * g;
    VectorXd b = VectorXd::Zero(mesh.n_vertices());
    for (std::size_t k = 0; k + 1 < mesh.surface.size(); ++k) {
        const int a = mesh.surface[k], c = mesh.surface[k + 1];
        const double len = (xy_[c] - xy_[a]).norm();
        const auto i = static_cast<Eigen::Index>(k);
        b[a] += len * (2.0 * gm[i] + gm[i + 1]) / 6.0;
        b[c] += len * (gm[i] + 2.0 * gm[i + 1]) / 6.0;
    }
    return b;
}

VectorXd HarmonicMap::surface_flux(const VectorXd& residual) const {
    const Mesh& mesh = domain_->mesh();
    VectorXd rs(mesh.surface.size());
    for (std::size_t k = 0; k < mesh.surface.size(); ++k) rs[static_cast<Eigen::Index>(k)] = residual[mesh.surface[k]];
    return (domain_->transfer().transpose() * rs).cwiseQuotient(weights_);
}

VectorXd HarmonicMap::flux_shape_derivative(const VectorXd& u, const std::vector<Vec2>& velocity) const {
    const Mesh& mesh = domain_->mesh();
    const int nv = mesh.n_vertices();
    // dK u with dK_e = area G (div V - grad V - grad V^T) G^T
    VectorXd dku = VectorXd::Zero(nv);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
        const auto& v = mesh.tri[t];
        const auto g = hat_gradients(xy_[v[0]], xy_[v[1]], xy_[v[2]]);
        Mat2 dv = Mat2::Zero();
        for (int i = 0; i < 3; ++i) dv += velocity[v[i]] * g.row(i);
        const Mat2 s = dv.trace() * Mat2::Identity() - dv - dv.transpose();
        const Vec2 gu = g.transpose() * Eigen::Vector3d(u[v[0]], u[v[1]], u[v[2]]);
        const Eigen::Vector3d local = area_[t] * (g * (s * gu));
        for (int i = 0; i < 3; ++i) dku[v[i]] += local[i];
    }
    VectorXd rf(k_ff_->rows());
    for (int i = 0; i < nv; ++i)
        if (free_index_[i] >= 0) rf[free_index_[i]] = -dku[i];
    const VectorXd duf = k_ff_->solve(rf);
    VectorXd du = VectorXd::Zero(nv);
    for (int i = 0; i < nv; ++i)
        if (free_index_[i] >= 0) du[i] = duf[free_index_[i]];
    const VectorXd dr = dku + k_ * du;

    VectorXd dhat = VectorXd::Zero(static_cast<Eigen::Index>(mesh.surface.size()));
    for (std::size_t k = 0; k + 1 < mesh.surface.size(); ++k) {
        const int a = mesh.surface[k], c = mesh.surface[k + 1];
        const double dlen = (xy_[c] - xy_[a]).normalized().dot(velocity[c] - velocity[a]);
        dhat[static_cast<Eigen::Index>(k)] += 0.5 * dlen;
        dhat[static_cast<Eigen::Index>(k) + 1] += 0.5 * dlen;
    }
    const VectorXd dw = domain_->transfer().transpose() * dhat;
    const VectorXd flux = surface_flux(k_ * u);
    VectorXd rs(mesh.surface.size());
    for (std::size_t k = 0; k < mesh.surface.size(); ++k) rs[static_cast<Eigen::Index>(k)] = dr[mesh.surface[k]];
    return (domain_->transfer().transpose() * rs - dw.cwiseProduct(flux)).cwiseQuotient(weights_);
}

FieldOnDomain solve_mixed(const HarmonicMap& map, const Source& h, const VectorXd& f, const BottomData& g) {
    const Mesh& mesh = map.mesh();
    const VectorXd load = map.bottom_load(g) - map.source_load(h);
    FieldOnDomain out;
    out.values = map.solve_dirichlet(map.domain().transfer() * f, load);
    out.trace = out.values.head(mesh.n_surface);
    out.flux = map.surface_flux(map.stiffness() * out.values - load);
    return out;
}

FieldOnDomain harmonic_extension(const HarmonicMap& map, const VectorXd& f) { return solve_mixed(map, {}, f, {}); }

FieldOnDomain delta_inverse(const HarmonicMap& map, const Source& h, const BottomData& g) {
    return solve_mixed(map, h, VectorXd::Zero(map.mesh().n_surface), g);
}

BottomData gravity_bottom_data(const HarmonicMap& map, const Vec2& g_vec) {
    BottomData g;
    for (const auto& e : map.mesh().bottom_edges) {
        const Vec2 t = (map.xy()[e.b] - map.xy()[e.a]).normalized();
        const double value = (-perp(t)).dot(g_vec);
        g.push_back({value, value});
    }
    return g;
}

FieldOnDomain solve_pvv(const HarmonicMap& map, const PointList& v, const Vec2& g_vec) {
    const auto gx = map.gradient(v.col(0));
    const auto gy = map.gradient(v.col(1));
    Source h;
    h.per_triangle.resize(map.mesh().n_triangles());
    for (int t = 0; t < map.mesh().n_triangles(); ++t) {
        // rows of the velocity gradient are the gradients of the components
        const double tr2 = gx[t].x() * gx[t].x() + 2.0 * gx[t].y() * gy[t].x() + gy[t].y() * gy[t].y();
        h.per_triangle[t] = -tr2;
    }
    return delta_inverse(map, h, gravity_bottom_data(map, g_vec));
}

PhiSolution solve_phi(const HarmonicMap& map, const VectorXd& w) {
    const CurveFrame& frame = map.frame();
    const ReferenceSurface& ref = map.domain().ref();
    const int n = ref.size();
    PhiSolution out;
    out.neumann.resize(n);
    for (int j = 0; j < n; ++j) out.neumann[j] = w[j] * dot_row(ref.mu, frame.normal, j);

    const VectorXd b = map.surface_load(out.neumann);
    const VectorXd c = map.mass() * VectorXd::Ones(b.size());
    out.xi = b.sum();
    out.gamma = 1.0 / map.volume();
    const VectorXd load = b - (out.xi * out.gamma) * c;
    const VectorXd phi = map.solve_neumann(load);

    const VectorXd kphi = map.stiffness() * phi;
    const double scale = std::max(b.cwiseAbs().sum(), 1e-300);
    out.flux_defect = std::max(std::abs(kphi.sum()), (kphi - load).cwiseAbs().sum()) / scale;
    if (b.cwiseAbs().sum() == 0.0) out.flux_defect = 0.0;

    out.phi.values = phi;
    out.phi.trace = phi.head(n);
    out.phi.flux = out.neumann;
    const auto grad = map.gradient(phi);
    VectorXd gx(grad.size()), gy(grad.size());
    for (std::size_t t = 0; t < grad.size(); ++t) {
        gx[static_cast<Eigen::Index>(t)] = grad[t].x();
        gy[static_cast<Eigen::Index>(t)] = grad[t].y();
    }
    out.v.resize(phi.size(), 2);
    out.v.col(0) = map.project(gx);
    out.v.col(1) = map.project(gy);
    return out;
}

std::unique_ptr<Discretization> make_discretization(const GeometryConfig& geometry, int m, double h, double grading) {
    auto out = std::make_unique<Discretization>();
    out->ref = build_reference(geometry, m);
    out->mesh = triangulate_reference(out->ref, h, grading);
    out->domain = std::make_unique<ReferenceDomain>(out->ref, out->mesh);
    return out;
}

}  // namespace wwc
