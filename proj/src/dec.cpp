#include "coassoc/dec.hpp"

#include <Eigen/SparseLU>
#include <unordered_map>

namespace coassoc {

namespace {

constexpr int kLocalEdges[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
constexpr int kLocalFaces[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
constexpr int kOpposite[4] = {3, 2, 1, 0};

using Mat3 = Eigen::Matrix3d;
using M4 = Eigen::Matrix4d;
using M6 = Eigen::Matrix<double, 6, 6>;

int local_edge(int a, int b) {
    for (int i = 0; i < 6; ++i)
        if (kLocalEdges[i][0] == a && kLocalEdges[i][1] == b) return i;
    return -1;
}

Eigen::Matrix<double, 7, 4> embed_jacobian(const TriMesh3& m, const Eigen::Vector4d& q) {
    const double h = 1e-6;
    Eigen::Matrix<double, 7, 4> D;
    for (int a = 0; a < 4; ++a) {
        Eigen::Vector4d e = Eigen::Vector4d::Unit(a) * h;
        D.col(a) = (m.embed(q + e) - m.embed(q - e)) / (2 * h);
    }
    return D;
}

// Tangent map of the reference tetrahedron at barycentric point lam, through the smooth embedding.
Eigen::Matrix<double, 7, 3> curved_jacobian(const TriMesh3& m, const Tet& t, const Eigen::Vector4d& lam) {
    Eigen::Vector4d c = Eigen::Vector4d::Zero();
    for (int i = 0; i < 4; ++i) c += lam(i) * m.sphere[t[i]];
    const double n = c.norm();
    Eigen::Vector4d ch = c / n;
    Eigen::Matrix4d P = (Eigen::Matrix4d::Identity() - ch * ch.transpose()) / n;
    Eigen::Matrix<double, 4, 3> E;
    for (int i = 0; i < 3; ++i) E.col(i) = m.sphere[t[i + 1]] - m.sphere[t[0]];
    return embed_jacobian(m, ch) * P * E;
}

// Reference-coordinate metric and volume of one tetrahedron.
std::pair<Mat3, double> tet_metric(const TriMesh3& m, const Tet& t) {
    if (!m.curved()) {
        Eigen::Matrix<double, 7, 3> J;
        for (int i = 0; i < 3; ++i) J.col(i) = m.vertices[t[i + 1]] - m.vertices[t[0]];
        Mat3 G = J.transpose() * J;
        return {G, std::sqrt(std::max(0.0, G.determinant())) / 6};
    }
    // centroid metric rescaled to the volume from a positive 4-point rule
    auto J0 = curved_jacobian(m, t, Eigen::Vector4d::Constant(0.25));
    Mat3 G = J0.transpose() * J0;
    const double Vc = std::sqrt(std::max(0.0, G.determinant())) / 6;
    const double a = 0.5854101966249685, b = 0.1381966011250105;
    double Vq = 0;
    for (int k = 0; k < 4; ++k) {
        Eigen::Vector4d lam = Eigen::Vector4d::Constant(b);
        lam(k) = a;
        auto J = curved_jacobian(m, t, lam);
        Vq += 0.25 * std::sqrt(std::max(0.0, (J.transpose() * J).determinant())) / 6;
    }
    if (!(Vc > 0) || !(Vq > 0)) return {G, 0.0};
    return {G * std::pow(Vq / Vc, 2.0 / 3.0), Vq};
}

double pencil_max(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

struct Triplets {
    std::vector<Eigen::Triplet<double>> t;
    void add(int i, int j, double v) { t.emplace_back(i, j, v); }
    SpMat build(int r, int c) const {
        SpMat m(r, c);
        m.setFromTriplets(t.begin(), t.end());
        m.makeCompressed();
        return m;
    }
};

}  // namespace

const SpMat& DECOperators::d(int q) const {
    switch (q) {
        case 0: return d0;
        case 1: return d1;
        case 2: return d2;
        default: throw std::out_of_range("no coboundary of that degree");
    }
}

const SpMat& DECOperators::mass(int q) const {
    switch (q) {
        case 0: return M0;
        case 1: return M1;
        case 2: return M2;
        case 3: return M3;
        default: throw std::out_of_range("no mass matrix of that degree");
    }
}

int DECOperators::cells(int q) const {
    const int n[4] = {nV, nE, nF, nT};
    if (q < 0 || q > 3) throw std::out_of_range("cell degree");
    return n[q];
}

DECOperators build_dec(const TriMesh3& mesh) {
    TriMesh3 m = mesh;
    if (!is_consistently_oriented(m)) orient_consistently(m);
    DECOperators dec;
    dec.label = m.label;
    dec.curved_metric = m.curved();
    dec.nV = static_cast<int>(m.vertices.size());
    dec.nT = static_cast<int>(m.tets.size());
    dec.tets = m.tets;
    const long long nV = dec.nV;

    std::unordered_map<long long, int> edge_id, face_id;
    auto edge_of = [&](int a, int b) {
        auto [lo, hi] = std::minmax(a, b);
        auto [it, fresh] = edge_id.try_emplace(lo * nV + hi, static_cast<int>(dec.edges.size()));
        if (fresh) dec.edges.push_back({lo, hi});
        return it->second;
    };
    auto face_of = [&](std::array<int, 3> f) {
        std::sort(f.begin(), f.end());
        auto [it, fresh] = face_id.try_emplace((f[0] * nV + f[1]) * nV + f[2], static_cast<int>(dec.faces.size()));
        if (fresh) dec.faces.push_back(f);
        return it->second;
    };

    Triplets tm0, tm1, tm2, tk, td2;
    dec.tet_volume.resize(dec.nT);
    Eigen::Matrix<double, 4, 3> Dl;
    Dl << -1, -1, -1, 1, 0, 0, 0, 1, 0, 0, 0, 1;
    auto det3 = [&](int a, int b, int c) {
        Mat3 R;
        R << Dl.row(a), Dl.row(b), Dl.row(c);
        return R.determinant();
    };

    // local coboundaries in local orientation
    Eigen::Matrix<double, 4, 6> D1l = Eigen::Matrix<double, 4, 6>::Zero();
    for (int f = 0; f < 4; ++f) {
        int a = kLocalFaces[f][0], b = kLocalFaces[f][1], c = kLocalFaces[f][2];
        D1l(f, local_edge(b, c)) += 1;
        D1l(f, local_edge(a, c)) -= 1;
        D1l(f, local_edge(a, b)) += 1;
    }
    Eigen::Matrix<double, 1, 4> D2l;
    for (int f = 0; f < 4; ++f) D2l(f) = kOpposite[f] % 2 == 0 ? 1 : -1;

    for (int ti = 0; ti < dec.nT; ++ti) {
        const Tet& T = m.tets[ti];
        auto [G, Vt] = tet_metric(m, T);
        if (!(Vt >= 1e-14)) throw MeshQualityError("degenerate tetrahedron " + std::to_string(ti) + " (volume " + std::to_string(Vt) + ")");
        dec.tet_volume(ti) = Vt;
        M4 IP = Dl * G.inverse() * Dl.transpose();
        M4 Ml = Vt / 20 * (M4::Ones() + M4::Identity());

        int E[6], F[4];
        double se[6], sf[4];
        for (int i = 0; i < 6; ++i) {
            int a = T[kLocalEdges[i][0]], b = T[kLocalEdges[i][1]];
            E[i] = edge_of(a, b);
            se[i] = a < b ? 1 : -1;
        }
        for (int i = 0; i < 4; ++i) {
            Index idx{T[kLocalFaces[i][0]], T[kLocalFaces[i][1]], T[kLocalFaces[i][2]]};
            F[i] = face_of({idx[0], idx[1], idx[2]});
            sf[i] = sort_sign(idx);
            td2.add(ti, F[i], D2l(i) * sf[i]);
        }

        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) tm0.add(T[i], T[j], Ml(i, j));

        M6 M1l, Kl;
        for (int A = 0; A < 6; ++A)
            for (int B = 0; B < 6; ++B) {
                int i = kLocalEdges[A][0], j = kLocalEdges[A][1], k = kLocalEdges[B][0], l = kLocalEdges[B][1];
                M1l(A, B) = Ml(i, k) * IP(j, l) - Ml(i, l) * IP(j, k) - Ml(j, k) * IP(i, l) + Ml(j, l) * IP(i, k);
                Kl(A, B) = 2 * (det3(j, k, l) - det3(i, k, l)) / 24;
                tm1.add(E[A], E[B], se[A] * se[B] * M1l(A, B));
                tk.add(E[A], E[B], se[A] * se[B] * Kl(A, B));
            }

        // face Whitney form 2(l_i dl_j^dl_k - l_j dl_i^dl_k + l_k dl_i^dl_j)
        M4 M2l;
        for (int A = 0; A < 4; ++A)
            for (int B = 0; B < 4; ++B) {
                const int* fa = kLocalFaces[A];
                const int* fb = kLocalFaces[B];
                const int ta[3][3] = {{fa[0], fa[1], fa[2]}, {fa[1], fa[0], fa[2]}, {fa[2], fa[0], fa[1]}};
                const int tb[3][3] = {{fb[0], fb[1], fb[2]}, {fb[1], fb[0], fb[2]}, {fb[2], fb[0], fb[1]}};
                const double ca[3] = {2, -2, 2};
                double s = 0;
                for (int x = 0; x < 3; ++x)
                    for (int y = 0; y < 3; ++y) {
                        int p = ta[x][0], a = ta[x][1], b = ta[x][2];
                        int q = tb[y][0], c = tb[y][1], d = tb[y][2];
                        s += ca[x] * ca[y] * Ml(p, q) * (IP(a, c) * IP(b, d) - IP(a, d) * IP(b, c));
                    }
                M2l(A, B) = s;
                tm2.add(F[A], F[B], sf[A] * sf[B] * s);
            }

        // element bounds for the spectra of the stiffness pencils
        dec.lambda_max_bound[0] = std::max(dec.lambda_max_bound[0], pencil_max(Vt * IP, Ml));
        dec.lambda_max_bound[1] =
            std::max(dec.lambda_max_bound[1], pencil_max(D1l.transpose() * M2l * D1l, M1l));
        dec.lambda_max_bound[2] =
            std::max(dec.lambda_max_bound[2], pencil_max(D2l.transpose() * (1.0 / Vt) * D2l, M2l));
    }
    dec.nE = static_cast<int>(dec.edges.size());
    dec.nF = static_cast<int>(dec.faces.size());
    dec.volume = dec.tet_volume.sum();

    Triplets td0, td1, tm3;
    for (int e = 0; e < dec.nE; ++e) {
        td0.add(e, dec.edges[e][0], -1);
        td0.add(e, dec.edges[e][1], 1);
    }
    for (int f = 0; f < dec.nF; ++f) {
        auto [a, b, c] = dec.faces[f];
        td1.add(f, edge_id.at(b * nV + c), 1);
        td1.add(f, edge_id.at(a * nV + c), -1);
        td1.add(f, edge_id.at(a * nV + b), 1);
    }
    for (int t = 0; t < dec.nT; ++t) tm3.add(t, t, 1.0 / dec.tet_volume(t));

    dec.d0 = td0.build(dec.nE, dec.nV);
    dec.d1 = td1.build(dec.nF, dec.nE);
    dec.d2 = td2.build(dec.nT, dec.nF);
    dec.M0 = tm0.build(dec.nV, dec.nV);
    dec.M1 = tm1.build(dec.nE, dec.nE);
    dec.M2 = tm2.build(dec.nF, dec.nF);
    dec.M3 = tm3.build(dec.nT, dec.nT);
    dec.K = tk.build(dec.nE, dec.nE);
    return dec;
}

struct HodgeSolver::Impl {
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    int offset = 0;
};

HodgeSolver::HodgeSolver(const DECOperators& dec, int q, double sigma) : impl_(std::make_shared<Impl>()) {
    if (q < 0 || q > 3) throw std::out_of_range("HodgeSolver: degree must be 0..3");
    n_ = dec.cells(q);
    const int m = q > 0 ? dec.cells(q - 1) : 0;
    impl_->offset = m;
    Triplets t;
    SpMat A = q < 3 ? SpMat(dec.d(q).transpose() * dec.mass(q + 1) * dec.d(q)) : SpMat(n_, n_);
    SpMat S = A - sigma * dec.mass(q);
    for (int k = 0; k < S.outerSize(); ++k)
        for (SpMat::InnerIterator it(S, k); it; ++it) t.add(m + it.row(), m + it.col(), it.value());
    if (q > 0) {
        SpMat B = dec.mass(q) * dec.d(q - 1);
        const SpMat& Mq1 = dec.mass(q - 1);
        for (int k = 0; k < Mq1.outerSize(); ++k)
            for (SpMat::InnerIterator it(Mq1, k); it; ++it) t.add(it.row(), it.col(), -it.value());
        for (int k = 0; k < B.outerSize(); ++k)
            for (SpMat::InnerIterator it(B, k); it; ++it) {
                t.add(m + it.row(), it.col(), it.value());
                t.add(it.col(), m + it.row(), it.value());
            }
    }
    SpMat Kmat = t.build(m + n_, m + n_);
    impl_->lu.compute(Kmat);
    if (impl_->lu.info() != Eigen::Success) throw EigenSolverError("HodgeSolver: factorization failed");
}

Eigen::VectorXd HodgeSolver::solve(const Eigen::VectorXd& x) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(impl_->offset + n_);
    rhs.tail(n_) = x;
    Eigen::VectorXd y = impl_->lu.solve(rhs);
    return y.tail(n_);
}

Eigen::MatrixXd hodge_laplacian_dense(const DECOperators& dec, int q) {
    const int n = dec.cells(q);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    if (q < 3) H += Eigen::MatrixXd(dec.d(q).transpose() * dec.mass(q + 1) * dec.d(q));
    if (q > 0) {
        Eigen::MatrixXd B = Eigen::MatrixXd(dec.mass(q) * dec.d(q - 1));
        Eigen::LLT<Eigen::MatrixXd> llt{Eigen::MatrixXd(dec.mass(q - 1))};
        H += B * llt.solve(B.transpose());
    }
    return H;
}

SymEigs hodge_lowest(const DECOperators& dec, int q, int nev) {
    const int n = dec.cells(q);
    if (n <= 1500) {
        SymEigs all = eigs_dense(hodge_laplacian_dense(dec, q), Eigen::MatrixXd(dec.mass(q)));
        nev = std::min(nev, n);
        return {all.values.head(nev), all.vectors.leftCols(nev)};
    }
    const double sigma = -1e-2;
    HodgeSolver hs(dec, q, sigma);
    return eigs_shift_invert(n, [&](const Eigen::VectorXd& x) { return hs.solve(x); }, dec.mass(q), nev, sigma);
}

BettiResult betti(const DECOperators& dec) {
    BettiResult r;
    for (int q = 0; q <= 3; ++q) {
        double smax = 0;
        if (q < 3) smax = std::max(smax, dec.lambda_max_bound[q]);
        if (q > 0) smax = std::max(smax, dec.lambda_max_bound[q - 1]);
        const double tau = 1e-6 * smax;
        r.tau[q] = tau;
        const int n = dec.cells(q);
        int nev = std::min(8, n - 1);
        while (true) {
            SymEigs e = hodge_lowest(dec, q, nev);
            int zeros = 0;
            while (zeros < e.values.size() && e.values(zeros) < tau) ++zeros;
            if (zeros == e.values.size() && nev < n - 1) {
                nev = std::min(2 * nev, n - 1);
                continue;
            }
            if (zeros < e.values.size()) {
                r.first_nonzero[q] = e.values(zeros);
                if (e.values(zeros) < 10 * tau)
                    throw InconclusiveError("betti: no spectral gap in degree " + std::to_string(q) +
                                            " (eigenvalue " + std::to_string(e.values(zeros)) + " vs threshold " +
                                            std::to_string(tau) + "); refine the mesh");
            }
            r.b[q] = zeros;
            break;
        }
    }
    return r;
}

}  // namespace coassoc
