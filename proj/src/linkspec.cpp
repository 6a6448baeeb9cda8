#include "coassoc/linkspec.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <sstream>

namespace coassoc {

namespace {

constexpr int kDenseLimit = 1500;

// Lowest eigenpairs of Delta_q until the spectrum passes `limit`.
SymEigs lowest_until(const DECOperators& dec, int q, double limit, double tol) {
    const int n = dec.cells(q);
    if (n <= kDenseLimit) {
        SymEigs all = eigs_dense(hodge_laplacian_dense(dec, q), Eigen::MatrixXd(dec.mass(q)));
        int k = 0;
        while (k < n && all.values(k) <= limit) ++k;
        k = std::min(n, k + 1);
        return {all.values.head(k), all.vectors.leftCols(k)};
    }
    const double sigma = -1e-2;
    HodgeSolver hs(dec, q, sigma);
    int nev = std::min(32, n - 1);
    while (true) {
        SymEigs e =
            eigs_shift_invert(n, [&](const Eigen::VectorXd& x) { return hs.solve(x); }, dec.mass(q), nev, sigma, tol);
        if (e.values(e.values.size() - 1) > limit || nev == n - 1) return e;
        nev = std::min(2 * nev, n - 1);
    }
}

// Applies Delta_0 = d0^T M1 d0.
class LaplaceApply {
public:
    explicit LaplaceApply(const DECOperators& dec) : A_(dec.d0.transpose() * dec.M1 * dec.d0) {}
    Eigen::VectorXd operator()(const Eigen::VectorXd& u) const { return A_ * u; }

private:
    SpMat A_;
};

// Scaled by max(|lambda|, 1) |Mu| so that null vectors (lambda = 0) are measured in spectral units.
double relative_residual(const Eigen::VectorXd& Au, const Eigen::VectorXd& Mu, double lambda) {
    double scale = std::max(std::abs(lambda), 1.0) * Mu.norm();
    return scale > 0 ? (Au - lambda * Mu).norm() / scale : 0.0;
}

Eigen::VectorXd m_normalized(const SpMat& M, Eigen::VectorXd v) {
    double n = std::sqrt(v.dot(M * v));
    return n > 0 ? Eigen::VectorXd(v / n) : v;
}

// Eigenvector of [[-2, -sqrt l], [-sqrt l, 0]] for eigenvalue e.
Eigen::Vector2d gradient_block_vector(double lambda, double e) {
    Eigen::Vector2d x(-e / std::sqrt(lambda), 1.0);
    return x.normalized();
}

// Applies the mixed Hodge Laplacian on 1-cochains.
class Hodge1Apply {
public:
    explicit Hodge1Apply(const DECOperators& dec)
        : A_(dec.d1.transpose() * dec.M2 * dec.d1), B_(dec.M1 * dec.d0) {
        m0_.compute(dec.M0);
    }
    Eigen::VectorXd operator()(const Eigen::VectorXd& u) const {
        return A_ * u + B_ * m0_.solve(Eigen::VectorXd(B_.transpose() * u));
    }
    const SpMat& curl_energy() const { return A_; }

private:
    SpMat A_, B_;
    Eigen::SimplicialLDLT<SpMat> m0_;
};

}  // namespace

LinkSpectrum link_spectrum(const DECOperators& dec, double mu_lo, double mu_hi, const WallOptions& opt) {
    if (!(mu_lo < mu_hi)) throw std::invalid_argument("link_spectrum: empty range");
    LinkSpectrum s;
    s.mu_lo = mu_lo;
    s.mu_hi = mu_hi;
    auto f = [](double e) { return e * (e + 2); };
    s.lambda_max = std::max({0.0, f(mu_lo), f(mu_hi)}) * 1.2 + 0.5;
    s.kappa_max = std::max(std::pow(mu_lo + 2, 2), std::pow(mu_hi + 2, 2));

    // functions
    const double tau0 = 1e-6 * dec.lambda_max_bound[0];
    SymEigs L = lowest_until(dec, 0, s.lambda_max, opt.solver_tol);
    LaplaceApply A0(dec);
    std::vector<int> keep;
    for (int i = 0; i < L.values.size(); ++i) {
        if (L.values(i) < tau0) ++s.b0;
        else if (L.values(i) <= s.lambda_max) keep.push_back(i);
    }
    s.laplace.resize(keep.size());
    s.laplace_vecs.resize(dec.nV, keep.size());
    s.laplace_residual.resize(keep.size());
    for (size_t k = 0; k < keep.size(); ++k) {
        s.laplace(k) = L.values(keep[k]);
        s.laplace_vecs.col(k) = L.vectors.col(keep[k]);
        Eigen::VectorXd v = s.laplace_vecs.col(k);
        s.laplace_residual(k) = relative_residual(A0(v), dec.M0 * v, s.laplace(k));
    }

    // 1-forms. Delta_1 fixes |c| = sqrt(kappa) on coexact forms; the sign comes from
    // the Ritz values of K inside each kappa cluster (K alone is not spectrally reliable).
    const double tau1 = 1e-6 * std::max(dec.lambda_max_bound[0], dec.lambda_max_bound[1]);
    s.curl_zero_tol = std::sqrt(tau1);
    SymEigs E = lowest_until(dec, 1, s.kappa_max * 1.2 + 0.5, opt.solver_tol);
    Hodge1Apply H1(dec);
    std::vector<double> c_val, c_res;
    std::vector<Eigen::VectorXd> c_vec;
    std::vector<double> res(E.values.size());
    for (int i = 0; i < E.values.size(); ++i) {
        Eigen::VectorXd u = E.vectors.col(i);
        res[i] = relative_residual(H1(u), dec.M1 * u, E.values(i));
    }
    s.b1 = 0;
    int i = 0;
    while (i < E.values.size() && E.values(i) < tau1) {
        ++s.b1;
        c_val.push_back(0.0);
        c_vec.push_back(E.vectors.col(i));
        c_res.push_back(res[i]);
        ++i;
    }
    while (i < E.values.size()) {
        int j = i + 1;
        while (j < E.values.size() && E.values(j) - E.values(j - 1) <= opt.kappa_cluster * E.values(j - 1)) ++j;
        const int k = j - i;
        Eigen::MatrixXd U = E.vectors.middleCols(i, k);
        double worst = *std::max_element(res.begin() + i, res.begin() + j);
        // drop the exact part (no curl energy)
        Eigen::MatrixXd Ce = U.transpose() * (H1.curl_energy() * U);
        Eigen::MatrixXd Hk = U.transpose() * (dec.M1 * U) * E.values.segment(i, k).asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ce(0.5 * (Ce + Ce.transpose()));
        std::vector<int> co;
        for (int m = 0; m < k; ++m)
            if (ce.eigenvalues()(m) > 0.5 * E.values(i)) co.push_back(m);
        if (!co.empty()) {
            Eigen::MatrixXd Q(k, co.size());
            for (size_t m = 0; m < co.size(); ++m) Q.col(m) = ce.eigenvectors().col(co[m]);
            Eigen::MatrixXd V = U * Q;
            Eigen::MatrixXd R = V.transpose() * (dec.K * V);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> re(0.5 * (R + R.transpose()));
            Eigen::MatrixXd Hq = Q.transpose() * (0.5 * (Hk + Hk.transpose())) * Q;
            for (int m = 0; m < re.eigenvalues().size(); ++m) {
                Eigen::VectorXd y = re.eigenvectors().col(m);
                double kappa = y.dot(Hq * y);
                c_val.push_back(std::copysign(std::sqrt(kappa), re.eigenvalues()(m)));
                c_vec.push_back(V * y);
                c_res.push_back(worst);
            }
        }
        i = j;
    }
    // keep the window
    std::vector<int> order;
    for (int m = 0; m < static_cast<int>(c_val.size()); ++m)
        if (c_val[m] >= mu_lo + 2 && c_val[m] <= mu_hi + 2) order.push_back(m);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return c_val[x] < c_val[y]; });
    s.curl.resize(order.size());
    s.curl_vecs.resize(dec.nE, order.size());
    s.curl_residual.resize(order.size());
    for (size_t m = 0; m < order.size(); ++m) {
        s.curl(m) = c_val[order[m]];
        s.curl_vecs.col(m) = c_vec[order[m]];
        s.curl_residual(m) = c_res[order[m]];
    }
    return s;

}

std::vector<DiscreteWall> discrete_walls(const LinkSpectrum& s) {
    std::vector<DiscreteWall> out;
    auto push = [&](double mu, const char* kind, int idx) {
        if (mu >= s.mu_lo && mu <= s.mu_hi) out.push_back({mu, kind, idx});
    };
    for (int i = 0; i < s.b0; ++i) push(0.0, "constant", -1);
    for (int i = 0; i < s.curl.size(); ++i)
        push(s.curl(i) - 2, std::abs(s.curl(i)) < s.curl_zero_tol ? "harmonic" : "curl", i);
    for (int i = 0; i < s.laplace.size(); ++i) {
        double r = std::sqrt(1 + s.laplace(i));
        push(-1 + r, "laplace+", i);
        push(-1 - r, "laplace-", i);
    }
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.mu < b.mu; });
    return out;
}

WallResidual wall_residual(const LinkSpectrum& s, double mu, const WallOptions& opt) {
    if (mu < s.mu_lo || mu > s.mu_hi) throw std::invalid_argument("wall_residual: mu outside the computed range");
    // blocks of the reduced operator minus mu
    std::vector<double> sv;
    for (int i = 0; i < s.b0; ++i) sv.push_back(std::abs(mu));
    for (int i = 0; i < s.curl.size(); ++i) sv.push_back(std::abs(s.curl(i) - 2 - mu));
    for (int i = 0; i < s.laplace.size(); ++i) {
        double r = std::sqrt(s.laplace(i));
        Eigen::Matrix2d B;
        B << -2 - mu, -r, -r, -mu;
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(B);
        sv.push_back(svd.singularValues()(0));
        sv.push_back(svd.singularValues()(1));
    }
    // anything not computed lies beyond the edges of the range
    double edge = std::min(mu - s.mu_lo, s.mu_hi - mu);
    WallResidual r{edge, 0};
    for (double v : sv) {
        r.sigma_min = std::min(r.sigma_min, v);
        if (v < opt.cluster_window) ++r.nullspace_dim;
    }
    return r;
}

WallResidual wall_residual(const DECOperators& dec, double mu, const WallOptions& opt) {
    return wall_residual(link_spectrum(dec, mu - opt.margin, mu + opt.margin, opt), mu, opt);
}

double laplace_residual(const DECOperators& dec, const Eigen::VectorXd& f, double lambda) {
    return relative_residual(LaplaceApply(dec)(f), dec.M0 * f, lambda);
}

namespace {

WallPair make_pair(const DECOperators& dec, const LinkSpectrum& s, const DiscreteWall& w) {
    WallPair p;
    p.mu = w.mu;
    p.kind = w.kind;
    p.alpha = Eigen::VectorXd::Zero(dec.nF);
    p.beta = Eigen::VectorXd::Zero(dec.nT);
    p.beta_density = Eigen::VectorXd::Zero(dec.nV);
    p.residual = 0;
    if (w.kind == "curl") {
        double c = s.curl(w.index);
        p.alpha = dec.d1 * s.curl_vecs.col(w.index) / c;
        p.residual = s.curl_residual(w.index);
    } else if (w.kind == "constant") {
        p.beta = m_normalized(dec.M3, dec.tet_volume);
        p.beta_density = Eigen::VectorXd::Ones(dec.nV);
    } else if (w.kind == "harmonic") {
        throw std::logic_error("harmonic wall bases are built in find_walls");
    } else {
        double lambda = s.laplace(w.index);
        const Eigen::VectorXd f = s.laplace_vecs.col(w.index);
        // beta ~ f vol, alpha ~ d*beta, combined by the 2x2 block eigenvector
        Eigen::VectorXd beta(dec.nT);
        for (int t = 0; t < dec.nT; ++t) {
            const Tet& T = dec.tets[t];
            beta(t) = dec.tet_volume(t) * 0.25 * (f(T[0]) + f(T[1]) + f(T[2]) + f(T[3]));
        }
        beta = m_normalized(dec.M3, beta);
        Eigen::SimplicialLDLT<SpMat> m2(dec.M2);
        Eigen::VectorXd alpha = m_normalized(dec.M2, m2.solve(Eigen::VectorXd(dec.d2.transpose() * (dec.M3 * beta))));
        Eigen::Vector2d x = gradient_block_vector(lambda, w.mu);
        p.alpha = x(0) * alpha;
        p.beta = x(1) * beta;
        p.beta_density = x(1) * f;
        p.residual = s.laplace_residual(w.index);
    }
    return p;
}

}  // namespace

WallScan find_walls(const DECOperators& dec, double a, double b, const WallOptions& opt) {
    if (!(a < b)) throw std::invalid_argument("find_walls: need a < b");
    WallScan scan;
    scan.spectrum = link_spectrum(dec, a - opt.margin, b + opt.margin, opt);
    const LinkSpectrum& s = scan.spectrum;
    auto all = discrete_walls(s);

    // clusters of discrete eigenvalues
    std::vector<std::vector<int>> clusters;
    for (int i = 0; i < static_cast<int>(all.size()); ++i) {
        if (i == 0 || all[i].mu - all[i - 1].mu > opt.cluster_window) clusters.emplace_back();
        clusters.back().push_back(i);
    }
    std::vector<int> cluster_of(all.size());
    for (int c = 0; c < static_cast<int>(clusters.size()); ++c)
        for (int i : clusters[c]) cluster_of[i] = c;

    // scan and polish
    auto sigma = [&](double mu) { return wall_residual(s, mu, opt).sigma_min; };
    const int n = std::max(2, static_cast<int>(std::ceil((b - a) / opt.scan_resolution)));
    const double h = (b - a) / n;
    std::vector<double> grid(n + 1), val(n + 1);
    for (int i = 0; i <= n; ++i) {
        grid[i] = a + i * h;
        val[i] = sigma(grid[i]);
    }
    std::vector<int> hit;
    for (int i = 0; i <= n; ++i) {
        bool left = i == 0 || val[i] <= val[i - 1];
        bool right = i == n || val[i] <= val[i + 1];
        if (!(left && right) || val[i] >= h) continue;
        double lo = grid[std::max(0, i - 1)], hi = grid[std::min(n, i + 1)];
        const int bits = static_cast<int>(std::ceil(-std::log2(opt.polish_tol))) + 1;
        auto [mu_star, smin] = boost::math::tools::brent_find_minima(sigma, lo, hi, bits);
        (void)smin;
        // nearest discrete eigenvalue
        int best = -1;
        for (int j = 0; j < static_cast<int>(all.size()); ++j)
            if (best < 0 || std::abs(all[j].mu - mu_star) < std::abs(all[best].mu - mu_star)) best = j;
        if (best >= 0 && std::abs(all[best].mu - mu_star) <= std::max(h, 2 * opt.polish_tol)) hit.push_back(cluster_of[best]);
    }
    std::sort(hit.begin(), hit.end());
    std::vector<int> minima(clusters.size(), 0);
    for (int c : hit) ++minima[c];
    hit.erase(std::unique(hit.begin(), hit.end()), hit.end());

    // harmonic 2-forms for the mu = -2 wall
    Eigen::MatrixXd harmonic2;
    if (s.b1 > 0) {
        SymEigs h2 = hodge_lowest(dec, 2, s.b1);
        harmonic2 = h2.vectors;
    }

    for (int c : hit) {
        WallPoint w;
        double sum = 0;
        for (int i : clusters[c]) sum += all[i].mu;
        w.mu = sum / clusters[c].size();
        if (!(w.mu > a && w.mu < b)) continue;
        w.multiplicity = static_cast<int>(clusters[c].size());
        w.spread = 0;
        w.residual = 0;
        int harmonic_seen = 0;
        for (int i : clusters[c]) {
            w.spread = std::max(w.spread, std::abs(all[i].mu - w.mu));
            WallPair p;
            if (all[i].kind == "harmonic") {
                p.mu = -2;
                p.kind = "harmonic";
                p.alpha = harmonic2.col(harmonic_seen++);
                p.beta = Eigen::VectorXd::Zero(dec.nT);
                p.beta_density = Eigen::VectorXd::Zero(dec.nV);
                p.residual = 0;
            } else {
                p = make_pair(dec, s, all[i]);
            }
            w.residual = std::max(w.residual, p.residual);
            w.basis.push_back(std::move(p));
        }
        double lo = all[clusters[c].front()].mu, hi = all[clusters[c].back()].mu;
        w.gap = std::min(clusters[c].front() > 0 ? lo - all[clusters[c].front() - 1].mu : s.mu_hi - s.mu_lo,
                         clusters[c].back() + 1 < static_cast<int>(all.size()) ? all[clusters[c].back() + 1].mu - hi
                                                                               : s.mu_hi - s.mu_lo);
        w.gap = std::min({w.gap, lo - s.mu_lo, s.mu_hi - hi});
        w.inconclusive = w.gap <= 10 * w.spread;
        if (minima[c] > 1) {
            std::ostringstream os;
            os << "wall near mu = " << w.mu << " merges " << w.multiplicity << " discrete eigenvalues spread over "
               << 2 * w.spread << "; refine the mesh to separate or confirm them";
            scan.warnings.push_back(os.str());
        }
        if (w.inconclusive) {
            std::ostringstream os;
            os << "wall near mu = " << w.mu << " is inconclusive: gap " << w.gap << " vs spread " << w.spread;
            scan.warnings.push_back(os.str());
        }
        scan.walls.push_back(std::move(w));
    }
    std::sort(scan.walls.begin(), scan.walls.end(), [](auto& x, auto& y) { return x.mu < y.mu; });
    return scan;
}

ZSpace z_space(const DECOperators& dec, const WallOptions& opt) {
    LinkSpectrum s = link_spectrum(dec, -opt.margin, opt.margin, opt);
    std::vector<int> idx(s.curl.size());
    for (int i = 0; i < s.curl.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int x, int y) { return s.curl(x) < s.curl(y); });
    // cluster of curl values around 2
    int seed = -1;
    for (int k = 0; k < static_cast<int>(idx.size()); ++k)
        if (std::abs(s.curl(idx[k]) - 2) <= opt.cluster_window &&
            (seed < 0 || std::abs(s.curl(idx[k]) - 2) < std::abs(s.curl(idx[seed]) - 2)))
            seed = k;
    ZSpace z{0, {}, {}, 0, 0, false};
    if (seed < 0) {
        z.gap = opt.cluster_window;
        return z;
    }
    int lo = seed, hi = seed;
    while (lo > 0 && s.curl(idx[lo]) - s.curl(idx[lo - 1]) <= opt.cluster_window) --lo;
    while (hi + 1 < static_cast<int>(idx.size()) && s.curl(idx[hi + 1]) - s.curl(idx[hi]) <= opt.cluster_window) ++hi;
    double spread = 0;
    for (int k = lo; k <= hi; ++k) {
        int i = idx[k];
        double c = s.curl(i);
        Eigen::VectorXd u = s.curl_vecs.col(i);
        Eigen::VectorXd alpha = dec.d1 * u / c;
        // d*alpha is represented by d u; apply d to both sides of d*alpha = 2 alpha
        double r = (dec.d2 * (dec.d1 * u) - 2 * (dec.d2 * alpha)).norm() / std::max(1.0, alpha.norm());
        z.residual = std::max(z.residual, r);
        z.basis.push_back(alpha);
        z.eigenvalues.push_back(c);
        spread = std::max(spread, std::abs(c - 2));
    }
    z.dim = hi - lo + 1;
    double below = lo > 0 ? s.curl(idx[lo]) - s.curl(idx[lo - 1]) : std::sqrt(s.kappa_max);
    double above = hi + 1 < static_cast<int>(idx.size()) ? s.curl(idx[hi + 1]) - s.curl(idx[hi]) : std::sqrt(s.kappa_max);
    z.gap = std::min(below, above);
    z.inconclusive = z.gap <= 10 * spread;
    return z;
}

}  // namespace coassoc
