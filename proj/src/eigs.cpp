#include "coassoc/eigs.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

extern "C" {
void dsaupd_(int* ido, char* bmat, int* n, char* which, int* nev, double* tol, double* resid, int* ncv, double* v,
             int* ldv, int* iparam, int* ipntr, double* workd, double* workl, int* lworkl, int* info);
void dseupd_(int* rvec, char* howmny, int* select, double* d, double* z, int* ldz, double* sigma, char* bmat, int* n,
             char* which, int* nev, double* tol, double* resid, int* ncv, double* v, int* ldv, int* iparam, int* ipntr,
             double* workd, double* workl, int* lworkl, int* info);
}

namespace coassoc {

SymEigs eigs_shift_invert(int n, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& solve, const SpMat& B,
                          int nev, double sigma, double tol, int max_iter) {
    if (nev < 1 || nev >= n) throw std::invalid_argument("eigs_shift_invert: need 0 < nev < n");
    int ncv = std::min(n, std::max(2 * nev + 1, 20));
    int ldv = n, lworkl = ncv * (ncv + 8), ido = 0, info = 1;
    char bmat[] = "G", which[] = "LM";
    std::vector<double> resid(n), v(static_cast<size_t>(n) * ncv), workd(3 * static_cast<size_t>(n)), workl(lworkl);
    // fixed start vector keeps runs reproducible
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(-1, 1);
    for (auto& r : resid) r = U(rng);
    // one inverse step puts the start in the range of the operator (constrained problems)
    {
        Eigen::Map<Eigen::VectorXd> r0(resid.data(), n);
        Eigen::VectorXd s0 = solve(B * r0);
        r0 = s0 / s0.norm();
    }
    int iparam[11] = {0}, ipntr[11] = {0};
    iparam[0] = 1;
    iparam[2] = max_iter;
    iparam[6] = 3;

    while (true) {
        dsaupd_(&ido, bmat, &n, which, &nev, &tol, resid.data(), &ncv, v.data(), &ldv, iparam, ipntr, workd.data(),
                workl.data(), &lworkl, &info);
        if (ido == -1 || ido == 1) {
            Eigen::Map<Eigen::VectorXd> x(&workd[ipntr[0] - 1], n), y(&workd[ipntr[1] - 1], n);
            if (ido == -1) {
                y = solve(B * x);
            } else {
                Eigen::Map<Eigen::VectorXd> bx(&workd[ipntr[2] - 1], n);
                y = solve(bx);
            }
        } else if (ido == 2) {
            Eigen::Map<Eigen::VectorXd> x(&workd[ipntr[0] - 1], n), y(&workd[ipntr[1] - 1], n);
            y = B * x;
        } else {
            break;
        }
    }
    if (info < 0) throw EigenSolverError("dsaupd failed with info " + std::to_string(info));
    if (info == 1) throw EigenSolverError("dsaupd: maximum number of iterations reached");

    int rvec = 1;
    char howmny[] = "A";
    std::vector<int> select(ncv);
    std::vector<double> d(nev), z(static_cast<size_t>(n) * nev);
    int ldz = n;
    dseupd_(&rvec, howmny, select.data(), d.data(), z.data(), &ldz, &sigma, bmat, &n, which, &nev, &tol,
            resid.data(), &ncv, v.data(), &ldv, iparam, ipntr, workd.data(), workl.data(), &lworkl, &info);
    if (info != 0) throw EigenSolverError("dseupd failed with info " + std::to_string(info));
    const int nconv = iparam[4];
    if (nconv < nev) throw EigenSolverError("eigs_shift_invert: only " + std::to_string(nconv) + " eigenpairs converged");

    std::vector<int> order(nev);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
    SymEigs out;
    out.values.resize(nev);
    out.vectors.resize(n, nev);
    Eigen::Map<Eigen::MatrixXd> Z(z.data(), n, nev);
    for (int i = 0; i < nev; ++i) {
        out.values(i) = d[order[i]];
        out.vectors.col(i) = Z.col(order[i]);
    }
    return out;
}

SymEigs eigs_dense(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
    if (es.info() != Eigen::Success) throw EigenSolverError("dense generalized eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace coassoc
