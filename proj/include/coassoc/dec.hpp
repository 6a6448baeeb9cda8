#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "coassoc/eigs.hpp"
#include "coassoc/mesh.hpp"

namespace coassoc {

struct MeshQualityError : MeshError {
    using MeshError::MeshError;
};

struct InconclusiveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Cochain complex C^0 -> C^1 -> C^2 -> C^3 with Whitney-form Galerkin masses.
// Edges and faces are oriented by increasing vertex index.
struct DECOperators {
    int nV = 0, nE = 0, nF = 0, nT = 0;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 3>> faces;
    std::vector<Tet> tets;  // after orientation
    SpMat d0, d1, d2;
    SpMat M0, M1, M2, M3;
    // K(e, e') = integral of w_e ^ d w_e' (metric free); *d on 1-forms is M1^{-1} K.
    SpMat K;
    Eigen::VectorXd tet_volume;
    double volume = 0;
    // Upper bounds on the spectrum of d_q^T M_{q+1} d_q relative to M_q, from element matrices.
    std::array<double, 3> lambda_max_bound{};
    bool curved_metric = false;
    std::string label;

    const SpMat& d(int q) const;
    const SpMat& mass(int q) const;
    int cells(int q) const;
};

DECOperators build_dec(const TriMesh3& mesh);

// Solver for (Delta_q - sigma M_q) u = x, Delta_q the mixed Hodge Laplacian on q-cochains.
class HodgeSolver {
public:
    HodgeSolver(const DECOperators& dec, int q, double sigma);
    Eigen::VectorXd solve(const Eigen::VectorXd& x) const;
    int size() const { return n_; }

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
    int n_;
};

// Dense Hodge Laplacian (for small meshes and tests).
Eigen::MatrixXd hodge_laplacian_dense(const DECOperators& dec, int q);

// Lowest nev eigenpairs of Delta_q u = lambda M_q u.
SymEigs hodge_lowest(const DECOperators& dec, int q, int nev);

struct BettiResult {
    std::array<int, 4> b{};
    std::array<double, 4> tau{};             // zero threshold, 1e-6 * sigma_max
    std::array<double, 4> first_nonzero{};   // smallest eigenvalue above tau
};
// Dimensions of the discrete harmonic spaces.
BettiResult betti(const DECOperators& dec);

}  // namespace coassoc
