#pragma once

#include <string>
#include <vector>

#include "coassoc/dec.hpp"

namespace coassoc {

// The wall system d a = mu b, d*a + d*b = (mu + 2) a for a 2-form a and 3-form b
// splits along the Hodge decomposition of the link:
//   coexact 1-forms u with *du = c u      -> mu = c - 2            (b = 0, a = du / c)
//   Laplace eigenfunctions with value l   -> mu = -1 +- sqrt(1 + l) (2x2 block)
//   constants                             -> mu = 0, harmonic 1-forms -> mu = -2.
// The discrete operator is assembled blockwise from the discrete Hodge spectra below.
struct LinkSpectrum {
    int b0 = 0;
    int b1 = 0;
    Eigen::VectorXd laplace;         // nonzero eigenvalues of Delta_0, ascending
    Eigen::MatrixXd laplace_vecs;    // M0-orthonormal
    Eigen::VectorXd laplace_residual;
    Eigen::VectorXd curl;            // eigenvalues of *d on coclosed 1-forms in the window (0 = harmonic)
    Eigen::MatrixXd curl_vecs;       // M1-orthonormal 1-cochains
    Eigen::VectorXd curl_residual;
    double curl_zero_tol = 0;        // |c| below this is a harmonic form
    double lambda_max = 0;           // Laplace spectrum complete up to here
    double kappa_max = 0;            // largest c^2 in the window
    double mu_lo = 0, mu_hi = 0;     // walls in this range are all present
};

struct WallOptions {
    double scan_resolution = 1e-2;
    double polish_tol = 1e-8;
    // Discrete eigenvalues closer than this are one wall; it absorbs the
    // discretization splitting of a continuous multiplicity.
    double cluster_window = 0.15;
    double margin = 0.5;
    // Delta_1 eigenvalues within this relative distance share one sign split.
    double kappa_cluster = 0.03;
    double solver_tol = 1e-10;  // eigensolver tolerance; pair residuals are checked against it
};

// Discrete spectrum relevant to walls mu in [mu_lo, mu_hi].
LinkSpectrum link_spectrum(const DECOperators& dec, double mu_lo, double mu_hi, const WallOptions& opt = {});

struct DiscreteWall {
    double mu;
    std::string kind;  // "curl", "laplace+", "laplace-", "constant", "harmonic"
    int index;         // column in the spectrum, -1 for constants and harmonic forms
};
std::vector<DiscreteWall> discrete_walls(const LinkSpectrum& s);

struct WallResidual {
    double sigma_min;
    int nullspace_dim;  // singular values below the cluster window
};
WallResidual wall_residual(const LinkSpectrum& s, double mu, const WallOptions& opt = {});
WallResidual wall_residual(const DECOperators& dec, double mu, const WallOptions& opt = {});

struct WallPair {
    Eigen::VectorXd alpha;  // 2-cochain
    Eigen::VectorXd beta;   // 3-cochain
    Eigen::VectorXd beta_density;  // 0-cochain f with beta ~ f vol (zero when beta = 0)
    double mu;              // discrete eigenvalue of this member
    std::string kind;
    double residual;
};

struct WallPoint {
    double mu;         // mean of the member eigenvalues
    int multiplicity;  // d(mu)
    std::vector<WallPair> basis;
    double residual;   // worst eigen-equation residual of the members
    double spread;     // largest distance of a member from mu
    double gap;        // distance to the nearest eigenvalue outside the cluster
    bool inconclusive; // gap not clearly larger than the window
};

struct WallScan {
    std::vector<WallPoint> walls;
    std::vector<std::string> warnings;
    LinkSpectrum spectrum;
};

// Walls in the open interval (a, b): grid scan of sigma_min, Brent polish, clustering.
WallScan find_walls(const DECOperators& dec, double a, double b, const WallOptions& opt = {});

struct ZSpace {
    int dim;
    std::vector<Eigen::VectorXd> basis;  // 2-cochains with d*a = 2a
    std::vector<double> eigenvalues;     // discrete c of each member
    double residual;                     // |d(d*a) - 2 d a| over the basis
    double gap;
    bool inconclusive;
};
ZSpace z_space(const DECOperators& dec, const WallOptions& opt = {});

// |Delta_0 f - l M0 f| / (max(|l|, 1) |M0 f|), used to check beta components.
double laplace_residual(const DECOperators& dec, const Eigen::VectorXd& f, double lambda);

}  // namespace coassoc
