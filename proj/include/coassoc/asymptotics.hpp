#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "coassoc/charts.hpp"

namespace coassoc {

// Charts in this module put the radial coordinate r first: u = (r, link params).

struct MatchingError : std::runtime_error {
    double r;
    Eigen::Vector3d sigma;
    MatchingError(const std::string& m, double r_, const Eigen::Vector3d& s) : std::runtime_error(m), r(r_), sigma(s) {}
};

struct ConeMatchSample {
    double r;
    int sigma_index;
    Vec7 displacement;
    double tangential_residual;
    Vec4 u_sub;
};

struct ConeMatch {
    double r_min = 0, r_max = 0;
    std::vector<double> radii;
    std::vector<Eigen::Vector3d> link;
    std::vector<ConeMatchSample> samples;
    double scale_invariance_residual = 0;
};

struct RateFit {
    double lambda_hat = 0;
    double stderr_ = 0;
    double r_lo = 0, r_hi = 0;
    int n_radii = 0;
    bool exact_cone = false;
    bool dropped_first_decade = false;
    std::vector<double> per_derivative;  // fitted exponents of |grad^j (Psi - iota)|
};

// Displacement at one (r, sigma): nearest point of sub to the cone point cone(r, sigma).
ConeMatchSample match_point(const Chart& sub, const Chart& cone, double r, const Eigen::Vector3d& sigma);

ConeMatch cone_match(const Chart& sub, const Chart& cone, const std::vector<double>& radii,
                     const std::vector<Eigen::Vector3d>& link_samples);

// Least-squares power-law exponent of the data (r_i, m_i).
struct PowerFit {
    double slope, intercept, stderr_, curvature;
};
PowerFit fit_power_law(const std::vector<double>& r, const std::vector<double>& m);

RateFit fit_rate(const ConeMatch& match);
// Also fits the j = 1 rate from central differences of the displacement field.
RateFit fit_rate(const ConeMatch& match, const Chart& sub, const Chart& cone);

std::vector<double> log_spaced(double lo, double hi, int n);
// Link angles (eta, xi1, xi2) from quaternion samples.
std::vector<Eigen::Vector3d> link_angles(int n, unsigned skip = 0);

using ScalarField = std::function<double(const Vec4&)>;
ScalarField radius_function(const Chart& chart, double R = 1.0);

struct WeightedNormSpec {
    double p = 2;  // infinity selects C^k_mu
    int k = 0;
    double mu = 0;
    double rho_min = 1, rho_max = 10;
};

// One quadrature node on a truncated end.
struct EndSample {
    double rho;
    double weight;                    // volume element times cell size
    std::vector<double> deriv_norms;  // |grad^j xi| for j = 0..k
};

double weighted_norm(const std::vector<EndSample>& samples, const WeightedNormSpec& spec, int n = 4);

// Midpoint rule on logarithmic radial bins times low-discrepancy link samples.
// field(u) returns |grad^j xi|(u) for j = 0..k.
std::vector<EndSample> end_quadrature(const Chart& chart, const ScalarField& rho, double r_lo, double r_hi,
                                      int radial_bins, int link_samples,
                                      const std::function<std::vector<double>(const Vec4&)>& field);

}  // namespace coassoc
