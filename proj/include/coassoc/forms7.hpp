#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace coassoc {

using VecN = Eigen::VectorXd;
using Index = std::vector<int>;  // strictly increasing, 1-based

// Sparse k-form on R^n (n <= 7) stored as coefficients over increasing
// multi-indices. Entries with |c| < 1e-15 are dropped on normalization.
class Form {
public:
    Form(int degree, int dim);

    static Form monomial(int dim, const Index& idx, double c = 1.0);
    static Form volume(int dim);

    int degree() const { return degree_; }
    int dim() const { return dim_; }
    const std::map<Index, double>& coeffs() const { return coeffs_; }

    double get(const Index& idx) const;
    // Adds c * dx_{idx}; idx may be unsorted, sign follows the sorting permutation.
    void add(const Index& idx, double c);
    void set(const Index& idx, double c);
    bool is_zero(double tol = 0.0) const;
    double max_abs() const;
    // Euclidean norm of the coefficient vector.
    double norm() const;

    // Evaluates the form on k vectors (multilinear, alternating).
    double eval(const std::vector<VecN>& vs) const;

    Form operator+(const Form& o) const;
    Form operator-(const Form& o) const;
    Form operator*(double s) const;
    Form& operator+=(const Form& o);

    void normalize();

    // One line per monomial, "123:+1".
    std::string to_text() const;
    static Form from_text(const std::string& text, int degree, int dim);

private:
    int degree_;
    int dim_;
    std::map<Index, double> coeffs_;
};

Form operator*(double s, const Form& f);

// Sign of the permutation sorting idx; 0 if idx has a repeated entry.
int sort_sign(Index& idx);

std::pair<Form, Form> g2_constants();
const Form& phi();
const Form& star_phi();

Form wedge(const Form& a, const Form& b);
Form hodge_star_euclidean(const Form& a);
Form interior_product(const VecN& v, const Form& a);
// rows[i] is the image of the i-th coordinate direction of a linear map R^m -> R^n.
Form pullback_linear(const std::vector<VecN>& rows, const Form& a);

// Dense component tensors for fast contraction in hot loops.
// phi_tensor()(i,j,k) with 0-based indices, fully antisymmetric.
struct Phi3 {
    double t[7][7][7];
    double operator()(int i, int j, int k) const { return t[i][j][k]; }
};
const Phi3& phi_tensor();
double phi_eval(const VecN& a, const VecN& b, const VecN& c);
double star_phi_eval(const VecN& a, const VecN& b, const VecN& c, const VecN& d);
// (v _| phi)(a, b)
Eigen::Matrix<double, 7, 7> phi_contract(const VecN& v);

}  // namespace coassoc
