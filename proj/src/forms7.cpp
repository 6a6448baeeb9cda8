#include "coassoc/forms7.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace coassoc {

namespace {

constexpr double kDropTol = 1e-15;

void check_index(const Index& idx, int dim) {
    for (int i : idx)
        if (i < 1 || i > dim) throw std::invalid_argument("form index out of range");
}

// Enumerates increasing k-subsets of {1..n}.
std::vector<Index> subsets(int n, int k) {
    std::vector<Index> out;
    Index cur(k);
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + k, true);
    do {
        int j = 0;
        for (int i = 0; i < n; ++i)
            if (pick[i]) cur[j++] = i + 1;
        out.push_back(cur);
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return out;
}

double minor_det(const std::vector<VecN>& vs, const Index& idx) {
    const int k = static_cast<int>(idx.size());
    if (k == 0) return 1.0;
    Eigen::MatrixXd m(k, k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) m(r, c) = vs[c](idx[r] - 1);
    return m.determinant();
}

}  // namespace

int sort_sign(Index& idx) {
    int sign = 1;
    for (size_t i = 0; i < idx.size(); ++i)
        for (size_t j = 0; j + 1 < idx.size() - i; ++j) {
            if (idx[j] == idx[j + 1]) return 0;
            if (idx[j] > idx[j + 1]) {
                std::swap(idx[j], idx[j + 1]);
                sign = -sign;
            }
        }
    for (size_t i = 0; i + 1 < idx.size(); ++i)
        if (idx[i] == idx[i + 1]) return 0;
    return sign;
}

Form::Form(int degree, int dim) : degree_(degree), dim_(dim) {
    if (dim < 1 || dim > 7) throw std::invalid_argument("ambient dimension must be in 1..7");
    if (degree < 0 || degree > dim) throw std::invalid_argument("form degree out of range");
}

Form Form::monomial(int dim, const Index& idx, double c) {
    Form f(static_cast<int>(idx.size()), dim);
    f.add(idx, c);
    return f;
}

Form Form::volume(int dim) {
    Index idx(dim);
    std::iota(idx.begin(), idx.end(), 1);
    return monomial(dim, idx);
}

double Form::get(const Index& idx) const {
    Index s = idx;
    int sg = sort_sign(s);
    if (sg == 0) return 0.0;
    auto it = coeffs_.find(s);
    return it == coeffs_.end() ? 0.0 : sg * it->second;
}

void Form::add(const Index& idx, double c) {
    if (static_cast<int>(idx.size()) != degree_) throw std::invalid_argument("index length != degree");
    check_index(idx, dim_);
    Index s = idx;
    int sg = sort_sign(s);
    if (sg == 0) return;
    double& v = coeffs_[s];
    v += sg * c;
    if (std::abs(v) < kDropTol) coeffs_.erase(s);
}

void Form::set(const Index& idx, double c) {
    Index s = idx;
    int sg = sort_sign(s);
    if (sg == 0) return;
    coeffs_.erase(s);
    add(s, c);
}

bool Form::is_zero(double tol) const { return max_abs() <= tol; }

double Form::max_abs() const {
    double m = 0;
    for (auto& [k, v] : coeffs_) m = std::max(m, std::abs(v));
    return m;
}

double Form::norm() const {
    double s = 0;
    for (auto& [k, v] : coeffs_) s += v * v;
    return std::sqrt(s);
}

double Form::eval(const std::vector<VecN>& vs) const {
    if (static_cast<int>(vs.size()) != degree_) throw std::invalid_argument("eval needs degree vectors");
    for (auto& v : vs)
        if (v.size() != dim_) throw std::invalid_argument("vector dimension mismatch");
    double s = 0;
    for (auto& [k, c] : coeffs_) s += c * minor_det(vs, k);
    return s;
}

Form Form::operator+(const Form& o) const {
    Form r = *this;
    r += o;
    return r;
}

Form& Form::operator+=(const Form& o) {
    if (o.degree_ != degree_ || o.dim_ != dim_) throw std::invalid_argument("form shape mismatch");
    for (auto& [k, v] : o.coeffs_) add(k, v);
    return *this;
}

Form Form::operator-(const Form& o) const { return *this + (-1.0) * o; }

Form Form::operator*(double s) const {
    Form r(degree_, dim_);
    for (auto& [k, v] : coeffs_) r.add(k, s * v);
    return r;
}

Form operator*(double s, const Form& f) { return f * s; }

void Form::normalize() {
    for (auto it = coeffs_.begin(); it != coeffs_.end();)
        it = std::abs(it->second) < kDropTol ? coeffs_.erase(it) : std::next(it);
}

std::string Form::to_text() const {
    std::ostringstream os;
    os.precision(17);
    for (auto& [k, v] : coeffs_) {
        for (int i : k) os << i;
        os << ':' << (v >= 0 ? "+" : "") << v << '\n';
    }
    return os.str();
}

Form Form::from_text(const std::string& text, int degree, int dim) {
    Form f(degree, dim);
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("bad form line: " + line);
        Index idx;
        for (size_t i = 0; i < colon; ++i) idx.push_back(line[i] - '0');
        f.add(idx, std::stod(line.substr(colon + 1)));
    }
    return f;
}

std::pair<Form, Form> g2_constants() {
    Form p(3, 7), s(4, 7);
    p.add({1, 2, 3}, 1);
    p.add({1, 4, 5}, 1);
    p.add({1, 6, 7}, 1);
    p.add({2, 4, 6}, 1);
    p.add({2, 5, 7}, -1);
    p.add({3, 4, 7}, -1);
    p.add({3, 5, 6}, -1);
    s.add({4, 5, 6, 7}, 1);
    s.add({2, 3, 6, 7}, 1);
    s.add({2, 3, 4, 5}, 1);
    s.add({1, 3, 5, 7}, 1);
    s.add({1, 3, 4, 6}, -1);
    s.add({1, 2, 5, 6}, -1);
    s.add({1, 2, 4, 7}, -1);
    return {p, s};
}

const Form& phi() {
    static const Form f = g2_constants().first;
    return f;
}

const Form& star_phi() {
    static const Form f = g2_constants().second;
    return f;
}

Form wedge(const Form& a, const Form& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("wedge: dimension mismatch");
    if (a.degree() + b.degree() > a.dim()) throw std::invalid_argument("wedge: degree exceeds dimension");
    Form r(a.degree() + b.degree(), a.dim());
    for (auto& [ka, va] : a.coeffs())
        for (auto& [kb, vb] : b.coeffs()) {
            Index idx = ka;
            idx.insert(idx.end(), kb.begin(), kb.end());
            r.add(idx, va * vb);
        }
    return r;
}

Form hodge_star_euclidean(const Form& a) {
    const int n = a.dim();
    Form r(n - a.degree(), n);
    for (auto& [k, v] : a.coeffs()) {
        Index comp;
        for (int i = 1; i <= n; ++i)
            if (std::find(k.begin(), k.end(), i) == k.end()) comp.push_back(i);
        Index full = k;
        full.insert(full.end(), comp.begin(), comp.end());
        int sg = sort_sign(full);
        r.add(comp, sg * v);
    }
    return r;
}

Form interior_product(const VecN& v, const Form& a) {
    if (a.degree() == 0) throw std::invalid_argument("interior product of a 0-form");
    if (v.size() != a.dim()) throw std::invalid_argument("interior product: dimension mismatch");
    Form r(a.degree() - 1, a.dim());
    for (auto& [k, c] : a.coeffs())
        for (size_t p = 0; p < k.size(); ++p) {
            double vi = v(k[p] - 1);
            if (vi == 0.0) continue;
            Index rest;
            for (size_t q = 0; q < k.size(); ++q)
                if (q != p) rest.push_back(k[q]);
            r.add(rest, ((p % 2) ? -1.0 : 1.0) * vi * c);
        }
    return r;
}

Form pullback_linear(const std::vector<VecN>& rows, const Form& a) {
    const int m = static_cast<int>(rows.size());
    for (auto& r : rows)
        if (r.size() != a.dim()) throw std::invalid_argument("pullback: row dimension mismatch");
    if (a.degree() > m) return Form(m, m);
    Form r(a.degree(), m);
    for (auto& idx : subsets(m, a.degree())) {
        std::vector<VecN> vs;
        for (int i : idx) vs.push_back(rows[i - 1]);
        r.add(idx, a.eval(vs));
    }
    return r;
}

const Phi3& phi_tensor() {
    static const Phi3 t = [] {
        Phi3 p{};
        for (auto& [k, c] : phi().coeffs()) {
            int i = k[0] - 1, j = k[1] - 1, l = k[2] - 1;
            p.t[i][j][l] = p.t[j][l][i] = p.t[l][i][j] = c;
            p.t[j][i][l] = p.t[i][l][j] = p.t[l][j][i] = -c;
        }
        return p;
    }();
    return t;
}

double phi_eval(const VecN& a, const VecN& b, const VecN& c) {
    const Phi3& p = phi_tensor();
    double s = 0;
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) {
            double ab = a(i) * b(j);
            if (ab == 0.0) continue;
            for (int k = 0; k < 7; ++k) s += p.t[i][j][k] * ab * c(k);
        }
    return s;
}

double star_phi_eval(const VecN& a, const VecN& b, const VecN& c, const VecN& d) {
    return star_phi().eval({a, b, c, d});
}

Eigen::Matrix<double, 7, 7> phi_contract(const VecN& v) {
    const Phi3& p = phi_tensor();
    Eigen::Matrix<double, 7, 7> m = Eigen::Matrix<double, 7, 7>::Zero();
    for (int i = 0; i < 7; ++i)
        if (v(i) != 0.0)
            for (int j = 0; j < 7; ++j)
                for (int k = 0; k < 7; ++k) m(j, k) += v(i) * p.t[i][j][k];
    return m;
}

}  // namespace coassoc
