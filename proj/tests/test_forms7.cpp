#include <random>

#include "doctest.h"

#include "coassoc/forms7.hpp"

using namespace coassoc;

namespace {

// Sign of the permutation that sorts the concatenation, 0 on a repeated index.
int concat_sign(const Index& a, const Index& b) {
    Index all = a;
    all.insert(all.end(), b.begin(), b.end());
    int inv = 0;
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = i + 1; j < all.size(); ++j) {
            if (all[i] == all[j]) return 0;
            inv += all[i] > all[j];
        }
    return inv % 2 ? -1 : 1;
}

Index sorted_union(const Index& a, const Index& b) {
    Index u = a;
    u.insert(u.end(), b.begin(), b.end());
    std::sort(u.begin(), u.end());
    return u;
}

Form brute_wedge(const Form& a, const Form& b) {
    Form out(a.degree() + b.degree(), a.dim());
    for (auto& [i, x] : a.coeffs())
        for (auto& [j, y] : b.coeffs()) {
            int s = concat_sign(i, j);
            if (s) out.add(sorted_union(i, j), s * x * y);
        }
    out.normalize();
    return out;
}

Form brute_star(const Form& a) {
    Form out(a.dim() - a.degree(), a.dim());
    for (auto& [i, x] : a.coeffs()) {
        Index comp;
        for (int k = 1; k <= a.dim(); ++k)
            if (std::find(i.begin(), i.end(), k) == i.end()) comp.push_back(k);
        out.add(comp, concat_sign(i, comp) * x);
    }
    out.normalize();
    return out;
}

Form random_form(int k, int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1, 1);
    Form f(k, n);
    std::vector<bool> pick(n, false);
    std::fill(pick.begin(), pick.begin() + k, true);
    do {
        Index idx;
        for (int i = 0; i < n; ++i)
            if (pick[i]) idx.push_back(i + 1);
        f.set(idx, U(rng));
    } while (std::prev_permutation(pick.begin(), pick.end()));
    return f;
}

VecN e(int i) {
    VecN v = VecN::Zero(7);
    v(i - 1) = 1;
    return v;
}

}  // namespace

TEST_CASE("phi and *phi monomials") {
    auto [p, sp] = g2_constants();
    CHECK(p.coeffs().size() == 7);
    CHECK(p.get({1, 2, 3}) == 1);
    CHECK(p.get({1, 4, 5}) == 1);
    CHECK(p.get({1, 6, 7}) == 1);
    CHECK(p.get({2, 4, 6}) == 1);
    CHECK(p.get({2, 5, 7}) == -1);
    CHECK(p.get({3, 4, 7}) == -1);
    CHECK(p.get({3, 5, 6}) == -1);
    CHECK(sp.coeffs().size() == 7);
    CHECK(sp.get({4, 5, 6, 7}) == 1);
    CHECK(sp.get({2, 3, 6, 7}) == 1);
    CHECK(sp.get({2, 3, 4, 5}) == 1);
    CHECK(sp.get({1, 3, 5, 7}) == 1);
    CHECK(sp.get({1, 3, 4, 6}) == -1);
    CHECK(sp.get({1, 2, 5, 6}) == -1);
    CHECK(sp.get({1, 2, 4, 7}) == -1);
}

TEST_CASE("wedge basics") {
    Form a = Form::monomial(7, {1}), b = Form::monomial(7, {2});
    CHECK((wedge(a, b) - Form::monomial(7, {1, 2})).max_abs() == 0);
    Form ab = Form::monomial(7, {1, 2});
    CHECK(wedge(ab, ab).is_zero());
    CHECK_THROWS_AS(wedge(Form::monomial(7, {1}), Form::monomial(4, {1})), std::invalid_argument);
    CHECK((wedge(phi(), star_phi()) - brute_wedge(phi(), star_phi())).max_abs() == 0);
    CHECK((wedge(phi(), star_phi()) - 7.0 * Form::volume(7)).max_abs() == 0);
}

TEST_CASE("wedge against pairwise expansion on random forms") {
    std::mt19937_64 rng(7);
    for (int k = 0; k <= 3; ++k)
        for (int l = 0; l <= 7 - k && l <= 3; ++l) {
            Form a = random_form(k, 7, rng), b = random_form(l, 7, rng);
            CHECK((wedge(a, b) - brute_wedge(a, b)).max_abs() < 1e-14);
            double s = (k * l) % 2 ? -1 : 1;
            CHECK((wedge(a, b) - s * wedge(b, a)).max_abs() < 1e-14);
        }
}

TEST_CASE("hodge star") {
    CHECK((hodge_star_euclidean(Form::monomial(7, {1, 2, 3})) - Form::monomial(7, {4, 5, 6, 7})).max_abs() == 0);
    CHECK((hodge_star_euclidean(phi()) - star_phi()).max_abs() == 0);
    std::mt19937_64 rng(11);
    for (int k = 0; k <= 7; ++k) {
        Form a = random_form(k, 7, rng), b = random_form(k, 7, rng);
        CHECK((hodge_star_euclidean(a) - brute_star(a)).max_abs() < 1e-15);
        // ** = 1 in odd dimension; a ^ *b = <a, b> vol
        CHECK((hodge_star_euclidean(hodge_star_euclidean(a)) - a).max_abs() < 1e-15);
        double inner = 0;
        for (auto& [i, x] : a.coeffs()) inner += x * b.get(i);
        CHECK((wedge(a, hodge_star_euclidean(b)) - inner * Form::volume(7)).max_abs() < 1e-13);
    }
    Form f = random_form(2, 4, rng);
    CHECK((hodge_star_euclidean(hodge_star_euclidean(f)) - f).max_abs() < 1e-15);
}

TEST_CASE("interior product") {
    CHECK((interior_product(e(1), Form::monomial(7, {1, 2, 3})) - Form::monomial(7, {2, 3})).max_abs() == 0);
    CHECK(interior_product(e(7), Form::monomial(7, {1, 2, 3})).is_zero());
    Form expect = Form::monomial(7, {2, 3}) + Form::monomial(7, {4, 5}) + Form::monomial(7, {6, 7});
    CHECK((interior_product(e(1), phi()) - expect).max_abs() == 0);
    CHECK_THROWS(interior_product(e(1), Form(0, 7)));
}

TEST_CASE("G2 metric identity (u.phi) ^ (v.phi) ^ phi = 6 <u, v> vol") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    for (int trial = 0; trial < 5; ++trial) {
        VecN u(7), v(7);
        for (int i = 0; i < 7; ++i) u(i) = N(rng), v(i) = N(rng);
        Form w = wedge(wedge(interior_product(u, phi()), interior_product(v, phi())), phi());
        CHECK((w - 6 * u.dot(v) * Form::volume(7)).max_abs() < 1e-12);
    }
}

TEST_CASE("pullback along linear maps") {
    std::vector<VecN> rows = {e(4), e(5), e(6), e(7)};
    CHECK(pullback_linear(rows, phi()).is_zero());
    Form vol4 = pullback_linear(rows, star_phi());
    CHECK(vol4.dim() == 4);
    CHECK((vol4 - Form::volume(4)).max_abs() == 0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> N;
    std::vector<VecN> r(4, VecN(7));
    for (auto& x : r)
        for (int i = 0; i < 7; ++i) x(i) = N(rng);
    std::vector<VecN> r2 = r;
    for (auto& x : r2) x *= 2.0;
    for (int k = 1; k <= 4; ++k) {
        Form a = random_form(k, 7, rng);
        CHECK((pullback_linear(r2, a) - std::pow(2.0, k) * pullback_linear(r, a)).max_abs() < 1e-12);
    }
    CHECK(pullback_linear(r, random_form(5, 7, rng)).is_zero());
}

TEST_CASE("phi tensor and evaluation agree") {
    for (int i = 1; i <= 7; ++i)
        for (int j = 1; j <= 7; ++j)
            for (int k = 1; k <= 7; ++k) {
                double via_form = phi().eval({e(i), e(j), e(k)});
                CHECK(phi_tensor()(i - 1, j - 1, k - 1) == doctest::Approx(via_form));
                CHECK(phi_eval(e(i), e(j), e(k)) == doctest::Approx(via_form));
            }
    CHECK(star_phi_eval(e(4), e(5), e(6), e(7)) == doctest::Approx(1));
}

TEST_CASE("text round trip") {
    Form f = Form::from_text(phi().to_text(), 3, 7);
    CHECK((f - phi()).max_abs() == 0);
    CHECK(phi().to_text().find("123:+1") != std::string::npos);
    CHECK_THROWS(Form::from_text("12x", 2, 7));
}
