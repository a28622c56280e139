#include "doctest.h"

#include <random>

#include "npbrane/tensor.hpp"

using namespace npb;

namespace {

ScalarFn random_poly_fn(std::mt19937_64& rng, int nvars, int nterms = 2) {
    std::uniform_int_distribution<int> coeff(-3, 3);
    std::uniform_int_distribution<int> expo(0, 2);
    Poly p(nvars);
    for (int t = 0; t < nterms; ++t) {
        Mono m(nvars);
        for (int i = 0; i < nvars; ++i) m[i] = expo(rng);
        Poly mono(nvars);
        mono.set_term(m, Rat(1));
        p = p + Poly(nvars, Rat(coeff(rng))) * mono;
    }
    return ScalarFn(p);
}

AltTensor random_tensor(std::mt19937_64& rng, const Chart& c, int degree,
                        Variance var, int nterms = 3) {
    int n = c.dim();
    AltTensor t(c, degree, var);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int s = 0; s < nterms; ++s) {
        MultiIndex idx(degree);
        for (int i = 0; i < degree; ++i) idx[i] = pick(rng);
        t.add_term(idx, random_poly_fn(rng, n));
    }
    return t;
}

AltTensor random_vector_field(std::mt19937_64& rng, const Chart& c) {
    return random_tensor(rng, c, 1, Variance::vector_field, 2);
}

// Exact rank of the matrix of T♯ images evaluated at a rational point.
int sharp_rank_at(const AltTensor& t, const std::vector<Rat>& pt) {
    int n = t.dim(), p = t.degree();
    // Columns: basis (p-1)-forms; rows: vector components.
    std::vector<std::vector<Rat>> cols;
    std::vector<int> idx(p - 1);
    for (int i = 0; i + 1 < p; ++i) idx[i] = i;
    auto next = [&](std::vector<int>& c2) {
        int k = (int)c2.size();
        for (int i = k - 1; i >= 0; --i)
            if (c2[i] < n - (k - i)) {
                ++c2[i];
                for (int j = i + 1; j < k; ++j) c2[j] = c2[j - 1] + 1;
                return true;
            }
        return false;
    };
    if (p - 1 == 0) {
        cols.push_back(std::vector<Rat>(n));
        // T♯ of the constant 1 "0-form" is T itself only when p=1.
    } else {
        do {
            AltTensor alpha = AltTensor::basis(t.chart(), Variance::form, idx);
            AltTensor img = pi_sharp(t, alpha);
            std::vector<Rat> col(n, Rat(0));
            for (int i = 0; i < n; ++i) col[i] = img.coeff({i}).eval(pt);
            cols.push_back(std::move(col));
        } while (next(idx));
    }
    // Gaussian elimination over Q.
    int rank = 0;
    for (int r = 0; r < n && rank < (int)cols.size(); ++r) {
        int pivot = -1;
        for (size_t cidx = rank; cidx < cols.size(); ++cidx)
            if (cols[cidx][r] != 0) { pivot = (int)cidx; break; }
        if (pivot < 0) continue;
        std::swap(cols[rank], cols[pivot]);
        for (size_t cidx = 0; cidx < cols.size(); ++cidx) {
            if ((int)cidx == rank || cols[cidx][r] == 0) continue;
            Rat f = cols[cidx][r] / cols[rank][r];
            for (int i = 0; i < n; ++i) cols[cidx][i] -= f * cols[rank][i];
        }
        ++rank;
    }
    return rank;
}

} // namespace

TEST_CASE("wedge basics") {
    Chart c(4);
    AltTensor dx1 = AltTensor::coordinate_form(c, 0);
    AltTensor dx2 = AltTensor::coordinate_form(c, 1);
    AltTensor dx3 = AltTensor::coordinate_form(c, 2);

    AltTensor w = wedge(dx1, dx2);
    CHECK(w.degree() == 2);
    CHECK(w.coeff({0, 1}) == ScalarFn(4, Rat(1)));
    CHECK(w.coeffs().size() == 1);

    CHECK(wedge(dx1, dx1).is_zero());

    ScalarFn x3 = ScalarFn::variable(4, 2);
    AltTensor a = dx1 * x3;
    AltTensor b = wedge(dx2, dx3);
    AltTensor r = wedge(a, b);
    CHECK(r.coeff({0, 1, 2}) == x3);
    CHECK(r.coeffs().size() == 1);

    // Graded commutativity on random forms.
    std::mt19937_64 rng(7);
    for (int it = 0; it < 10; ++it) {
        AltTensor f1 = random_tensor(rng, c, 1, Variance::form);
        AltTensor f2 = random_tensor(rng, c, 2, Variance::form);
        CHECK(wedge(f1, f2) == wedge(f2, f1));                 // (-1)^{1*2} = +1
        AltTensor g1 = random_tensor(rng, c, 1, Variance::form);
        CHECK(wedge(f1, g1) == -wedge(g1, f1));                // (-1)^{1*1} = -1
    }

    CHECK_THROWS_AS(wedge(dx1, AltTensor::coordinate_vector(c, 0)),
                    std::invalid_argument);
}

TEST_CASE("interior products and sharps") {
    Chart c(4);
    AltTensor d1 = AltTensor::coordinate_vector(c, 0);
    AltTensor dx1 = AltTensor::coordinate_form(c, 0);
    AltTensor dx2 = AltTensor::coordinate_form(c, 1);

    AltTensor w12 = wedge(dx1, dx2);
    AltTensor r = interior_v(d1, w12);
    CHECK(r == dx2);

    // π♯(dx1∧dx2) for π = ∂1∧∂2∧∂3 → ∂3 under ι_{α∧β} = ι_β∘ι_α.
    AltTensor pi = AltTensor::basis(c, Variance::vector_field, {0, 1, 2});
    AltTensor img = pi_sharp(pi, w12);
    CHECK(img == AltTensor::coordinate_vector(c, 2));

    // ι_{∂1∧∂2}(dx1∧dx2∧dx3) = dx3.
    AltTensor x12 = AltTensor::basis(c, Variance::vector_field, {0, 1});
    AltTensor f123 = AltTensor::basis(c, Variance::form, {0, 1, 2});
    CHECK(interior_v(x12, f123) == AltTensor::coordinate_form(c, 2));

    CHECK_THROWS_AS(interior_v(x12, dx1), std::invalid_argument);
}

TEST_CASE("full pairing uses ordered indices with no factorial") {
    Chart c(3);
    AltTensor b(c, 2, Variance::form);
    b.add_term({0, 1}, ScalarFn(3, Rat(5)));
    AltTensor t(c, 2, Variance::vector_field);
    t.add_term({0, 1}, ScalarFn(3, Rat(7)));
    t.add_term({1, 2}, ScalarFn(3, Rat(11)));
    CHECK(full_pairing(b, t) == ScalarFn(3, Rat(35)));
}

TEST_CASE("exterior derivative") {
    Chart c(4);
    ScalarFn x1 = ScalarFn::variable(4, 0);
    ScalarFn x4 = ScalarFn::variable(4, 3);

    AltTensor a = AltTensor::coordinate_form(c, 1) * x1;  // x1 dx2
    AltTensor da = ext_d(a);
    CHECK(da == wedge(AltTensor::coordinate_form(c, 0), AltTensor::coordinate_form(c, 1)));

    AltTensor w = AltTensor::basis(c, Variance::form, {0, 1});
    CHECK(ext_d(w).is_zero());

    // d(x4 dx1∧dx2∧dx3) = dx4∧dx1∧dx2∧dx3 = -dx1∧dx2∧dx3∧dx4.
    AltTensor v = AltTensor::basis(c, Variance::form, {0, 1, 2}) * x4;
    AltTensor dv = ext_d(v);
    CHECK(dv.coeff({3, 0, 1, 2}) == ScalarFn(4, Rat(1)));
    CHECK(dv.coeff({0, 1, 2, 3}) == ScalarFn(4, Rat(-1)));
}

TEST_CASE("d squared vanishes on random forms") {
    std::mt19937_64 rng(31337);
    for (int it = 0; it < 200; ++it) {
        int n = 3 + (int)(rng() % 2);
        Chart c(n);
        int p = (int)(rng() % n);
        AltTensor b = random_tensor(rng, c, p, Variance::form);
        CHECK(ext_d(ext_d(b)).is_zero());
    }
}

TEST_CASE("lie derivative") {
    Chart c(4);
    ScalarFn x1 = ScalarFn::variable(4, 0);
    AltTensor d1 = AltTensor::coordinate_vector(c, 0);
    AltTensor d3 = AltTensor::coordinate_vector(c, 2);

    // L_{∂1}(x1 dx3) = dx3 by the Cartan formula.
    AltTensor a = AltTensor::coordinate_form(c, 2) * x1;
    CHECK(lie(d1, a) == AltTensor::coordinate_form(c, 2));

    // L_X X = 0 and constant-coefficient invariance.
    std::mt19937_64 rng(5);
    for (int it = 0; it < 10; ++it) {
        AltTensor x = random_vector_field(rng, c);
        CHECK(lie(x, x).is_zero());
    }
    CHECK(lie(d3, AltTensor::basis(c, Variance::vector_field, {0, 1, 2})).is_zero());

    // Leibniz rule on wedges of forms.
    for (int it = 0; it < 20; ++it) {
        AltTensor x = random_vector_field(rng, c);
        AltTensor p1 = random_tensor(rng, c, 1, Variance::form);
        AltTensor p2 = random_tensor(rng, c, 2, Variance::form);
        CHECK(lie(x, wedge(p1, p2)) == wedge(lie(x, p1), p2) + wedge(p1, lie(x, p2)));
    }
    // And on wedges of multivectors.
    for (int it = 0; it < 10; ++it) {
        AltTensor x = random_vector_field(rng, c);
        AltTensor v1 = random_tensor(rng, c, 1, Variance::vector_field);
        AltTensor v2 = random_tensor(rng, c, 2, Variance::vector_field);
        CHECK(lie(x, wedge(v1, v2)) == wedge(lie(x, v1), v2) + wedge(v1, lie(x, v2)));
    }
}

TEST_CASE("schouten bracket") {
    Chart c(4);
    ScalarFn x1 = ScalarFn::variable(4, 0);
    AltTensor d1 = AltTensor::coordinate_vector(c, 0);
    AltTensor d2 = AltTensor::coordinate_vector(c, 1);

    // [∂1, x1 ∂2] = ∂2 (vector-field commutator).
    CHECK(schouten(d1, d2 * x1) == d2);

    AltTensor t123 = AltTensor::basis(c, Variance::vector_field, {0, 1, 2});
    CHECK(schouten(t123, t123).is_zero());

    // [π, f] = π♯(df) for π = ∂1∧∂2, f = x1.
    AltTensor pi = AltTensor::basis(c, Variance::vector_field, {0, 1});
    AltTensor f = AltTensor::scalar(c, x1, Variance::vector_field);
    // Sign is fixed by the graded-Jacobi-consistent convention: [π,f] = -π♯(df).
    AltTensor expect = pi_sharp(pi, ext_d(AltTensor::scalar(c, x1, Variance::form)));
    AltTensor got = schouten(pi, f);
    CHECK(got.degree() == 1);
    CHECK(got == -expect);
}

TEST_CASE("schouten graded antisymmetry and Jacobi") {
    std::mt19937_64 rng(40);
    Chart c(4);
    for (int it = 0; it < 12; ++it) {
        int pa = 1 + (int)(rng() % 3), pb = 1 + (int)(rng() % 3),
            pc = 1 + (int)(rng() % 2);
        AltTensor A = random_tensor(rng, c, pa, Variance::vector_field, 2);
        AltTensor B = random_tensor(rng, c, pb, Variance::vector_field, 2);
        AltTensor C = random_tensor(rng, c, pc, Variance::vector_field, 2);

        // [A,B] = -(-1)^{(a-1)(b-1)} [B,A]
        AltTensor lhs = schouten(A, B);
        AltTensor rhs = schouten(B, A);
        if (((pa - 1) * (pb - 1)) % 2 == 0)
            CHECK(lhs == -rhs);
        else
            CHECK(lhs == rhs);

        // [A,[B,C]] = [[A,B],C] + (-1)^{(a-1)(b-1)} [B,[A,C]]
        AltTensor j1 = schouten(A, schouten(B, C));
        AltTensor j2 = schouten(schouten(A, B), C);
        AltTensor j3 = schouten(B, schouten(A, C));
        if (((pa - 1) * (pb - 1)) % 2 == 0)
            CHECK(j1 == j2 + j3);
        else
            CHECK(j1 == j2 - j3);
    }
}

TEST_CASE("decomposability") {
    Chart c6(6);
    CHECK(decomposable(AltTensor::basis(c6, Variance::vector_field, {0, 1, 2})));

    AltTensor sum = AltTensor::basis(c6, Variance::vector_field, {0, 1, 2}) +
                    AltTensor::basis(c6, Variance::vector_field, {3, 4, 5});
    CHECK_FALSE(decomposable(sum));

    // f · v1∧v2∧v3 for random polynomial vector fields is decomposable.
    std::mt19937_64 rng(77);
    Chart c5(5);
    for (int it = 0; it < 10; ++it) {
        AltTensor v1 = random_vector_field(rng, c5);
        AltTensor v2 = random_vector_field(rng, c5);
        AltTensor v3 = random_vector_field(rng, c5);
        AltTensor t = wedge(wedge(v1, v2), v3) * random_poly_fn(rng, 5);
        CHECK(decomposable(t));
    }
}

TEST_CASE("decomposable tensors have sharp rank at most p at sample points") {
    std::mt19937_64 rng(91);
    Chart c(5);
    for (int it = 0; it < 5; ++it) {
        AltTensor v1 = random_vector_field(rng, c);
        AltTensor v2 = random_vector_field(rng, c);
        AltTensor v3 = random_vector_field(rng, c);
        AltTensor t = wedge(wedge(v1, v2), v3);
        for (int s = 0; s < 5; ++s) {
            std::vector<Rat> pt(5);
            for (auto& x : pt) x = Rat((int)(rng() % 7) + 1, (int)(rng() % 3) + 1);
            CHECK(sharp_rank_at(t, pt) <= 3);
        }
    }
}
