#include "npbrane/dorfman.hpp"

namespace npb {

Section::Section(AltTensor v, AltTensor f, int p)
    : vec(std::move(v)), form(std::move(f)), order(p) {
    if (p < 2) throw std::invalid_argument("Section: order must be >= 2");
    if (vec.chart() != form.chart())
        throw std::invalid_argument("Section: chart mismatch");
    if (vec.variance() != Variance::vector_field || vec.degree() != 1)
        throw std::invalid_argument("Section: vec must be a vector field");
    if (form.variance() != Variance::form || form.degree() != p - 1)
        throw std::invalid_argument("Section: form must have degree p-1");
}

Section Section::zero(const Chart& chart, int p) {
    return Section(AltTensor::zero(chart, 1, Variance::vector_field),
                   AltTensor::zero(chart, p - 1, Variance::form), p);
}

Section Section::operator+(const Section& o) const {
    if (order != o.order) throw std::invalid_argument("Section: order mismatch");
    return Section(vec + o.vec, form + o.form, order);
}

Section Section::operator-(const Section& o) const {
    if (order != o.order) throw std::invalid_argument("Section: order mismatch");
    return Section(vec - o.vec, form - o.form, order);
}

Section Section::operator*(const ScalarFn& f) const {
    return Section(vec * f, form * f, order);
}

bool Section::operator==(const Section& o) const {
    return order == o.order && vec == o.vec && form == o.form;
}

TwistData TwistData::with_c(AltTensor c) {
    TwistData tw;
    tw.c = std::move(c);
    return tw;
}

TwistData TwistData::with_zeta(AltTensor zeta) {
    TwistData tw;
    tw.zeta = std::move(zeta);
    return tw;
}

AltTensor pairing(const Section& e1, const Section& e2) {
    if (e1.order != e2.order || e1.chart() != e2.chart())
        throw std::invalid_argument("pairing: order/chart mismatch");
    AltTensor s = interior_v(e1.vec, e2.form) + interior_v(e2.vec, e1.form);
    return s * ScalarFn(e1.chart().dim(), Rat(1, 2));
}

AltTensor anchor(const Section& e) { return e.vec; }

namespace {

Section dorfman_c(const Section& e1, const Section& e2,
                  const std::optional<AltTensor>& c) {
    AltTensor x = schouten(e1.vec, e2.vec);
    AltTensor f = lie(e1.vec, e2.form) - interior_v(e2.vec, ext_d(e1.form));
    if (c) {
        if (c->degree() != e1.order + 1 || c->variance() != Variance::form)
            throw std::invalid_argument("dorfman: c must be a (p+1)-form");
        f = f + interior_v(wedge(e1.vec, e2.vec), *c);
    }
    return Section(std::move(x), std::move(f), e1.order);
}

} // namespace

Section dorfman(const Section& e1, const Section& e2, const TwistData& tw) {
    if (e1.order != e2.order || e1.chart() != e2.chart())
        throw std::invalid_argument("dorfman: order/chart mismatch");
    if (!tw.zeta) return dorfman_c(e1, e2, tw.c);
    if (tw.zeta->degree() != e1.order ||
        tw.zeta->variance() != Variance::vector_field)
        throw std::invalid_argument("dorfman: zeta must be a p-vector");
    Section t1 = twist_zeta(*tw.zeta, e1);
    Section t2 = twist_zeta(*tw.zeta, e2);
    return twist_zeta(-*tw.zeta, dorfman_c(t1, t2, tw.c));
}

Section leibnizator(const Section& e1, const Section& e2, const Section& e3,
                    const TwistData& tw) {
    return dorfman(e1, dorfman(e2, e3, tw), tw) -
           dorfman(dorfman(e1, e2, tw), e3, tw) -
           dorfman(e2, dorfman(e1, e3, tw), tw);
}

Section twist_b(const AltTensor& b, const Section& e) {
    if (b.degree() != e.order || b.variance() != Variance::form)
        throw std::invalid_argument("twist_b: b must be a p-form");
    return Section(e.vec, e.form + b_sharp(b, e.vec), e.order);
}

Section twist_zeta(const AltTensor& zeta, const Section& e) {
    if (zeta.degree() != e.order || zeta.variance() != Variance::vector_field)
        throw std::invalid_argument("twist_zeta: zeta must be a p-vector");
    return Section(e.vec + pi_sharp(zeta, e.form), e.form, e.order);
}

ScalarVec form_coords(const AltTensor& a) {
    int n = a.dim();
    auto combos = index_combinations(n, a.degree());
    ScalarVec v(combos.size(), ScalarFn(n));
    for (size_t j = 0; j < combos.size(); ++j) v[j] = a.coeff(combos[j]);
    return v;
}

AltTensor form_from_coords(const Chart& chart, int degree, const ScalarVec& v) {
    auto combos = index_combinations(chart.dim(), degree);
    AltTensor a(chart, degree, Variance::form);
    for (size_t j = 0; j < combos.size(); ++j)
        if (!v[j].is_zero()) a.add_term(combos[j], v[j]);
    return a;
}

ScalarVec vector_coords(const AltTensor& x) {
    int n = x.dim();
    ScalarVec v(n, ScalarFn(n));
    for (int i = 0; i < n; ++i) v[i] = x.coeff({i});
    return v;
}

AltTensor vector_from_coords(const Chart& chart, const ScalarVec& v) {
    AltTensor x(chart, 1, Variance::vector_field);
    for (int i = 0; i < chart.dim(); ++i)
        if (!v[i].is_zero()) x.add_term({i}, v[i]);
    return x;
}

ScalarMat zeta_sharp_matrix(const AltTensor& zeta, int p) {
    if (zeta.degree() != p || zeta.variance() != Variance::vector_field)
        throw std::invalid_argument("zeta_sharp_matrix: degree mismatch");
    int n = zeta.dim();
    auto combos = index_combinations(n, p - 1);
    ScalarMat m(n, ScalarVec(combos.size(), ScalarFn(n)));
    for (size_t j = 0; j < combos.size(); ++j) {
        AltTensor alpha = AltTensor::basis(zeta.chart(), Variance::form, combos[j]);
        ScalarVec col = vector_coords(pi_sharp(zeta, alpha));
        for (int i = 0; i < n; ++i) m[i][j] = col[i];
    }
    return m;
}

AltTensor tensor_from_sharp_matrix(const Chart& chart, int p, const ScalarMat& m) {
    int n = chart.dim();
    std::map<MultiIndex, int> jrank;
    const auto Js = index_combinations(n, p - 1);
    for (size_t r = 0; r < Js.size(); ++r) jrank[Js[r]] = (int)r;

    // For an increasing index K with last entry i and J = K∖{i}, the column
    // of dx^J carries ±T^K in row i; the sign is read off from the basis
    // contraction.
    AltTensor result = AltTensor::zero(chart, p, Variance::vector_field);
    for (const auto& K : index_combinations(n, p)) {
        int i = K.back();
        MultiIndex J(K.begin(), K.end() - 1);
        AltTensor probe = interior(AltTensor::basis(chart, Variance::form, J),
                                   AltTensor::basis(chart, Variance::vector_field, K));
        ScalarFn s = probe.coeff({i});
        ScalarFn val = m.at(i).at(jrank.at(J)) / s;
        if (!val.is_zero()) result.add_term(K, val);
    }
    if (zeta_sharp_matrix(result, p) != m)
        throw std::logic_error(
            "tensor_from_sharp_matrix: matrix is not the sharp of an alternating tensor");
    return result;
}

ScalarMat b_sharp_matrix(const AltTensor& b) {
    if (b.variance() != Variance::form)
        throw std::invalid_argument("b_sharp_matrix: b must be a form");
    int n = b.dim(), p = b.degree();
    auto combos = index_combinations(n, p - 1);
    ScalarMat m(combos.size(), ScalarVec(n, ScalarFn(n)));
    for (int i = 0; i < n; ++i) {
        AltTensor x = AltTensor::coordinate_vector(b.chart(), i);
        ScalarVec col = form_coords(b_sharp(b, x));
        for (size_t j = 0; j < combos.size(); ++j) m[j][i] = col[j];
    }
    return m;
}

Section BZFactorization::apply_zeta_prime(const Section& e) const {
    ScalarVec dv = mat_apply(zeta_prime_sharp, form_coords(e.form));
    return Section(e.vec + vector_from_coords(chart, dv), e.form, order);
}

Section BZFactorization::apply_bz(const Section& e) const {
    ScalarVec xv = vector_coords(e.vec);
    ScalarVec av = form_coords(e.form);
    // vec' = (1 - ζ'♯∘b♯) X
    ScalarVec shift = mat_apply(zeta_prime_sharp, mat_apply(b_sharp, xv));
    ScalarVec xv2 = xv;
    for (size_t i = 0; i < xv2.size(); ++i) xv2[i] -= shift[i];
    // form' = (1 + b♯∘ζ♯) α + b♯ X
    ScalarVec av2 = mat_apply(one_plus_bz, av);
    ScalarVec bx = mat_apply(b_sharp, xv);
    for (size_t j = 0; j < av2.size(); ++j) av2[j] += bx[j];
    return Section(vector_from_coords(chart, xv2),
                   form_from_coords(chart, order - 1, av2), order);
}

BZFactorization factor_b_zeta(const AltTensor& b, const AltTensor& zeta) {
    if (b.chart() != zeta.chart())
        throw std::invalid_argument("factor_b_zeta: chart mismatch");
    if (b.variance() != Variance::form ||
        zeta.variance() != Variance::vector_field || b.degree() != zeta.degree())
        throw std::invalid_argument("factor_b_zeta: need a p-form and a p-vector");
    int p = b.degree(), n = b.dim();
    ScalarMat Z = zeta_sharp_matrix(zeta, p);
    ScalarMat B = b_sharp_matrix(b);
    ScalarMat BZ = mat_mul(B, Z);
    int C = (int)BZ.size();
    ScalarMat one_plus = mat_add(identity_mat(C, n), BZ);
    if (mat_det(one_plus).is_zero())
        throw SingularOperator("factor_b_zeta: 1 + b♯ζ♯ is singular");
    BZFactorization out{b.chart(), p, mat_mul(Z, mat_inverse(one_plus)),
                        std::move(one_plus), std::move(B)};
    return out;
}

} // namespace npb
