#pragma once

#include <optional>

#include "npbrane/linalg.hpp"
#include "npbrane/tensor.hpp"

namespace npb {

// Section (X, α) of TM ⊕ Λ^{p-1}T*M.
struct Section {
    AltTensor vec;   // degree-1 vector field
    AltTensor form;  // (p-1)-form
    int order;       // p >= 2

    Section(AltTensor v, AltTensor f, int p);
    static Section zero(const Chart& chart, int p);

    const Chart& chart() const { return vec.chart(); }
    bool is_zero() const { return vec.is_zero() && form.is_zero(); }

    Section operator+(const Section& o) const;
    Section operator-(const Section& o) const;
    Section operator*(const ScalarFn& f) const;
    bool operator==(const Section& o) const;
    bool operator!=(const Section& o) const { return !(*this == o); }
};

// Optional twists: a (p+1)-form c and/or a p-vector ζ.
struct TwistData {
    std::optional<AltTensor> c;
    std::optional<AltTensor> zeta;

    static TwistData none() { return {}; }
    static TwistData with_c(AltTensor c);
    static TwistData with_zeta(AltTensor zeta);
};

// ⟨(X,α),(Y,β)⟩ = ½(ι_Xβ + ι_Yα), a (p-2)-form.
AltTensor pairing(const Section& e1, const Section& e2);

AltTensor anchor(const Section& e);

// Dorfman bracket ([X,Y], L_Xβ - ι_Y dα), plus ι_{X∧Y}c under a c-twist; the
// (c,ζ)-twist is computed by conjugation e^{-ζ}[e^ζ e1, e^ζ e2]_c.
Section dorfman(const Section& e1, const Section& e2,
                const TwistData& tw = TwistData::none());

// Jacobi defect [e1,[e2,e3]] - [[e1,e2],e3] - [e2,[e1,e3]].
Section leibnizator(const Section& e1, const Section& e2, const Section& e3,
                    const TwistData& tw = TwistData::none());

// Shears e^b(X,α) = (X, α + ι_X b) and e^ζ(X,α) = (X + ζ♯α, α).
Section twist_b(const AltTensor& b, const Section& e);
Section twist_zeta(const AltTensor& zeta, const Section& e);

// Matrix of ζ♯: Ω^{p-1} → TM on the increasing-index bases (n × C(n,p-1)),
// and of b♯: TM → Ω^{p-1} (C(n,p-1) × n).
ScalarMat zeta_sharp_matrix(const AltTensor& zeta, int p);
ScalarMat b_sharp_matrix(const AltTensor& b);

// Factorization e^b e^ζ = e^{ζ'} e^{(b,ζ)} with
// ζ'♯ = ζ♯ ∘ (1 + b♯∘ζ♯)^{-1} and
// e^{(b,ζ)}(X,α) = ((1 - ζ'♯∘b♯)X, (1 + b♯∘ζ♯)α + b♯X).
struct BZFactorization {
    Chart chart;
    int order;
    ScalarMat zeta_prime_sharp;  // n × C(n,p-1)
    ScalarMat one_plus_bz;       // C(n,p-1) × C(n,p-1)
    ScalarMat b_sharp;           // C(n,p-1) × n

    Section apply_zeta_prime(const Section& e) const;  // e^{ζ'}
    Section apply_bz(const Section& e) const;          // e^{(b,ζ)}
};

BZFactorization factor_b_zeta(const AltTensor& b, const AltTensor& zeta);

// Rebuild the p-vector whose sharp matrix (n × C(n,p-1), increasing-index
// bases) is m; throws std::logic_error when m is not the sharp of an
// alternating tensor.
AltTensor tensor_from_sharp_matrix(const Chart& chart, int p, const ScalarMat& m);

// Coordinates of a (p-1)-form / vector field on the increasing-index basis,
// and reconstruction.
ScalarVec form_coords(const AltTensor& a);
AltTensor form_from_coords(const Chart& chart, int degree, const ScalarVec& v);
ScalarVec vector_coords(const AltTensor& x);
AltTensor vector_from_coords(const Chart& chart, const ScalarVec& v);

} // namespace npb
