#pragma once

#include <map>
#include <string>
#include <vector>

#include "npbrane/scalarfn.hpp"

namespace npb {

enum class Variance { vector_field, form };

// Strictly increasing list of 0-based coordinate indices.
using MultiIndex = std::vector<int>;

// Sort an index list into increasing order, returning the permutation sign;
// 0 when two entries coincide.
int sort_index(MultiIndex& idx);

// Sparse alternating tensor (p-vector field or p-form) on a single chart.
// Coefficients are stored only on strictly increasing multi-indices; a
// degree-0 tensor is a scalar carried on the empty index.
class AltTensor {
public:
    AltTensor() : chart_(0), degree_(0), variance_(Variance::form) {}
    AltTensor(Chart chart, int degree, Variance variance);

    static AltTensor zero(const Chart& chart, int degree, Variance variance);
    static AltTensor scalar(const Chart& chart, const ScalarFn& f, Variance variance);
    static AltTensor basis(const Chart& chart, Variance variance, const MultiIndex& idx);
    // Convenience: coordinate vector field ∂_i and coordinate form dx_i (0-based i).
    static AltTensor coordinate_vector(const Chart& chart, int i);
    static AltTensor coordinate_form(const Chart& chart, int i);

    const Chart& chart() const { return chart_; }
    int degree() const { return degree_; }
    Variance variance() const { return variance_; }
    bool is_zero() const { return coeffs_.empty(); }
    int dim() const { return chart_.dim(); }

    const std::map<MultiIndex, ScalarFn>& coeffs() const { return coeffs_; }

    // Adds f on the (possibly unordered) index, folding in the permutation sign.
    void add_term(MultiIndex idx, const ScalarFn& f);
    // Coefficient on an arbitrary index list (signed); zero when absent/repeated.
    ScalarFn coeff(MultiIndex idx) const;

    AltTensor operator+(const AltTensor& o) const;
    AltTensor operator-(const AltTensor& o) const;
    AltTensor operator-() const;
    AltTensor operator*(const ScalarFn& f) const;
    AltTensor operator*(const Rat& c) const;
    bool operator==(const AltTensor& o) const;
    bool operator!=(const AltTensor& o) const { return !(*this == o); }

    std::string to_string() const;

private:
    Chart chart_;
    int degree_;
    Variance variance_;
    std::map<MultiIndex, ScalarFn> coeffs_;
};

// Graded-commutative wedge product; arguments must share chart and variance.
AltTensor wedge(const AltTensor& a, const AltTensor& b);

// Contraction of the first q slots of a p-vector by a q-form: ι_α T.
// Nesting convention ι_{α∧β} = ι_β ∘ ι_α.
AltTensor interior(const AltTensor& alpha, const AltTensor& t);
// Contraction of the first q slots of a p-form by a q-vector: ι_X B.
AltTensor interior_v(const AltTensor& x, const AltTensor& b);

// π♯α = ι_α π and b♯X = ι_X b.
AltTensor pi_sharp(const AltTensor& pi, const AltTensor& alpha);
AltTensor b_sharp(const AltTensor& b, const AltTensor& x);

// Full pairing of a p-form with a p-vector: Σ over ordered indices b_I π^I.
ScalarFn full_pairing(const AltTensor& b, const AltTensor& t);

// Exterior derivative of a form.
AltTensor ext_d(const AltTensor& b);

// Lie derivative along a vector field X (degree-1 vector): Cartan formula on
// forms, Schouten bracket on multivectors.
AltTensor lie(const AltTensor& x, const AltTensor& t);

// Schouten bracket of multivector fields (degree p+q-1).
AltTensor schouten(const AltTensor& a, const AltTensor& b);

// Decomposability test: full antisymmetrization π^{[i1…ip}π^{j1]…jp} = 0.
bool decomposable(const AltTensor& t);

} // namespace npb
