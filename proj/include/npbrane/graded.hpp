#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "npbrane/dorfman.hpp"
#include "npbrane/tensor.hpp"

namespace npb {

// The three graded symplectic phase spaces:
//   poisson  : T*[1]V            — coordinates X^i, χ_i
//   membrane : T*[p]T[1]V        — X^i, ψ^i, χ_i, F_i
//   pbrane   : T*[p]Λ^{p-1}[p-1]T[1]V — additionally G_I, H^I, η^I, A_I
//              with I a strictly increasing (p-1) multi-index
enum class Space { poisson, membrane, pbrane };

enum class GenKind { psi, chi, f_mom, g_mom, h_coord, eta, a_gauge };

struct NonTerminating : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A chart of graded coordinates over a degree-0 base chart.  Generators are
// numbered contiguously per kind; X^i are not generators — polynomial
// X-dependence lives in the rational-function coefficients.
class GradedChart {
public:
    GradedChart(Chart base, int p, Space space);

    const Chart& base() const { return base_; }
    int p() const { return p_; }
    Space space() const { return space_; }
    int dim() const { return base_.dim(); }
    // Degree of the symplectic form: 1 for T*[1]V, p otherwise.
    int omega_degree() const { return space_ == Space::poisson ? 1 : p_; }

    bool has_kind(GenKind k) const;
    int num_gens() const { return num_gens_; }
    int gen_degree(int id) const;
    bool gen_odd(int id) const { return gen_degree(id) % 2 != 0; }
    GenKind gen_kind(int id) const;
    // Position of the generator inside its kind block.
    int gen_rank(int id) const;
    // Coordinate indices carried by the generator (size 1 or p-1).
    const MultiIndex& gen_index(int id) const;
    std::string gen_name(int id) const;

    int id(GenKind k, int rank) const;
    int id(GenKind k, const MultiIndex& idx) const;

    // Increasing (p-1) multi-indices, shared by G, H, η, A.
    const std::vector<MultiIndex>& multi_indices() const { return multi_; }
    int multi_count() const { return (int)multi_.size(); }
    int multi_rank(const MultiIndex& idx) const;

    bool operator==(const GradedChart& o) const;
    bool operator!=(const GradedChart& o) const { return !(*this == o); }

private:
    Chart base_;
    int p_;
    Space space_;
    std::vector<MultiIndex> multi_;
    std::vector<int> kind_offset_; // indexed by GenKind, -1 when absent
    int num_gens_;
};

// Polynomial in the graded generators with rational-function coefficients in
// the base coordinates.  Words are kept in canonical (id-sorted) order with
// Koszul signs absorbed; odd generators are nilpotent.
class GradedPoly {
public:
    explicit GradedPoly(GradedChart chart) : chart_(std::move(chart)) {}

    static GradedPoly zero(const GradedChart& c) { return GradedPoly(c); }
    static GradedPoly scalar(const GradedChart& c, const ScalarFn& f);
    static GradedPoly generator(const GradedChart& c, int id);

    const GradedChart& chart() const { return chart_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<std::vector<int>, ScalarFn>& terms() const { return terms_; }

    // Adds coeff·word where the word may be in any order; folds the Koszul
    // sign of sorting it and drops squares of odd generators.
    void add_term(std::vector<int> word, const ScalarFn& coeff);

    int term_degree(const std::vector<int>& word) const;
    bool is_homogeneous() const;
    // Degree of a homogeneous nonzero polynomial; throws otherwise.
    int degree() const;

    GradedPoly operator+(const GradedPoly& o) const;
    GradedPoly operator-(const GradedPoly& o) const;
    GradedPoly operator-() const;
    GradedPoly operator*(const GradedPoly& o) const;
    GradedPoly operator*(const ScalarFn& f) const;
    GradedPoly operator*(const Rat& c) const;
    bool operator==(const GradedPoly& o) const;
    bool operator!=(const GradedPoly& o) const { return !(*this == o); }

    std::string to_string() const;

private:
    GradedChart chart_;
    std::map<std::vector<int>, ScalarFn> terms_;
};

// Graded left/right derivatives with respect to a generator, and the
// coefficient derivative along a base coordinate.
GradedPoly left_derivative(const GradedPoly& f, int gen_id);
GradedPoly right_derivative(const GradedPoly& f, int gen_id);
GradedPoly x_derivative(const GradedPoly& f, int i);

// Graded Poisson bracket of degree -omega_degree() determined by the Darboux
// pairs {F_i, X^i}, {ψ^i, χ_i}, {G_I, H^I}, {η^I, A_I} (resp. {χ_i, X^i} on
// T*[1]V).  Signs are pinned by the derived-bracket correspondence with the
// dorfman module.
GradedPoly gpoisson(const GradedPoly& f, const GradedPoly& g);

// {f,{g,h}} - {{f,g},h} - (-1)^{(|f|+p)(|g|+p)} {g,{f,h}}.
GradedPoly jacobi_defect(const GradedPoly& f, const GradedPoly& g,
                         const GradedPoly& h);

// {S,S}; S must be homogeneous of degree omega_degree()+1.
GradedPoly master_defect(const GradedPoly& S);

// Σ_{I increasing} α_I ψ^I for a form on the base (membrane / pbrane charts).
GradedPoly lift_form(const GradedChart& c, const AltTensor& alpha);
// Σ_{I increasing} t^I χ_I for a multivector (T*[1]V chart).
GradedPoly lift_multivector(const GradedChart& c, const AltTensor& t);
// ẽ = (lift of the form part) + v^i χ_i for a section (X, ω).
GradedPoly lift_section(const GradedChart& c, const Section& e);
// Inverse of lift_section on degree p-1 functions of ψ and χ only.
Section lower_section(const GradedChart& c, const GradedPoly& f);

// S = -ψ^i F_i [+ G_I η^I on the pbrane chart] + Σ c_I ψ^I.
GradedPoly twdorf_hamiltonian(const GradedChart& c,
                              const std::optional<AltTensor>& cform = {});

// γ_0 = -ψ^i F_i + Σ_I G_I (η^I - ψ^I) on the pbrane chart.
GradedPoly gamma0(const GradedChart& c);
// γ = γ_0 + Σ c_I ψ^I.
GradedPoly gamma_bulk(const GradedChart& c, const AltTensor& cform);

// {{S, ẽ1}, ẽ2}; with the TwDorf S this is the (twisted) Dorfman bracket.
GradedPoly derived_bracket(const GradedPoly& S, const GradedPoly& e1,
                           const GradedPoly& e2);
// {ẽ1, ẽ2} = lift of the pairing ⟨e1,e2⟩ (with the constant pinned in the
// implementation), and {{S,ẽ},f} = ρ(e)f for base functions f.
bool pairing_check(const GradedChart& c, const Section& e1, const Section& e2);
bool anchor_check(const GradedPoly& S, const Section& e, const ScalarFn& f);

// Σ_{k<=K} δ_α^k f / k! where δ_α = {α,·}, stopping at the first vanishing
// term; throws NonTerminating when no term vanishes by max_order.
GradedPoly canonical_transform(const GradedPoly& alpha, const GradedPoly& f,
                               int max_order = -1);

// The degree-p gauge generator built from a p-form b on the base:
//   α = (1/p)(Σ b_{iK} ψ^i η^K - Σ ∂_i b_{jK} ψ^i ψ^j H^K).
GradedPoly alpha_gauge(const GradedChart& c, const AltTensor& b);
// β = Σ_{K,j} π^{Kj} A_K χ_j for a p-vector π.
GradedPoly beta_boundary(const GradedChart& c, const AltTensor& pi);

// Boundary loci of the pbrane chart.
enum class Locus { L, Lprime, Lpi };
// Substitutes the locus equations (Lpi needs the p-vector); Lprime and Lpi
// additionally reduce modulo the χA antisymmetry relations.
GradedPoly restrict_to(const GradedPoly& f, Locus which,
                       const AltTensor* pi = nullptr);
// Canonical residual of the words A…Aχ modulo the relations
// χ_{i1} A_{i2…ip} + χ_{ik} A_{i2…i1…ip} = 0 (all index swaps).
GradedPoly theta_reduce(const GradedPoly& f);

// Θ-reduced components of γ_{c,π}|_{L'_π}; empty iff the boundary
// obstruction vanishes.
std::map<std::vector<int>, ScalarFn> boundary_defect(const AltTensor& pi,
                                                     const AltTensor& cform);

// ε_t = e^{-δ_{β'_t}} α - β̇'_t restricted to L' and Θ-reduced, over the
// t-extended base chart; pit is the closed-form family π'_t from the swflow
// module and b the p-form generating α.
GradedPoly epsilon_t(const AltTensor& pit, const AltTensor& b);

// Euler vector field action: E f = Σ_a |z^a| z^a ∂f/∂z^a (= |f| f).
GradedPoly euler(const GradedPoly& f);
// d(ι_E ω / k) = ω for the chart's canonical ω.
bool check_symplectic_potential(const GradedChart& c);
// ι_E ι_Q ω / (k+1) recovers S for Q = {S,·}.
bool check_hamiltonian_recovery(const GradedPoly& S);

} // namespace npb
