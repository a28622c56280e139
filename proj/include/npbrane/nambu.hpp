#pragma once

#include <map>
#include <optional>
#include <vector>

#include "npbrane/dorfman.hpp"

namespace npb {

// Verdict of the componentwise fundamental-identity conditions.
struct FIReport {
    bool alg_ok = false;
    bool diff_ok = false;
    bool is_decomposable = false;
    // Index tuples (1-based, concatenated i- and j-groups) of failures.
    std::vector<std::vector<int>> witnesses;
};

// {f1,...,fp} = π(df1∧...∧dfp).
ScalarFn np_bracket(const AltTensor& pi, const std::vector<ScalarFn>& fs);

// Hamiltonian vector field X_{f1..f_{p-1}} with X(h) = {f1,..,f_{p-1},h}.
AltTensor hamiltonian_vf(const AltTensor& pi, const std::vector<ScalarFn>& fs);

// LHS - RHS of the fundamental identity on scalar probes, minus the c-term
// when a (p+1)-form twist is supplied.
ScalarFn fi_defect(const AltTensor& pi, const std::vector<ScalarFn>& fs,
                   const std::vector<ScalarFn>& gs,
                   const std::optional<AltTensor>& c = std::nullopt);

// Componentwise conditions; together they decide Nambu-Poisson-ness.
bool check_alg(const AltTensor& pi, std::vector<std::vector<int>>* witnesses = nullptr);
bool check_diff(const AltTensor& pi, std::vector<std::vector<int>>* witnesses = nullptr);

FIReport fi_report(const AltTensor& pi);

// Intrinsic fundamental-identity defects on (p-1)-form probes.
enum class FIVariant { form_i, form_iii };
AltTensor fi_intrinsic(const AltTensor& pi, const AltTensor& alpha,
                       const AltTensor& beta, FIVariant variant);

// Koszul-type bracket [α,β]_π = L_{π♯α}β - ι_{π♯β}dα (+ ι_{π♯α∧π♯β}c).
AltTensor form_bracket(const AltTensor& pi, const AltTensor& alpha,
                       const AltTensor& beta,
                       const std::optional<AltTensor>& c = std::nullopt);

// [π♯α, π♯β] - π♯([α,β]_{π,c}): zero iff the graph is closed on this probe.
AltTensor graph_closure_defect(const AltTensor& pi, const AltTensor& alpha,
                               const AltTensor& beta,
                               const std::optional<AltTensor>& c = std::nullopt);

// The twisted differential-condition contribution
// c_{l1..l_{p+1}} π^{i1..i_{p-1} l1} π^{j1..j_{p-1} l2} π^{l3..l_{p+1} jp},
// keyed by the concatenated free indices (i-group, j-group, jp), 0-based.
std::map<std::vector<int>, ScalarFn> twisted_c_term(const AltTensor& pi,
                                                    const AltTensor& c);

// Matrix of π♯ on the increasing-index bases (n × C(n,p-1)).
ScalarMat pi_sharp_matrix(const AltTensor& pi);

// Gauge transform π^b with π^b♯ = π♯ ∘ (1 + b♯∘π♯)^{-1}; throws
// SingularOperator when the endomorphism is singular. For decomposable π with
// p ≥ 3 the scalar formula (1 + (-1)^{p-1} b(π))^{-1} π is cross-checked.
AltTensor gauge_transform(const AltTensor& pi, const AltTensor& b);

} // namespace npb
