#pragma once

#include <vector>

#include "npbrane/scalarfn.hpp"

namespace npb {

// Dense matrices over the rational-function field, row-major.
using ScalarMat = std::vector<std::vector<ScalarFn>>;
using ScalarVec = std::vector<ScalarFn>;

ScalarMat identity_mat(int n, int nvars);
ScalarMat mat_mul(const ScalarMat& a, const ScalarMat& b);
ScalarMat mat_add(const ScalarMat& a, const ScalarMat& b);
ScalarVec mat_apply(const ScalarMat& a, const ScalarVec& v);

ScalarFn mat_det(ScalarMat m);
// Exact inverse by Gauss-Jordan elimination; throws SingularOperator when the
// determinant is the zero function.
ScalarMat mat_inverse(ScalarMat m);
// Solve m x = rhs exactly; throws SingularOperator for singular m.
ScalarVec mat_solve(ScalarMat m, ScalarVec rhs);

// Exact matrices over Q.
using RatMat = std::vector<std::vector<Rat>>;

// Reduced row echelon form in place; returns the rank.
int rref(RatMat& m);

// All strictly increasing k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> index_combinations(int n, int k);

} // namespace npb
