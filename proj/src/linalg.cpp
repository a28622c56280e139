#include "npbrane/linalg.hpp"

namespace npb {

ScalarMat identity_mat(int n, int nvars) {
    ScalarMat m(n, ScalarVec(n, ScalarFn(nvars)));
    for (int i = 0; i < n; ++i) m[i][i] = ScalarFn(nvars, Rat(1));
    return m;
}

ScalarMat mat_mul(const ScalarMat& a, const ScalarMat& b) {
    int r = (int)a.size(), k = (int)b.size(), c = (int)b[0].size();
    int nvars = a[0][0].nvars();
    ScalarMat m(r, ScalarVec(c, ScalarFn(nvars)));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) {
            ScalarFn s(nvars);
            for (int l = 0; l < k; ++l)
                if (!a[i][l].is_zero() && !b[l][j].is_zero()) s += a[i][l] * b[l][j];
            m[i][j] = std::move(s);
        }
    return m;
}

ScalarMat mat_add(const ScalarMat& a, const ScalarMat& b) {
    ScalarMat m = a;
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < m[i].size(); ++j) m[i][j] += b[i][j];
    return m;
}

ScalarVec mat_apply(const ScalarMat& a, const ScalarVec& v) {
    int nvars = v.empty() ? (a.empty() ? 0 : a[0][0].nvars()) : v[0].nvars();
    ScalarVec r(a.size(), ScalarFn(nvars));
    for (size_t i = 0; i < a.size(); ++i) {
        ScalarFn s(nvars);
        for (size_t j = 0; j < v.size(); ++j)
            if (!a[i][j].is_zero() && !v[j].is_zero()) s += a[i][j] * v[j];
        r[i] = std::move(s);
    }
    return r;
}

ScalarFn mat_det(ScalarMat m) {
    int n = (int)m.size();
    int nvars = n ? m[0][0].nvars() : 0;
    ScalarFn det(nvars, Rat(1));
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (!m[r][col].is_zero()) { pivot = r; break; }
        if (pivot < 0) return ScalarFn(nvars);
        if (pivot != col) {
            std::swap(m[pivot], m[col]);
            det = -det;
        }
        det *= m[col][col];
        ScalarFn inv = m[col][col].inverse();
        for (int r = col + 1; r < n; ++r) {
            if (m[r][col].is_zero()) continue;
            ScalarFn f = m[r][col] * inv;
            for (int c = col; c < n; ++c) m[r][c] -= f * m[col][c];
        }
    }
    return det;
}

ScalarMat mat_inverse(ScalarMat m) {
    int n = (int)m.size();
    int nvars = n ? m[0][0].nvars() : 0;
    ScalarMat inv = identity_mat(n, nvars);
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        for (int r = col; r < n; ++r)
            if (!m[r][col].is_zero()) { pivot = r; break; }
        if (pivot < 0) throw SingularOperator("mat_inverse: singular matrix");
        std::swap(m[pivot], m[col]);
        std::swap(inv[pivot], inv[col]);
        ScalarFn pinv = m[col][col].inverse();
        for (int c = 0; c < n; ++c) {
            m[col][c] *= pinv;
            inv[col][c] *= pinv;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col || m[r][col].is_zero()) continue;
            ScalarFn f = m[r][col];
            for (int c = 0; c < n; ++c) {
                m[r][c] -= f * m[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

ScalarVec mat_solve(ScalarMat m, ScalarVec rhs) {
    ScalarMat inv = mat_inverse(std::move(m));
    return mat_apply(inv, rhs);
}

int rref(RatMat& m) {
    int rows = (int)m.size();
    int cols = rows ? (int)m[0].size() : 0;
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r)
            if (m[r][col] != 0) { pivot = r; break; }
        if (pivot < 0) continue;
        std::swap(m[pivot], m[rank]);
        Rat pv = m[rank][col];
        for (int c = 0; c < cols; ++c) m[rank][c] /= pv;
        for (int r = 0; r < rows; ++r) {
            if (r == rank || m[r][col] == 0) continue;
            Rat f = m[r][col];
            for (int c = 0; c < cols; ++c) m[r][c] -= f * m[rank][c];
        }
        ++rank;
    }
    return rank;
}

std::vector<std::vector<int>> index_combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> c(k);
    for (int i = 0; i < k; ++i) c[i] = i;
    while (true) {
        out.push_back(c);
        int i = k - 1;
        while (i >= 0 && c[i] == n - (k - i)) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
    return out;
}

} // namespace npb
