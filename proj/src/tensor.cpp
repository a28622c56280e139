#include "npbrane/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace npb {

int sort_index(MultiIndex& idx) {
    int sign = 1;
    for (size_t i = 1; i < idx.size(); ++i) {
        for (size_t j = i; j > 0 && idx[j] < idx[j - 1]; --j) {
            std::swap(idx[j], idx[j - 1]);
            sign = -sign;
        }
    }
    for (size_t i = 1; i < idx.size(); ++i)
        if (idx[i] == idx[i - 1]) return 0;
    return sign;
}

AltTensor::AltTensor(Chart chart, int degree, Variance variance)
    : chart_(std::move(chart)), degree_(degree), variance_(variance) {
    if (degree < 0 || degree > chart_.dim())
        throw std::invalid_argument("AltTensor: degree out of range");
}

AltTensor AltTensor::zero(const Chart& chart, int degree, Variance variance) {
    return AltTensor(chart, degree, variance);
}

AltTensor AltTensor::scalar(const Chart& chart, const ScalarFn& f, Variance variance) {
    AltTensor t(chart, 0, variance);
    t.add_term({}, f);
    return t;
}

AltTensor AltTensor::basis(const Chart& chart, Variance variance, const MultiIndex& idx) {
    AltTensor t(chart, (int)idx.size(), variance);
    t.add_term(idx, ScalarFn(chart.dim(), Rat(1)));
    return t;
}

AltTensor AltTensor::coordinate_vector(const Chart& chart, int i) {
    return basis(chart, Variance::vector_field, {i});
}

AltTensor AltTensor::coordinate_form(const Chart& chart, int i) {
    return basis(chart, Variance::form, {i});
}

void AltTensor::add_term(MultiIndex idx, const ScalarFn& f) {
    if ((int)idx.size() != degree_)
        throw std::invalid_argument("AltTensor::add_term: index length != degree");
    for (int i : idx)
        if (i < 0 || i >= chart_.dim())
            throw std::invalid_argument("AltTensor::add_term: index out of range");
    if (f.is_zero()) return;
    int sign = sort_index(idx);
    if (sign == 0) return;
    auto it = coeffs_.find(idx);
    ScalarFn v = (sign > 0) ? f : -f;
    if (it == coeffs_.end()) {
        coeffs_.emplace(std::move(idx), std::move(v));
    } else {
        it->second += v;
        if (it->second.is_zero()) coeffs_.erase(it);
    }
}

ScalarFn AltTensor::coeff(MultiIndex idx) const {
    int sign = sort_index(idx);
    if (sign == 0) return ScalarFn(chart_.dim());
    auto it = coeffs_.find(idx);
    if (it == coeffs_.end()) return ScalarFn(chart_.dim());
    return (sign > 0) ? it->second : -it->second;
}

AltTensor AltTensor::operator+(const AltTensor& o) const {
    if (chart_ != o.chart_ || degree_ != o.degree_ || variance_ != o.variance_)
        throw std::invalid_argument("AltTensor::operator+: shape mismatch");
    AltTensor r = *this;
    for (auto& [k, v] : o.coeffs_) r.add_term(k, v);
    return r;
}

AltTensor AltTensor::operator-() const {
    AltTensor r(chart_, degree_, variance_);
    for (auto& [k, v] : coeffs_) r.coeffs_.emplace(k, -v);
    return r;
}

AltTensor AltTensor::operator-(const AltTensor& o) const { return *this + (-o); }

AltTensor AltTensor::operator*(const ScalarFn& f) const {
    AltTensor r(chart_, degree_, variance_);
    if (f.is_zero()) return r;
    for (auto& [k, v] : coeffs_) {
        ScalarFn w = v * f;
        if (!w.is_zero()) r.coeffs_.emplace(k, std::move(w));
    }
    return r;
}

AltTensor AltTensor::operator*(const Rat& c) const {
    return *this * ScalarFn(chart_.dim(), c);
}

bool AltTensor::operator==(const AltTensor& o) const {
    return chart_ == o.chart_ && degree_ == o.degree_ &&
           variance_ == o.variance_ && coeffs_ == o.coeffs_;
}

std::string AltTensor::to_string() const {
    if (coeffs_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    for (auto& [k, v] : coeffs_) {
        if (!first) out << " + ";
        first = false;
        out << "(" << v.to_string(chart_) << ")";
        for (size_t i = 0; i < k.size(); ++i) {
            out << (i == 0 ? " " : "^");
            out << (variance_ == Variance::form ? "d" : "e_") << chart_.name(k[i]);
        }
    }
    return out.str();
}

AltTensor wedge(const AltTensor& a, const AltTensor& b) {
    if (a.chart() != b.chart()) throw std::invalid_argument("wedge: chart mismatch");
    if (a.variance() != b.variance())
        throw std::invalid_argument("wedge: variance mismatch");
    int p = a.degree() + b.degree();
    if (p > a.dim()) return AltTensor::zero(a.chart(), std::min(p, a.dim()), a.variance());
    AltTensor r(a.chart(), p, a.variance());
    for (auto& [ka, va] : a.coeffs())
        for (auto& [kb, vb] : b.coeffs()) {
            MultiIndex k = ka;
            k.insert(k.end(), kb.begin(), kb.end());
            r.add_term(std::move(k), va * vb);
        }
    return r;
}

namespace {

// Single-slot contraction by the i-th basis covector/vector: removes i from
// each index, with sign (-1)^position.
AltTensor contract_one(const AltTensor& t, int i) {
    AltTensor r(t.chart(), t.degree() - 1, t.variance());
    for (auto& [k, v] : t.coeffs()) {
        auto it = std::find(k.begin(), k.end(), i);
        if (it == k.end()) continue;
        int pos = (int)(it - k.begin());
        MultiIndex rest;
        rest.reserve(k.size() - 1);
        for (int j : k)
            if (j != i) rest.push_back(j);
        ScalarFn w = (pos % 2 == 0) ? v : -v;
        r.add_term(std::move(rest), w);
    }
    return r;
}

// Contraction of t by a decomposable basis index I = (i1<…<iq) under the
// nesting convention ι_{A∧B} = ι_B ∘ ι_A: apply i1 first, then i2, ….
AltTensor contract_basis(const AltTensor& t, const MultiIndex& idx) {
    AltTensor r = t;
    for (int i : idx) r = contract_one(r, i);
    return r;
}

AltTensor contract(const AltTensor& arg, const AltTensor& t, Variance arg_var) {
    if (arg.chart() != t.chart()) throw std::invalid_argument("interior: chart mismatch");
    if (arg.variance() != arg_var || t.variance() == arg_var)
        throw std::invalid_argument("interior: variance mismatch");
    if (arg.degree() > t.degree())
        throw std::invalid_argument("interior: contraction degree exceeds target");
    AltTensor r(t.chart(), t.degree() - arg.degree(), t.variance());
    for (auto& [k, v] : arg.coeffs()) {
        AltTensor part = contract_basis(t, k);
        r = r + part * v;
    }
    return r;
}

} // namespace

AltTensor interior(const AltTensor& alpha, const AltTensor& t) {
    return contract(alpha, t, Variance::form);
}

AltTensor interior_v(const AltTensor& x, const AltTensor& b) {
    return contract(x, b, Variance::vector_field);
}

AltTensor pi_sharp(const AltTensor& pi, const AltTensor& alpha) {
    return interior(alpha, pi);
}

AltTensor b_sharp(const AltTensor& b, const AltTensor& x) {
    return interior_v(x, b);
}

ScalarFn full_pairing(const AltTensor& b, const AltTensor& t) {
    if (b.chart() != t.chart() || b.degree() != t.degree() ||
        b.variance() != Variance::form || t.variance() != Variance::vector_field)
        throw std::invalid_argument("full_pairing: shape mismatch");
    ScalarFn s(b.dim());
    for (auto& [k, v] : b.coeffs()) {
        ScalarFn w = t.coeff(k);
        if (!w.is_zero()) s += v * w;
    }
    return s;
}

AltTensor ext_d(const AltTensor& b) {
    if (b.variance() != Variance::form)
        throw std::invalid_argument("ext_d: requires a form");
    if (b.degree() >= b.dim())
        return AltTensor::zero(b.chart(), b.dim(), Variance::form);
    AltTensor r(b.chart(), b.degree() + 1, Variance::form);
    for (auto& [k, v] : b.coeffs())
        for (int i = 0; i < b.dim(); ++i) {
            ScalarFn dv = v.derivative(i);
            if (dv.is_zero()) continue;
            MultiIndex idx;
            idx.reserve(k.size() + 1);
            idx.push_back(i);
            idx.insert(idx.end(), k.begin(), k.end());
            r.add_term(std::move(idx), dv);
        }
    return r;
}

AltTensor schouten(const AltTensor& a, const AltTensor& b) {
    if (a.chart() != b.chart()) throw std::invalid_argument("schouten: chart mismatch");
    if (a.variance() != Variance::vector_field || b.variance() != Variance::vector_field)
        throw std::invalid_argument("schouten: requires vector variance");
    int p = a.degree(), q = b.degree();
    int deg = p + q - 1;
    if (deg < 0) deg = 0;  // two functions: bracket vanishes
    AltTensor r(a.chart(), std::min(deg, a.dim()), Variance::vector_field);
    if (p + q - 1 > a.dim() || p + q - 1 < 0) return r;
    int n = a.dim();
    for (int k = 0; k < n; ++k) {
        AltTensor dxk = AltTensor::coordinate_form(a.chart(), k);
        // Odd-Poisson form with right derivatives: contracting the last slot
        // instead of the first costs (-1)^{deg-1} relative to ι_{dx^k}.
        if (p >= 1) {
            AltTensor ia = interior(dxk, a);
            AltTensor db(b.chart(), q, Variance::vector_field);
            for (auto& [kb, vb] : b.coeffs()) db.add_term(kb, vb.derivative(k));
            if (!ia.is_zero() && !db.is_zero()) {
                AltTensor term = wedge(ia, db);
                r = ((p - 1) % 2 == 0) ? r + term : r - term;
            }
        }
        if (q >= 1) {
            AltTensor ib = interior(dxk, b);
            AltTensor da(a.chart(), p, Variance::vector_field);
            for (auto& [ka, va] : a.coeffs()) da.add_term(ka, va.derivative(k));
            if (!ib.is_zero() && !da.is_zero()) {
                int s = (1 + (p - 1) * (q - 1) + (q - 1)) % 2;
                AltTensor term = wedge(ib, da);
                r = (s == 0) ? r + term : r - term;
            }
        }
    }
    return r;
}

AltTensor lie(const AltTensor& x, const AltTensor& t) {
    if (x.variance() != Variance::vector_field || x.degree() != 1)
        throw std::invalid_argument("lie: X must be a vector field");
    if (t.variance() == Variance::form) {
        if (t.degree() == 0) return interior_v(x, ext_d(t));  // L_X f = X(f)
        AltTensor a = ext_d(interior_v(x, t));
        AltTensor b = interior_v(x, ext_d(t));
        return a + b;
    }
    return schouten(x, t);
}

bool decomposable(const AltTensor& t) {
    if (t.variance() != Variance::vector_field || t.degree() < 1)
        throw std::invalid_argument("decomposable: requires a multivector of degree >= 1");
    int p = t.degree(), n = t.dim();
    if (p == 1 || p == n || p == n - 1) return true;
    // Enumerate increasing (p+1)-subsets K and increasing (p-1)-tuples J;
    // the antisymmetrized product must vanish for every choice.
    std::vector<int> K(p + 1), J(p - 1);
    ScalarFn zero(n);
    auto next_combo = [&](std::vector<int>& c, int limit) {
        int k = (int)c.size();
        for (int i = k - 1; i >= 0; --i) {
            if (c[i] < limit - (k - i)) {
                ++c[i];
                for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
                return true;
            }
        }
        return false;
    };
    for (int i = 0; i <= p; ++i) K[i] = i;
    do {
        for (int i = 0; i + 1 < p; ++i) J[i] = i;
        if (p - 1 > 0) {
            do {
                ScalarFn sum(n);
                for (int m = 0; m <= p; ++m) {
                    MultiIndex first;
                    for (int i = 0; i <= p; ++i)
                        if (i != m) first.push_back(K[i]);
                    MultiIndex second;
                    second.push_back(K[m]);
                    second.insert(second.end(), J.begin(), J.end());
                    ScalarFn prod = t.coeff(first) * t.coeff(std::move(second));
                    sum = (m % 2 == 0) ? sum + prod : sum - prod;
                }
                if (sum != zero) return false;
            } while (next_combo(J, n));
        }
    } while (next_combo(K, n));
    return true;
}

} // namespace npb
