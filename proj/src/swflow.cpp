#include "npbrane/swflow.hpp"

#include <cmath>

namespace npb {

namespace {

Poly extend_poly(const Poly& p) {
    Poly r(p.nvars() + 1);
    for (const auto& [m, c] : p.terms()) {
        Mono e = m;
        e.push_back(0);
        r.set_term(e, c);
    }
    return r;
}

// Substitute the last variable by a rational constant.
Poly subst_last_poly(const Poly& p, const Rat& value) {
    int n = p.nvars() - 1;
    Poly r(n);
    for (const auto& [m, c] : p.terms()) {
        Rat coeff = c;
        for (int k = 0; k < m[n]; ++k) coeff *= value;
        if (coeff == 0) continue;
        Mono e(m.begin(), m.end() - 1);
        Poly mono(n);
        mono.set_term(e, coeff);
        r += mono;
    }
    return r;
}

// Spatial exterior derivative on the t-extended chart: d over the first n
// variables only (t is a parameter, not a coordinate).
AltTensor spatial_d(const AltTensor& b) {
    const Chart& c = b.chart();
    int n = c.dim() - 1;
    if (b.degree() >= n) return AltTensor::zero(c, n, Variance::form);
    AltTensor r(c, b.degree() + 1, Variance::form);
    for (const auto& [idx, f] : b.coeffs())
        for (int i = 0; i < n; ++i) {
            ScalarFn df = f.derivative(i);
            if (df.is_zero()) continue;
            MultiIndex e{i};
            e.insert(e.end(), idx.begin(), idx.end());
            r.add_term(e, df);
        }
    return r;
}

// Parameterized Lie derivative of a form along a spatial vector field.
AltTensor spatial_lie(const AltTensor& x, const AltTensor& b) {
    if (b.degree() == 0) return interior_v(x, spatial_d(b));
    return interior_v(x, spatial_d(b)) + spatial_d(interior_v(x, b));
}

// Coefficient-wise ∂/∂t.
AltTensor t_derivative(const AltTensor& a) {
    int tvar = a.chart().dim() - 1;
    AltTensor r = AltTensor::zero(a.chart(), a.degree(), a.variance());
    for (const auto& [idx, f] : a.coeffs()) {
        ScalarFn df = f.derivative(tvar);
        if (!df.is_zero()) r.add_term(idx, df);
    }
    return r;
}

std::vector<double> to_doubles(const std::vector<Rat>& v) {
    std::vector<double> r;
    r.reserve(v.size());
    for (const auto& q : v) r.push_back(rat_to_double(q));
    return r;
}

} // namespace

Chart flow_chart(const Chart& chart) { return chart.extended("t"); }

ScalarFn extend_scalar(const ScalarFn& f) {
    return ScalarFn(extend_poly(f.num()), extend_poly(f.den()));
}

AltTensor extend_tensor(const AltTensor& a) {
    AltTensor r(flow_chart(a.chart()), a.degree(), a.variance());
    for (const auto& [idx, f] : a.coeffs()) r.add_term(idx, extend_scalar(f));
    return r;
}

ScalarFn substitute_last(const ScalarFn& f, const Rat& value) {
    Poly den = subst_last_poly(f.den(), value);
    if (den.is_zero())
        throw PoleEncountered("substitute_last: denominator vanishes at t = value");
    return ScalarFn(subst_last_poly(f.num(), value), den);
}

AltTensor substitute_last(const AltTensor& a, const Rat& value) {
    Chart base(std::vector<std::string>(a.chart().names().begin(),
                                        a.chart().names().end() - 1));
    AltTensor r(base, a.degree(), a.variance());
    for (const auto& [idx, f] : a.coeffs()) {
        ScalarFn g = substitute_last(f, value);
        if (!g.is_zero()) r.add_term(idx, g);
    }
    return r;
}

AltTensor pi_t(const AltTensor& pi, const AltTensor& b) {
    const int p = pi.degree();
    if (b.degree() != p || b.variance() != Variance::form)
        throw std::invalid_argument("pi_t: b must be a p-form");
    AltTensor pie = extend_tensor(pi);
    AltTensor be = extend_tensor(b);
    const Chart& ce = pie.chart();
    int ne = ce.dim();

    ScalarMat mp = pi_sharp_matrix(pie);
    ScalarMat bm = b_sharp_matrix(be);
    ScalarFn t = ScalarFn::variable(ne, ne - 1);
    ScalarMat tbp = mat_mul(bm, mp);
    for (auto& row : tbp)
        for (auto& e : row) e = t * e;
    ScalarMat op = mat_add(identity_mat((int)bm.size(), ne), tbp);
    ScalarMat m = mat_mul(mp, mat_inverse(op)); // throws SingularOperator
    return tensor_from_sharp_matrix(ce, p, m);
}

AltTensor pi_t_at(const AltTensor& pi, const AltTensor& b, const Rat& t) {
    return substitute_last(pi_t(pi, b), t);
}

AltTensor ode_defect(const AltTensor& pi, const AltTensor& b) {
    AltTensor pt = pi_t(pi, b);
    ScalarMat mt = pi_sharp_matrix(pt);
    ScalarMat bm = b_sharp_matrix(extend_tensor(b));
    ScalarMat rhs = mat_mul(mt, mat_mul(bm, mt));
    // π̇_t + π_t♯∘b♯∘π_t♯-contraction, reassembled as a tensor.
    AltTensor dot = t_derivative(pt);
    return dot + tensor_from_sharp_matrix(pt.chart(), pi.degree(), rhs);
}

FlowResult flow(const AltTensor& pi, const AltTensor& a, const FlowConfig& cfg,
                const std::vector<Rat>& x0) {
    const int n = pi.dim();
    if ((int)x0.size() != n) throw std::invalid_argument("flow: bad point size");
    if (!(cfg.step > 0)) throw StepUnderflow("flow: step must be positive");
    if (cfg.step > cfg.t_end) throw std::invalid_argument("flow: step > t_end");

    AltTensor b = ext_d(a);
    // The semiclassical flow field; the sign matches the pairing conventions
    // used by pi_sharp so that pushing pi along the time-1 map reproduces the
    // gauge-transformed tensor.
    AltTensor vt = pi_sharp(pi_t(pi, b), extend_tensor(a)) * ScalarFn(n + 1, Rat(-1));

    // Symbolic components of the field and its spatial Jacobian.
    std::vector<ScalarFn> v(n, ScalarFn(n + 1));
    for (const auto& [idx, f] : vt.coeffs()) v[idx[0]] = f;
    std::vector<std::vector<ScalarFn>> dv(n, std::vector<ScalarFn>(n, ScalarFn(n + 1)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) dv[i][j] = v[i].derivative(j);

    auto eval_all = [&](const std::vector<double>& x, double t,
                        std::vector<double>& vx,
                        std::vector<std::vector<double>>& jx) {
        std::vector<double> pt = x;
        pt.push_back(t);
        try {
            for (int i = 0; i < n; ++i) {
                vx[i] = v[i].eval(pt);
                for (int j = 0; j < n; ++j) jx[i][j] = dv[i][j].eval(pt);
            }
        } catch (const PoleError&) {
            throw PoleEncountered("flow: field evaluation hit a pole");
        }
        for (int i = 0; i < n; ++i) {
            if (!std::isfinite(vx[i]))
                throw PoleEncountered("flow: field evaluation hit a pole");
            for (int j = 0; j < n; ++j)
                if (!std::isfinite(jx[i][j]))
                    throw PoleEncountered("flow: Jacobian evaluation hit a pole");
        }
    };

    std::vector<double> x = to_doubles(x0);
    std::vector<std::vector<double>> J(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) J[i][i] = 1.0;

    const double t_end = rat_to_double(cfg.t_end);
    const double h0 = rat_to_double(cfg.step);
    double t = 0.0;
    std::vector<double> vx(n);
    std::vector<std::vector<double>> jx(n, std::vector<double>(n));
    // Stage buffers for (x, J) jointly.
    auto stage = [&](const std::vector<double>& xs,
                     const std::vector<std::vector<double>>& Js, double ts,
                     std::vector<double>& kx, std::vector<std::vector<double>>& kJ) {
        eval_all(xs, ts, vx, jx);
        kx = vx;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l) s += jx[i][l] * Js[l][j];
                kJ[i][j] = s;
            }
    };

    std::vector<double> k1(n), k2(n), k3(n), k4(n), xs(n);
    std::vector<std::vector<double>> K1(n, std::vector<double>(n)), K2 = K1,
                                     K3 = K1, K4 = K1, Js = K1;
    while (t < t_end - 1e-15) {
        double h = std::min(h0, t_end - t);
        if (h < 1e-14) throw StepUnderflow("flow: step underflow");
        stage(x, J, t, k1, K1);
        for (int i = 0; i < n; ++i) xs[i] = x[i] + 0.5 * h * k1[i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) Js[i][j] = J[i][j] + 0.5 * h * K1[i][j];
        stage(xs, Js, t + 0.5 * h, k2, K2);
        for (int i = 0; i < n; ++i) xs[i] = x[i] + 0.5 * h * k2[i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) Js[i][j] = J[i][j] + 0.5 * h * K2[i][j];
        stage(xs, Js, t + 0.5 * h, k3, K3);
        for (int i = 0; i < n; ++i) xs[i] = x[i] + h * k3[i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) Js[i][j] = J[i][j] + h * K3[i][j];
        stage(xs, Js, t + h, k4, K4);
        for (int i = 0; i < n; ++i)
            x[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                J[i][j] += h / 6.0 *
                           (K1[i][j] + 2 * K2[i][j] + 2 * K3[i][j] + K4[i][j]);
        t += h;
    }

    FlowResult r;
    r.endpoint = x;
    r.jacobian = J;
    return r;
}

double sw_verify(const AltTensor& pi, const AltTensor& a, const FlowConfig& cfg,
                 const std::vector<std::vector<Rat>>& samples) {
    const int n = pi.dim();
    const int p = pi.degree();
    // The time-1 flow map pushes pi forward onto the gauge-transformed tensor:
    // Dφ(x)·π(x) = π_1(φ(x)).
    AltTensor target = pi_t_at(pi, ext_d(a), Rat(1));
    const auto Ks = index_combinations(n, p);

    double worst = 0.0;
    for (const auto& s : samples) {
        FlowResult fr = flow(pi, a, cfg, s);
        std::vector<Rat> srat = s;
        std::vector<double> x0d = to_doubles(srat);
        std::vector<double> yd = fr.endpoint;

        for (const auto& K : Ks) {
            // (Dφ·π)^K(x0) = Σ_L det(J[K,L]) π^L(x0).
            double push = 0.0;
            for (const auto& L : Ks) {
                double piL;
                try {
                    piL = pi.coeff(L).eval(x0d);
                } catch (const PoleError&) {
                    throw PoleEncountered("sw_verify: source evaluation hit a pole");
                }
                if (piL == 0.0) continue;
                // p x p minor determinant, rows K, cols L.
                std::vector<std::vector<double>> minor(p, std::vector<double>(p));
                for (int i = 0; i < p; ++i)
                    for (int j = 0; j < p; ++j)
                        minor[i][j] = fr.jacobian[K[i]][L[j]];
                double det = 1.0;
                for (int c = 0; c < p; ++c) {
                    int piv = c;
                    for (int r2 = c + 1; r2 < p; ++r2)
                        if (std::fabs(minor[r2][c]) > std::fabs(minor[piv][c]))
                            piv = r2;
                    if (minor[piv][c] == 0.0) { det = 0.0; break; }
                    if (piv != c) { std::swap(minor[piv], minor[c]); det = -det; }
                    det *= minor[c][c];
                    for (int r2 = c + 1; r2 < p; ++r2) {
                        double f = minor[r2][c] / minor[c][c];
                        for (int cc = c; cc < p; ++cc)
                            minor[r2][cc] -= f * minor[c][cc];
                    }
                }
                push += det * piL;
            }
            if (!std::isfinite(push))
                throw PoleEncountered("sw_verify: source evaluation hit a pole");
            double want;
            try {
                want = target.coeff(K).eval(yd);
            } catch (const PoleError&) {
                throw PoleEncountered("sw_verify: target evaluation hit a pole");
            }
            if (!std::isfinite(want))
                throw PoleEncountered("sw_verify: target evaluation hit a pole");
            worst = std::max(worst, std::fabs(push - want));
        }
    }
    return worst;
}

AltTensor mu_lambda(const AltTensor& pi, const AltTensor& a,
                    const AltTensor& lambda, int K) {
    const int p = pi.degree();
    if (lambda.degree() != p - 2 || lambda.variance() != Variance::form)
        throw std::invalid_argument("mu_lambda: lambda must be a (p-2)-form");
    if (K < 0) throw std::invalid_argument("mu_lambda: K >= 0 required");

    // Series generator: minus the Lie derivative along the semiclassical flow
    // field plus d/dt.  The flow field carries the opposite sign of pi_sharp
    // under the pairing conventions used here (see flow()), so the two minus
    // signs cancel.
    AltTensor vt = pi_sharp(pi_t(pi, ext_d(a)), extend_tensor(a));
    AltTensor term = extend_tensor(lambda);
    AltTensor acc = AltTensor::zero(term.chart(), term.degree(), Variance::form);
    Rat fact(1); // (k+1)!
    for (int k = 0;; ++k) {
        fact *= Rat(k + 1);
        acc = acc + term * (Rat(1) / fact);
        if (k == K) break;
        term = t_derivative(term) + spatial_lie(vt, term);
    }
    return substitute_last(acc, Rat(0));
}

} // namespace npb
