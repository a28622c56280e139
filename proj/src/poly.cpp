#include "npbrane/poly.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

namespace npb {

int mono_degree(const Mono& m) {
    return std::accumulate(m.begin(), m.end(), 0);
}

bool GrlexLess::operator()(const Mono& a, const Mono& b) const {
    int da = mono_degree(a), db = mono_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

Poly::Poly(int nvars, const Rat& c) : nvars_(nvars) {
    if (c != 0) terms_[Mono(nvars, 0)] = c;
}

Poly Poly::variable(int nvars, int index) {
    if (index < 0 || index >= nvars) throw std::out_of_range("Poly::variable index");
    Poly p(nvars);
    Mono m(nvars, 0);
    m[index] = 1;
    p.terms_[m] = 1;
    return p;
}

bool Poly::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && mono_degree(terms_.begin()->first) == 0);
}

Rat Poly::constant_value() const {
    if (terms_.empty()) return 0;
    if (!is_constant()) throw std::logic_error("Poly::constant_value on non-constant");
    return terms_.begin()->second;
}

void Poly::set_term(const Mono& m, const Rat& c) {
    if ((int)m.size() != nvars_) throw std::invalid_argument("Poly::set_term arity");
    if (c == 0) terms_.erase(m); else terms_[m] = c;
}

int Poly::total_degree() const {
    if (terms_.empty()) return -1;
    return mono_degree(terms_.rbegin()->first);
}

int Poly::degree_in(int var) const {
    if (terms_.empty()) return -1;
    int d = 0;
    for (auto& [m, c] : terms_) d = std::max(d, m[var]);
    return d;
}

void Poly::check_compat(const Poly& o) const {
    if (nvars_ != o.nvars_) throw std::invalid_argument("Poly arity mismatch");
}

Poly Poly::operator-() const {
    Poly r(nvars_);
    for (auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
}

Poly Poly::operator+(const Poly& o) const {
    check_compat(o);
    Poly r = *this;
    for (auto& [m, c] : o.terms_) {
        auto it = r.terms_.find(m);
        if (it == r.terms_.end()) {
            r.terms_[m] = c;
        } else {
            it->second += c;
            if (it->second == 0) r.terms_.erase(it);
        }
    }
    return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Poly& o) const {
    check_compat(o);
    Poly r(nvars_);
    for (auto& [ma, ca] : terms_) {
        for (auto& [mb, cb] : o.terms_) {
            Mono m(nvars_);
            for (int i = 0; i < nvars_; ++i) m[i] = ma[i] + mb[i];
            auto it = r.terms_.find(m);
            if (it == r.terms_.end()) {
                Rat c = ca * cb;
                if (c != 0) r.terms_[m] = c;
            } else {
                it->second += ca * cb;
                if (it->second == 0) r.terms_.erase(it);
            }
        }
    }
    return r;
}

Poly Poly::operator*(const Rat& c) const {
    Poly r(nvars_);
    if (c == 0) return r;
    for (auto& [m, a] : terms_) r.terms_[m] = a * c;
    return r;
}

Poly Poly::pow(int k) const {
    if (k < 0) throw std::invalid_argument("Poly::pow negative exponent");
    Poly r(nvars_, Rat(1));
    Poly b = *this;
    while (k > 0) {
        if (k & 1) r = r * b;
        b = b * b;
        k >>= 1;
    }
    return r;
}

bool Poly::operator<(const Poly& o) const {
    if (nvars_ != o.nvars_) return nvars_ < o.nvars_;
    auto ia = terms_.begin(), ib = o.terms_.begin();
    GrlexLess less;
    for (; ia != terms_.end() && ib != o.terms_.end(); ++ia, ++ib) {
        if (less(ia->first, ib->first)) return true;
        if (less(ib->first, ia->first)) return false;
        if (ia->second != ib->second) return ia->second < ib->second;
    }
    return ia == terms_.end() && ib != o.terms_.end();
}

const Mono& Poly::leading_mono() const {
    if (terms_.empty()) throw std::logic_error("leading_mono of zero");
    return terms_.rbegin()->first;
}

const Rat& Poly::leading_coeff() const {
    if (terms_.empty()) throw std::logic_error("leading_coeff of zero");
    return terms_.rbegin()->second;
}

Poly Poly::derivative(int var) const {
    Poly r(nvars_);
    for (auto& [m, c] : terms_) {
        if (m[var] == 0) continue;
        Mono d = m;
        d[var] -= 1;
        r.terms_[d] = c * m[var];
    }
    return r;
}

Rat Poly::eval(const std::vector<Rat>& point) const {
    if ((int)point.size() != nvars_) throw std::invalid_argument("Poly::eval arity");
    Rat total = 0;
    for (auto& [m, c] : terms_) {
        Rat t = c;
        for (int i = 0; i < nvars_; ++i)
            for (int k = 0; k < m[i]; ++k) t *= point[i];
        total += t;
    }
    return total;
}

double Poly::eval(const std::vector<double>& point) const {
    if ((int)point.size() != nvars_) throw std::invalid_argument("Poly::eval arity");
    double total = 0;
    for (auto& [m, c] : terms_) {
        double t = c.convert_to<double>();
        for (int i = 0; i < nvars_; ++i)
            for (int k = 0; k < m[i]; ++k) t *= point[i];
        total += t;
    }
    return total;
}

Rat Poly::content() const {
    Rat g = 0;
    for (auto& [m, c] : terms_) g = rat_gcd(g, rat_abs(c));
    return g;
}

Poly Poly::divide_exact(const Poly& o) const {
    check_compat(o);
    if (o.is_zero()) throw std::invalid_argument("division by zero polynomial");
    Poly rem = *this;
    Poly quot(nvars_);
    const Mono& lm = o.leading_mono();
    const Rat& lc = o.leading_coeff();
    while (!rem.is_zero()) {
        const Mono& rm = rem.leading_mono();
        Mono q(nvars_);
        bool divisible = true;
        for (int i = 0; i < nvars_; ++i) {
            q[i] = rm[i] - lm[i];
            if (q[i] < 0) { divisible = false; break; }
        }
        if (!divisible) throw std::domain_error("Poly::divide_exact: not divisible");
        Rat qc = rem.leading_coeff() / lc;
        Poly t(nvars_);
        t.terms_[q] = qc;
        quot = quot + t;
        rem = rem - t * o;
    }
    return quot;
}

namespace {

// View of p as a dense univariate polynomial in `var`, with Poly coefficients
// (in the same ambient ring, exponent of `var` zeroed out).
std::vector<Poly> to_univariate(const Poly& p, int var) {
    int d = p.degree_in(var);
    std::vector<Poly> coeffs(std::max(d + 1, 1), Poly(p.nvars()));
    for (auto& [m, c] : p.terms()) {
        Mono q = m;
        int e = q[var];
        q[var] = 0;
        Poly t(p.nvars());
        t.set_term(q, c);
        coeffs[e] = coeffs[e] + t;
    }
    while (coeffs.size() > 1 && coeffs.back().is_zero()) coeffs.pop_back();
    return coeffs;
}

Poly from_univariate(const std::vector<Poly>& coeffs, int var, int nvars) {
    Poly r(nvars);
    Poly x = Poly::variable(nvars, var);
    for (int e = (int)coeffs.size() - 1; e >= 0; --e) r = r * x + coeffs[e];
    return r;
}

int univ_degree(const std::vector<Poly>& u) {
    for (int i = (int)u.size() - 1; i >= 0; --i)
        if (!u[i].is_zero()) return i;
    return -1;
}

// Content of a univariate-view polynomial: gcd of its Poly coefficients.
Poly univ_content(const std::vector<Poly>& u, int nvars) {
    Poly g(nvars);
    for (auto& c : u) {
        if (c.is_zero()) continue;
        g = g.is_zero() ? c : Poly::gcd(g, c);
        if (g.is_constant()) return Poly(nvars, Rat(1));
    }
    return g;
}

void make_primitive(std::vector<Poly>& u, int nvars) {
    Poly ct = univ_content(u, nvars);
    if (ct.is_zero() || (ct.is_constant() && ct.constant_value() == 1)) return;
    for (auto& c : u)
        if (!c.is_zero()) c = c.divide_exact(ct);
}

// Pseudo-remainder of a by b in the main variable (b nonzero), with content
// stripped after every elimination step to keep coefficients small.
std::vector<Poly> pseudo_rem(std::vector<Poly> a, const std::vector<Poly>& b,
                             int nvars) {
    int db = univ_degree(b);
    const Poly& lb = b[db];
    int da = univ_degree(a);
    while (da >= db && da >= 0) {
        Poly la = a[da];
        for (auto& c : a) c = c * lb;
        for (int i = 0; i <= db; ++i)
            a[da - db + i] = a[da - db + i] - la * b[i];
        da = univ_degree(a);
        a.resize(std::max(da + 1, 1), Poly(nvars));
        if (da < 0) { a.assign(1, Poly(nvars)); break; }
        make_primitive(a, nvars);
    }
    return a;
}

// Largest monomial dividing every term.
Mono common_mono(const Poly& p) {
    Mono m(p.nvars(), 0);
    bool first = true;
    for (auto& [mm, c] : p.terms()) {
        if (first) { m = mm; first = false; continue; }
        for (int i = 0; i < p.nvars(); ++i) m[i] = std::min(m[i], mm[i]);
    }
    return m;
}

Poly from_mono_times(const Poly& p, const Mono& m) {
    Poly r(p.nvars());
    for (auto& [mm, c] : p.terms()) {
        Mono q = mm;
        for (int i = 0; i < p.nvars(); ++i) q[i] += m[i];
        r.set_term(q, c);
    }
    return r;
}

// Substitute integers for every variable except `var` and decide whether the
// resulting univariate polynomials over Q are coprime.  The point is chosen so
// the leading coefficient of `ua` survives, which makes a degree-zero image
// gcd a proof that the primitive parts have a constant gcd.  Failure to find
// such a point just means "don't know"; the caller falls back to the PRS.
bool coprime_by_evaluation(const std::vector<Poly>& ua,
                           const std::vector<Poly>& ub, int n) {
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    for (int attempt = 0; attempt < 4; ++attempt) {
        std::vector<Rat> pt(n);
        for (int i = 0; i < n; ++i)
            pt[i] = Rat(Int(1 + rng() % (97 + 31 * attempt)));
        const Poly& la = ua[univ_degree(ua)];
        const Poly& lb = ub[univ_degree(ub)];
        if (la.eval(pt) == 0 || lb.eval(pt) == 0) continue;
        auto image = [&](const std::vector<Poly>& u) {
            std::vector<Rat> v(u.size());
            for (size_t k = 0; k < u.size(); ++k)
                if (!u[k].is_zero()) v[k] = u[k].eval(pt);
            while (v.size() > 1 && v.back() == 0) v.pop_back();
            return v;
        };
        std::vector<Rat> f = image(ua), g = image(ub);
        // Monic Euclid over Q.
        while (!(g.size() == 1 && g[0] == 0)) {
            Rat lc = g.back();
            for (auto& c : g) c /= lc;
            while (f.size() >= g.size()) {
                Rat q = f.back();
                for (size_t k = 0; k < g.size(); ++k)
                    f[f.size() - g.size() + k] -= q * g[k];
                while (f.size() > 1 && f.back() == 0) f.pop_back();
                if (f.size() == 1 && f[0] == 0) break;
            }
            std::swap(f, g);
        }
        return f.size() == 1;  // degree-zero image gcd => coprime
    }
    return false;
}

Poly strip_mono(const Poly& p, const Mono& m) {
    Poly r(p.nvars());
    for (auto& [mm, c] : p.terms()) {
        Mono q = mm;
        for (int i = 0; i < p.nvars(); ++i) q[i] -= m[i];
        r.set_term(q, c);
    }
    return r;
}

bool try_divide(const Poly& a, const Poly& b, Poly& q) {
    try {
        q = a.divide_exact(b);
        return true;
    } catch (const std::domain_error&) {
        return false;
    }
}

// Scale to integer, setwise-coprime coefficients.
Poly clear_rat_content(const Poly& p) {
    Rat c = p.content();
    if (c == 0 || c == 1) return p;
    return p * (Rat(1) / c);
}

Int max_abs_coeff(const Poly& p) {
    Int m = 0;
    for (auto& [mm, c] : p.terms()) {
        Int a = boost::multiprecision::abs(boost::multiprecision::numerator(c));
        if (a > m) m = a;
    }
    return m;
}

// Substitute x_var := xi (an integer), leaving a polynomial in the remaining
// variables with integer coefficients.
Poly eval_var(const Poly& p, int var, const Int& xi) {
    Poly r(p.nvars());
    std::map<int, Rat> powers;
    for (auto& [m, c] : p.terms()) {
        int e = m[var];
        auto it = powers.find(e);
        if (it == powers.end()) {
            Rat pw = 1;
            for (int k = 0; k < e; ++k) pw *= Rat(xi);
            it = powers.emplace(e, pw).first;
        }
        Mono q = m;
        q[var] = 0;
        Poly t(p.nvars());
        t.set_term(q, c * it->second);
        r += t;
    }
    return r;
}

Int balanced_mod(const Int& c, const Int& xi) {
    Int r = c % xi;
    if (r * 2 > xi) r -= xi;
    else if (r * 2 <= -xi) r += xi;
    return r;
}

Poly balanced_mod(const Poly& p, const Int& xi) {
    Poly r(p.nvars());
    for (auto& [m, c] : p.terms()) {
        Int v = balanced_mod(boost::multiprecision::numerator(c), xi);
        if (v != 0) r.set_term(m, Rat(v));
    }
    return r;
}

// Heuristic gcd on integer-coefficient polynomials: substitute a large
// integer for one variable, recurse, lift the image gcd back through its
// balanced radix-xi digits, and certify the candidate by trial division.
// Returns false when no candidate certifies (caller falls back to a PRS).
bool heu_gcd(const Poly& a, const Poly& b, Poly& g) {
    int n = a.nvars();
    if (a.is_zero()) { g = b; return true; }
    if (b.is_zero()) { g = a; return true; }
    if (a.is_constant() || b.is_constant()) {
        // At inner recursion levels the whole gcd can sit in the integer
        // content, so constants must be kept, not normalized away.
        g = Poly(n, rat_gcd(a.content(), b.content()));
        return true;
    }
    Rat ca = a.content(), cb = b.content();
    Poly A = (ca == 1) ? a : a * (Rat(1) / ca);
    Poly B = (cb == 1) ? b : b * (Rat(1) / cb);
    Rat cg = rat_gcd(ca, cb);

    int var = -1;
    for (int v = n - 1; v >= 0 && var < 0; --v)
        if (A.degree_in(v) > 0 || B.degree_in(v) > 0) var = v;
    if (var < 0) return false;
    int dbound = std::min(A.degree_in(var), B.degree_in(var));

    Int na = max_abs_coeff(A), nb = max_abs_coeff(B);
    Int xi = 2 * (na < nb ? na : nb) + 29;
    for (int attempt = 0; attempt < 6; ++attempt) {
        if ((boost::multiprecision::msb(xi) + 1) * (dbound + 1) > 100000)
            return false;
        Poly gi(n);
        if (heu_gcd(eval_var(A, var, xi), eval_var(B, var, xi), gi)) {
            Poly G(n), x = Poly::variable(n, var), rem = gi;
            bool lifted = true;
            for (int e = 0; !rem.is_zero(); ++e) {
                if (e > dbound) { lifted = false; break; }
                Poly digit = balanced_mod(rem, xi);
                if (!digit.is_zero()) G += digit * x.pow(e);
                rem = (rem - digit) * Rat(Int(1), xi);
            }
            if (lifted && !G.is_zero()) {
                G = clear_rat_content(G);
                Poly q;
                if (try_divide(A, G, q) && try_divide(B, G, q)) {
                    g = (cg == 1) ? G : G * cg;
                    return true;
                }
            }
        }
        xi = xi * 73794 / 27011;  // irrational-ish growth avoids repeat failures
    }
    return false;
}

Poly normalize_sign(Poly p) {
    if (p.is_zero()) return p;
    Rat ct = p.content();
    if (ct != 0 && ct != 1) p = p * (Rat(1) / ct);
    if (p.leading_coeff() < 0) p = -p;
    return p;
}

} // namespace

Poly Poly::gcd(const Poly& a, const Poly& b) {
    if (a.nvars() != b.nvars()) throw std::invalid_argument("Poly::gcd arity");
    int n = a.nvars();
    if (a.is_zero()) return normalize_sign(b);
    if (b.is_zero()) return normalize_sign(a);
    if (a.is_constant() || b.is_constant()) return Poly(n, Rat(1));

    // Main variable: highest-index variable appearing in either argument.
    int var = -1;
    for (int v = n - 1; v >= 0 && var < 0; --v)
        if (a.degree_in(v) > 0 || b.degree_in(v) > 0) var = v;
    if (var < 0) return Poly(n, Rat(1));

    // Split off the largest common monomial factor first; it is exactly the
    // monomial part of the gcd and keeps the PRS inputs small.
    Mono ma = common_mono(a), mb = common_mono(b), mg(n, 0);
    for (int i = 0; i < n; ++i) mg[i] = std::min(ma[i], mb[i]);
    bool stripped = false;
    for (int i = 0; i < n; ++i) stripped = stripped || ma[i] > 0 || mb[i] > 0;
    if (stripped) {
        Poly g = Poly::gcd(strip_mono(a, ma), strip_mono(b, mb));
        return normalize_sign(from_mono_times(g, mg));
    }

    if (a.degree_in(var) == 0 || b.degree_in(var) == 0) {
        // One argument is free of the main variable; gcd divides its content.
        const Poly& flat = a.degree_in(var) == 0 ? a : b;
        const Poly& other = a.degree_in(var) == 0 ? b : a;
        Poly oc = univ_content(to_univariate(other, var), n);
        return normalize_sign(Poly::gcd(flat, oc));
    }

    std::vector<Poly> ua = to_univariate(a, var);
    std::vector<Poly> ub = to_univariate(b, var);
    Poly ca = univ_content(ua, n);
    Poly cb = univ_content(ub, n);
    for (auto& c : ua) if (!c.is_zero()) c = c.divide_exact(ca);
    for (auto& c : ub) if (!c.is_zero()) c = c.divide_exact(cb);
    Poly cg = Poly::gcd(ca, cb);

    // Coprimality filter: evaluate the non-main variables at a point where
    // the leading coefficient of `a` survives.  The image of the gcd then has
    // the gcd's true degree and divides the univariate gcd of the images, so
    // a degree-zero image gcd certifies a constant primitive-part gcd.
    if (coprime_by_evaluation(ua, ub, n))
        return normalize_sign(cg);

    // Heuristic integer-evaluation gcd; almost always succeeds and is far
    // cheaper than the PRS below, which is kept as a certain fallback.
    {
        Poly pa = clear_rat_content(from_univariate(ua, var, n));
        Poly pb = clear_rat_content(from_univariate(ub, var, n));
        Poly g(n);
        if (heu_gcd(pa, pb, g))
            return normalize_sign(clear_rat_content(g) * cg);
    }

    // Primitive PRS in the main variable.
    if (univ_degree(ua) < univ_degree(ub)) std::swap(ua, ub);
    while (univ_degree(ub) >= 0) {
        std::vector<Poly> r = pseudo_rem(ua, ub, n);
        make_primitive(r, n);
        ua = std::move(ub);
        ub = std::move(r);
    }

    Poly result = from_univariate(ua, var, n) * cg;
    return normalize_sign(result);
}

std::string Poly::to_string(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    // Highest terms first.
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [m, c] = *it;
        Rat cc = c;
        if (first) {
            if (cc < 0) { out << "-"; cc = -cc; }
        } else {
            out << (cc < 0 ? " - " : " + ");
            if (cc < 0) cc = -cc;
        }
        first = false;
        bool trivial_mono = mono_degree(m) == 0;
        if (cc != 1 || trivial_mono) {
            out << cc.str();
            if (!trivial_mono) out << "*";
        }
        bool firstv = true;
        for (int i = 0; i < nvars_; ++i) {
            if (m[i] == 0) continue;
            if (!firstv) out << "*";
            firstv = false;
            out << names[i];
            if (m[i] > 1) out << "^" << m[i];
        }
    }
    return out.str();
}

} // namespace npb
