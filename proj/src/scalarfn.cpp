#include "npbrane/scalarfn.hpp"

#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

namespace npb {

Chart::Chart(int dim) {
    if (dim < 1) throw std::invalid_argument("Chart: dim >= 1 required");
    names_.reserve(dim);
    for (int i = 1; i <= dim; ++i) names_.push_back("x" + std::to_string(i));
}

Chart::Chart(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw std::invalid_argument("Chart: dim >= 1 required");
    std::set<std::string> seen(names_.begin(), names_.end());
    if (seen.size() != names_.size())
        throw std::invalid_argument("Chart: coordinate names must be distinct");
}

int Chart::index_of(const std::string& name) const {
    for (int i = 0; i < dim(); ++i)
        if (names_[i] == name) return i;
    return -1;
}

Chart Chart::extended(const std::string& extra) const {
    auto n = names_;
    n.push_back(extra);
    return Chart(std::move(n));
}

ScalarFn::ScalarFn(int nvars) : num_(nvars), den_(nvars, Rat(1)) {}

ScalarFn::ScalarFn(int nvars, const Rat& c) : num_(nvars, c), den_(nvars, Rat(1)) {}

ScalarFn::ScalarFn(const Poly& p) : num_(p), den_(p.nvars(), Rat(1)) {}

ScalarFn::ScalarFn(const Poly& num, const Poly& den) : num_(num), den_(den) {
    if (den_.is_zero()) throw std::domain_error("ScalarFn: zero denominator");
    reduce();
}

ScalarFn ScalarFn::variable(int nvars, int index) {
    return ScalarFn(Poly::variable(nvars, index));
}

bool ScalarFn::is_one() const {
    return num_.is_constant() && num_.constant_value() == 1 && den_.is_constant() &&
           den_.constant_value() == 1;
}

bool ScalarFn::is_polynomial() const {
    return den_.is_constant() && den_.constant_value() == 1;
}

void ScalarFn::reduce() {
    if (num_.is_zero()) {
        den_ = Poly(den_.nvars(), Rat(1));
        return;
    }
    Poly g = Poly::gcd(num_, den_);
    if (!g.is_constant() || g.constant_value() != 1) {
        num_ = num_.divide_exact(g);
        den_ = den_.divide_exact(g);
    }
    // Make the denominator monic under grlex.
    Rat lc = den_.leading_coeff();
    if (lc != 1) {
        Rat inv = Rat(1) / lc;
        num_ = num_ * inv;
        den_ = den_ * inv;
    }
}

ScalarFn ScalarFn::operator-() const {
    ScalarFn r = *this;
    r.num_ = -r.num_;
    return r;
}

ScalarFn ScalarFn::operator+(const ScalarFn& o) const {
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    return ScalarFn(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

ScalarFn ScalarFn::operator-(const ScalarFn& o) const { return *this + (-o); }

ScalarFn ScalarFn::operator*(const ScalarFn& o) const {
    if (is_zero() || o.is_zero()) return ScalarFn(num_.nvars());
    // Cross-cancel before multiplying to keep intermediates small.
    Poly g1 = Poly::gcd(num_, o.den_);
    Poly g2 = Poly::gcd(o.num_, den_);
    return ScalarFn(num_.divide_exact(g1) * o.num_.divide_exact(g2),
                    den_.divide_exact(g2) * o.den_.divide_exact(g1));
}

ScalarFn ScalarFn::operator/(const ScalarFn& o) const { return *this * o.inverse(); }

ScalarFn ScalarFn::inverse() const {
    if (is_zero()) throw std::domain_error("ScalarFn: division by zero");
    return ScalarFn(den_, num_);
}

ScalarFn ScalarFn::pow(int k) const {
    if (k < 0) return inverse().pow(-k);
    ScalarFn r(num_.nvars(), Rat(1));
    ScalarFn b = *this;
    while (k > 0) {
        if (k & 1) r = r * b;
        b = b * b;
        k >>= 1;
    }
    return r;
}

bool ScalarFn::operator<(const ScalarFn& o) const {
    if (num_ != o.num_) return num_ < o.num_;
    return den_ < o.den_;
}

ScalarFn ScalarFn::derivative(int var) const {
    // Quotient rule; reduction happens in the constructor.
    Poly dn = num_.derivative(var) * den_ - num_ * den_.derivative(var);
    return ScalarFn(dn, den_ * den_);
}

Rat ScalarFn::eval(const std::vector<Rat>& point) const {
    Rat d = den_.eval(point);
    if (d == 0) throw PoleError("ScalarFn::eval: denominator vanishes at point");
    return num_.eval(point) / d;
}

double ScalarFn::eval(const std::vector<double>& point) const {
    double d = den_.eval(point);
    if (std::abs(d) < 1e-300) throw PoleError("ScalarFn::eval: denominator vanishes at point");
    return num_.eval(point) / d;
}

std::string ScalarFn::to_string(const Chart& chart) const {
    return to_string(chart.names());
}

std::string ScalarFn::to_string(const std::vector<std::string>& names) const {
    if (is_polynomial()) return num_.to_string(names);
    std::ostringstream out;
    bool wrap_num = num_.terms().size() > 1;
    if (wrap_num) out << "(";
    out << num_.to_string(names);
    if (wrap_num) out << ")";
    out << "/(" << den_.to_string(names) << ")";
    return out.str();
}

ScalarFn operator*(const Rat& c, const ScalarFn& f) {
    return ScalarFn(f.nvars(), c) * f;
}

namespace {

// Recursive-descent parser for the coefficient grammar.
class Parser {
public:
    Parser(const std::string& text, const Chart& chart) : text_(text), chart_(chart) {}

    ScalarFn parse() {
        ScalarFn r = expr();
        skip_ws();
        if (pos_ != text_.size())
            fail("unexpected trailing input");
        return r;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("parse error at offset " + std::to_string(pos_) + ": " + msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace((unsigned char)text_[pos_])) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    ScalarFn expr() {
        bool neg = false;
        skip_ws();
        while (peek() == '+' || peek() == '-') {
            if (eat('-')) neg = !neg; else eat('+');
        }
        ScalarFn r = term();
        if (neg) r = -r;
        for (;;) {
            if (eat('+')) r = r + term();
            else if (eat('-')) r = r - term();
            else break;
        }
        return r;
    }

    ScalarFn term() {
        ScalarFn r = factor();
        for (;;) {
            if (eat('*')) r = r * factor();
            else if (eat('/')) {
                ScalarFn d = factor();
                if (d.is_zero()) fail("division by the zero polynomial");
                r = r / d;
            } else break;
        }
        return r;
    }

    ScalarFn factor() {
        ScalarFn base = atom();
        if (eat('^')) {
            bool neg = eat('-');
            int e = integer();
            return base.pow(neg ? -e : e);
        }
        return base;
    }

    int integer() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit((unsigned char)text_[pos_])) ++pos_;
        if (pos_ == start) fail("expected integer");
        return std::stoi(text_.substr(start, pos_ - start));
    }

    ScalarFn atom() {
        skip_ws();
        if (eat('(')) {
            ScalarFn r = expr();
            if (!eat(')')) fail("expected ')'");
            return r;
        }
        if (eat('-')) return -atom();
        char c = peek();
        if (std::isdigit((unsigned char)c)) {
            Int n = bigint();
            return ScalarFn(chart_.dim(), Rat(n));
        }
        if (std::isalpha((unsigned char)c) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum((unsigned char)text_[pos_]) || text_[pos_] == '_'))
                ++pos_;
            std::string name = text_.substr(start, pos_ - start);
            int idx = chart_.index_of(name);
            if (idx < 0) fail("unknown coordinate '" + name + "'");
            return ScalarFn::variable(chart_.dim(), idx);
        }
        fail("expected coordinate, literal, or '('");
    }

    Int bigint() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit((unsigned char)text_[pos_])) ++pos_;
        if (pos_ == start) fail("expected number");
        return Int(text_.substr(start, pos_ - start));
    }

    const std::string& text_;
    const Chart& chart_;
    size_t pos_ = 0;
};

} // namespace

ScalarFn parse_scalar(const std::string& text, const Chart& chart) {
    return Parser(text, chart).parse();
}

} // namespace npb
