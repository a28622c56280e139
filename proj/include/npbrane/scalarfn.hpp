#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "npbrane/poly.hpp"

namespace npb {

struct PoleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularOperator : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A coordinate chart: just the variable names (canonically x1..xn).
class Chart {
public:
    explicit Chart(int dim);
    explicit Chart(std::vector<std::string> names);

    int dim() const { return (int)names_.size(); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(int i) const { return names_.at(i); }
    int index_of(const std::string& name) const; // -1 if absent

    // Same chart extended by a parameter variable (used for t-dependent flows).
    Chart extended(const std::string& extra) const;

    bool operator==(const Chart& o) const { return names_ == o.names_; }
    bool operator!=(const Chart& o) const { return !(*this == o); }

private:
    std::vector<std::string> names_;
};

// Element of the field of rational functions Q(x1,...,xn), kept in canonical
// form: num/den with gcd(num,den)=1 and den monic under grlex, zero as 0/1.
// Equality of canonical forms is syntactic.
class ScalarFn {
public:
    ScalarFn() : num_(0), den_(0, Rat(1)) {}
    explicit ScalarFn(int nvars);
    ScalarFn(int nvars, const Rat& c);
    explicit ScalarFn(const Poly& p);
    ScalarFn(const Poly& num, const Poly& den);

    static ScalarFn variable(int nvars, int index);
    static ScalarFn constant(int nvars, const Rat& c) { return ScalarFn(nvars, c); }

    int nvars() const { return num_.nvars(); }
    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const;
    bool is_polynomial() const;
    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }

    ScalarFn operator-() const;
    ScalarFn operator+(const ScalarFn& o) const;
    ScalarFn operator-(const ScalarFn& o) const;
    ScalarFn operator*(const ScalarFn& o) const;
    ScalarFn operator/(const ScalarFn& o) const;
    ScalarFn& operator+=(const ScalarFn& o) { *this = *this + o; return *this; }
    ScalarFn& operator-=(const ScalarFn& o) { *this = *this - o; return *this; }
    ScalarFn& operator*=(const ScalarFn& o) { *this = *this * o; return *this; }
    ScalarFn pow(int k) const; // integer exponent, negative allowed
    ScalarFn inverse() const;

    bool operator==(const ScalarFn& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const ScalarFn& o) const { return !(*this == o); }
    bool operator<(const ScalarFn& o) const; // arbitrary total order

    ScalarFn derivative(int var) const;
    Rat eval(const std::vector<Rat>& point) const;     // throws PoleError
    double eval(const std::vector<double>& point) const;

    std::string to_string(const Chart& chart) const;
    std::string to_string(const std::vector<std::string>& names) const;

private:
    void reduce();

    Poly num_, den_;
};

ScalarFn operator*(const Rat& c, const ScalarFn& f);

// Parses the coefficient grammar: expressions over the chart's coordinate
// names, rational literals p/q, operators + - * / ^ (integer exponents),
// parentheses. Division by the zero polynomial is an error.
ScalarFn parse_scalar(const std::string& text, const Chart& chart);

} // namespace npb
