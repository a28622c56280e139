#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "npbrane/rational.hpp"

namespace npb {

// Exponent vector; length = number of variables of the ambient ring.
using Mono = std::vector<int>;

// Graded lexicographic order on exponent vectors.
struct GrlexLess {
    bool operator()(const Mono& a, const Mono& b) const;
};

int mono_degree(const Mono& m);

// Sparse multivariate polynomial with rational coefficients.
// Terms are kept in a map under grlex order; zero coefficients are never stored.
class Poly {
public:
    Poly() : nvars_(0) {}
    explicit Poly(int nvars) : nvars_(nvars) {}
    Poly(int nvars, const Rat& c);

    static Poly variable(int nvars, int index);          // 0-based index
    static Poly constant(int nvars, const Rat& c) { return Poly(nvars, c); }

    int nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Rat constant_value() const;   // requires is_constant()

    const std::map<Mono, Rat, GrlexLess>& terms() const { return terms_; }
    void set_term(const Mono& m, const Rat& c);

    int total_degree() const;     // -1 for zero polynomial
    int degree_in(int var) const; // -1 for zero polynomial

    Poly operator-() const;
    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly& operator+=(const Poly& o) { *this = *this + o; return *this; }
    Poly& operator-=(const Poly& o) { *this = *this - o; return *this; }
    Poly& operator*=(const Poly& o) { *this = *this * o; return *this; }
    Poly operator*(const Rat& c) const;
    Poly pow(int k) const;

    bool operator==(const Poly& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }
    bool operator!=(const Poly& o) const { return !(*this == o); }
    bool operator<(const Poly& o) const; // arbitrary total order, for map keys

    // Leading term under grlex.
    const Mono& leading_mono() const;
    const Rat& leading_coeff() const;

    Poly derivative(int var) const;
    Rat eval(const std::vector<Rat>& point) const;
    double eval(const std::vector<double>& point) const;

    // gcd of the rational coefficients (nonnegative); 0 for the zero polynomial.
    Rat content() const;

    // Exact division; throws if o does not divide *this.
    Poly divide_exact(const Poly& o) const;

    std::string to_string(const std::vector<std::string>& names) const;

    // gcd up to a rational unit; result is primitive with positive leading coeff,
    // or 1 when both args are constants (not both zero).
    static Poly gcd(const Poly& a, const Poly& b);

private:
    void check_compat(const Poly& o) const;

    int nvars_;
    std::map<Mono, Rat, GrlexLess> terms_;
};

} // namespace npb
