#pragma once

#include <random>

#include "npbrane/tensor.hpp"

namespace nptest {

inline npb::ScalarFn random_poly_fn(std::mt19937_64& rng, int nvars,
                                    int nterms = 2, int maxdeg = 2) {
    std::uniform_int_distribution<int> coeff(-3, 3);
    std::uniform_int_distribution<int> expo(0, maxdeg);
    npb::Poly p(nvars);
    for (int t = 0; t < nterms; ++t) {
        npb::Mono m(nvars);
        for (int i = 0; i < nvars; ++i) m[i] = expo(rng);
        npb::Poly mono(nvars);
        mono.set_term(m, npb::Rat(1));
        p = p + npb::Poly(nvars, npb::Rat(coeff(rng))) * mono;
    }
    return npb::ScalarFn(p);
}

inline npb::AltTensor random_tensor(std::mt19937_64& rng, const npb::Chart& c,
                                    int degree, npb::Variance var,
                                    int nterms = 3) {
    int n = c.dim();
    npb::AltTensor t(c, degree, var);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int s = 0; s < nterms; ++s) {
        npb::MultiIndex idx(degree);
        for (int i = 0; i < degree; ++i) idx[i] = pick(rng);
        t.add_term(idx, random_poly_fn(rng, n));
    }
    return t;
}

} // namespace nptest
