#pragma once

#include <vector>

#include "npbrane/nambu.hpp"

namespace npb {

struct PoleEncountered : PoleError {
    using PoleError::PoleError;
};

struct StepUnderflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FlowConfig {
    Rat t_end = Rat(1);
    Rat step = Rat(1, 1000); // fixed fourth-order one-step integrator
    double tol = 1e-6;
};

struct FlowResult {
    std::vector<double> endpoint;
    std::vector<std::vector<double>> jacobian; // from the variational equation
    double pushforward_defect = 0.0;
};

// Lift a scalar / tensor to the chart extended by a trailing parameter
// variable (named "t").
Chart flow_chart(const Chart& chart);
ScalarFn extend_scalar(const ScalarFn& f);
AltTensor extend_tensor(const AltTensor& a);
// Substitute the trailing parameter by a rational constant.
ScalarFn substitute_last(const ScalarFn& f, const Rat& value);
AltTensor substitute_last(const AltTensor& a, const Rat& value);

// Closed-form flow of gauge transforms, π_t♯ = π♯ ∘ (1 + t b♯∘π♯)^{-1},
// as an exact tensor on the t-extended chart.
AltTensor pi_t(const AltTensor& pi, const AltTensor& b);
// π_t at a fixed rational parameter value, on the original chart.
AltTensor pi_t_at(const AltTensor& pi, const AltTensor& b, const Rat& t);

// Defining ODE: π̇_t♯ = −π_t♯ ∘ b♯ ∘ π_t♯. Returns the exact symbolic
// defect tensor in (x, t); identically zero whenever π_t exists.
AltTensor ode_defect(const AltTensor& pi, const AltTensor& b);

// Integrate ẋ = (π_t♯ a)(x, t) from 0 to cfg.t_end with a classical
// fourth-order Runge-Kutta step, jointly with the variational equation
// J̇ = (∂v/∂x) J, J(0) = 1.  The field is oriented so that its time-1 map
// pushes π forward onto π_1; under this library's interior-product
// conventions its components are minus those of pi_sharp(pi_t, a).
FlowResult flow(const AltTensor& pi, const AltTensor& a, const FlowConfig& cfg,
                const std::vector<Rat>& x0);

// At each sample, flow to t = 1 and compare the pushforward (φ_1)_*π with
// π_1 = pi_t(π, da)|_{t=1}; returns the maximum absolute component defect.
double sw_verify(const AltTensor& pi, const AltTensor& a, const FlowConfig& cfg,
                 const std::vector<std::vector<Rat>>& samples);

// Truncated gauge-equivalence series
//   μ_{λ,a} = Σ_{k=0}^{K} ((−L_{π_t♯a} + ∂_t)^k λ) / (k+1)! |_{t=0},
// computed exactly with the closed-form π_t (b = da); λ is a t-independent
// (p−2)-form.
AltTensor mu_lambda(const AltTensor& pi, const AltTensor& a,
                    const AltTensor& lambda, int K);

} // namespace npb
