#pragma once

#include "vargram/gramian.hpp"
#include "vargram/variational.hpp"

#include <iosfwd>
#include <span>
#include <string>

namespace vargram {

// direct:     exponents from singular values of the final accumulated
//             product Phi_0^N.
// stabilized: Benettin-style QR re-orthonormalization over the per-step
//             factors, accumulating log |r_ii|; immune to over/underflow of
//             the product.
// auto_select: direct unless the accumulated products leave the
//             representable window [1e-150, 1e150] (or are non-finite), in
//             which case stabilized.
enum class LyapunovMode { direct, stabilized, auto_select };

// Finite-time Lyapunov exponents lambda_i = (1/N) log sigma_i(Phi_0^N),
// sorted descending, in units of 1/step (divide by the step size for
// per-unit-time values). A zero singular value yields -inf and sets
// degenerate.
struct LyapunovSpectrum {
    Vector exponents;
    double mle = 0.0; // exponents(0)
    Index horizon = 0;
    Vector base_state;
    bool degenerate = false;
    LyapunovMode mode_used = LyapunovMode::direct;
};

LyapunovSpectrum lyapunov_spectrum(std::span<const VariationalTransition> phis,
                                   LyapunovMode mode = LyapunovMode::auto_select,
                                   const Vector& base_state = Vector());

// Streamed QR accumulation straight off the integrator; never materializes
// Phi_0^k, so arbitrarily long horizons are safe. Always the stabilized
// computation.
LyapunovSpectrum lyapunov_spectrum_streamed(const SystemModel& model, const Vector& x0,
                                            Index n_steps, const IrkConfig& cfg);

// Observability test at a point: the Gramian's top eigenvalue scaled by the
// horizon, lambda_max(V) / (2N), must stay below one and the Gramian must
// have full numerical rank. lambda_max and the per-step geometric rate
// lambda_max^(1/2N) are carried along for reporting.
struct ObservabilityVerdict {
    double spectral_value = 0.0;  // lambda_max / (2N)
    double lambda_max = 0.0;
    double growth_rate = 0.0;     // lambda_max^(1/(2N))
    bool observable = false;
    Index rank = 0;
    Index n_x = 0;
    double logdet = 0.0;          // log det(delta I + V), trace-scaled delta
    double le_sum_times_2n = 0.0; // 2 N sum_i lambda_i
};

// Requires g.horizon == spectrum.horizon (ConfigError otherwise).
ObservabilityVerdict observability_verdict(const Gramian& g, const LyapunovSpectrum& spectrum);

// Exact relation between the final deformation matrix and the exponent sum:
//   log det(Phi_0^{n-1 T} Phi_0^{n-1}) = 2 (n-1) sum_i lambda_i(n-1).
// The left side is evaluated through a QR factorization, the right through
// singular values, so the identity is a genuine two-route check. The full
// Gramian sum's log det (identity output) is reported alongside with its
// gap from the right side; the identity does not hold for the full sum.
struct LogdetLeReport {
    double logdet_final_deformation = 0.0;
    double two_n_sum_le = 0.0;
    double logdet_full_sum = 0.0;
    double full_sum_gap = 0.0;
};

LogdetLeReport logdet_le_relation(std::span<const VariationalTransition> phis, Index n);

// max_k ||Psi_0^k||_2 against an explicit bound; the witness (max norm and
// where it occurred) is part of the result.
struct BoundednessReport {
    bool bounded = false;
    double max_norm = 0.0;
    Index argmax_step = 0;
};

BoundednessReport boundedness_check(std::span<const VariationalOutputMap> psis, double k_bound);

void write_spectrum_csv(const LyapunovSpectrum& s, std::ostream& os);
std::string verdict_to_json(const ObservabilityVerdict& v);

} // namespace vargram
