#include "vargram/lyapunov.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <vector>

namespace vargram {

namespace {

constexpr double overflow_guard = 1e150;

// Shared QR accumulator for the stabilized paths. Feeding step factors
// M_1, M_2, ... maintains Q and the running sums of log |r_ii|.
class QrAccumulator {
public:
    explicit QrAccumulator(Index n)
        : q_(Matrix::Identity(n, n)), log_r_(Vector::Zero(n)), degenerate_(false) {}

    void feed(const Matrix& factor) {
        const Matrix b = factor * q_;
        Eigen::HouseholderQR<Matrix> qr(b);
        q_ = qr.householderQ();
        const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Index i = 0; i < r.rows(); ++i) {
            const double rii = std::abs(r(i, i));
            if (rii == 0.0) {
                log_r_(i) = -std::numeric_limits<double>::infinity();
                degenerate_ = true;
            } else {
                log_r_(i) += std::log(rii);
            }
        }
        // flip columns so diag(R) >= 0; keeps Q deterministic across runs
        for (Index i = 0; i < r.rows(); ++i)
            if (r(i, i) < 0.0) q_.col(i) = -q_.col(i);
    }

    LyapunovSpectrum finish(Index horizon, const Vector& base_state) const {
        LyapunovSpectrum s;
        s.exponents = log_r_ / static_cast<double>(horizon);
        std::sort(s.exponents.begin(), s.exponents.end(), std::greater<double>());
        s.mle = s.exponents(0);
        s.horizon = horizon;
        s.base_state = base_state;
        s.degenerate = degenerate_;
        s.mode_used = LyapunovMode::stabilized;
        return s;
    }

private:
    Matrix q_;
    Vector log_r_;
    bool degenerate_;
};

LyapunovSpectrum direct_spectrum(const Matrix& phi_final, Index horizon,
                                 const Vector& base_state) {
    if (!phi_final.allFinite())
        throw NumericalError(
            "lyapunov_spectrum: final transition has non-finite entries; use the "
            "stabilized mode");
    Eigen::JacobiSVD<Matrix> svd(phi_final);
    const Vector& sv = svd.singularValues(); // descending

    LyapunovSpectrum s;
    s.exponents.resize(sv.size());
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) == 0.0) {
            s.exponents(i) = -std::numeric_limits<double>::infinity();
            s.degenerate = true;
        } else {
            s.exponents(i) = std::log(sv(i)) / static_cast<double>(horizon);
        }
    }
    s.mle = s.exponents(0);
    s.horizon = horizon;
    s.base_state = base_state;
    s.mode_used = LyapunovMode::direct;
    return s;
}

LyapunovSpectrum stabilized_spectrum(std::span<const VariationalTransition> phis, Index horizon,
                                     const Vector& base_state) {
    const Index n = phis.front().phi.rows();
    QrAccumulator acc(n);
    for (std::size_t k = 1; k < phis.size(); ++k) {
        if (phis[k].step_factor.rows() != n || phis[k].step_factor.cols() != n)
            throw ConfigError("lyapunov_spectrum: stabilized mode needs per-step factors in "
                              "every transition (entry " +
                              std::to_string(k) + " is missing or misshapen)");
        acc.feed(phis[k].step_factor);
    }
    return acc.finish(horizon, base_state);
}

double logdet_psd_chol(const Matrix& m, const char* who) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericalError(std::string(who) + ": matrix is not positive definite");
    double logdet = 0.0;
    const auto& l = llt.matrixLLT();
    for (Index i = 0; i < m.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
    return logdet;
}

} // namespace

LyapunovSpectrum lyapunov_spectrum(std::span<const VariationalTransition> phis, LyapunovMode mode,
                                   const Vector& base_state) {
    if (phis.size() < 2)
        throw ConfigError("lyapunov_spectrum: need at least 2 transitions, got " +
                          std::to_string(phis.size()));
    const Index horizon = static_cast<Index>(phis.size()) - 1;
    if (phis.back().step_index != horizon)
        throw ConfigError("lyapunov_spectrum: transitions are not a contiguous 0..N sequence");

    if (mode == LyapunovMode::auto_select) {
        bool risky = false;
        for (const auto& t : phis) {
            if (!t.phi.allFinite() || t.phi.cwiseAbs().maxCoeff() > overflow_guard) {
                risky = true;
                break;
            }
        }
        if (!risky) {
            LyapunovSpectrum s = direct_spectrum(phis.back().phi, horizon, base_state);
            // underflowed directions are invisible to the direct SVD; redo
            // with QR accumulation when the smallest scale left the window
            const double smallest = s.exponents(s.exponents.size() - 1);
            if (std::isfinite(smallest) &&
                smallest * static_cast<double>(horizon) > std::log(1e-150))
                return s;
        }
        return stabilized_spectrum(phis, horizon, base_state);
    }
    if (mode == LyapunovMode::direct) return direct_spectrum(phis.back().phi, horizon, base_state);
    return stabilized_spectrum(phis, horizon, base_state);
}

LyapunovSpectrum lyapunov_spectrum_streamed(const SystemModel& model, const Vector& x0,
                                            Index n_steps, const IrkConfig& cfg) {
    if (n_steps < 1) throw ConfigError("lyapunov_spectrum_streamed: need at least 1 step");
    QrAccumulator acc(model.n_x);
    walk_step_factors(model, x0, n_steps, cfg,
                      [&](Index, const Vector&, const Matrix& factor) { acc.feed(factor); });
    return acc.finish(n_steps, x0);
}

ObservabilityVerdict observability_verdict(const Gramian& g, const LyapunovSpectrum& spectrum) {
    if (g.matrix.rows() != g.matrix.cols())
        throw ConfigError("observability_verdict: Gramian must be square");
    if (g.horizon != spectrum.horizon)
        throw ConfigError("observability_verdict: Gramian horizon " + std::to_string(g.horizon) +
                          " does not match spectrum horizon " + std::to_string(spectrum.horizon));
    if (spectrum.exponents.size() != g.matrix.rows())
        throw ConfigError("observability_verdict: spectrum dimension does not match the Gramian");

    const Index n_x = g.matrix.rows();
    const double two_n = 2.0 * static_cast<double>(g.horizon);

    Eigen::SelfAdjointEigenSolver<Matrix> es(g.matrix);
    const double lambda_max = es.eigenvalues()(n_x - 1);

    ObservabilityVerdict v;
    v.n_x = n_x;
    v.lambda_max = lambda_max;
    v.spectral_value = lambda_max / two_n;
    v.growth_rate = lambda_max > 0.0 ? std::pow(lambda_max, 1.0 / two_n) : 0.0;
    v.rank = numerical_rank(g.matrix);
    v.observable = (v.spectral_value < 1.0) && (v.rank == n_x);

    const double trace = g.matrix.trace();
    const double delta =
        (std::isfinite(trace) && trace > 0.0) ? 1e-8 * trace / static_cast<double>(n_x) : 1e-8;
    v.logdet = logdet_psd_chol(
        g.matrix + delta * Matrix::Identity(n_x, n_x), "observability_verdict");
    v.le_sum_times_2n = two_n * spectrum.exponents.sum();
    return v;
}

LogdetLeReport logdet_le_relation(std::span<const VariationalTransition> phis, Index n) {
    if (n < 2) throw ConfigError("logdet_le_relation: horizon must be at least 2");
    if (static_cast<Index>(phis.size()) < n)
        throw ConfigError("logdet_le_relation: need transitions up to index " +
                          std::to_string(n - 1) + ", got " + std::to_string(phis.size()));

    const Matrix& final_phi = phis[static_cast<std::size_t>(n - 1)].phi;
    const Index n_x = final_phi.rows();

    // left side through a QR factorization of Phi itself
    Eigen::HouseholderQR<Matrix> qr(final_phi);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    double logdet = 0.0;
    for (Index i = 0; i < n_x; ++i) {
        const double rii = std::abs(r(i, i));
        logdet += rii == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(rii);
    }
    logdet *= 2.0;

    // right side through the singular values (the exponents at horizon n-1)
    Eigen::JacobiSVD<Matrix> svd(final_phi);
    double sum_le = 0.0;
    for (Index i = 0; i < n_x; ++i) {
        const double sv = svd.singularValues()(i);
        sum_le += sv == 0.0 ? -std::numeric_limits<double>::infinity()
                            : std::log(sv) / static_cast<double>(n - 1);
    }

    LogdetLeReport rep;
    rep.logdet_final_deformation = logdet;
    rep.two_n_sum_le = 2.0 * static_cast<double>(n - 1) * sum_le;

    // full Gramian sum with identity output; k = 0 contributes I so the sum
    // is positive definite
    Matrix v = Matrix::Zero(n_x, n_x);
    for (Index k = 0; k < n; ++k) {
        const Matrix& phi = phis[static_cast<std::size_t>(k)].phi;
        v.noalias() += phi.transpose() * phi;
    }
    rep.logdet_full_sum = logdet_psd_chol(v, "logdet_le_relation");
    rep.full_sum_gap = rep.logdet_full_sum - rep.two_n_sum_le;
    return rep;
}

BoundednessReport boundedness_check(std::span<const VariationalOutputMap> psis, double k_bound) {
    if (psis.empty()) throw ConfigError("boundedness_check: no output maps");
    if (!(k_bound > 0.0)) throw ConfigError("boundedness_check: bound must be positive");

    BoundednessReport rep;
    for (const auto& p : psis) {
        Eigen::JacobiSVD<Matrix> svd(p.psi);
        const double norm = svd.singularValues()(0);
        if (norm > rep.max_norm) {
            rep.max_norm = norm;
            rep.argmax_step = p.step_index;
        }
    }
    rep.bounded = rep.max_norm <= k_bound;
    return rep;
}

void write_spectrum_csv(const LyapunovSpectrum& s, std::ostream& os) {
    os << "i,lambda\n";
    char buf[32];
    for (Index i = 0; i < s.exponents.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", s.exponents(i));
        os << i << ',' << buf << "\n";
    }
}

std::string verdict_to_json(const ObservabilityVerdict& v) {
    nlohmann::ordered_json j;
    j["observable"] = v.observable;
    j["spectral_value"] = v.spectral_value;
    j["lambda_max"] = v.lambda_max;
    j["growth_rate"] = v.growth_rate;
    j["rank"] = v.rank;
    j["n_x"] = v.n_x;
    j["logdet"] = v.logdet;
    j["le_sum_times_2n"] = v.le_sum_times_2n;
    return j.dump(2);
}

} // namespace vargram
