#include "vargram/gramian.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <future>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace vargram {

namespace {

void check_gramian_args(const SystemModel& model, const Vector& x0, Index n) {
    if (model.n_x <= 0 || !model.f || !model.jac_f || !model.h)
        throw ConfigError("gramian: model must provide f, jac_f, and h");
    if (x0.size() != model.n_x)
        throw ConfigError("gramian: x0 has " + std::to_string(x0.size()) +
                          " entries, model expects " + std::to_string(model.n_x));
    if (n < 1) throw ConfigError("gramian: horizon must be at least 1");
    if (model.domain && !model.domain->contains(x0))
        throw ConfigError("gramian: x0 lies outside the model domain");
}

Matrix symmetrized(Matrix g) {
    g = 0.5 * (g + g.transpose()).eval();
    return g;
}

const char* kind_name(GramianKind k) {
    switch (k) {
        case GramianKind::empirical: return "empirical";
        case GramianKind::variational: return "variational";
        case GramianKind::linear: return "linear";
    }
    return "unknown";
}

} // namespace

Gramian empirical_gramian(const SystemModel& model, const Vector& x0, Index n, double eps,
                          const IrkConfig& cfg) {
    check_gramian_args(model, x0, n);
    if (!(eps > 0.0)) throw ConfigError("empirical_gramian: eps must be positive");

    const Index n_x = model.n_x;
    const Index n_y = model.n_y;

    // one task per axis: both signed simulations, outputs sampled at
    // k = 0 .. n-1
    auto run_axis = [&](Index axis) -> std::pair<Matrix, Matrix> {
        auto run_sign = [&](double sign) -> Matrix {
            Vector x = x0;
            x(axis) += sign * eps;
            Trajectory traj;
            try {
                traj = simulate(model, x, n, cfg);
            } catch (const IntegrationError& e) {
                throw IntegrationError("empirical_gramian: axis " + std::to_string(axis) +
                                           ", sign " + (sign > 0 ? std::string("+") : std::string("-")) +
                                           ": " + e.what(),
                                       e.step_index, e.residual_norm);
            }
            Matrix y(n, n_y);
            for (Index k = 0; k < n; ++k)
                y.row(k) = model.h(traj.states[static_cast<std::size_t>(k)]).transpose();
            return y;
        };
        return {run_sign(+1.0), run_sign(-1.0)};
    };

    std::vector<std::future<std::pair<Matrix, Matrix>>> futures;
    futures.reserve(static_cast<std::size_t>(n_x));
    for (Index i = 0; i < n_x; ++i)
        futures.push_back(std::async(std::launch::async, run_axis, i));

    // collect first so an exception from any axis surfaces before reducing
    std::vector<std::pair<Matrix, Matrix>> outputs;
    outputs.reserve(static_cast<std::size_t>(n_x));
    for (auto& fut : futures) outputs.push_back(fut.get());

    // reduction in fixed (k, axis) order keeps the result bit-stable no
    // matter how the simulations were scheduled
    Matrix g = Matrix::Zero(n_x, n_x);
    Matrix dy(n_y, n_x);
    for (Index k = 0; k < n; ++k) {
        for (Index i = 0; i < n_x; ++i) {
            const auto& [y_plus, y_minus] = outputs[static_cast<std::size_t>(i)];
            dy.col(i) = (y_plus.row(k) - y_minus.row(k)).transpose();
        }
        g.noalias() += dy.transpose() * dy;
    }
    g /= 4.0 * eps * eps;

    Gramian out;
    out.matrix = symmetrized(std::move(g));
    out.kind = GramianKind::empirical;
    out.horizon = n;
    out.base_state = x0;
    return out;
}

Gramian variational_gramian(const SystemModel& model, const Vector& x0, Index n,
                            const IrkConfig& cfg) {
    check_gramian_args(model, x0, n);
    if (!model.jac_h) throw ConfigError("variational_gramian: model has no output Jacobian");

    const Index n_x = model.n_x;
    Matrix g = Matrix::Zero(n_x, n_x);
    Matrix phi = Matrix::Identity(n_x, n_x);
    walk_step_factors(model, x0, n, cfg,
                      [&](Index /*k*/, const Vector& x_k, const Matrix& factor) {
                          const Matrix psi = model.jac_h(x_k) * phi;
                          g.noalias() += psi.transpose() * psi;
                          phi = (factor * phi).eval();
                      });

    Gramian out;
    out.matrix = symmetrized(std::move(g));
    out.kind = GramianKind::variational;
    out.horizon = n;
    out.base_state = x0;
    return out;
}

Gramian linear_gramian(const Matrix& a, const Matrix& c, Index n) {
    if (a.rows() != a.cols())
        throw ConfigError("linear_gramian: A must be square");
    if (c.cols() != a.rows())
        throw ConfigError("linear_gramian: C has " + std::to_string(c.cols()) +
                          " columns, expected " + std::to_string(a.rows()));
    if (n < 1) throw ConfigError("linear_gramian: horizon must be at least 1");

    Matrix g = Matrix::Zero(a.rows(), a.cols());
    Matrix ca = c;
    for (Index k = 0; k < n; ++k) {
        g.noalias() += ca.transpose() * ca;
        if (k + 1 < n) ca = (ca * a).eval();
    }

    Gramian out;
    out.matrix = symmetrized(std::move(g));
    out.kind = GramianKind::linear;
    out.horizon = n;
    out.base_state = Vector::Zero(a.rows());
    return out;
}

ObservabilityMatrix observability_matrix(const SystemModel& model, const Vector& x0, Index n,
                                         const IrkConfig& cfg) {
    check_gramian_args(model, x0, n);
    if (!model.jac_h) throw ConfigError("observability_matrix: model has no output Jacobian");

    ObservabilityMatrix out;
    out.horizon = n;
    out.psi_stack.resize(n * model.n_y, model.n_x);
    Matrix phi = Matrix::Identity(model.n_x, model.n_x);
    walk_step_factors(model, x0, n, cfg,
                      [&](Index k, const Vector& x_k, const Matrix& factor) {
                          out.psi_stack.middleRows(k * model.n_y, model.n_y) =
                              model.jac_h(x_k) * phi;
                          phi = (factor * phi).eval();
                      });
    return out;
}

Matrix normalized_map(const Matrix& m) {
    if (m.size() == 0) throw ConfigError("normalized_map: empty matrix");
    const double lo = m.minCoeff();
    const double hi = m.maxCoeff();
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw NumericalError("normalized_map: non-finite entries");
    if (hi == lo)
        throw NumericalError("normalized_map: degenerate range (all entries equal " +
                             std::to_string(lo) + ")");
    return (-1.0 + 2.0 * (m.array() - lo) / (hi - lo)).matrix();
}

Index numerical_rank(const Matrix& m, double rel_tol) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double cutoff = rel_tol * sv(0);
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return rank;
}

std::string gramian_to_json(const Gramian& g) {
    nlohmann::ordered_json j;
    j["kind"] = kind_name(g.kind);
    j["horizon"] = g.horizon;
    j["base_state"] = std::vector<double>(g.base_state.begin(), g.base_state.end());
    auto rows = nlohmann::ordered_json::array();
    for (Index r = 0; r < g.matrix.rows(); ++r) {
        auto row = nlohmann::ordered_json::array();
        for (Index c = 0; c < g.matrix.cols(); ++c) row.push_back(g.matrix(r, c));
        rows.push_back(std::move(row));
    }
    j["matrix"] = std::move(rows);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g.matrix);
    j["eigenvalues"] = std::vector<double>(es.eigenvalues().begin(), es.eigenvalues().end());
    return j.dump(2);
}

void write_matrix_csv(const Matrix& m, std::ostream& os) {
    os << "i,j,value\n";
    char buf[32];
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
            os << i << ',' << j << ',' << buf << "\n";
        }
}

} // namespace vargram
