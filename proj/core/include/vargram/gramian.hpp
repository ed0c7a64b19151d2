#pragma once

#include "vargram/integrator.hpp"
#include "vargram/model.hpp"
#include "vargram/variational.hpp"

#include <iosfwd>
#include <string>

namespace vargram {

enum class GramianKind { empirical, variational, linear };

// A finite-horizon observability Gramian: horizon N means the sum runs over
// output indices k = 0 .. N-1. The matrix is stored explicitly symmetrized.
struct Gramian {
    Matrix matrix;
    GramianKind kind = GramianKind::variational;
    Index horizon = 0;
    Vector base_state;
};

// The stacked output sensitivity [Psi_0^0; ...; Psi_0^{N-1}], an
// (N*n_y) x n_x matrix. Its Gram product equals the variational Gramian.
struct ObservabilityMatrix {
    Matrix psi_stack;
    Index horizon = 0;
};

// Empirical Gramian by central differences: 2 n_x simulations from
// x0 +- eps * e_i, Gramian = sum_k (dY_k)^T dY_k / (4 eps^2) where column i
// of dY_k is y_k^{+i} - y_k^{-i}. The perturbed simulations run
// concurrently; the reduction is performed in fixed axis order so results
// are bit-stable regardless of thread count.
Gramian empirical_gramian(const SystemModel& model, const Vector& x0, Index n, double eps,
                          const IrkConfig& cfg);

// Variational Gramian sum_k (Psi_0^k)^T Psi_0^k accumulated in one
// streaming pass (single trajectory, no stored stack).
Gramian variational_gramian(const SystemModel& model, const Vector& x0, Index n,
                            const IrkConfig& cfg);

// Exact linear observability Gramian sum_{k=0}^{n-1} (C A^k)^T (C A^k) for
// a discrete-time pair (A, C).
Gramian linear_gramian(const Matrix& a, const Matrix& c, Index n);

// Materialized stack (for rank work and identity tests at moderate N).
ObservabilityMatrix observability_matrix(const SystemModel& model, const Vector& x0, Index n,
                                         const IrkConfig& cfg);

// Min-max rescaling of the entries onto [-1, 1] for heatmap plots:
// v -> -1 + 2 (v - min) / (max - min). A symmetric input range maps to
// plain division by the max, so signs are preserved. Constant matrices
// have no range and raise NumericalError.
Matrix normalized_map(const Matrix& m);

// Rank by SVD with relative threshold: singular values above
// rel_tol * sigma_max count.
Index numerical_rank(const Matrix& m, double rel_tol = 1e-10);

std::string gramian_to_json(const Gramian& g);

// Long-format CSV "i,j,value" covering every entry, one row per entry.
void write_matrix_csv(const Matrix& m, std::ostream& os);

} // namespace vargram
