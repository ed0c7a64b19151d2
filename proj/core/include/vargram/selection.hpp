#pragma once

#include "vargram/gramian.hpp"
#include "vargram/integrator.hpp"
#include "vargram/model.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vargram {

// A sensor subset with its indicator vector; gamma(j) == 1 exactly when j
// is selected. selected preserves insertion order (greedy order for greedy
// results).
struct SensorSet {
    std::vector<int> selected;
    Eigen::VectorXi gamma;
    int budget = 0;
};

SensorSet make_sensor_set(std::vector<int> selected, Index n_y, int budget);

// Per-sensor observability Gramians V_j = sum_k Phi^T c_j(x_k)^T c_j(x_k) Phi
// where c_j is row j of jac_h. Their sum over all sensors is exactly the
// full variational Gramian, which is what makes log-det selection cheap:
// any subset's Gramian is a sum of precomputed pieces.
struct PerSensorGramians {
    std::vector<Matrix> per_sensor;
    Index horizon = 0;
    Vector base_state;

    Index n_sensors() const { return static_cast<Index>(per_sensor.size()); }
    Index n_x() const { return per_sensor.empty() ? 0 : per_sensor.front().rows(); }
};

PerSensorGramians per_sensor_gramians(const SystemModel& model, const Vector& x0, Index n,
                                      const IrkConfig& cfg);

// Default log-det regularizer: 1e-8 * trace(sum_j V_j) / n_x.
double default_delta(const PerSensorGramians& gs);

// Offset score  log det(delta I + sum_{j in S} V_j) - log det(delta I),
// so the empty set scores exactly 0. Requires delta >= 0; a non-finite
// determinant raises NumericalError.
double objective_logdet(const PerSensorGramians& gs, const SensorSet& s, double delta);

struct GreedyResult {
    SensorSet set;
    std::vector<double> gains; // marginal gain of each pick, in pick order
    double objective = 0.0;    // offset score of the final set
};

// Standard greedy maximization of the offset score under a cardinality
// budget. Ties break toward the lowest sensor index. Because the score is
// monotone submodular, the result carries the usual (1 - 1/e) guarantee
// against the optimal subset.
GreedyResult greedy_select(const PerSensorGramians& gs, int budget, double delta);

// Exhaustive search over all C(n_y, budget) subsets, lexicographic order,
// first maximizer kept. Refuses (ConfigError) above 1e6 subsets.
SensorSet brute_force_select(const PerSensorGramians& gs, int budget, double delta);

// Exhaustive check of monotonicity and the diminishing-returns inequality
//   score(A + s) - score(A) >= score(B + s) - score(B)   for A subset B, s outside B
// over every subset pair. worst_slack is the most negative margin seen
// (>= 0 when no violation). Guarded to n_y <= n_max sensors.
struct SubmodularityReport {
    long long checked = 0;
    long long violations = 0;
    double worst_slack = 0.0;
    long long monotonicity_violations = 0;
};

SubmodularityReport submodularity_audit(const PerSensorGramians& gs, double delta, int n_max = 6);

std::string selection_report_json(const GreedyResult& greedy, double delta,
                                  std::optional<double> ratio_vs_brute_force);

} // namespace vargram
