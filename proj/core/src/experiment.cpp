#include "vargram/experiment.hpp"

#include "vargram/estimation.hpp"
#include "vargram/gramian.hpp"
#include "vargram/integrator.hpp"
#include "vargram/lyapunov.hpp"
#include "vargram/model_config.hpp"
#include "vargram/selection.hpp"
#include "vargram/vargram.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>

namespace vargram {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::filesystem::path& origin, const std::string& msg) {
    throw ConfigError(origin.string() + ": " + msg);
}

// Collects artifacts and stage statuses; writes the manifest at the end.
class Pipeline {
public:
    Pipeline(const ExperimentConfig& cfg, std::string command)
        : cfg_(cfg), command_(std::move(command)) {
        std::filesystem::create_directories(cfg.outputs);
    }

    bool stage(const std::string& name, bool enabled, const std::string& skip_reason,
               const std::function<void()>& body) {
        if (!enabled) {
            report_.stages.push_back({name, skip_reason.empty() ? "skipped"
                                                                : "skipped: " + skip_reason});
            return false;
        }
        try {
            body();
            report_.stages.push_back({name, "ok"});
            return true;
        } catch (const std::exception& e) {
            report_.stages.push_back({name, std::string("failed: ") + e.what()});
            report_.ok = false;
            return false;
        }
    }

    void write_file(const std::string& rel, const std::function<void(std::ostream&)>& writer) {
        const auto path = cfg_.outputs / rel;
        std::ofstream os(path);
        if (!os) throw NumericalError("cannot open output file " + path.string());
        writer(os);
        os.flush();
        if (!os) throw NumericalError("failed writing output file " + path.string());
        files_.push_back(rel);
    }

    StudyReport finish() {
        ordered_json manifest;
        manifest["command"] = command_;
        manifest["version"] = version;
        manifest["seed"] = cfg_.seed;
        manifest["config_digest"] =
            cfg_.source_path.empty() ? "unknown" : file_digest(cfg_.source_path);
        auto stages = ordered_json::array();
        for (const auto& s : report_.stages) stages.push_back({{"name", s.name}, {"status", s.status}});
        manifest["stages"] = std::move(stages);
        auto files = ordered_json::array();
        for (const auto& rel : files_)
            files.push_back({{"path", rel}, {"digest", file_digest(cfg_.outputs / rel)}});
        manifest["files"] = std::move(files);

        const auto path = cfg_.outputs / "manifest.json";
        std::ofstream os(path);
        os << manifest.dump(2) << "\n";
        report_.manifest_path = path;
        return std::move(report_);
    }

private:
    const ExperimentConfig& cfg_;
    std::string command_;
    StudyReport report_;
    std::vector<std::string> files_;
};

IrkConfig irk_config(const ExperimentConfig& cfg) {
    IrkConfig irk;
    irk.step_size = cfg.step_size;
    irk.newton_tol = cfg.newton_tol;
    irk.newton_max_iter = cfg.newton_max_iter;
    return irk;
}

SystemModel load_study_model(const ExperimentConfig& cfg) {
    if (cfg.model_spec.empty()) throw ConfigError("experiment config: model_spec is required");
    SystemModel model = load_model(cfg.model_spec);
    if (cfg.x0.size() != model.n_x)
        throw ConfigError("experiment config: x0 has " + std::to_string(cfg.x0.size()) +
                          " entries, model \"" + model.name + "\" expects " +
                          std::to_string(model.n_x));
    for (int b : cfg.budgets)
        if (b > model.n_y)
            throw ConfigError("experiment config: budget " + std::to_string(b) +
                              " exceeds the model's " + std::to_string(model.n_y) + " outputs");
    return model;
}

bool empirical_enabled(const ExperimentConfig& cfg, const SystemModel& model,
                       std::string& reason) {
    if (cfg.no_empirical) {
        reason = "disabled by flag";
        return false;
    }
    if (model.n_x > cfg.empirical_max_states) {
        reason = "n_x " + std::to_string(model.n_x) + " exceeds empirical_max_states " +
                 std::to_string(cfg.empirical_max_states);
        return false;
    }
    return true;
}

long long subset_count_capped(Index n, int r, long long cap) {
    long long c = 1;
    for (int i = 1; i <= r; ++i) {
        c = c * (n - r + i) / i;
        if (c > cap) return cap + 1;
    }
    return c;
}

void selection_stages(Pipeline& pipe, const ExperimentConfig& cfg,
                      const std::optional<PerSensorGramians>& gs) {
    pipe.stage("selection", gs.has_value() && !cfg.budgets.empty(),
               gs.has_value() ? "no budgets configured" : "per-sensor Gramians unavailable",
               [&]() {
                   const double delta = default_delta(*gs);
                   for (int r : cfg.budgets) {
                       const GreedyResult greedy = greedy_select(*gs, r, delta);

                       std::optional<double> ratio;
                       if (subset_count_capped(gs->n_sensors(), r, 20000) <= 20000) {
                           const SensorSet best = brute_force_select(*gs, r, delta);
                           const double best_score = objective_logdet(*gs, best, delta);
                           if (best_score > 0.0) ratio = greedy.objective / best_score;
                       }

                       char name[64];
                       std::snprintf(name, sizeof name, "selection_r%d.json", r);
                       pipe.write_file(name, [&](std::ostream& os) {
                           os << selection_report_json(greedy, delta, ratio) << "\n";
                       });

                       // normalized observability relations of the selected
                       // set, long "i,j,value" format for network plots
                       Matrix v_s =
                           Matrix::Zero(gs->n_x(), gs->n_x());
                       for (int j : greedy.set.selected)
                           v_s += gs->per_sensor[static_cast<std::size_t>(j)];
                       std::snprintf(name, sizeof name, "edges_r%d.csv", r);
                       const Matrix normalized = normalized_map(v_s);
                       pipe.write_file(name, [&](std::ostream& os) {
                           write_matrix_csv(normalized, os);
                       });
                   }
               });
}

void estimation_stage(Pipeline& pipe, const ExperimentConfig& cfg, const SystemModel& model) {
    pipe.stage("estimation", !cfg.budgets.empty(), "no budgets configured", [&]() {
        EstimationOptions opts;
        opts.guess_perturbation = cfg.guess_perturbation;
        opts.noise_std = cfg.noise_std;
        opts.seed = cfg.seed;
        const auto rows =
            error_vs_budget(model, cfg.x0, cfg.horizon, cfg.budgets, irk_config(cfg), opts);
        pipe.write_file("error_table.csv",
                        [&](std::ostream& os) { write_error_table_csv(rows, os); });
    });
}

} // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open experiment config");
    std::ostringstream ss;
    ss << in.rdbuf();

    json j = json::parse(ss.str(), nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) fail(path, "not valid JSON");
    if (!j.is_object()) fail(path, "top level must be an object");

    static const std::set<std::string> known = {
        "model_spec", "x0", "perturbation_alpha", "horizon", "step_size", "eps",
        "budgets", "seed", "outputs", "guess_perturbation", "noise_std",
        "empirical_max_states", "no_empirical", "newton_tol", "newton_max_iter"};
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) fail(path, "unknown field \"" + key + "\"");

    ExperimentConfig cfg;
    cfg.source_path = path;

    if (!j.contains("model_spec") || !j["model_spec"].is_string())
        fail(path, "model_spec: required string");
    std::filesystem::path spec = j["model_spec"].get<std::string>();
    if (spec.is_relative()) spec = path.parent_path() / spec;
    cfg.model_spec = spec;

    if (!j.contains("x0") || !j["x0"].is_array() || j["x0"].empty())
        fail(path, "x0: required non-empty array");
    cfg.x0.resize(static_cast<Index>(j["x0"].size()));
    for (std::size_t i = 0; i < j["x0"].size(); ++i) {
        if (!j["x0"][i].is_number()) fail(path, "x0[" + std::to_string(i) + "]: expected number");
        cfg.x0(static_cast<Index>(i)) = j["x0"][i].get<double>();
    }

    auto number = [&](const char* key, double fallback) {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_number()) fail(path, std::string(key) + ": expected a number");
        return j[key].get<double>();
    };
    cfg.perturbation_alpha = number("perturbation_alpha", 0.2);
    cfg.step_size = number("step_size", 1e-3);
    cfg.eps = number("eps", 1e-4);
    cfg.guess_perturbation = number("guess_perturbation", 0.1);
    cfg.noise_std = number("noise_std", 0.0);
    cfg.newton_tol = number("newton_tol", 1e-10);

    auto integer = [&](const char* key, long long fallback) -> long long {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_number_integer()) fail(path, std::string(key) + ": expected an integer");
        return j[key].get<long long>();
    };
    cfg.horizon = static_cast<Index>(integer("horizon", 1000));
    cfg.seed = static_cast<std::uint64_t>(integer("seed", 0));
    cfg.empirical_max_states = static_cast<Index>(integer("empirical_max_states", 32));
    cfg.newton_max_iter = static_cast<int>(integer("newton_max_iter", 50));

    if (j.contains("budgets")) {
        if (!j["budgets"].is_array()) fail(path, "budgets: expected an array of integers");
        for (const auto& b : j["budgets"]) {
            if (!b.is_number_integer()) fail(path, "budgets: expected an array of integers");
            cfg.budgets.push_back(b.get<int>());
        }
    }
    if (j.contains("no_empirical")) {
        if (!j["no_empirical"].is_boolean()) fail(path, "no_empirical: expected a boolean");
        cfg.no_empirical = j["no_empirical"].get<bool>();
    }
    if (j.contains("outputs")) {
        if (!j["outputs"].is_string()) fail(path, "outputs: expected a string");
        cfg.outputs = j["outputs"].get<std::string>();
    }

    if (cfg.horizon < 2) fail(path, "horizon: must be at least 2");
    if (!(cfg.step_size > 0.0)) fail(path, "step_size: must be positive");
    if (!(cfg.eps > 0.0)) fail(path, "eps: must be positive");
    if (cfg.perturbation_alpha < 0.0) fail(path, "perturbation_alpha: must be nonnegative");
    if (cfg.guess_perturbation < 0.0) fail(path, "guess_perturbation: must be nonnegative");
    if (cfg.noise_std < 0.0) fail(path, "noise_std: must be nonnegative");
    for (int b : cfg.budgets)
        if (b < 1) fail(path, "budgets: entries must be positive (budget 0 is rejected)");
    return cfg;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NumericalError("file_digest: cannot open " + path.string());
    // FNV-1a, 64 bit
    std::uint64_t hash = 14695981039346656037ULL;
    char chunk[4096];
    while (in.read(chunk, sizeof chunk) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(chunk[i]);
            hash *= 1099511628211ULL;
        }
        if (!in) break;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

CompareReport run_gramian_compare(const ExperimentConfig& cfg) {
    const SystemModel model = load_study_model(cfg);
    const IrkConfig irk = irk_config(cfg);
    const Vector x_base = cfg.x0 * (1.0 + cfg.perturbation_alpha);

    CompareReport rep;
    using clock = std::chrono::steady_clock;

    const auto t0 = clock::now();
    const Gramian var = variational_gramian(model, x_base, cfg.horizon, irk);
    const auto t1 = clock::now();
    rep.var_seconds = std::chrono::duration<double>(t1 - t0).count();

    std::optional<Gramian> empr;
    std::string reason;
    if (empirical_enabled(cfg, model, reason)) {
        const auto t2 = clock::now();
        empr = empirical_gramian(model, x_base, cfg.horizon, cfg.eps, irk);
        const auto t3 = clock::now();
        rep.empr_seconds = std::chrono::duration<double>(t3 - t2).count();
        rep.rel_distance = (empr->matrix - var.matrix).norm() / var.matrix.norm();
    } else {
        rep.empirical_skipped = true;
    }

    std::filesystem::create_directories(cfg.outputs);
    auto emit = [&](const std::string& rel, const std::function<void(std::ostream&)>& writer) {
        const auto p = cfg.outputs / rel;
        std::ofstream os(p);
        if (!os) throw NumericalError("cannot open output file " + p.string());
        writer(os);
        rep.files.push_back(p);
    };

    emit("compare_timings.csv", [&](std::ostream& os) {
        os << "model,n_x,horizon,alpha,var_seconds,empr_seconds,rel_frobenius_distance,"
              "empirical_skipped\n";
        char buf[32];
        os << model.name << ',' << model.n_x << ',' << cfg.horizon << ',';
        std::snprintf(buf, sizeof buf, "%.17g", cfg.perturbation_alpha);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.6f", rep.var_seconds);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.6f", rep.empr_seconds);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", rep.rel_distance);
        os << buf << ',' << (rep.empirical_skipped ? 1 : 0) << "\n";
    });
    emit("normalized_var.csv",
         [&](std::ostream& os) { write_matrix_csv(normalized_map(var.matrix), os); });
    if (empr)
        emit("normalized_empr.csv",
             [&](std::ostream& os) { write_matrix_csv(normalized_map(empr->matrix), os); });
    return rep;
}

StudyReport run_full_study(const ExperimentConfig& cfg) {
    const SystemModel model = load_study_model(cfg);
    const IrkConfig irk = irk_config(cfg);
    Pipeline pipe(cfg, "study");

    pipe.stage("trajectory", true, "", [&]() {
        const Trajectory traj = simulate(model, cfg.x0, cfg.horizon, irk);
        pipe.write_file("trajectory.csv",
                        [&](std::ostream& os) { write_trajectory_csv(traj, os); });
    });

    std::optional<Gramian> var;
    pipe.stage("variational_gramian", true, "", [&]() {
        var = variational_gramian(model, cfg.x0, cfg.horizon, irk);
        pipe.write_file("gramian_var.json",
                        [&](std::ostream& os) { os << gramian_to_json(*var) << "\n"; });
        pipe.write_file("normalized_var.csv", [&](std::ostream& os) {
            write_matrix_csv(normalized_map(var->matrix), os);
        });
    });

    std::string skip_reason;
    const bool empirical_on = empirical_enabled(cfg, model, skip_reason);
    pipe.stage("empirical_gramian", empirical_on, skip_reason, [&]() {
        const Gramian empr = empirical_gramian(model, cfg.x0, cfg.horizon, cfg.eps, irk);
        pipe.write_file("gramian_empr.json",
                        [&](std::ostream& os) { os << gramian_to_json(empr) << "\n"; });
        pipe.write_file("normalized_empr.csv", [&](std::ostream& os) {
            write_matrix_csv(normalized_map(empr.matrix), os);
        });
        if (var) {
            const double dist = (empr.matrix - var->matrix).norm() / var->matrix.norm();
            pipe.write_file("equivalence.json", [&](std::ostream& os) {
                ordered_json e;
                e["rel_frobenius_distance"] = dist;
                e["eps"] = cfg.eps;
                os << e.dump(2) << "\n";
            });
        }
    });

    std::optional<LyapunovSpectrum> spectrum;
    pipe.stage("lyapunov", true, "", [&]() {
        spectrum = lyapunov_spectrum_streamed(model, cfg.x0, cfg.horizon, irk);
        pipe.write_file("spectrum.csv",
                        [&](std::ostream& os) { write_spectrum_csv(*spectrum, os); });
    });

    pipe.stage("verdict", var.has_value() && spectrum.has_value(),
               "needs the variational Gramian and the spectrum", [&]() {
                   const ObservabilityVerdict v = observability_verdict(*var, *spectrum);
                   pipe.write_file("verdict.json",
                                   [&](std::ostream& os) { os << verdict_to_json(v) << "\n"; });
               });

    std::optional<PerSensorGramians> gs;
    pipe.stage("per_sensor", var.has_value(), "variational Gramian unavailable", [&]() {
        gs = per_sensor_gramians(model, cfg.x0, cfg.horizon, irk);
        Matrix sum = Matrix::Zero(model.n_x, model.n_x);
        for (const auto& g : gs->per_sensor) sum += g;
        const double gap = (sum - var->matrix).norm() / var->matrix.norm();
        pipe.write_file("modularity.json", [&](std::ostream& os) {
            ordered_json m;
            m["n_sensors"] = gs->n_sensors();
            m["max_rel_gap"] = gap;
            os << m.dump(2) << "\n";
        });
    });

    selection_stages(pipe, cfg, gs);
    estimation_stage(pipe, cfg, model);
    return pipe.finish();
}

StudyReport run_selection(const ExperimentConfig& cfg) {
    const SystemModel model = load_study_model(cfg);
    const IrkConfig irk = irk_config(cfg);
    Pipeline pipe(cfg, "select");

    std::optional<PerSensorGramians> gs;
    pipe.stage("per_sensor", true, "", [&]() {
        gs = per_sensor_gramians(model, cfg.x0, cfg.horizon, irk);
    });
    selection_stages(pipe, cfg, gs);
    return pipe.finish();
}

StudyReport run_estimation(const ExperimentConfig& cfg) {
    const SystemModel model = load_study_model(cfg);
    Pipeline pipe(cfg, "estimate");
    estimation_stage(pipe, cfg, model);
    return pipe.finish();
}

} // namespace vargram
