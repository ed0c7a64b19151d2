#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "support/oracles.hpp"

using namespace vargram;
namespace fs = std::filesystem;

namespace {

fs::path write_text(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    return p;
}

} // namespace

TEST_CASE("experiment configs load with defaults and validation") {
    const auto cfg = load_experiment_config(
        oracles::config_path("experiments/cycle3_study.json").string());
    CHECK(cfg.horizon == 300);
    CHECK(cfg.step_size == 0.001);
    CHECK(cfg.seed == 5);
    CHECK(cfg.budgets == std::vector<int>{1, 2, 3});
    CHECK(cfg.perturbation_alpha == 0.2);
    // defaults fill anything the file leaves out
    CHECK(cfg.eps == 1e-4);
    CHECK(cfg.guess_perturbation == 0.1);
    CHECK(cfg.noise_std == 0.0);
    CHECK(cfg.newton_tol == 1e-10);
    // the model path resolves relative to the config file
    CHECK(fs::exists(cfg.model_spec));
}

TEST_CASE("unknown or malformed config fields fail fast") {
    const auto dir = oracles::temp_dir("cfg");
    const std::string model = oracles::config_path("models/lorenz63.json").string();

    const auto unknown = write_text(dir, "unknown.json",
        R"({"model_spec":")" + model + R"(","x0":[1,1,1],"horizons":5})");
    CHECK_THROWS_AS((void)load_experiment_config(unknown.string()), ConfigError);

    const auto no_x0 =
        write_text(dir, "no_x0.json", R"({"model_spec":")" + model + R"("})");
    CHECK_THROWS_AS((void)load_experiment_config(no_x0.string()), ConfigError);

    const auto zero_budget = write_text(dir, "budget.json",
        R"({"model_spec":")" + model + R"(","x0":[1,1,1],"budgets":[0]})");
    try {
        (void)load_experiment_config(zero_budget.string());
        FAIL_CHECK("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("budget") != std::string::npos);
    }

    const auto tiny_horizon = write_text(dir, "horizon.json",
        R"({"model_spec":")" + model + R"(","x0":[1,1,1],"horizon":1})");
    CHECK_THROWS_AS((void)load_experiment_config(tiny_horizon.string()), ConfigError);

    CHECK_THROWS_AS((void)load_experiment_config((dir / "missing.json").string()),
                    ConfigError);
}

TEST_CASE("content digests follow the 64-bit fnv-1a stream") {
    const auto dir = oracles::temp_dir("digest");
    const auto abc = write_text(dir, "abc.txt", "abc");
    CHECK(file_digest(abc.string()) == "e71fa2190541574b");
    const auto empty = write_text(dir, "empty.txt", "");
    CHECK(file_digest(empty.string()) == "cbf29ce484222325");
}

TEST_CASE("gramian comparison reports distance, timings, and files") {
    auto cfg = load_experiment_config(
        oracles::config_path("experiments/cycle3_study.json").string());
    const auto out = oracles::temp_dir("compare");
    cfg.outputs = out.string();
    cfg.horizon = 100;

    const CompareReport rep = run_gramian_compare(cfg);
    CHECK(rep.var_seconds > 0.0);
    CHECK(rep.empr_seconds > 0.0);
    CHECK_FALSE(rep.empirical_skipped);
    // linear reaction network: the two routes agree to roundoff
    CHECK(rep.rel_distance < 1e-10);
    for (const auto& f : rep.files) CHECK(fs::exists(out / f));
    CHECK(fs::exists(out / "compare_timings.csv"));
    CHECK(fs::exists(out / "normalized_var.csv"));
    CHECK(fs::exists(out / "normalized_empr.csv"));
}

TEST_CASE("the empirical route can be skipped by flag or by width") {
    auto cfg = load_experiment_config(
        oracles::config_path("experiments/cycle3_study.json").string());
    cfg.horizon = 50;

    auto out1 = oracles::temp_dir("skipflag");
    cfg.outputs = out1.string();
    cfg.no_empirical = true;
    const CompareReport by_flag = run_gramian_compare(cfg);
    CHECK(by_flag.empirical_skipped);
    CHECK_FALSE(fs::exists(out1 / "normalized_empr.csv"));

    auto out2 = oracles::temp_dir("skipwidth");
    cfg.outputs = out2.string();
    cfg.no_empirical = false;
    cfg.empirical_max_states = 2; // the model has 3 states
    const CompareReport by_width = run_gramian_compare(cfg);
    CHECK(by_width.empirical_skipped);
}

TEST_CASE("a full study emits every stage and a faithful manifest") {
    auto cfg = load_experiment_config(
        oracles::config_path("experiments/cycle3_study.json").string());
    const auto out = oracles::temp_dir("study");
    cfg.outputs = out.string();
    cfg.horizon = 120;

    const StudyReport rep = run_full_study(cfg);
    CHECK(rep.ok);
    REQUIRE(!rep.stages.empty());
    for (const auto& s : rep.stages) CHECK(s.status == "ok");

    REQUIRE(fs::exists(rep.manifest_path));
    const std::string manifest = oracles::read_file(rep.manifest_path);
    CHECK(manifest.find("\"command\": \"study\"") != std::string::npos);
    CHECK(manifest.find("\"seed\": 5") != std::string::npos);

    // every artifact named in the manifest exists and hashes to its entry
    for (const auto* name :
         {"trajectory.csv", "gramian_var.json", "gramian_empr.json", "equivalence.json",
          "spectrum.csv", "verdict.json", "modularity.json", "selection_r2.json",
          "error_table.csv"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(out / name));
        const std::string digest = file_digest((out / name).string());
        CHECK(manifest.find(digest) != std::string::npos);
    }
}

TEST_CASE("studies with the same config and seed are byte-identical") {
    auto cfg = load_experiment_config(
        oracles::config_path("experiments/cycle3_study.json").string());
    cfg.horizon = 80;

    auto out1 = oracles::temp_dir("repeat1");
    auto out2 = oracles::temp_dir("repeat2");
    cfg.outputs = out1.string();
    const StudyReport rep1 = run_full_study(cfg);
    cfg.outputs = out2.string();
    const StudyReport rep2 = run_full_study(cfg);
    REQUIRE(rep1.ok);
    REQUIRE(rep2.ok);

    for (const auto& entry : fs::directory_iterator(out1)) {
        const auto name = entry.path().filename();
        CAPTURE(name.string());
        REQUIRE(fs::exists(out2 / name));
        CHECK(oracles::read_file(entry.path()) == oracles::read_file(out2 / name));
    }
}

TEST_CASE("selection-only and estimation-only runs produce their slices") {
    auto cfg = load_experiment_config(
        oracles::config_path("experiments/cycle3_study.json").string());
    cfg.horizon = 80;

    auto sel_out = oracles::temp_dir("selonly");
    cfg.outputs = sel_out.string();
    const StudyReport sel = run_selection(cfg);
    CHECK(sel.ok);
    CHECK(fs::exists(sel_out / "selection_r1.json"));
    CHECK(fs::exists(sel_out / "manifest.json"));
    CHECK_FALSE(fs::exists(sel_out / "error_table.csv"));

    auto est_out = oracles::temp_dir("estonly");
    cfg.outputs = est_out.string();
    const StudyReport est = run_estimation(cfg);
    CHECK(est.ok);
    CHECK(fs::exists(est_out / "error_table.csv"));
    CHECK_FALSE(fs::exists(est_out / "selection_r1.json"));
}

TEST_CASE("study budgets beyond the sensor count are rejected at load") {
    const auto dir = oracles::temp_dir("cfg2");
    const std::string model = oracles::config_path("models/lorenz63.json").string();
    const auto over = write_text(dir, "over.json",
        R"({"model_spec":")" + model + R"(","x0":[1,1,1],"budgets":[4]})");
    CHECK_THROWS_AS((void)run_full_study(load_experiment_config(over.string())),
                    ConfigError);
}
