// End-to-end checks of the qfcusum binary: exit codes, output files,
// determinism across runs and thread counts. Invoked by ctest with the
// binary path as argv[1].

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "qfcusum/datagen.hpp"

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
    std::printf("[%s] %s\n", ok ? "ok" : "FAIL", what.c_str());
    if (!ok) ++g_failures;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int run(const std::string& command) {
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s <path-to-qfcusum-binary>\n", argv[0]);
        return 2;
    }
    const std::string bin = argv[1];
    const fs::path dir = fs::temp_directory_path() / "qfcusum_cli_tests";
    fs::remove_all(dir);
    fs::create_directories(dir);
    setenv("QFCUSUM_CACHE_DIR", (dir / "cache").c_str(), 1);

    // Fixtures straight from the generator.
    {
        qfcusum::ScenarioSpec spec;
        spec.n = 300;
        spec.p = 40;
        spec.s = 5;
        spec.sigma_kind = qfcusum::SigmaKind::Toeplitz;
        spec.seed = 2024;
        qfcusum::save_csv(qfcusum::generate(spec).data, dir / "null.csv");
        spec.change_pattern = qfcusum::ChangePattern::single_at(0.5, 1.0);
        qfcusum::save_csv(qfcusum::generate(spec).data, dir / "change.csv");
    }

    const std::string table = (dir / "table.json").string();
    check(run(bin + " calibrate --zeta 0.15 --alphas 0.10,0.05,0.01 --grid 500 --reps 5000"
                    " --seed 7 --out " + table + " > /dev/null 2>&1") == 0,
          "calibrate exits 0");
    check(slurp(dir / "table.json").find("\"quantiles\"") != std::string::npos,
          "calibrate writes a table with quantiles");

    // Null data: accept; change data: reject (seeds fixed by the fixtures).
    const std::string null_out = (dir / "null_outcome.json").string();
    check(run(bin + " test --data " + (dir / "null.csv").string() + " --table " + table +
                    " --seed 3 --out " + null_out + " > /dev/null 2>&1") == 0,
          "test on null data exits 0");
    check(slurp(null_out).find("\"reject\": false") != std::string::npos,
          "null data is not rejected");

    const std::string change_out = (dir / "change_outcome.json").string();
    check(run(bin + " test --data " + (dir / "change.csv").string() + " --table " + table +
                    " --seed 3 --out " + change_out + " > /dev/null 2>&1") == 0,
          "test on change data exits 0");
    check(slurp(change_out).find("\"reject\": true") != std::string::npos,
          "strong change is rejected");

    // Byte-identical rerun.
    const std::string change_out2 = (dir / "change_outcome2.json").string();
    run(bin + " test --data " + (dir / "change.csv").string() + " --table " + table +
        " --seed 3 --out " + change_out2 + " > /dev/null 2>&1");
    check(slurp(change_out) == slurp(change_out2), "identical flags give identical output");

    // calibrate + --table equals on-the-fly calibration at the same seed.
    const std::string small_table = (dir / "small_table.json").string();
    run(bin + " calibrate --zeta 0.15 --alphas 0.10,0.05,0.01 --grid 400 --reps 2000"
              " --seed 12 --out " + small_table + " > /dev/null 2>&1");
    const std::string with_table = (dir / "with_table.json").string();
    const std::string on_the_fly = (dir / "on_the_fly.json").string();
    run(bin + " test --data " + (dir / "null.csv").string() + " --table " + small_table +
        " --seed 3 --out " + with_table + " > /dev/null 2>&1");
    run(bin + " test --data " + (dir / "null.csv").string() +
        " --grid 400 --reps 2000 --cal-seed 12 --seed 3 --out " + on_the_fly +
        " > /dev/null 2>&1");
    check(slurp(with_table) == slurp(on_the_fly),
          "pre-calibrated table equals on-the-fly calibration");

    // Localize.
    const std::string loc_out = (dir / "loc.json").string();
    check(run(bin + " localize --data " + (dir / "change.csv").string() + " --seed 3 --out " +
                    loc_out + " > /dev/null 2>&1") == 0,
          "localize exits 0");
    check(slurp(loc_out).find("\"argmax_t\": 150") != std::string::npos,
          "localize finds the planted break at t=150");

    // Error paths.
    check(run(bin + " test --data " + (dir / "missing.csv").string() + " --table " + table +
                    " > /dev/null 2> " + (dir / "err.txt").string()) == 3,
          "missing data file exits 3");
    check(slurp(dir / "err.txt").find("missing.csv") != std::string::npos,
          "error message names the missing path");
    check(run(bin + " test --data " + (dir / "null.csv").string() + " --no-such-flag xyz"
                    " > /dev/null 2>&1") == 2,
          "unknown flag exits 2");
    {
        std::ofstream bad(dir / "bad_plan.json");
        bad << "{ not json";
    }
    check(run(bin + " simulate --plan " + (dir / "bad_plan.json").string() + " --out " +
                    (dir / "simout").string() + " > /dev/null 2>&1") == 2,
          "unparseable plan exits 2");

    // Simulate: thread-count independence of the report files.
    {
        std::ofstream plan(dir / "plan.json");
        plan << R"({
  "scenarios": [
    {"n": 100, "p": 8, "s": 3, "sigma_kind": "Toeplitz", "dependence": "Independent",
     "change_pattern": {"kind": "SingleAt", "frac": 0.5, "kappa": 1.5}, "sigma_eps": 1.0, "seed": 0}
  ],
  "reps": 6, "alpha": 0.05, "zeta": 0.15, "master_seed": 77, "mode": "Localize", "stride": 1
})";
    }
    check(run(bin + " simulate --plan " + (dir / "plan.json").string() + " --out " +
                    (dir / "sim1").string() + " --threads 1 --table " + table +
                    " > /dev/null 2>&1") == 0,
          "simulate exits 0");
    run(bin + " simulate --plan " + (dir / "plan.json").string() + " --out " +
        (dir / "sim2").string() + " --threads 2 --table " + table + " > /dev/null 2>&1");
    check(slurp(dir / "sim1/report.csv") == slurp(dir / "sim2/report.csv"),
          "report.csv identical across thread counts");
    check(slurp(dir / "sim1/localization.csv") == slurp(dir / "sim2/localization.csv"),
          "localization.csv identical across thread counts");
    check(!slurp(dir / "sim1/localization_hist.csv").empty(), "histogram csv written");

    std::printf("%s\n", g_failures == 0 ? "ALL CLI CHECKS PASSED" : "CLI CHECKS FAILED");
    return g_failures == 0 ? 0 : 1;
}
