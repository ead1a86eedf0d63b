#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string output;
};

// Runs the installed binary with `args`; captures stdout, or stdout+stderr
// when `merge_stderr` is set. Timing telemetry lives on stderr, so the
// default capture is byte-stable across runs.
RunResult run_cli(const std::string& args, bool merge_stderr = false) {
    const std::string cmd = std::string(BITWORDS_CLI_PATH) + " " + args +
                            (merge_stderr ? " 2>&1" : " 2>/dev/null");
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult r;
    char buf[4096];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
    const int status = pclose(pipe);
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    return r;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("bitwords_cli_" + name);
}

}  // namespace

TEST_CASE("analytic scalars print machine-precision values") {
    RunResult r = run_cli("analytic --fn limit-atom --a 1 --p 0.6");
    CHECK(r.exit_code == 0);
    CHECK(r.output == "0.5\n");

    r = run_cli("analytic --fn entropy --p 0.5");
    CHECK(r.exit_code == 0);
    CHECK(r.output == "1\n");

    r = run_cli("analytic --fn weight-count --k 64 --weight 32");
    CHECK(r.exit_code == 0);
    CHECK(r.output == "1832624140942590534\n");

    r = run_cli("analytic --fn weight-mass --k 24 --weight 14 --p 0.6");
    CHECK(r.exit_code == 0);
    CHECK(r.output ==
          "exact=0.16115793869486308 local_clt=0.16393321504247496 "
          "ratio=0.98307068920174101\n");
}

TEST_CASE("resolve reports the window budget and realized mean") {
    const RunResult r =
        run_cli("analytic --fn resolve --rule conditional-poisson --c 0 --lambda 1 --p 0.6 --k 24");
    CHECK(r.exit_code == 0);
    CHECK(r.output ==
          "n_windows=12169775\n"
          "log2_windows=23.53679915934741\n"
          "target_weight=14\n"
          "lambda_k=0.99999992524192971\n");
}

TEST_CASE("exit codes: 0 success, 1 validation, 2 guard") {
    // limit-atom is only defined for p above one half.
    RunResult r = run_cli("analytic --fn limit-atom --a 1 --p 0.5", true);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("error:") != std::string::npos);

    // Unknown flag: the argument parser rejects it.
    r = run_cli("analytic --fn entropy --p 0.5 --nonsense 1", true);
    CHECK(r.exit_code == 1);

    // Symmetric p makes the window budget hit the exact-integer cap.
    r = run_cli("analytic --fn resolve --rule entropy-scaled --a 1 --p 0.5 --k 64", true);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("guard:") != std::string::npos);

    // A per-k overflow still emits the healthy rows but exits 2.
    r = run_cli("annealed-exact --p 0.6 --rule entropy-exponent-shifted --delta 0.9 --k 16,65536");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("overflow") != std::string::npos);
    CHECK(r.output.find("note: k=65536") != std::string::npos);
    CHECK(r.output.find("16     ok") != std::string::npos);
}

TEST_CASE("stdout is byte-identical across thread counts") {
    const std::string base = "conditional-poisson --p 0.6 --c 0 --lambda 1 --k 16 --seeds 2";
    const RunResult one = run_cli(base + " --threads 1");
    const RunResult four = run_cli(base + " --threads 4");
    CHECK(one.exit_code == 0);
    CHECK(four.exit_code == 0);
    CHECK(one.output == four.output);
    CHECK(one.output.find("spec: kind=conditional-poisson") != std::string::npos);
}

TEST_CASE("outputs match the frozen golden files byte for byte") {
    const fs::path golden(BITWORDS_GOLDEN_DIR);

    struct Case {
        const char* args;
        const char* name;
    };
    const Case cases[] = {
        {"annealed-exact --p 0.6 --rule entropy-scaled --a 1.0 --k 64,256 --n-max 4",
         "annealed_exact_p06_a1.csv"},
        {"conditional-poisson --p 0.6 --c 0 --lambda 1.0 --k 16 --seeds 2",
         "conditional_poisson_k16.csv"},
        {"tv-bound --p 0.6 --c 0 --lambda 1.0 --mode analytic --support fixed-weight --k 12,16",
         "tv_bound_analytic.json"},
        {"non-poisson-witness --p 0.6 --rule entropy-scaled --a 1.0 --k 256,1024",
         "witness_annealed.csv"},
    };

    for (const Case& c : cases) {
        CAPTURE(c.name);
        const fs::path out = temp_path(c.name);
        const RunResult r = run_cli(std::string(c.args) + " --out " + out.string());
        CHECK(r.exit_code == 0);
        CHECK(slurp(out) == slurp(golden / c.name));
        fs::remove(out);
    }
}

TEST_CASE("help text maps flags to their symbols") {
    RunResult r = run_cli("--help");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("annealed-exact") != std::string::npos);
    CHECK(r.output.find("tv-bound") != std::string::npos);

    r = run_cli("annealed-exact --help");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("(symbol p)") != std::string::npos);
    CHECK(r.output.find("entropy-scaled | entropy-exponent-shifted") != std::string::npos);

    r = run_cli("analytic --help");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("limit-atom") != std::string::npos);
}

TEST_CASE("config files feed flags; explicit flags win") {
    const fs::path cfg = temp_path("spec.cfg");
    {
        std::ofstream out(cfg);
        out << "# exact pmf at a tiny size\n"
            << "p = 0.6\n"
            << "k = 4\n"
            << "n-max = 1\n";
    }

    RunResult r = run_cli("annealed-exact --config " + cfg.string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find(" k=4 ") != std::string::npos);
    CHECK(r.output.find("n_max=1") != std::string::npos);

    r = run_cli("annealed-exact --config " + cfg.string() + " --k 8");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find(" k=8 ") != std::string::npos);
    fs::remove(cfg);

    const fs::path bad = temp_path("bad.cfg");
    {
        std::ofstream out(bad);
        out << "lamda = 1\n";
    }
    r = run_cli("conditional-poisson --k 16 --seeds 1 --config " + bad.string(), true);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("unknown configuration key `lamda`") != std::string::npos);
    CHECK(r.output.find(":1") != std::string::npos);
    fs::remove(bad);

    const fs::path mismatched = temp_path("kind.cfg");
    {
        std::ofstream out(mismatched);
        out << "kind = quenched\nk = 4\n";
    }
    r = run_cli("annealed-exact --config " + mismatched.string(), true);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("does not match subcommand") != std::string::npos);
    fs::remove(mismatched);
}

TEST_CASE("output paths must state their format") {
    const RunResult r =
        run_cli("annealed-exact --p 0.6 --k 4 --out " + temp_path("report.txt").string(), true);
    CHECK(r.exit_code == 1);
    CHECK(r.output.find("must end in .csv or .json") != std::string::npos);
}
