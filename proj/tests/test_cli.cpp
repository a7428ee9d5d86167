#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "kroncov/csv.hpp"
#include "kroncov/rng.hpp"
#include "kroncov/simlab.hpp"

using namespace kroncov;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(KRONCOV_CLI_PATH) + " " + args + " 2>/dev/null";
    std::array<char, 4096> buf{};
    RunResult out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        out.stdout_text.append(buf.data(), got);
    }
    int status = pclose(pipe);
    out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() / "kroncov_cli_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
    fs::path p = temp_dir() / name;
    std::ofstream out(p);
    out << text;
    return p;
}

fs::path write_panel_csv(const std::string& name, int t_obs, int n, std::uint64_t seed,
                         const Vector* rho = nullptr) {
    Rng rng(seed, 0);
    std::ostringstream os;
    for (int i = 0; i < n; ++i) os << (i ? "," : "") << "s" << i;
    os << '\n';
    std::vector<Matrix> sqrts;
    if (rho) {
        for (const Matrix& f : kronecker_factors_from_rhos(*rho)) {
            SpdEigen eig = spd_eigen(SymMatrix::from(f, 1e-12));
            sqrts.push_back(eig.apply_function([](double l) { return std::sqrt(l); }));
        }
    }
    Vector z(n);
    os.precision(17);
    for (int t = 0; t < t_obs; ++t) {
        for (int i = 0; i < n; ++i) z(i) = rng.normal();
        Vector row = rho ? kron_apply(sqrts, z) : z;
        for (int i = 0; i < n; ++i) os << (i ? "," : "") << row(i);
        os << '\n';
    }
    return write_file(name, os.str());
}

json strip_timestamp(json report) {
    report["manifest"].erase("created_at");
    return report;
}

}  // namespace

TEST_CASE("csv ingestion round trip and policies") {
    fs::path toy = write_file("toy.csv", "a,b\n1.5,2\n-0.25,4\n3,5\n");
    ReturnPanel panel = ingest_csv(toy.string());
    CHECK(panel.T() == 3);
    CHECK(panel.n() == 2);
    CHECK(panel.names[0] == "a");
    CHECK(panel.X(0, 0) == 1.5);
    CHECK(panel.X(2, 1) == 5.0);

    fs::path with_na = write_file("na.csv", "a,b\n1,2\nNA,4\n3,5\n");
    CHECK_THROWS_AS(ingest_csv(with_na.string()), ParseError);
    CsvOptions drop;
    drop.na_policy = NaPolicy::DropRow;
    CHECK(ingest_csv(with_na.string(), drop).T() == 2);

    fs::path ragged = write_file("ragged.csv", "a,b\n1,2\n3\n");
    CHECK_THROWS_AS(ingest_csv(ragged.string()), RaggedRows);

    fs::path alpha = write_file("alpha.csv", "a,b\n1,x\n");
    CHECK_THROWS_AS(ingest_csv(alpha.string()), NonNumeric);
}

TEST_CASE("large csv ingests quickly") {
    Rng rng(7, 0);
    std::ostringstream os;
    os.precision(10);
    for (int i = 0; i < 441; ++i) os << (i ? "," : "") << "c" << i;
    os << '\n';
    for (int t = 0; t < 2732; ++t) {
        for (int i = 0; i < 441; ++i) os << (i ? "," : "") << rng.normal();
        os << '\n';
    }
    fs::path big = write_file("big.csv", os.str());
    auto t0 = std::chrono::steady_clock::now();
    ReturnPanel panel = ingest_csv(big.string());
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(panel.T() == 2732);
    CHECK(panel.n() == 441);
    CHECK(secs < 2.0);
    std::error_code ec;
    fs::remove(big, ec);
}

TEST_CASE("fit subcommand emits a theta of the right length") {
    Vector rho(2);
    rho << 0.5, 0.3;
    fs::path csv = write_panel_csv("fit4.csv", 120, 4, 21, &rho);
    RunResult res = run_cli("fit " + csv.string() + " --dims 2,2 --estimator md --seed 5");
    REQUIRE(res.exit_code == 0);
    json report = json::parse(res.stdout_text);
    CHECK(report["schema"] == "kroncov/1");
    CHECK(report["command"] == "fit");
    CHECK(report["result"]["theta"].size() == 3);
    CHECK(report["result"]["rho"].size() == 2);
    CHECK(report["result"]["q"] == 3);
    CHECK(report["manifest"]["inputs"][0]["sha256"].get<std::string>().size() == 64);
}

TEST_CASE("cli output is deterministic given the seed") {
    Vector rho(2);
    rho << 0.4, 0.2;
    fs::path csv = write_panel_csv("det4.csv", 90, 4, 22, &rho);
    std::string args = "fit " + csv.string() + " --dims 2,2 --estimator qmle --seed 123";
    RunResult a = run_cli(args);
    RunResult b = run_cli(args);
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    CHECK(strip_timestamp(json::parse(a.stdout_text)) ==
          strip_timestamp(json::parse(b.stdout_text)));
}

TEST_CASE("exit codes follow the error contract") {
    fs::path bad = write_file("bad.csv", "a,b\n1,oops\n");
    CHECK(run_cli("fit " + bad.string() + " --dims 2 --seed 1").exit_code == 2);

    fs::path ragged = write_file("ragged2.csv", "a,b\n1,2\n3\n");
    CHECK(run_cli("fit " + ragged.string() + " --dims 2 --seed 1").exit_code == 2);

    // T < n: the moment matrix is singular, so the MD log fails numerically
    fs::path thin = write_panel_csv("thin.csv", 3, 4, 23);
    CHECK(run_cli("fit " + thin.string() + " --dims 2,2 --estimator md --seed 1").exit_code == 3);

    // missing file
    CHECK(run_cli("fit /nonexistent.csv --dims 2 --seed 1").exit_code == 2);
}

TEST_CASE("na drop-row policy shortens the panel") {
    fs::path csv = write_file("drop.csv", "a,b\n1,2\n,3\n4,9\n6,7\n2,1\n");
    RunResult res = run_cli("fit " + csv.string() + " --dims 2 --estimator md --na-policy drop-row --seed 1");
    REQUIRE(res.exit_code == 0);
    json report = json::parse(res.stdout_text);
    CHECK(report["result"]["T"] == 4);
}

TEST_CASE("overid subcommand reports the documented df") {
    Vector rho(3);
    rho << 0.4, 0.3, 0.5;
    fs::path csv = write_panel_csv("over8.csv", 400, 8, 24, &rho);
    RunResult res = run_cli("overid " + csv.string() + " --dims 2,2,2 --seed 2");
    REQUIRE(res.exit_code == 0);
    json report = json::parse(res.stdout_text);
    CHECK(report["result"]["df"] == 32);
    CHECK(report["result"]["p_value"].get<double>() >= 0.0);
}

TEST_CASE("infer subcommand emits functional intervals for binary dims") {
    Vector rho(2);
    rho << 0.5, 0.25;
    fs::path csv = write_panel_csv("infer4.csv", 300, 4, 25, &rho);
    RunResult res = run_cli("infer " + csv.string() + " --dims 2,2 --estimator md --seed 3");
    REQUIRE(res.exit_code == 0);
    json report = json::parse(res.stdout_text);
    CHECK(report["result"].contains("spectral"));
    CHECK(report["result"].contains("extreme_log_eigenvalues"));
    CHECK(report["result"].contains("mvp_log_variance"));
    CHECK(report["result"]["theta_se"].size() == 3);
}

TEST_CASE("simulate subcommand smoke run") {
    RunResult res = run_cli("simulate --dgp kronecker --n 4 --t 80 --reps 2 --seed 11");
    REQUIRE(res.exit_code == 0);
    json report = json::parse(res.stdout_text);
    CHECK(report["result"]["completed"] == 2);
    CHECK(report["result"]["median_prial1"].get<double>() <= 1.0);
}

TEST_CASE("backtest subcommand smoke run") {
    Vector rho(2);
    rho << 0.45, 0.3;
    fs::path csv = write_panel_csv("bt4.csv", 260, 4, 26, &rho);
    RunResult res = run_cli("backtest " + csv.string() +
                            " --dims 2,2 --window 120 --horizon 20 --estimator md --seed 4");
    REQUIRE(res.exit_code == 0);
    json report = json::parse(res.stdout_text);
    CHECK(report["result"]["windows"] == 7);
    CHECK(report["result"]["summaries"].size() == 1);
}

TEST_CASE("select subcommand groups candidates by padding") {
    Vector rho(3);
    rho << 0.5, 0.4, 0.3;
    fs::path csv = write_panel_csv("sel8.csv", 300, 8, 27, &rho);
    RunResult res = run_cli("select " + csv.string() +
                            " --dims 2,2,2 --dims 4,2 --dims 8 --estimator qmle --seed 9");
    REQUIRE(res.exit_code == 0);
    json report = json::parse(res.stdout_text);
    auto groups = report["result"]["groups"];
    REQUIRE(groups.size() == 1);
    CHECK(groups[0]["pad"] == 0);
    CHECK(groups[0]["candidates"].size() == 3);

    // table rendering path
    RunResult table = run_cli("select " + csv.string() + " --dims 2,2,2 --format table --seed 9");
    REQUIRE(table.exit_code == 0);
    CHECK(table.stdout_text.find("BIC") != std::string::npos);
}

TEST_CASE("out flag writes the report to a file") {
    Vector rho(2);
    rho << 0.3, 0.3;
    fs::path csv = write_panel_csv("out4.csv", 100, 4, 28, &rho);
    fs::path out = temp_dir() / "fit_report.json";
    std::error_code ec;
    fs::remove(out, ec);
    RunResult res = run_cli("fit " + csv.string() + " --dims 2,2 --estimator md --seed 6 --out " +
                            out.string());
    REQUIRE(res.exit_code == 0);
    CHECK(res.stdout_text.empty());
    std::ifstream in(out);
    REQUIRE(in.good());
    json report = json::parse(in);
    CHECK(report["command"] == "fit");
}
