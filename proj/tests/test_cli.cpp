#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qgrad/cli.hpp"

using qgrad::cli::run;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

CliResult invoke(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

/// Drops the trailing wall-time column from every data row.
std::string strip_wall(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] != '#' && line.find(',') != std::string::npos) {
            const auto pos = line.rfind(',');
            line = line.substr(0, pos);
        }
        out << line << '\n';
    }
    return out.str();
}

} // namespace

TEST_CASE("gradient subcommand: exact rows for the lattice-exact linear function") {
    const CliResult r = invoke({"gradient", "--function", "linear_d3", "--epsilon", "0.1",
                                "--seeds", "10"});
    CHECK(r.exit_code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "# schema qgrad-run-v1");
    std::getline(in, line);
    // the run-row column list is a stable contract
    CHECK(line ==
          "run_id,seed,function,method,d,n,N_or_m,a,q,epsilon,rho,error_linf,error_maxnorm,"
          "success,sim_calls,theory_cost,wall_ms");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.find(",0,") != std::string::npos); // error_linf column is exactly 0
        CHECK(line.find(",true,") != std::string::npos);
    }
    CHECK(rows == 10);
}

TEST_CASE("identical config and seed produce byte-identical rows modulo wall time") {
    const std::vector<std::string> args{"gradient", "--function", "poly_d2",
                                        "--epsilon", "0.1",      "--seed",
                                        "42",       "--seed",    "43"};
    const CliResult a = invoke(args);
    const CliResult b = invoke(args);
    CHECK(a.exit_code == 0);
    CHECK(strip_wall(a.out) == strip_wall(b.out));

    const CliResult c = invoke({"sparse-hessian", "--function", "quad_sparse_d8_q7", "--q", "7",
                                "--sparsity", "2", "--seed", "7"});
    const CliResult d = invoke({"sparse-hessian", "--function", "quad_sparse_d8_q7", "--q", "7",
                                "--sparsity", "2", "--seed", "7"});
    CHECK(c.exit_code == 0);
    CHECK(strip_wall(c.out) == strip_wall(d.out));
}

TEST_CASE("missing required flags and unknown functions exit nonzero") {
    CHECK(invoke({"gradient"}).exit_code != 0);
    CHECK(invoke({"gradient", "--function", "nope"}).exit_code != 0);
    CHECK(invoke({"no-such-subcommand"}).exit_code != 0);
}

TEST_CASE("data failures never flip the exit code") {
    // a sparsity declaration that is too small fails every seed, as data
    const CliResult r = invoke({"sparse-hessian", "--function", "quad_sparse_d8_q7", "--q", "7",
                                "--sparsity", "1", "--probes", "6", "--seeds", "2"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("false") != std::string::npos);
}

TEST_CASE("verify-bounds: asserted invariants hold, flagged rows are recorded") {
    const CliResult r = invoke({"verify-bounds"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("abs_sum_vs_pi2_over_6,3,0") != std::string::npos);
    CHECK(r.out.find("all asserted invariants hold") != std::string::npos);
    // the recorded pi^2/6 status at m=3 is false without failing the run
    CHECK(r.out.find("1.6611111111111112") != std::string::npos);
}

TEST_CASE("verify-bounds rejects an empty sweep range") {
    const CliResult r = invoke({"verify-bounds", "--m-lo", "5", "--m-hi", "2"});
    CHECK(r.exit_code == 2);
}

TEST_CASE("spectral-error-sweep emits a monotone-dominated error column") {
    const CliResult r = invoke({"spectral-error-sweep", "--N-lo", "4", "--N-hi", "12"});
    CHECK(r.exit_code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line); // schema
    std::getline(in, line); // header
    double prev_measured = 1e9;
    int rows = 0;
    while (std::getline(in, line)) {
        std::istringstream cols(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(cols, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 6);
        const double measured = std::stod(cells[4]);
        const double bound = std::stod(cells[5]);
        CHECK(measured <= bound);
        CHECK(measured < prev_measured);
        prev_measured = measured;
        ++rows;
    }
    CHECK(rows == 9);
}

TEST_CASE("query-ledger dense-d reports the counted-call ratio") {
    const CliResult r = invoke({"query-ledger", "--sweep", "dense-d"});
    CHECK(r.exit_code == 0);
    const std::string tag = "dense-d counted ratio d=3/d=2: ";
    const auto pos = r.out.find(tag);
    REQUIRE(pos != std::string::npos);
    const double ratio = std::stod(r.out.substr(pos + tag.size()));
    CHECK(ratio == doctest::Approx(1.65));
}

TEST_CASE("query-ledger gradient-eps: theory cost grows as epsilon halves") {
    const CliResult r = invoke({"query-ledger", "--sweep", "gradient-eps"});
    CHECK(r.exit_code == 0);
    // two growth factors, each above 1 (the 1/eps term dominates)
    std::istringstream in(r.out);
    std::string line;
    int growth_lines = 0;
    while (std::getline(in, line))
        if (line.rfind("gradient-eps theory growth: ", 0) == 0) {
            ++growth_lines;
            CHECK(std::stod(line.substr(28)) > 1.2);
        }
    CHECK(growth_lines == 2);
}

TEST_CASE("config files feed the same parser and reject unknown keys") {
    const std::string path = "/tmp/qgrad_cli_test_config.ini";
    {
        std::ofstream cfg(path);
        cfg << "gradient.epsilon=0.1\ngradient.seeds=3\n";
    }
    const CliResult ok = invoke({"--config", path, "gradient", "--function", "linear_d3"});
    CHECK(ok.exit_code == 0);
    CHECK(strip_wall(ok.out) ==
          strip_wall(invoke({"gradient", "--function", "linear_d3", "--epsilon", "0.1",
                             "--seeds", "3"})
                         .out));
    // explicit flags win over file values
    const CliResult override_run =
        invoke({"--config", path, "gradient", "--function", "linear_d3", "--seeds", "1"});
    CHECK(override_run.exit_code == 0);
    CHECK(override_run.out.find("\ngradient-linear_d3-spectral,2,") == std::string::npos);
    {
        std::ofstream cfg(path);
        cfg << "gradient.epsilon=0.1\ngradient.not_a_real_key=1\n";
    }
    const CliResult bad = invoke({"--config", path, "gradient", "--function", "linear_d3"});
    CHECK(bad.exit_code != 0);
}
