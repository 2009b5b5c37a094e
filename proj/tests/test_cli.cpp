#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path work_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "rxnet_cli_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt";
    const fs::path err = work_dir() / "stderr.txt";
    const std::string cmd = std::string(RXNET_CLI_PATH) + " " + args + " > " +
                            out.string() + " 2> " + err.string();
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path p = work_dir() / name;
    std::ofstream f(p, std::ios::binary);
    f << text;
    return p;
}

const std::string kEnzyme =
    "species: E, S, ES, P\n"
    "params: k1=1e6, k2=1e-4, k3=0.1\n"
    "init: E=5e-5, S=2e-4, ES=0, P=0\n"
    "E + S <-> ES : k1, k2\n"
    "ES -> E + P : k3\n";

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("simulate emits a CSV echoing the initial condition first") {
    const auto path = write_file("enzyme.rxn", kEnzyme);
    const auto r = run_cli("simulate " + path.string() + " --t-end 10");
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == "t,E,S,ES,P");
    CHECK(lines[1] == "0,5e-5,0.0002,0,0");
    // 200 samples by default, 5 columns per data row, increasing times.
    CHECK(lines.size() == 201);
    double prev_t = -1.0;
    for (size_t i = 1; i < lines.size(); ++i) {
        CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 4);
        const double t = std::stod(lines[i]);
        CHECK(t > prev_t);
        prev_t = t;
    }
    CHECK(r.err.find("steps accepted") != std::string::npos);
}

TEST_CASE("CLI invocations are byte-identical run-to-run") {
    const auto path = write_file("enzyme.rxn", kEnzyme);
    for (const std::string args :
         {std::string("simulate ") + path.string() + " --t-end 10 --method bdf",
          std::string("simulate ") + path.string() + " --t-end 1 --raw-steps",
          std::string("jacobian ") + path.string(),
          std::string("conservation ") + path.string()}) {
        const auto a = run_cli(args);
        const auto b = run_cli(args);
        REQUIRE(a.exit_code == b.exit_code);
        REQUIRE(a.out == b.out);
    }
}

TEST_CASE("check summarizes a valid network and rejects malformed ones") {
    const auto good = write_file("enzyme.rxn", kEnzyme);
    const auto r = run_cli("check " + good.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("species: 4") != std::string::npos);
    CHECK(r.out.find("reactions: 3") != std::string::npos);

    const auto bad = write_file("bad.rxn", "A -> B\n");
    const auto rb = run_cli("check " + bad.string());
    CHECK(rb.exit_code == 1);
    CHECK(rb.err.find(":1:") != std::string::npos);

    const auto missing = run_cli("check " + (work_dir() / "nope.rxn").string());
    CHECK(missing.exit_code == 1);
}

TEST_CASE("jacobian prints the matrix and a finite-difference report") {
    const auto path = write_file(
        "enzyme_j.rxn",
        "species: X1, X2, X3, X4\n"
        "init: X1=1, X2=2, X3=3, X4=4\n"
        "X1 + X2 -> X3 : 1\n"
        "X3 -> X1 + X2 : 1\n"
        "X3 -> X1 + X4 : 1\n");
    const auto r = run_cli("jacobian " + path.string());
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0] == "-2 -1 2 0");
    CHECK(lines[1] == "-2 -1 1 0");
    CHECK(lines[2] == "2 1 -2 0");
    CHECK(lines[3] == "0 0 1 0");
    const auto rel = lines[5].substr(lines[5].rfind(' ') + 1);
    CHECK(std::stod(rel) <= 1e-5);
}

TEST_CASE("conservation prints named invariants") {
    const auto path = write_file("enzyme.rxn", kEnzyme);
    const auto r = run_cli("conservation " + path.string());
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "E + ES = const");
    CHECK(lines[1] == "S + ES + P = const");
}

TEST_CASE("exit codes") {
    const auto path = write_file("enzyme.rxn", kEnzyme);
    SUBCASE("bad flags give 64") {
        CHECK(run_cli("simulate " + path.string()).exit_code == 64);  // no --t-end
        CHECK(run_cli("simulate " + path.string() + " --t-end 1 --method nope")
                  .exit_code == 64);
        CHECK(run_cli("frobnicate").exit_code == 64);
    }
    SUBCASE("solver failure gives 2") {
        const auto rob = write_file("robertson.rxn",
                                    "species: A, B, C\n"
                                    "init: A=1\n"
                                    "A -> B : 0.04\n"
                                    "2 B -> B + C : 3e7\n"
                                    "B + C -> A + C : 1e4\n");
        const auto r = run_cli("simulate " + rob.string() +
                               " --t-end 1e5 --method erk45 --max-steps 2000");
        CHECK(r.exit_code == 2);
        CHECK(r.err.find("solver failure") != std::string::npos);
    }
    SUBCASE("output file writing") {
        const auto out = (work_dir() / "traj.csv").string();
        const auto r = run_cli("simulate " + path.string() +
                               " --t-end 1 --output " + out);
        CHECK(r.exit_code == 0);
        CHECK(r.out.empty());
        CHECK(slurp(out).substr(0, 10) == "t,E,S,ES,P");
    }
}
