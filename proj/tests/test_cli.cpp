#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("sreg_cli_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string str(const char* name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    std::string cmd = std::string(SREG_CLI_PATH) + " " + args +
                      " >/dev/null 2>/dev/null";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string first_line(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    return line;
}

}  // namespace

TEST_CASE("cli end to end") {
    TempDir tmp;
    auto d3 = tmp.str("d3.json");
    auto heavy = tmp.str("heavy2x2.json");
    auto reducible = tmp.str("reducible.json");
    auto broken = tmp.str("broken.json");
    write_file(d3, R"({"S": [[3]]})");
    write_file(heavy, R"({"S": [[14, 2], [2, 2]]})");
    write_file(reducible, R"({"S": [[2, 0], [0, 2]]})");
    write_file(broken, R"({"S": [[3],)");

    SUBCASE("validate exit codes") {
        CHECK(run("validate --spec " + heavy) == 0);
        CHECK(run("validate --spec " + reducible) == 1);
        CHECK(run("validate --spec " + broken) == 2);
        CHECK(run("validate --spec " + tmp.str("missing.json")) == 6);
        CHECK(run("validate") == 2);  // missing required flag
        CHECK(run("--help") == 0);
    }

    SUBCASE("construct then spectrum") {
        auto graph = tmp.str("k4.txt");
        CHECK(run("construct --spec " + d3 + " --n 4 --out " + graph) == 0);
        CHECK(fs::exists(graph));
        CHECK(fs::exists(graph + ".json"));
        auto out = tmp.str("spec_out");
        CHECK(run("spectrum --spec " + d3 + " --graph " + graph + " --out " +
                  out) == 0);
        CHECK(first_line(out + "/eigenvalues.csv") == "index,value,class");
        CHECK(first_line(out + "/cellstats.csv") ==
              "lambda,cell,raw,scaled,cellsum");
        CHECK(first_line(out + "/density.csv") == "bin_left,bin_right,mass");
        // wrong spec for the graph: semantic violation
        CHECK(run("spectrum --spec " + heavy + " --graph " + graph +
                  " --out " + out) == 1);
        // impossible sizes for construct
        CHECK(run("construct --spec " + d3 + " --n 3 --out " + graph) == 1);
    }

    SUBCASE("sampling is reproducible byte for byte") {
        auto g1 = tmp.str("a.txt"), g2 = tmp.str("b.txt");
        CHECK(run("sample --spec " + heavy + " --n 30 30 --seed 9 --out " +
                  g1) == 0);
        CHECK(run("sample --spec " + heavy + " --n 30 30 --seed 9 --out " +
                  g2) == 0);
        CHECK(slurp(g1) == slurp(g2));
        CHECK(slurp(g1).size() > 0);
        auto g3 = tmp.str("c.txt");
        CHECK(run("sample --spec " + heavy + " --n 30 30 --seed 10 --out " +
                  g3) == 0);
        CHECK(slurp(g1) != slurp(g3));
        // seed is mandatory
        CHECK(run("sample --spec " + heavy + " --n 30 30 --out " + g1) == 2);
    }

    SUBCASE("tree-density outputs and grid validation") {
        auto out = tmp.str("td");
        CHECK(run("tree-density --spec " + d3 + " --grid -3:3:31 --out " +
                  out) == 0);
        CHECK(first_line(out + "/treedensity.csv") ==
              "lambda,mu_1,mixture,ratio_1,status");
        CHECK(run("tree-density --spec " + d3 + " --grid 3:-3:31") == 2);
        CHECK(run("tree-density --spec " + d3 + " --grid nonsense") == 2);
        auto dbg = tmp.str("gf.json");
        CHECK(run("tree-density --spec " + d3 + " --grid -3:3:31 --out " +
                  out + " --gf-debug " + dbg) == 0);
        CHECK(slurp(dbg).find("residual") != std::string::npos);
    }

    SUBCASE("verify-bounds emits the report table") {
        auto out = tmp.str("vb");
        CHECK(run("verify-bounds --spec " + heavy +
                  " --n 30 30 --seed 4 --trials 2 --out " + out) == 0);
        CHECK(first_line(out + "/bounds.csv") ==
              "name,lhs,rhs,slack,holds,context");
    }

    SUBCASE("report reruns are byte-identical") {
        auto o1 = tmp.str("r1"), o2 = tmp.str("r2");
        std::string args = " --spec " + heavy +
                           " --n 30 30 --trials 3 --matrix adjacency"
                           " --seed 7 --grid -8:16:101";
        CHECK(run("report" + args + " --out " + o1) == 0);
        CHECK(run("report" + args + " --threads 1 --out " + o2) == 0);
        for (const char* f : {"eigenvalues.csv", "cellstats.csv",
                              "density.csv", "treedensity.csv",
                              "comparison.json"}) {
            CHECK(slurp(o1 + "/" + f) == slurp(o2 + "/" + f));
            CHECK(slurp(o1 + "/" + f).size() > 0);
        }
        CHECK(first_line(o1 + "/eigenvalues.csv") ==
              "trial,index,value,class");
    }
}
