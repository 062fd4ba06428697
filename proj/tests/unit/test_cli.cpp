#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qkdc/bounds.hpp"
#include "qkdc/cli.hpp"
#include "qkdc/divergences.hpp"
#include "qkdc/io.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qkdc;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> v;
    for (std::string w; is >> w;) v.push_back(w);
    return v;
}

std::vector<std::string> split(const std::string& s, char c) {
    std::vector<std::string> v;
    std::string cur;
    for (char ch : s) {
        if (ch == c) {
            v.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    v.push_back(cur);
    return v;
}

std::filesystem::path tmpdir() {
    auto d = std::filesystem::temp_directory_path() / "qkdc_cli_test";
    std::filesystem::create_directories(d);
    return d;
}

std::string write_matrix(const std::string& name, const Mat& m, const Dims& dims) {
    auto p = (tmpdir() / name).string();
    std::ofstream(p) << matrix_to_json(m, dims).dump();
    return p;
}

bool cells_close(const std::string& a, const std::string& b) {
    if (a == b) return true;
    char* ea = nullptr;
    char* eb = nullptr;
    double x = std::strtod(a.c_str(), &ea), y = std::strtod(b.c_str(), &eb);
    if (*ea || *eb || a.empty() || b.empty()) return false;
    return std::abs(x - y) <= 1e-9 * std::max(1.0, std::abs(y));
}

} // namespace

TEST_CASE("bound subcommand matches the library") {
    auto r = run({"bound", "dephasing", "--gamma", "0.1", "--n", "1000", "--eps", "0.05", "--format", "json"});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j.dump() == to_json(dephasing_boundary(0.1, 1000, 0.05)).dump());
    CHECK(j.contains("terms"));

    auto g = run({"bound", "gaussian", "--kind", "pure-loss", "--eta", "0.5", "--n", "100", "--eps", "0.1"});
    REQUIRE(g.code == 0);
    CHECK(json::parse(g.out)["value_bits"].get<double>() == round_sig(1.0 + chebyshev_constant(0.1) / 100, 12));

    auto c = run({"bound", "erasure", "--p", "0.3", "--n", "200", "--eps", "0.1", "--format", "csv"});
    REQUIRE(c.code == 0);
    CHECK(c.out == csv_header() + "\n" + to_csv_row(erasure_boundary(0.3, 200, 0.1)) + "\n");

    CHECK(run({"bound", "eb", "--n", "1", "--eps", "0.5"}).code == 0);
    CHECK(run({"bound", "chebyshev", "--D", "0.5", "--V", "0.1", "--n", "10", "--eps", "0.5"}).code == 0);
    CHECK(run({"bound", "second-order", "--D", "0.5", "--V", "0.1", "--n", "10", "--eps", "0.5"}).code == 0);
}

TEST_CASE("argument errors exit with 2") {
    CHECK(run({}).code == 2);
    CHECK(run({"bound", "dephasing", "--gamma", "0.1", "--n", "10", "--eps", "0.05", "--bogus", "1"}).code == 2);
    CHECK(run({"bound", "dephasing", "--gamma", "0.1", "--n", "10"}).code == 2);
    CHECK(run({"bound", "dephasing", "--gamma", "1.5", "--n", "10", "--eps", "0.05"}).code == 2);
    CHECK(run({"bound", "dephasing", "--gamma", "0.1", "--n", "10.5", "--eps", "0.05"}).code == 2);
    CHECK(run({"bound", "gaussian", "--kind", "thermal", "--eta", "0.5", "--n", "10", "--eps", "0.1"}).code == 2);
    CHECK(run({"bound", "gaussian", "--kind", "pure-loss", "--eta", "0.5", "--G", "2", "--n", "10", "--eps", "0.1"}).code == 2);
    CHECK(run({"bound", "unknown-family"}).code == 2);
    CHECK(run({"bound", "dephasing", "--gamma", "0.1", "--n", "10", "--eps", "0.05", "--format", "xml"}).code == 2);
    auto e = run({"bound", "erasure", "--p", "0.5", "--n", "10", "--eps", "0.99"});
    CHECK(e.code == 2);
    CHECK(e.err.find("achievable range") != std::string::npos);
    CHECK(run({"sweep", "dephasing", "--gamma", "0.1", "--eps", "0.05", "--param", "n", "--min", "100", "--max", "10", "--steps", "5"}).code == 2);
    CHECK(run({"sweep", "dephasing", "--gamma", "0.1", "--eps", "0.05", "--param", "n", "--min", "10", "--max", "100", "--steps", "0"}).code == 2);
    CHECK(run({"sweep", "dephasing", "--gamma", "0.1", "--n", "10", "--eps", "0.05", "--param", "n", "--min", "10", "--max", "100", "--steps", "3"}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("non-finite inputs are argument errors") {
    CHECK(run({"bound", "chebyshev", "--D", "nan", "--V", "0.1", "--n", "10", "--eps", "0.5"}).code == 2);
    CHECK(run({"bound", "second-order", "--D", "inf", "--V", "0.1", "--n", "10", "--eps", "0.5"}).code == 2);
    CHECK(run({"bound", "chebyshev", "--D", "0.1", "--V", "nan", "--n", "10", "--eps", "0.5"}).code == 2);
}

TEST_CASE("dh and divergence subcommands") {
    Rng rng(1);
    auto rho = random_density(2, rng);
    auto pr = write_matrix("rho.json", rho.matrix(), {2});
    auto r = run({"dh", "--rho", pr, "--sigma", pr, "--eps", "0.25"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["value_bits"].get<double>() == doctest::Approx(-std::log2(0.75)).epsilon(1e-11));

    Mat p = Mat::Zero(2, 2), q = Mat::Identity(2, 2) / 2.0;
    p(0, 0) = 0.75;
    p(1, 1) = 0.25;
    auto pp = write_matrix("p.json", p, {2}), pq = write_matrix("q.json", q, {2});
    auto d = run({"divergence", "--kind", "renyi", "--alpha", "2", "--rho", pp, "--sigma", pq});
    REQUIRE(d.code == 0);
    CHECK(json::parse(d.out)["value_bits"].get<double>() == doctest::Approx(std::log2(1.25)).epsilon(1e-11));
    CHECK(run({"divergence", "--kind", "renyi", "--rho", pp, "--sigma", pq}).code == 2);
    CHECK(run({"divergence", "--kind", "relative", "--alpha", "2", "--rho", pp, "--sigma", pq}).code == 2);
    auto rel = run({"divergence", "--kind", "relative", "--rho", pp, "--sigma", pq, "--format", "csv"});
    REQUIRE(rel.code == 0);
    CHECK(rel.out.rfind("kind,value_bits\nrelative,", 0) == 0);
    CHECK(run({"divergence", "--kind", "max", "--rho", pp, "--sigma", pq}).code == 0);
    CHECK(run({"divergence", "--kind", "variance", "--rho", pp, "--sigma", pq}).code == 0);

    Mat z = Mat::Zero(2, 2);
    z(0, 0) = 1;
    Mat o = Mat::Zero(2, 2);
    o(1, 1) = 1;
    auto pz = write_matrix("z.json", z, {2}), po = write_matrix("o.json", o, {2});
    auto inf = run({"dh", "--rho", pz, "--sigma", po, "--eps", "0.1"});
    REQUIRE(inf.code == 0);
    CHECK(json::parse(inf.out)["value_bits"].is_null());
    CHECK(json::parse(inf.out)["infinite"].get<bool>());

    CHECK(run({"dh", "--rho", "/nonexistent.json", "--sigma", pq, "--eps", "0.1"}).code == 2);
    std::ofstream((tmpdir() / "bad.json").string()) << "{\"re\": [[1, 0], [0, 1]]}";
    CHECK(run({"dh", "--rho", (tmpdir() / "bad.json").string(), "--sigma", pq, "--eps", "0.1"}).code == 2);
}

TEST_CASE("privacy-test subcommand") {
    Rng rng(2);
    auto theta = random_density(2, rng);
    auto ps = write_matrix("theta.json", theta.matrix(), {2});
    Mat pi = Mat::Identity(8, 8) / 8.0;
    auto pr = write_matrix("mixed.json", pi, {2, 2, 2});
    auto r = run({"privacy-test", "--rho", pr, "--K", "2", "--shield", ps, "--twist", "trivial"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["pass_probability"].get<double>() == doctest::Approx(0.25).epsilon(1e-11));
    auto a = run({"privacy-test", "--rho", pr, "--K", "2", "--shield", ps, "--seed", "7"});
    auto b = run({"privacy-test", "--rho", pr, "--K", "2", "--shield", ps, "--seed", "7"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(run({"privacy-test", "--rho", pr, "--K", "3", "--shield", ps}).code == 2);
}

TEST_CASE("simulate subcommand") {
    Rng rng(3);
    auto rho = random_density(2, rng);
    auto pr = write_matrix("sim.json", rho.matrix(), {2});
    auto r = run({"simulate", "--channel", "{\"kind\":\"dephasing\",\"gamma\":0.3}", "--rho", pr});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["trace_distance_to_direct"].get<double>() < 1e-9);
    auto e = run({"simulate", "--channel", "{\"kind\":\"erasure\",\"p\":0.5}", "--rho", pr, "--format", "csv"});
    REQUIRE(e.code == 0);
    CHECK(e.out.rfind("row,col,re,im\n", 0) == 0);
    CHECK(run({"simulate", "--channel", "{\"kind\":\"dephasing\",\"gamma\":0.3,\"p\":1}", "--rho", pr}).code == 2);
    CHECK(run({"simulate", "--channel", "{\"kind\":\"teleporter\"}", "--rho", pr}).code == 2);
}

TEST_CASE("JSON round trip is exact on the decimal form") {
    for (auto args : {std::vector<std::string>{"bound", "dephasing", "--gamma", "0.13", "--n", "777", "--eps", "0.07"},
                      std::vector<std::string>{"bound", "erasure", "--p", "0.41", "--n", "333", "--eps", "0.2"},
                      std::vector<std::string>{"bound", "gaussian", "--kind", "thermal", "--eta", "0.6", "--nb", "0.5", "--n", "50", "--eps", "0.3"}}) {
        auto r = run(args);
        REQUIRE(r.code == 0);
        auto j = json::parse(r.out);
        auto back = to_json(report_from_json(j));
        CHECK(back.dump() == j.dump());
    }
}

TEST_CASE("sweeps are ordered and independent of the thread count") {
    std::vector<std::string> args = split_ws("sweep erasure --p 0.5 --eps 0.05 --param n --min 10 --max 10000 --steps 31 --log");
    setenv("QKDC_THREADS", "1", 1);
    auto one = run(args);
    setenv("QKDC_THREADS", "4", 1);
    auto four = run(args);
    unsetenv("QKDC_THREADS");
    REQUIRE(one.code == 0);
    CHECK(one.out == four.out);
    auto lines = split(one.out, '\n');
    double prev = -1;
    long prev_n = 0;
    for (size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        auto cells = split(lines[i], ',');
        long n = std::stol(cells[2]);
        double v = std::stod(cells[5]);
        CHECK(n > prev_n);
        CHECK(v > prev);
        CHECK(v < 0.5);
        prev_n = n;
        prev = v;
    }
    // eps sweep at fixed n: non-decreasing
    auto e = run(split_ws("sweep dephasing --gamma 0.1 --n 200 --param eps --min 0.01 --max 0.9 --steps 15"));
    REQUIRE(e.code == 0);
    auto el = split(e.out, '\n');
    prev = -1e9;
    for (size_t i = 1; i < el.size(); ++i) {
        if (el[i].empty()) continue;
        double v = std::stod(split(el[i], ',')[5]);
        CHECK(v >= prev);
        prev = v;
    }
    // gamma sweep: first term is 1 - h(gamma)
    auto g = run(split_ws("sweep dephasing --n 1000 --eps 0.05 --param gamma --min 0.05 --max 0.45 --steps 5"));
    REQUIRE(g.code == 0);
    auto gl = split(g.out, '\n');
    for (size_t i = 1; i < gl.size(); ++i) {
        if (gl[i].empty()) continue;
        auto cells = split(gl[i], ',');
        double gamma = std::stod(cells[1].substr(cells[1].find('=') + 1));
        CHECK(std::stod(cells[6]) == doctest::Approx(1 - binary_entropy(gamma)).epsilon(1e-11));
    }
    auto j = run(split_ws("sweep eb --eps 0.5 --param n --min 1 --max 4 --steps 4 --format json"));
    REQUIRE(j.code == 0);
    CHECK(json::parse(j.out).size() == 4);
}

TEST_CASE("golden CSV files") {
    const std::filesystem::path dir = QKDC_GOLDEN_DIR;
    std::ifstream manifest(dir / "manifest.txt");
    REQUIRE(manifest.good());
    int files = 0;
    for (std::string line; std::getline(manifest, line);) {
        auto words = split_ws(line);
        if (words.empty()) continue;
        std::ifstream gf(dir / words[0]);
        REQUIRE(gf.good());
        std::stringstream ss;
        ss << gf.rdbuf();
        auto r = run(std::vector<std::string>(words.begin() + 1, words.end()));
        REQUIRE(r.code == 0);
        auto want = split(ss.str(), '\n'), got = split(r.out, '\n');
        CHECK(want.size() == got.size());
        for (size_t i = 0; i < std::min(want.size(), got.size()); ++i) {
            auto wc = split(want[i], ','), gc = split(got[i], ',');
            REQUIRE(wc.size() == gc.size());
            for (size_t c = 0; c < wc.size(); ++c) {
                INFO(words[0], " row ", i, " col ", c);
                CHECK(cells_close(gc[c], wc[c]));
            }
        }
        ++files;
    }
    CHECK(files >= 5);
}

TEST_CASE("CLI binary exit codes") {
    const std::string cli = QKDC_CLI_PATH;
    auto code = [&](const std::string& args) {
        int s = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(s);
    };
    CHECK(code("bound eb --n 3 --eps 0.5") == 0);
    CHECK(code("bound eb --n 3 --eps 0.5 --unknown") == 2);
    CHECK(code("frobnicate") == 2);
}
