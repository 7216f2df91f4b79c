#include <doctest.h>
#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "dsqft/one_particle.hpp"

using json = nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// stdout, plus stderr when merge_stderr
Run run(const std::string& args, bool merge_stderr = false, const std::string& env = "") {
    std::string cmd = env + " " + std::string(DSQFT_CLI) + " " + args + (merge_stderr ? " 2>&1" : " 2>/dev/null");
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) v.push_back(l);
    return v;
}

void expect_close(const json& a, const json& b, double tol) {
    for (auto it = b.begin(); it != b.end(); ++it) {
        if (it.key() == "error") continue;
        CHECK(std::abs(a.at(it.key()).get<double>() - it->get<double>()) <= tol);
    }
}

}  // namespace

TEST_CASE("decompose: identity and the O(1,2) gate") {
    auto r = run("decompose --matrix '1,0,0,0,1,0,0,0,1'");
    CHECK(r.code == 0);
    auto j = json::parse(r.out);
    for (const char* f : {"iwasawa", "cartan"})
        for (auto& [k, v] : j[f].items()) CHECK(v.get<double>() == 0.0);
    for (auto& [k, v] : j["hannabuss"].items()) CHECK(v.get<double>() == 0.0);

    auto bad = run("decompose --matrix '1.001,0,0,0,1,0,0,0,1'", true);
    CHECK(bad.code == 1);
    CHECK(bad.out.find("not in O(1,2)") != std::string::npos);

    CHECK(run("decompose --matrix '1,0,0,0,1,0,0,0'").code == 1);
    CHECK(run("decompose --matrix '1,0,0,0,1,0,0,0,z'").code == 1);
    CHECK(run("decompose --file /nonexistent/file").code == 1);
    // improper element: reflection of x1
    CHECK(run("decompose --matrix '1,0,0,0,-1,0,0,0,1'").code == 1);
}

TEST_CASE("decompose: exceptional set exits 2") {
    auto r = run("decompose --factors iwasawa:1.5707963267948966,0.3,0.2");
    CHECK(r.code == 2);
    auto j = json::parse(r.out);
    CHECK(j["hannabuss"].is_null());
    CHECK(j["iwasawa"]["error"].get<double>() < 1e-12);
}

TEST_CASE("decompose: golden file round trip") {
    const std::string path = std::string(DSQFT_TEST_DATA) + "/decompose_golden.jsonl";
    auto r = run("decompose --file " + path);
    REQUIRE(r.code == 0);
    auto got = lines(r.out);
    std::ifstream in(path);
    std::vector<std::string> want;
    for (std::string l; std::getline(in, l);)
        if (!l.empty()) want.push_back(l);
    REQUIRE(got.size() == want.size());
    REQUIRE(want.size() >= 20);
    for (std::size_t i = 0; i < want.size(); ++i) {
        auto a = json::parse(got[i]), b = json::parse(want[i]);
        for (const char* f : {"iwasawa", "cartan", "hannabuss"}) {
            expect_close(a[f], b[f], 1e-12);
            CHECK(a[f]["error"].get<double>() < 1e-10);
        }
    }
}

TEST_CASE("tables") {
    auto d = run("dispersion --mu 1 --r 1 --kmax 5");
    CHECK(d.code == 0);
    auto l = lines(d.out);
    REQUIRE(l.size() == 7);
    CHECK(l[0] == "k,omega,flat_omega,ratio");
    // 17 significant digits round-trip the library value
    auto p = dsqft::oneparticle::ModelParams::make(1.0, 1.0);
    double w3 = std::stod(l[4].substr(l[4].find(',') + 1));
    CHECK(w3 == dsqft::oneparticle::dispersion(p, 3));

    CHECK(lines(run("geometry --grid 4").out)[0] == "psi,tau,center,half_width");
    CHECK(lines(run("geometry --grid 4").out).size() == 17);
    CHECK(lines(run("specfun --kmax 3").out)[0] == "k,re,im");
    CHECK(lines(run("specfun --table kernel --grid 8").out)[0] == "psi,re,im");
    CHECK(lines(run("rep --grid 16").out)[0] == "alpha,before_re,before_im,after_re,after_im");
    CHECK(run("rep --grid 12").code == 1);
    CHECK(lines(run("covariance --grid 32 --theta 0.5").out).size() == 33);

    auto js = lines(run("dispersion --kmax 2 --format json").out);
    REQUIRE(js.size() == 3);
    CHECK(json::parse(js[2])["k"].get<double>() == 2.0);

    CHECK(run("dispersion --mu -1").code == 1);
    CHECK(run("nosuchcommand").code == 1);
    CHECK(run("").code == 1);
}

TEST_CASE("--out writes the file") {
    const std::string path = "dsqft_cli_test_out.csv";
    std::remove(path.c_str());
    CHECK(run("dispersion --kmax 2 --out " + path).out.empty());
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first == "k,omega,flat_omega,ratio");
    std::remove(path.c_str());
}

TEST_CASE("sample: deterministic, thread independent, schema") {
    const std::string args = "sample --L 8 --n-samples 2000 --batch 1000 --seed 11 --poly 0,0,0.1";
    auto a = run(args), b = run(args), c = run("sample --L 8 --n-samples 2000 --batch 1000 --seed 12 --poly 0,0,0.1");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out != c.out);
    CHECK(run(args, false, "DSQFT_THREADS=1").out == a.out);
    CHECK(run(args, false, "DSQFT_THREADS=3").out == a.out);
    auto recs = lines(a.out);
    REQUIRE(recs.size() == 2);
    for (const auto& l : recs) {
        auto j = json::parse(l);
        CHECK(j.contains("Z_hat"));
        CHECK(j.contains("ess"));
        CHECK(j["ess"].get<double>() > 10);
        CHECK(j["observables"].contains("phi"));
        CHECK(j["observables"]["two_point"].contains("stderr"));
    }
    CHECK(run("sample --batch 10").code == 1);
    CHECK(run("sample --poly 0,0,-1").code == 1);
    CHECK(run("sample --format csv").code == 1);
}

TEST_CASE("rp-check") {
    // kappa up to 200 is not resolved at 60 modes: the truncated bumps leak below the equator
    CHECK(run("rp-check --modes 60 --n-functions 5 --seed 3").code == 1);
    auto r = run("rp-check --modes 200 --n-functions 5 --bases 2 --seed 3");
    CHECK(r.code == 0);
    auto l = lines(r.out);
    REQUIRE(l.size() == 2);
    auto j = json::parse(l[0]);
    CHECK(j["lambda_min"].get<double>() >= -1e-9 * j["gram_norm"].get<double>());
}

TEST_CASE("check") {
    CHECK(run("check nosuchsuite").code == 1);
    auto g = run("check group --json");
    CHECK(g.code == 0);
    for (const auto& l : lines(g.out)) {
        auto j = json::parse(l);
        for (const char* k : {"criterion", "measured", "tolerance", "pass"}) CHECK(j.contains(k));
        CHECK(j["pass"].get<bool>());
        CHECK(j["criterion"].is_string());
        CHECK(j["measured"].is_number());
        CHECK(j["tolerance"].is_number());
    }
    auto o = run("check oneparticle --mu 1 --r 1 --json");
    bool casimir = false;
    for (const auto& l : lines(o.out)) {
        auto j = json::parse(l);
        if (j["criterion"].get<std::string>().find("Casimir") != std::string::npos) {
            casimir = true;
            CHECK(j["measured"].get<double>() < 1e-11);
        }
    }
    CHECK(casimir);
    CHECK(o.code == 0);
    auto csv = lines(run("check specfun --format csv").out);
    REQUIRE(csv.size() == 2);
    CHECK(csv[0] == "id,suite,criterion,measured,tolerance,pass,seconds");
}
