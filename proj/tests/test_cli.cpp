#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fc/suites.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fc;
namespace fs = std::filesystem;

static const std::string FCX = FCX_PATH;
static const std::string SRC = SOURCE_DIR;

struct Run {
    int code = -1;
    std::string out;  // stdout and stderr together
};

static Run run(const std::string& args)
{
    Run r;
    FILE* p = popen((FCX + " " + args + " 2>&1").c_str(), "r");
    REQUIRE(p);
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

static std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

static fs::path tmp(const std::string& name)
{
    fs::path d = fs::temp_directory_path() / "fcx_test";
    fs::create_directories(d);
    return d / name;
}

static bool schema_ok(const std::string& schema, const fs::path& report)
{
    std::string cmd = "python3 " + SRC + "/tools/validate_report.py " + SRC + "/schema/" + schema + " " +
                      report.string();
    return std::system(cmd.c_str()) == 0;
}

TEST_CASE("verify delta2 at nmax 5, lmax 3 passes")
{
    fs::path out = tmp("delta2.json");
    Run r = run("verify --suite delta2 --nmax 5 --lmax 3 --out " + out.string());
    CHECK(r.code == 0);
    Json j = Json::parse(slurp(out));
    CHECK(j["suite"] == "delta2");
    CHECK(j["params"]["nmax"] == 5);
    CHECK(j["cases"].size() == 20);
    CHECK(all_pass(j));
    CHECK(schema_ok("report.schema.json", out));
}

TEST_CASE("verify gv reports a witness or vanishing at truncation")
{
    fs::path out = tmp("gv.json");
    Run r = run("verify --suite gv --out " + out.string());
    Json j = Json::parse(slurp(out));
    REQUIRE(j.contains("class"));
    const Json& c = j["class"];
    CHECK((c["status"] == "nonvanishing" || c["status"] == "vanishing at truncation"));
    if (c["status"] == "nonvanishing") {
        CHECK(c["witness"]["order"] == 1);
        CHECK(c["witness"]["sample"] == "w'=|0>; a(-1)|0>@z1; a(-1)a(-1)|0>@z2");
        CHECK(parse_ratfunc(c["witness"]["value"].get<std::string>()) ==
              parse_ratfunc("-2/((zeta1+2)^2*(zeta2+3)^2)"));
    } else {
        CHECK(c["witness"].is_null());
    }
    // exit status follows the case statuses
    CHECK(r.code == (all_pass(j) ? 0 : 1));
    CHECK(schema_ok("report.schema.json", out));
}

TEST_CASE("empty suite selection is a no-op")
{
    Run r = run("verify");
    CHECK(r.code == 0);
    Json j = Json::parse(r.out);
    CHECK(j["cases"].empty());
    CHECK(j["suite"] == "");
}

TEST_CASE("usage errors exit with 2")
{
    CHECK(run("verify --suite nope").code == 2);
    CHECK(run("verify --nmax 2 --lmax 3").code == 2);
    CHECK(run("verify --lambda 0").code == 2);
    CHECK(run("verify --sign-convention other").code == 2);
    CHECK(run("verify --nmax x").code == 2);
    CHECK(run("").code == 2);
    CHECK(run("product --phi 'E[|0>; 1]' --psi 'E[|0>; 0]'").code == 2);
}

TEST_CASE("malformed state literal")
{
    Run r = run("product --phi 'E[|0>; 1]' --psi 'E[|0>; 0]' --ins-x 'a(-1|0>@z1' --no-cache");
    CHECK(r.code == 2);
    CHECK(r.out.find("parse error at position 4") != std::string::npos);
    CHECK(run("product --phi 'E[|0; 1]' --psi 'E[|0>; 0]' --no-cache").code == 2);
}

TEST_CASE("product of vacua is 1")
{
    fs::path out = tmp("vac.json");
    Run r = run("product --phi 'E[|0>; 0]' --psi 'E[|0>; 0]' --lmax 3 --no-cache --out " + out.string());
    CHECK(r.code == 0);
    Json j = Json::parse(slurp(out));
    CHECK(j["orders"][0]["value"] == "(1)");
    for (int l = 1; l <= 3; ++l) CHECK(j["orders"][l]["value"] == "(0)");
    CHECK(schema_ok("product.schema.json", out));
}

TEST_CASE("current times current matches the pinned regression")
{
    fs::path out = tmp("cc.json");
    Run r = run("product --phi 'E[|0>; 1]' --psi 'E[|0>; 1]' --ins-x 'a(-1)|0>@z1' --ins-y 'a(-1)|0>@z2' "
                "--nmax 4 --lmax 2 --no-cache --out " +
                out.string());
    // the sewing insertion at -zeta1 fails the diagonal pole certificate
    CHECK(r.code == 1);
    CHECK(r.out.find("pole outside the diagonals at zeta1 + z1 = 0") != std::string::npos);
    CHECK(slurp(out) == slurp(SRC + "/tests/data/current_current.json"));
    Json j = Json::parse(slurp(out));
    CHECK(parse_ratfunc(j["orders"][0]["value"].get<std::string>()).is_zero());
    CHECK(parse_ratfunc(j["orders"][1]["value"].get<std::string>()) ==
          parse_ratfunc("1/((z1+zeta1)^2*(z2+zeta2)^2)"));
    CHECK(parse_ratfunc(j["orders"][2]["value"].get<std::string>()) ==
          parse_ratfunc("-2/((z1+zeta1)^3*(z2+zeta2)^3)"));
    CHECK(j["pole_certificate"][0]["ok"] == true);
    CHECK(j["pole_certificate"][1]["ok"] == false);
    CHECK(schema_ok("product.schema.json", out));
}

TEST_CASE("sewn product")
{
    Run r = run("product --phi 'E[|0>; 1]' --psi 'E[|0>; 1]' --ins-x 'a(-1)|0>@z1' --ins-y 'a(-1)|0>@z2' "
                "--nmax 4 --lmax 2 --no-cache --sew");
    Json j = Json::parse(r.out.substr(0, r.out.rfind('}') + 1));
    CHECK(j["sewn"] == true);
    // zeta2 = eps/zeta1: the leading part of 1/(z2 + eps/zeta1)^2 stays at eps^1
    RatFunc f = parse_ratfunc(j["orders"][1]["value"].get<std::string>());
    CHECK(f == parse_ratfunc("1/((z1+zeta1)^2*z2^2)"));
}

TEST_CASE("cache directory override")
{
    fs::path dir = tmp("cache");
    fs::remove_all(dir);
    const std::string env = "FC_CACHE_DIR=" + dir.string() + " ";
    const std::string args = "product --phi 'E[|0>; 1]' --psi 'E[|0>; 1]' --ins-x 'a(-1)|0>@z1' "
                             "--ins-y 'a(-1)|0>@z2' --nmax 4 --lmax 2";
    FILE* p = popen((env + FCX + " " + args + " 2>/dev/null").c_str(), "r");
    REQUIRE(p);
    std::string first;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) first.append(buf, n);
    pclose(p);
    CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}) == 1);
    p = popen((env + FCX + " " + args + " 2>/dev/null").c_str(), "r");
    REQUIRE(p);
    std::string second;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) second.append(buf, n);
    pclose(p);
    CHECK(first == second);
    CHECK(first == slurp(SRC + "/tests/data/current_current.json"));
}

TEST_CASE("expand")
{
    Json a = Json::parse(run("expand --f '1/(z1-z2)' --var z1 --about z2 --order 2").out);
    CHECK(a["lowest"] == -1);
    REQUIRE(a["orders"].size() == 1);
    CHECK(a["orders"][0]["coeff"] == "(1)");
    Json b = Json::parse(run("expand --f '1/(1-z1)' --order 3").out);
    CHECK(b["orders"].size() == 4);
    CHECK(run("expand --f '1/(z1-' --order 3").code == 2);
    CHECK(run("expand --f '1/z1' --var q").code == 2);
}

TEST_CASE("identical configs give byte-identical reports")
{
    fs::path a = tmp("det_a.json"), b = tmp("det_b.json");
    run("verify --suite delta2,shuffle,oracle --nmax 4 --lmax 2 --seed 3 --out " + a.string());
    run("verify --suite delta2,shuffle,oracle --nmax 4 --lmax 2 --seed 3 --out " + b.string());
    CHECK(slurp(a) == slurp(b));
    CHECK(!slurp(a).empty());
}

TEST_CASE("printed sign convention leaves the back term")
{
    Run r = run("verify --suite delta2 --nmax 4 --lmax 2 --sign-convention printed");
    CHECK(r.code == 1);
    Json j = Json::parse(r.out);
    int ex_fail = 0;
    for (auto& c : j["cases"]) {
        std::string id = c["id"];
        if (id.rfind("delta2/dd/", 0) == 0) CHECK(c["status"] == "pass");
        if (id.rfind("delta2/ex-after-delta/", 0) == 0 && c["status"] == "fail") ++ex_fail;
    }
    CHECK(ex_fail > 0);
}
