#include "dagas/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

using namespace dagas;

namespace {

struct Outcome {
    int code = 0;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "dagas");
    std::vector<const char *> argv;
    for (const auto &a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    Outcome o;
    o.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

nlohmann::json result_of(const Outcome &o)
{
    REQUIRE(o.code == 0);
    return nlohmann::json::parse(o.out).at("result");
}

} // namespace

TEST_CASE("enumerate prints the count series")
{
    const Outcome o = cli({"enumerate", "--lattice", "LR:0,1", "--source", "0,0", "--kmax", "6"});
    CHECK(result_of(o)["coeffs"] == nlohmann::json::array({1, 2, 5, 13, 35, 96}));
    const auto doc = nlohmann::json::parse(o.out);
    CHECK(doc["config"]["seed"] == 1);
    CHECK(doc["config"]["k_max"] == 6);

    const Outcome naive = cli({"enumerate", "--lattice", "Tri", "--source", "0,0;2,0", "--kmax", "6", "--method", "naive"});
    const Outcome fast = cli({"enumerate", "--lattice", "Tri", "--source", "0,0;2,0", "--kmax", "6"});
    CHECK(result_of(naive)["coeffs"] == result_of(fast)["coeffs"]);

    const auto with_p = result_of(cli({"enumerate", "--kmax", "12", "--p", "0.1"}));
    CHECK(with_p["gf_value"].get<double>() < 0);
    CHECK(with_p["truncation_bound"].get<double>() < 1e-6);
}

TEST_CASE("gas output is reproducible")
{
    const std::vector<std::string> args{"gas", "--lattice", "Tri", "--source", "0,0", "--p", "0.1", "--n", "20000",
                                        "--seed", "7"};
    const Outcome a = cli(args);
    const Outcome b = cli(args);
    std::vector<std::string> one_thread = args;
    one_thread.insert(one_thread.end(), {"--threads", "1"});
    const Outcome c = cli(one_thread);
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    const auto r = result_of(a);
    CHECK(r["violations"] == 0);
    CHECK(r["stderr"].get<double>() > 0);
    CHECK(nlohmann::json::parse(a.out)["config"]["seed"] == 7);
}

TEST_CASE("chain, cyclic, linelaw and gf")
{
    const auto chain = result_of(cli({"chain", "--family", "TriPair", "--p", "0.3"}));
    CHECK(chain["lambda"].get<double>() == doctest::Approx((1 + std::sqrt(2.2)) / 2));
    CHECK(chain["limit"]["initial"][1].get<double>() == doctest::Approx(0.16290).epsilon(1e-4));

    const auto cyc = result_of(cli({"cyclic", "--family", "LR:0,1", "--p", "0.2", "--N", "5", "--trajectory", "0,1,0,0,1"}));
    CHECK(cyc["cyclic_law"].get<double>() == doctest::Approx(cyc["transfer_law"].get<double>()).epsilon(1e-12));

    const auto law = result_of(cli({"linelaw", "--family", "LR:0,1,2", "--N", "6", "--p", "0.2"}));
    CHECK(law["law"].size() == 64);
    CHECK(law["residuals"]["recurrence"].get<double>() < 1e-12);

    const auto gf = result_of(cli({"gf", "--chain", "TriMixed", "--positions", "0,3", "--p", "0.1"}));
    CHECK(gf["gf_value"].get<double>() > 0);
    CHECK(gf["vertices"][1] == "(3,1)");

    const auto sum = result_of(cli({"gf", "--compact-sum", "30", "--p", "0.2"}));
    CHECK(sum["gap"].get<double>() <= sum["tail_bound"].get<double>() + sum["rounding_bound"].get<double>());

    const auto poly = result_of(cli({"chain", "--family", "Tn:4", "--exact-p", "1/3"}));
    CHECK(poly["characteristic_polynomial"]["printed_matches"] == true);

    const auto dist = result_of(cli({"distance", "--lattice", "LR:0,1@N=5", "--other", "LR:0,1"}));
    CHECK(dist["kind"] == "exact");
    CHECK(dist["agreeing_radius"].get<int>() >= 3);
}

TEST_CASE("adjudicate prints a status line")
{
    const Outcome o = cli({"adjudicate", "--entry", "prop1ii-sum", "--p", "0.2", "--format", "table"});
    REQUIRE(o.code == 0);
    CHECK(o.out.find("tri-compact-sum: PASS") != std::string::npos);
    CHECK(o.out.find("residual=") != std::string::npos);

    const auto r = result_of(cli({"adjudicate", "--entry", "tri-line-transition", "--p", "0.1", "0.2"}));
    CHECK(r["reports"][0]["status"] == "CORRECTED");
    CHECK(r["reports"][0]["grid"]["p"].size() == 2);
}

TEST_CASE("formats and exit codes")
{
    const Outcome csv = cli({"chain", "--family", "LR:0,1", "--p", "0.2", "--format", "csv"});
    REQUIRE(csv.code == 0);
    CHECK(csv.out.rfind("key,value\n", 0) == 0);
    CHECK(csv.out.find("config.seed,1") != std::string::npos);

    CHECK(cli({"gas", "--lattice", "Tri", "--p", "0.5"}).code == 2);
    CHECK(cli({"gas", "--lattice", "Tri"}).code == 2);
    CHECK(cli({"enumerate", "--lattice", "Hex"}).code == 2);
    CHECK(cli({"enumerate", "--format", "xml"}).code == 2);
    CHECK(cli({"gf", "--chain", "LR:0,1,4", "--p", "0.1"}).code == 2);
    CHECK(cli({"adjudicate", "--entry", "nope"}).code == 2);
    CHECK(cli({}).code == 2);
    const Outcome budget = cli({"enumerate", "--lattice", "Tri", "--kmax", "40"});
    CHECK(budget.code == 3);
    CHECK(budget.err.find("k_max") != std::string::npos);
    CHECK(cli({"--help"}).code == 0);
}
