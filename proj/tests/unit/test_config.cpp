#include "ftl/config.hpp"
#include "ftl/errors.hpp"
#include "ftl/experiment.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace ftl;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string first_line(const fs::path& p)
{
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("ftl_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string config_error_path(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<no error>";
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(FTL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("minimal config gets defaults")
{
    const auto c = parse_config(R"({"command":"simulate","n":4})");
    CHECK(c.command == Command::simulate);
    CHECK(c.n == 4);
    CHECK(c.law.kind == "exp_unit");
    CHECK(c.replicas == 1);
    CHECK(c.seed == 0);
    CHECK(c.workers == 1);
    CHECK(c.grid() == std::vector<double>{1.0});
    CHECK(c.delta == 0.9);
    CHECK(!c.burn_in);
}

TEST_CASE("config errors name the offending key")
{
    CHECK(config_error_path(R"({"command":"simulate","n":1})") == "n");
    CHECK(config_error_path(R"({"n":1})") == "n");
    CHECK(config_error_path(R"({"n":4})") == "command");
    CHECK(config_error_path(R"({"command":"simulate","bogus":3})") == "bogus");
    CHECK(config_error_path(R"({"command":"fly"})") == "command");
    CHECK(config_error_path(R"({"command":"simulate","law":{"kind":"pareto","value":2}})") == "law.value");
    CHECK(config_error_path(R"({"command":"simulate","law":{"kind":"pareto","alpha":1}})") == "law.alpha");
    CHECK(config_error_path(R"({"command":"simulate","law":{"kind":"warp"}})") == "law.kind");
    CHECK(config_error_path(R"({"command":"simulate","t_grid":[1,3,2]})") == "t_grid[2]");
    CHECK(config_error_path(R"({"command":"simulate","seed":-1})") == "seed");
    CHECK(config_error_path(R"({"command":"simulate","n":"four"})") == "n");
    CHECK(config_error_path(R"({"command":"simulate","workers":"many"})") == "workers");
    CHECK(config_error_path(R"({"command":"couple","init":"custom","n":4,"start":[1,2]})") == "start");
    CHECK(config_error_path(R"({"command":"simulate",)") == "");
    CHECK(config_error_path(R"([1,2])") == "");
    CHECK_THROWS_AS(parse_config(R"({"command":"simulate","n":1})"), ConfigError);
}

TEST_CASE("config serialization round-trips")
{
    const char* texts[] = {
        R"({"command":"simulate","n":4})",
        R"({"command":"couple","n":9,"law":{"kind":"pareto","alpha":3.5},"t_grid":[0.5,1,2.25],"replicas":17,
            "seed":18446744073709551615,"workers":"auto","init":"custom","start":[1,0,2,3,0.1,0.2,0.3,0.4]})",
        R"({"command":"heavy-tail","law":{"kind":"table","values":[1,3],"weights":[0.25,0.75]},"burn_in":7.5,
            "k_fraction":0.05,"out_dir":"x/y"})",
        R"({"command":"frozen-beta","m_list":[3,8,64],"t_cap":12.5,"law":"constant"})",
        R"({"command":"fclt","n":64,"x_grid":[0.125,0.5,1],"trajectory_log":"binary","h":0.01})",
    };
    for (const char* t : texts) {
        const auto c = parse_config(t);
        const auto again = parse_config(serialize_config(c));
        CHECK(again == c);
        CHECK(serialize_config(again) == serialize_config(c));
    }
}

TEST_CASE("results do not depend on the worker count")
{
    const char* texts[] = {
        R"({"command":"simulate","n":6,"replicas":40,"t_grid":[0.5,2,4],"seed":3})",
        R"({"command":"couple","n":6,"replicas":200,"t_end":50,"init":"spread","seed":4})",
        R"({"command":"tmix-lower","n":8,"replicas":200,"t_grid":[0,1,4,16],"seed":5})",
        R"({"command":"tmix-upper","n":4,"replicas":200,"t_grid":[1,2,4,8,16],"seed":6})",
        R"({"command":"frozen-beta","m_list":[3,8],"replicas":100,"seed":7})",
        R"({"command":"dominance-check","m_list":[8],"replicas":50,"t_end":10,"seed":8})",
        R"({"command":"heavy-tail","n":4,"replicas":2000,"law":{"kind":"pareto","alpha":2.5},"seed":9})",
        R"({"command":"fclt","n":32,"replicas":300,"x_grid":[0.25,1],"init":"stationary","seed":10})",
        R"({"command":"hitting-time","n":8,"replicas":200,"t_cap":100,"seed":11})",
        R"({"command":"stationary-test","n":8,"replicas":300,"t_end":5,"seed":12})",
        R"({"command":"generator-check","n":4,"replicas":8192,"states":2,"seed":13})",
    };
    for (const char* t : texts) {
        auto c = parse_config(t);
        CAPTURE(t);
        c.out_dir = scratch("w1").string();
        c.workers = 1;
        const auto m1 = run_experiment(c);
        const std::string csv1 = slurp(fs::path(c.out_dir) / "results.csv");
        const std::string est1 = slurp(fs::path(c.out_dir) / "estimates.jsonl");
        c.out_dir = scratch("w8").string();
        c.workers = 8;
        const auto m8 = run_experiment(c);
        CHECK(fnv1a64(csv1) == fnv1a64(slurp(fs::path(c.out_dir) / "results.csv")));
        CHECK(est1 == slurp(fs::path(c.out_dir) / "estimates.jsonl"));
        REQUIRE(m1.files.size() == m8.files.size());
        for (std::size_t i = 0; i < m1.files.size(); ++i) CHECK(m1.files[i].fnv1a64 == m8.files[i].fnv1a64);
    }
}

TEST_CASE("frozen-beta output layout")
{
    auto c = parse_config(R"({"command":"frozen-beta","m_list":[8,16,32,64],"replicas":1000,"seed":1,"workers":"auto"})");
    c.out_dir = scratch("beta").string();
    run_experiment(c);
    std::ifstream in(fs::path(c.out_dir) / "results.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "m,replica,beta,censored,replica_seed");
    std::size_t rows = 0, last_m = 0, last_r = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string m, r;
        std::getline(ss, m, ',');
        std::getline(ss, r, ',');
        const std::size_t mi = std::stoul(m), ri = std::stoul(r);
        if (rows > 0) CHECK((mi > last_m || (mi == last_m && ri == last_r + 1)));
        last_m = mi;
        last_r = ri;
        ++rows;
    }
    CHECK(rows == 4000);
}

TEST_CASE("adjoint-check residuals")
{
    auto c = parse_config(R"({"command":"adjoint-check","n":5,"points":100,"seed":2})");
    c.out_dir = scratch("adj").string();
    run_experiment(c);
    std::ifstream in(fs::path(c.out_dir) / "results.csv");
    std::string line;
    std::getline(in, line);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        for (int k = 0; k < 4; ++k) std::getline(ss, cell, ',');
        CHECK(std::stod(cell) <= 1e-6);
        ++rows;
    }
    CHECK(rows == 100);
}

TEST_CASE("every command writes its fixed header and a manifest")
{
    const char* headers[] = {
        "t,replica,leader_pos,gap_sum,gap_first,gap_last,events,replica_seed",
        "state,observable,closed_form,dynkin,std_error,bias_allowance,pass,state_seed",
        "point,closed_form,quadrature,abs_diff,pass,point_seed",
        "replica,gap_sum,gap_first,gap_last,replica_seed",
        "replica,tau,censored,events,replica_seed",
        "t,p_hat,ci_low,ci_high,worst_init,replicas,seed",
        "t,phi_mean,phi_var,lower_bound,replicas,seed",
        "m,replica,beta,censored,replica_seed",
        "m,path,replica,ok,events,violation_time,replica_seed",
        "replica,y1,replica_seed",
        "x,replica,u,replica_seed",
        "replica,tau,censored,events,replica_seed",
    };
    REQUIRE(all_commands().size() == 12);
    for (std::size_t i = 0; i < 12; ++i) CHECK(results_header(all_commands()[i]) == headers[i]);

    auto c = parse_config(R"({"command":"couple","n":4,"replicas":100,"t_end":20})");
    c.out_dir = scratch("manifest").string();
    const auto m = run_experiment(c);
    CHECK(m.status == "complete");
    const auto j = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "manifest.json"));
    CHECK(j["schema"] == std::string(kManifestSchema));
    CHECK(j["tool_version"] == std::string(kToolVersion));
    CHECK(j["status"] == "complete");
    CHECK(parse_config(j["config"].dump()) == c);
    for (const auto& f : j["files"]) {
        const std::string body = slurp(fs::path(c.out_dir) / f["name"].get<std::string>());
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(body)));
        CHECK(f["fnv1a64"] == std::string(hex));
    }
    std::ifstream cp(fs::path(c.out_dir) / "couplings.jsonl");
    std::string line;
    std::size_t lines = 0;
    while (std::getline(cp, line)) {
        const auto rec = nlohmann::json::parse(line);
        CHECK(rec.contains("tau"));
        CHECK(rec.contains("replica_seed"));
        ++lines;
    }
    CHECK(lines == 100);
    CHECK(!fs::exists(fs::path(c.out_dir) / "PARTIAL"));
}

TEST_CASE("failed runs leave a partial marker")
{
    auto c = parse_config(R"({"command":"simulate","n":4,"replicas":3})");
    c.out_dir = scratch("partial").string();
    fs::create_directories(fs::path(c.out_dir) / "estimates.jsonl"); // blocks the write
    CHECK_THROWS(run_experiment(c));
    CHECK(fs::exists(fs::path(c.out_dir) / "PARTIAL"));
    CHECK(first_line(fs::path(c.out_dir) / "results.csv") == results_header(Command::simulate));
    const auto j = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "manifest.json"));
    CHECK(j["status"] == "partial");
    CHECK(j.contains("error"));
}

TEST_CASE("command-line exit codes and overrides")
{
    const fs::path dir = scratch("cli");
    fs::create_directories(dir);
    const fs::path cfg = dir / "c.json";
    std::ofstream(cfg) << R"({"command":"couple","n":4,"replicas":100,"t_end":20,"seed":1})";

    CHECK(run_cli("couple --config " + cfg.string() + " --out " + (dir / "a").string()) == 0);
    CHECK(run_cli("couple --config " + cfg.string() + " --seed 2 --workers auto --out " + (dir / "b").string()) == 0);
    const auto ja = nlohmann::json::parse(slurp(dir / "a" / "manifest.json"));
    const auto jb = nlohmann::json::parse(slurp(dir / "b" / "manifest.json"));
    CHECK(ja["config"]["seed"] == 1);
    CHECK(jb["config"]["seed"] == 2);
    CHECK(jb["config"]["workers"] == "auto");

    CHECK(run_cli("simulate --out " + (dir / "c").string()) == 0);
    CHECK(run_cli("tmix-upper --config " + cfg.string()) == 2); // command mismatch
    CHECK(run_cli("warp") == 2);
    CHECK(run_cli("couple --config " + (dir / "missing.json").string()) == 2);
    std::ofstream(dir / "bad.json") << R"({"command":"couple","n":1})";
    CHECK(run_cli("couple --config " + (dir / "bad.json").string()) == 2);
    fs::create_directories(dir / "d" / "results.csv");
    CHECK(run_cli("simulate --out " + (dir / "d").string()) == 3);
    CHECK(fs::exists(dir / "d" / "PARTIAL"));
}
