// ftl <command> --config path.json [--seed N --out dir --workers K]
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include "ftl/config.hpp"
#include "ftl/errors.hpp"
#include "ftl/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ftl::ConfigError("--config", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

unsigned parse_workers(const std::string& text)
{
    if (text == "auto") return 0;
    try {
        std::size_t used = 0;
        const unsigned long v = std::stoul(text, &used);
        if (used == text.size() && v >= 1 && v <= 4096) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw ftl::ConfigError("--workers", "expected an integer in [1, 4096] or \"auto\"");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Exact simulator and verification harness for the follow-the-leader gap process"};
    std::string command, config_path, out_dir, workers;
    std::uint64_t seed = 0;

    std::vector<std::string> names;
    for (auto c : ftl::all_commands()) names.emplace_back(ftl::command_name(c));
    app.add_option("command", command, "Experiment to run")
        ->required()
        ->check(CLI::IsMember(names));
    app.add_option("--config", config_path, "JSON configuration file");
    auto* seed_opt = app.add_option("--seed", seed, "Root seed (overrides the file)");
    auto* out_opt = app.add_option("--out", out_dir, "Output directory (overrides the file)");
    auto* workers_opt =
        app.add_option("--workers", workers, "Worker threads or \"auto\" (overrides the file)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const auto cmd = *ftl::parse_command(command);
        const std::string text = config_path.empty() ? "{}" : read_file(config_path);
        ftl::ExperimentConfig config = ftl::parse_config(text, cmd);
        if (config.command != cmd)
            throw ftl::ConfigError("command", "file names '" +
                                                  std::string(ftl::command_name(config.command)) +
                                                  "' but the command line asks for '" + command + "'");
        if (*seed_opt) config.seed = seed;
        if (*out_opt) config.out_dir = out_dir;
        if (*workers_opt) config.workers = parse_workers(workers);
        ftl::validate_config(config);

        const auto manifest = ftl::run_experiment(config);
        std::cout << "wrote " << manifest.files.size() << " files to " << config.out_dir << '\n';
        for (const auto& f : manifest.files) std::cout << "  " << f.name << " (" << f.bytes << " bytes)\n";
        return 0;
    } catch (const ftl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
