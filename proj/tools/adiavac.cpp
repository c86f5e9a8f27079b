#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "adiavac/runner/config.hpp"
#include "adiavac/runner/runner.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_assertions_failed = 1;
constexpr int exit_config_invalid = 2;
constexpr int exit_error = 3;

int run_command(const std::string& config_path, const std::string& suite, const std::string& out_dir) {
    auto cfg = adiavac::runner::load_config(config_path);
    const std::filesystem::path out = out_dir.empty() ? cfg.output_dir : std::filesystem::path(out_dir);
    adiavac::runner::Runner runner(std::move(cfg), out);
    const auto result = runner.run(suite);
    std::cout << "manifest: " << result.manifest.string() << "\n";
    std::cout << (result.passed() ? "all suites passed" : "one or more suites failed") << "\n";
    return result.passed() ? exit_ok : exit_assertions_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adiabatic vacuum experiments on closed Robertson-Walker backgrounds"};
    app.set_version_flag("--version", adiavac::version);
    app.require_subcommand(1);

    std::string config_path, suite = "all", out_dir;
    auto* run = app.add_subcommand("run", "run experiment suites and write CSV files plus a manifest");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--suite", suite, "frequencies, symbol_orders, modes, bogoliubov, particle_numbers, detector, "
                                      "invariants or all")
        ->check([](const std::string& s) {
            return adiavac::runner::is_suite(s) ? std::string() : "unknown suite '" + s + "'";
        });
    run->add_option("--out", out_dir, "output directory (overrides output.dir)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "parse and validate a config file");
    validate->add_option("--config", validate_path, "experiment config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return run_command(config_path, suite, out_dir);
        if (*validate) {
            adiavac::runner::load_config(validate_path);
            std::cout << "config ok: " << validate_path << "\n";
            return exit_ok;
        }
    } catch (const adiavac::ConfigInvalid& e) {
        std::cerr << e.what() << "\n";
        return exit_config_invalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_error;
}
