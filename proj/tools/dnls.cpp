#include <iostream>

#include "CLI11.hpp"
#include "dnls/cli.hpp"

namespace {

constexpr int kUsageError = 64;

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paradifferential normal-form and lifespan toolkit"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
    const std::pair<const char*, const char*> commands[] = {
        {"verify-calculus", "check the quantization, composition, flow and homological identities"},
        {"scan-mass", "small-divisor lower bound and excluded-mass fraction"},
        {"normal-form", "conjugation ledger of the paralinearized operator"},
        {"lifespan", "seeded evolutions against the quadratic-lifespan envelope"},
    };
    for (const auto& [name, about] : commands) {
        CLI::App* sub = app.add_subcommand(name, about);
        sub->add_option("--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "overrides `seed`");
        sub->add_option("--threads", threads, "overrides `threads`; 1 forces the deterministic path");
        sub->add_option("--out", out, "overrides `output_dir`");
    }
    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    dnls::RunConfig cfg;
    try {
        dnls::FlatConfig flat = config_path.empty() ? dnls::FlatConfig{} : dnls::FlatConfig::load(config_path);
        if (seed) flat.set("seed", std::to_string(*seed));
        if (threads) flat.set("threads", std::to_string(*threads));
        if (out) flat.set("output_dir", *out);
        cfg = dnls::RunConfig::from_flat(dnls::parse_command(command), flat);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsageError;
    }
    try {
        const dnls::CommandResult r = dnls::run_command(cfg);
        std::cout << r.report << "\n";
        return r.exit_code;
    } catch (const std::exception& e) {
        std::cerr << command << ": " << e.what() << "\n";
        return 1;
    }
}
