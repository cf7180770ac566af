// semiper <subcommand> --config <path> [--out <dir>] [--seed <n>] [--threads <n>]
//
// Exit status: 0 success, 1 invalid configuration or arguments, 2 pipeline failure.

#include <iostream>

#include "CLI11.hpp"
#include "semiper/cli_io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kPipeline = 2;

struct Args {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-periodic solutions of dissipative semilinear parabolic problems"};
    app.set_version_flag("--version", semiper::toolkit_version());
    app.require_subcommand(1, 1);

    Args args;
    for (const auto& name : semiper::subcommand_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", args.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", args.out, "output directory (overrides `output` in the config)");
        sub->add_option("--seed", args.seed, "overrides `seed` in the config");
        sub->add_option("--threads", args.threads, "worker count recorded in the manifest")
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kInvalid;
    }

    auto* chosen = app.get_subcommands().front();
    try {
        auto cfg = semiper::load_config(args.config);
        if (args.seed) cfg.seed = *args.seed;
        auto sub = semiper::subcommand_from_string(chosen->get_name());
        auto manifest = semiper::run(cfg, sub, {args.out, args.threads});
        auto out = args.out.empty() ? cfg.output : args.out;
        if (!manifest.ok()) {
            for (const auto& f : manifest.failures) std::cerr << "failure: " << f << '\n';
            std::cerr << "manifest: " << (std::filesystem::path(out) / "manifest.json").string() << '\n';
            return kPipeline;
        }
        std::cout << chosen->get_name() << ": " << manifest.files.size() << " files written to " << out << '\n';
        return kOk;
    } catch (const semiper::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kPipeline;
    }
}
