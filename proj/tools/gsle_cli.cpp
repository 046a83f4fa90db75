#include <CLI11.hpp>

#include "gsle/runner.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Generalized Schrodinger-Langevin simulator"};
    app.require_subcommand(1);

    gsle::CliOverrides overrides;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    std::string out;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "override the master seed");
        sub->add_option("--workers", workers, "parallel ensemble workers")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "output directory");
    };

    std::string config_path;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
    add_common(run);

    auto* compare = app.add_subcommand("compare", "quantum ensemble against the classical Langevin ensemble");
    compare->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
    add_common(compare);

    std::string run_dir;
    auto* post = app.add_subcommand("post", "trajectories and weak values from a run directory's snapshots");
    post->add_option("run-dir", run_dir, "directory written by a previous run")->required()->check(CLI::ExistingDirectory);
    add_common(post);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : gsle::kExitConfig;
    }

    auto* active = app.get_subcommands().front();
    if (active->count("--seed")) overrides.seed = seed;
    if (active->count("--workers")) overrides.workers = workers;
    if (active->count("--out")) overrides.out = out;

    if (active == post) {
        std::optional<std::filesystem::path> dir;
        if (overrides.out) dir = *overrides.out;
        return gsle::post_process(run_dir, dir, overrides.seed);
    }
    std::optional<gsle::Mode> mode;
    if (active == compare) mode = gsle::Mode::compare;
    return gsle::run_config_file(config_path, overrides, mode);
}
