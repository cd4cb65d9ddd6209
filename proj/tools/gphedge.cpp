#include <gphedge/gphedge.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

bool read_json(const std::string& path, gphedge::json& j) {
    std::ifstream is(path);
    if (!is) {
        std::cerr << "error: cannot open config " << path << "\n";
        return false;
    }
    j = gphedge::json::parse(is, nullptr, true, true);
    return true;
}

int cmd_run_json(gphedge::json j, const std::optional<std::size_t>& trials, const std::optional<std::size_t>& iters,
                 const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out, unsigned jobs) {
    if (trials)
        j["trials"] = *trials;
    if (iters)
        j["iterations"] = *iters;
    if (seed)
        j["seed"] = *seed;
    if (out)
        j["output_dir"] = *out;
    auto cfg = gphedge::parse_experiment(std::move(j));
    cfg.jobs = jobs;

    std::cerr << "running " << cfg.id << ": " << cfg.strategies.size() << " strategies x " << cfg.trials
              << " trials x " << cfg.iterations << " iterations\n";
    const auto res = gphedge::run_experiment(cfg);
    const auto files = gphedge::emit(res, cfg.output_dir);
    std::cout << files.csv << "\n" << files.json << "\n";

    const auto summary = gphedge::summary_json(res);
    for (const auto& s : summary["strategies"]) {
        std::cout << s["name"].get<std::string>();
        if (s.contains("final_gap_mean"))
            std::printf("  final gap mean %.4f  var %.4f", s["final_gap_mean"].get<double>(),
                        s["final_gap_variance"].get<double>());
        std::cout << "\n";
        for (const auto& e : s["failed_trials"])
            std::cerr << "  trial " << e["trial"] << " failed: " << e["error"].get<std::string>() << "\n";
    }
    return res.failures == 0 ? 0 : 1;
}

int cmd_run(const std::string& path, const std::optional<std::size_t>& trials, const std::optional<std::size_t>& iters,
            const std::optional<std::uint64_t>& seed, const std::optional<std::string>& out, unsigned jobs) {
    gphedge::json j;
    if (!read_json(path, j))
        return 2;
    return cmd_run_json(std::move(j), trials, iters, seed, out, jobs);
}

int cmd_list() {
    for (const auto& o : gphedge::list_objectives())
        std::printf("%-10s d=%-2s optimum=%-10s %s\n", o.name.c_str(), o.dimension.c_str(), o.known_optimum.c_str(),
                    o.description.c_str());
    return 0;
}

int cmd_replay(const std::string& file, const std::optional<std::string>& config, const std::optional<std::size_t>& trials,
               const std::optional<std::size_t>& iters, const std::optional<std::uint64_t>& seed,
               const std::optional<std::string>& out, unsigned jobs) {
    const auto obj = gphedge::load_synthetic(file);
    std::printf("synthetic objective: d=%ld points=%ld seed=%llu\n", static_cast<long>(obj.dimension()),
                static_cast<long>(obj.point_count()), static_cast<unsigned long long>(obj.seed()));
    std::printf("lengthscales:");
    for (Eigen::Index j = 0; j < obj.dimension(); ++j)
        std::printf(" %.6g", obj.gp().kernel().lengthscales[j]);
    std::printf("\n");
    if (obj.known_optimum())
        std::printf("optimum: %.17g\n", *obj.known_optimum());
    else
        std::printf("optimum: unknown\n");
    double worst = 0.0;
    const auto& pts = obj.gp().inputs();
    for (std::size_t i = 0; i < pts.size(); ++i)
        worst = std::max(worst, std::abs(obj(pts[i]) - obj.gp().outputs()[static_cast<Eigen::Index>(i)]));
    std::printf("max interpolation residual: %.3g\n", worst);
    if (!config)
        return 0;

    gphedge::json j;
    if (!read_json(*config, j))
        return 2;
    j["objective"] = {{"name", "synthetic"}, {"file", file}};
    return cmd_run_json(j, trials, iters, seed, out, jobs);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gphedge: portfolio Bayesian optimization experiments"};
    app.require_subcommand(1);

    std::string config_path, synth_path;
    std::optional<std::string> replay_config, out;
    std::optional<std::size_t> trials, iters;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
    auto add_run_flags = [&](CLI::App* c) {
        c->add_option("--trials", trials, "number of trials per strategy");
        c->add_option("--iters", iters, "iterations per trial");
        c->add_option("--seed", seed, "base seed");
        c->add_option("--out", out, "output directory");
        c->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    add_run_flags(run);

    auto* list = app.add_subcommand("list-objectives", "list built-in objectives");

    auto* replay = app.add_subcommand("replay", "inspect a synthetic objective file, optionally optimize it");
    replay->add_option("file", synth_path, "synthetic objective file")->required()->check(CLI::ExistingFile);
    replay->add_option("--config", replay_config, "experiment config whose objective is replaced by the file");
    add_run_flags(replay);

    std::size_t synth_dim = 2;
    std::uint64_t synth_seed = 1;
    std::string synth_out;
    auto* make = app.add_subcommand("make-synthetic", "draw a synthetic objective and save it");
    make->add_option("--dim", synth_dim, "dimension")->check(CLI::PositiveNumber);
    make->add_option("--seed", synth_seed, "generator seed");
    make->add_option("--output,-o", synth_out, "output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run)
            return cmd_run(config_path, trials, iters, seed, out, jobs);
        if (*list)
            return cmd_list();
        if (*replay)
            return cmd_replay(synth_path, replay_config, trials, iters, seed, out, jobs);
        if (*make) {
            const auto obj = gphedge::sample_synthetic_objective(static_cast<Eigen::Index>(synth_dim), synth_seed);
            gphedge::save_synthetic(obj, synth_out);
            std::cout << synth_out << "\n";
            return 0;
        }
    } catch (const gphedge::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
