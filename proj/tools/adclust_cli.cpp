#include <CLI11.hpp>

#include <adclust/all.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace adclust;
using io::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw validation_error("cannot create output directory '" + dir + "'");
}

void write_timing(const std::string& dir, const std::string& command, double seconds, std::size_t threads) {
    io::write_json((fs::path(dir) / "timing.json").string(),
                   json{{"command", command}, {"seconds", seconds}, {"threads", threads}});
}

io::Config load_config(const std::string& path) { return path.empty() ? io::Config{} : io::Config::load(path); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-based adversarial clustering with defensive walls and Stackelberg wall games"};
    app.require_subcommand(1);
    std::string config_path;
    std::size_t threads = 0;
    app.add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
    app.add_option("--threads", threads, "worker threads (0 = all cores)");

    // cluster
    auto* cluster = app.add_subcommand("cluster", "cluster a labeled CSV and fit defensive walls");
    std::string c_input, c_out, c_wall, c_profile;
    std::optional<double> c_alpha, c_k, c_label_fraction;
    std::optional<std::uint64_t> c_seed;
    cluster->add_option("--input", c_input, "dataset CSV")->required()->check(CLI::ExistingFile);
    cluster->add_option("--out", c_out, "output directory")->required();
    cluster->add_option("--alpha", c_alpha, "wall level in (0,1)");
    cluster->add_option("--k", c_k, "kernel weight k > 0");
    cluster->add_option("--wall", c_wall, "euclidean|manhattan")->check(CLI::IsMember({"euclidean", "manhattan"}));
    cluster->add_option("--profile", c_profile, "threshold profile: paper|simulation")
        ->check(CLI::IsMember({"paper", "simulation"}));
    cluster->add_option("--label-fraction", c_label_fraction, "keep labels on this fraction of rows");
    cluster->add_option("--seed", c_seed, "seed for label retention and eta sampling");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "write a simulation dataset as CSV");
    std::string s_preset, s_out;
    std::uint64_t s_seed = 1;
    simulate->add_option("--preset", s_preset, "sim1|sim2|sim3")->required()->check(CLI::IsMember({"sim1", "sim2", "sim3"}));
    simulate->add_option("--seed", s_seed, "generator seed");
    simulate->add_option("--out", s_out, "output CSV path")->required();

    // game
    auto* gamecmd = app.add_subcommand("game", "solve a Stackelberg wall game");
    std::string g_preset, g_orientation = "leader", g_out, g_wall;
    std::optional<std::uint64_t> g_seed;
    gamecmd->add_option("--preset", g_preset, "game preset name");
    gamecmd->add_option("--orientation", g_orientation, "leader|follower")->check(CLI::IsMember({"leader", "follower"}));
    gamecmd->add_option("--wall", g_wall, "euclidean|manhattan")->check(CLI::IsMember({"euclidean", "manhattan"}));
    gamecmd->add_option("--seed", g_seed, "Monte-Carlo seed");
    gamecmd->add_option("--out", g_out, "output directory")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "weight or wall-level sweep over one dataset");
    std::string w_kind, w_input, w_out, w_profile;
    sweep->add_option("--kind", w_kind, "weight|wall")->required()->check(CLI::IsMember({"weight", "wall"}));
    sweep->add_option("--input", w_input, "dataset CSV")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", w_out, "output directory")->required();
    sweep->add_option("--profile", w_profile, "threshold profile: paper|simulation")
        ->check(CLI::IsMember({"paper", "simulation"}));

    // eta
    auto* eta = app.add_subcommand("eta", "Manhattan wall radius eta(alpha) for given region stats");
    double e_alpha = 0.6;
    std::string e_stats;
    std::size_t e_samples = 100000;
    std::uint64_t e_seed = 1;
    eta->add_option("--alpha", e_alpha, "level in (0,1)")->required();
    eta->add_option("--stats", e_stats, "JSON {mean, covariance} or CSV of region points")->required()->check(CLI::ExistingFile);
    eta->add_option("--samples", e_samples, "Monte-Carlo sample size");
    eta->add_option("--seed", e_seed, "Monte-Carlo seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        const auto guard = limit_threads(threads);
        const io::Config cfg = load_config(config_path);
        const Timer timer;

        if (*cluster) {
            AdclustParams p = io::adclust_params(cfg, c_profile.empty() ? AdclustParams{} : io::profile_params(c_profile));
            if (!c_profile.empty() && cfg.get<std::string>("adclust", "profile"))
                throw validation_error("profile given both on the command line and in the config");
            if (c_alpha) p.alpha = *c_alpha;
            if (c_k) p.k = *c_k;
            if (!c_wall.empty()) p.wall_kind = parse_wall_kind(c_wall);
            if (c_seed) p.seed = *c_seed;
            io::IngestOptions ing = io::ingest_options(cfg, {});
            if (c_label_fraction) ing.label_fraction = *c_label_fraction;
            ing.seed = p.seed;
            const Dataset ds = io::read_csv_file(c_input, ing);
            const ClusteringResult r = run_adclust(ds, p);
            ensure_dir(c_out);
            json report = io::cluster_report(ds, p, r, fs::path(c_input).filename().string());
            if (ds.dims() == 2) {
                io::write_text((fs::path(c_out) / "plot.svg").string(), io::scatter_svg(ds, r));
                report["plot"] = "plot.svg";
            } else {
                report["plot"] = nullptr;
                report["plot_note"] = "scatter plot requires exactly 2 features";
            }
            io::write_json((fs::path(c_out) / "report.json").string(), report);
            write_timing(c_out, "cluster", timer.seconds(), threads);
            const auto m = compute_metrics(ds, r);
            std::cout << "rt=" << r.thresholds.rt << " dt=" << r.thresholds.dt
                      << " global_clusters=" << r.composition.global_clusters.size() << " walls=" << r.walls.size()
                      << " mixed=" << m.regions.at(Region::mixed_overlap).count
                      << " outlier=" << m.regions.at(Region::outlier).count << '\n';
        } else if (*simulate) {
            const Dataset ds = generate(simulation_preset(s_preset, s_seed));
            const auto parent = fs::path(s_out).parent_path();
            if (!parent.empty()) ensure_dir(parent.string());
            io::write_csv_file(s_out, ds);
        } else if (*gamecmd) {
            game::GameConfig g;
            if (!g_preset.empty()) g = game::game_preset(g_preset);
            g = io::game_config(cfg, g);
            if (!g_wall.empty()) g.wall_kind = parse_wall_kind(g_wall);
            if (g_seed) g.seed = *g_seed;
            if (g.adversaries.empty()) throw validation_error("game: give --preset or define adversaries in the config");
            const game::Orientation o = game::parse_orientation(g_orientation);
            const auto samples = game::draw_samples(g);
            const auto tables = game::build_error_tables(g, samples);
            const auto eq = game::solve(g, tables, o);
            const auto direct = game::evaluate_direct(g, samples, eq.alpha, eq.t);
            ensure_dir(g_out);
            io::write_json((fs::path(g_out) / "report.json").string(),
                           json{{"schema_version", io::kSchemaVersion},
                                {"command", "game"},
                                {"run", {{"version", io::kVersion}, {"seed", g.seed}}},
                                {"config", io::game_config_json(g)},
                                {"equilibrium", io::equilibrium_json(eq, direct)},
                                {"landscape", "landscape.csv"}});
            std::ofstream land(fs::path(g_out) / "landscape.csv", std::ios::binary);
            io::write_landscape(land, tables, eq);
            write_timing(g_out, "game", timer.seconds(), threads);
            std::cout << g_orientation << " alpha=" << eq.alpha << " h=" << eq.h << " t=";
            for (std::size_t i = 0; i < eq.t.size(); ++i) std::cout << (i ? "," : "") << eq.t[i];
            std::cout << " D=" << eq.defender_utility << '\n';
        } else if (*sweep) {
            AdclustParams p = io::adclust_params(cfg, w_profile.empty() ? AdclustParams{} : io::profile_params(w_profile));
            const io::SweepConfig sc = io::sweep_config(cfg, {});
            io::IngestOptions ing = io::ingest_options(cfg, {});
            ing.seed = p.seed;
            const Dataset ds = io::read_csv_file(w_input, ing);
            const auto result = run_sweep(ds, p, sc, parse_sweep_kind(w_kind), fs::path(w_input).filename().string());
            ensure_dir((fs::path(w_out) / "runs").string());
            for (std::size_t i = 0; i < result.rows.size(); ++i)
                io::write_json((fs::path(w_out) / "runs" / (result.rows[i].name + ".json")).string(), result.reports[i]);
            std::ofstream agg(fs::path(w_out) / "aggregate.csv", std::ios::binary);
            write_sweep_csv(agg, result);
            write_timing(w_out, "sweep", timer.seconds(), threads);
        } else if (*eta) {
            RegionStats st;
            if (fs::path(e_stats).extension() == ".json") {
                std::ifstream in(e_stats);
                json j;
                try {
                    j = json::parse(in);
                    const auto mean = j.at("mean").get<std::vector<double>>();
                    std::vector<double> flat;
                    for (const auto& row : j.at("covariance")) for (double v : row) flat.push_back(v);
                    st = stats_from_moments(io::parse_vector(mean), io::parse_square(flat, "covariance"));
                } catch (const json::exception& e) {
                    throw validation_error(std::string("stats file: ") + e.what());
                }
            } else {
                st = fit_region_stats(io::read_csv_file(e_stats).points);
            }
            std::cout << io::format_double(eta_of_alpha(st, e_alpha, e_samples, e_seed)) << '\n';
        }
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
