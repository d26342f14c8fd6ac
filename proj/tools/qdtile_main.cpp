#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "qdtile/pipeline.hpp"

namespace fs = std::filesystem;
using namespace qdtile;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "qdtile-out";
    std::string preset;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool allow_preset) {
    cmd->add_option("--config", o.config_path, "run configuration (JSON)");
    cmd->add_option("--out", o.out_dir, "output directory");
    if (allow_preset)
        cmd->add_option("--preset", o.preset, "built-in instance: bd|rotation|pv");
    cmd->add_option("--threads", o.threads, "process levels in parallel")->check(CLI::Range(1, 64));
}

cli::RunConfig resolve_config(const CommonOpts& o) {
    if (!o.preset.empty()) {
        if (!o.config_path.empty())
            throw ConfigError("--config and --preset are mutually exclusive");
        cli::RunConfig c = cli::preset_config(o.preset);
        c.threads = o.threads;
        return c;
    }
    if (o.config_path.empty()) throw ConfigError("either --config or --preset is required");
    cli::RunConfig c = cli::load_config_file(o.config_path);
    c.threads = o.threads;
    return c;
}

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << content;
}

int run(const std::string& command, const CommonOpts& o) {
    cli::RunConfig c = resolve_config(o);
    cli::RunResult r;
    if (command == "tile")
        r = cli::run_tile(c);
    else if (command == "qd-lambda")
        r = cli::run_qd_lambda(c);
    else
        r = cli::run_qd_crossed(c);

    const fs::path out(o.out_dir);
    write_file(out / "report.json", r.report.dump(2) + "\n");
    if (!r.decay_table.empty()) write_file(out / "decay.csv", r.decay_table);
    if (!r.crossed_table.empty()) write_file(out / "crossed.csv", r.crossed_table);
    for (std::size_t i = 0; i < r.tiling_documents.size(); ++i) {
        const int n = c.levels[i].n;
        write_file(out / "tilings" / ("level_" + std::to_string(n) + ".json"),
                   r.tiling_documents[i].dump(2) + "\n");
    }
    std::cout << "report: " << (out / "report.json").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Folner tilings, quasidiagonalizing projections and crossed-product "
                 "commutator certificates on concrete discrete groups"};
    app.require_subcommand(1);

    CommonOpts tile_o, lambda_o, crossed_o;
    CLI::App* tile = app.add_subcommand("tile", "build and certify tilings G = K L");
    add_common(tile, tile_o, false);
    CLI::App* lam = app.add_subcommand("qd-lambda", "phi identities and lambda-commutator decay");
    add_common(lam, lambda_o, false);
    CLI::App* cro = app.add_subcommand("qd-crossed", "crossed-product commutator chain");
    add_common(cro, crossed_o, true);

    CLI11_PARSE(app, argc, argv);

    const std::string command =
        tile->parsed() ? "tile" : (lam->parsed() ? "qd-lambda" : "qd-crossed");
    const CommonOpts& o = tile->parsed() ? tile_o : (lam->parsed() ? lambda_o : crossed_o);

    try {
        return run(command, o);
    } catch (const CertificationError& e) {
        std::cerr << "certification failure: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
