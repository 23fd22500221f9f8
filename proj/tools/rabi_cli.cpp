#include "rabi/commands.hpp"
#include "rabi/errors.hpp"
#include "rabi/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Rabi oscillation and Autler-Townes photoelectron spectra"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool emit_plots = false;
    unsigned threads = 1;
    app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides output.directory)");
    app.add_flag("--emit-plots", emit_plots, "also write gnuplot scripts");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    for (const char* name : {"spectrum", "scan", "average", "oracle", "deconvolve"})
        app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const rabi::RunConfig config = rabi::load_config(config_path);
        rabi::default_thread_count() = threads;
        rabi::CommandOptions opts;
        opts.out = out_dir.empty() ? config.output.directory : std::filesystem::path(out_dir);
        opts.emit_plots = emit_plots;
        for (const std::string& f : rabi::run_command(command, config, opts))
            std::cout << (opts.out / f).string() << "\n";
    } catch (const rabi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const rabi::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
