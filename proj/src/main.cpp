#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pnp/config.hpp"
#include "pnp/driver.hpp"
#include "pnp/errors.hpp"
#include "pnp/io.hpp"

namespace {

int verbosity() {
    const char* env = std::getenv("PNP_LOG");
    if (!env)
        return 1;
    return std::atoi(env);
}

struct CommonOpts {
    std::string case_path;
    std::string output_dir = "out";
};

/// Command-line overrides applied on top of the loaded case.
struct RunOverrides {
    double end_time = -1.0;
    double dt = -1.0;
    double write_interval = -1.0;
    bool steady = false;
    bool frozen_flow = false;
    long long seed = -1;
};

void apply_overrides(pnp::CaseConfig& cfg, const RunOverrides& o) {
    if (o.end_time >= 0.0)
        cfg.time.end_time = o.end_time;
    if (o.dt > 0.0)
        cfg.time.dt = o.dt;
    if (o.write_interval >= 0.0)
        cfg.time.write_interval = o.write_interval;
    if (o.steady)
        cfg.time.steady = true;
    if (o.frozen_flow)
        cfg.flow.frozen = true;
    if (o.seed >= 0)
        cfg.mesh.seed = static_cast<std::uint64_t>(o.seed);
}

std::vector<int> parse_resolutions(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            out.push_back(std::stoi(tok));
    if (out.empty())
        throw pnp::ConfigError("no resolutions given");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-volume electrokinetic transport solver"};
    app.require_subcommand(1);

    CommonOpts common;
    RunOverrides over;

    auto add_common = [&](CLI::App* sub, bool need_case = true) {
        auto* opt = sub->add_option("--case", common.case_path, "case file");
        if (need_case)
            opt->required();
        sub->add_option("--output-dir", common.output_dir, "output directory");
    };
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--end-time", over.end_time, "override end time");
        sub->add_option("--dt", over.dt, "override time step");
        sub->add_option("--write-interval", over.write_interval,
                        "override write interval");
        sub->add_flag("--steady", over.steady, "force a steady solve");
        sub->add_flag("--frozen-flow", over.frozen_flow,
                      "freeze the velocity field");
        sub->add_option("--seed", over.seed, "override the mesh seed");
    };

    auto* run = app.add_subcommand("run", "run a case to its end time");
    add_common(run);
    add_run_flags(run);

    auto* meshgen =
        app.add_subcommand("mesh-gen", "build the mesh and write the labels");
    add_common(meshgen);
    meshgen->add_option("--seed", over.seed, "override the mesh seed");

    auto* report = app.add_subcommand("report", "print a case summary");
    add_common(report);

    auto* converge =
        app.add_subcommand("converge", "grid convergence study");
    add_common(converge);
    add_run_flags(converge);
    std::string oracle = "self";
    std::string resolutions_arg;
    std::string refine_axis = "y", sample_axis = "y";
    double sample_frac = 0.5;
    bool serial = false;
    converge->add_option("--oracle", oracle,
                         "reference: channel, two_species, "
                         "reactive_interface or self");
    converge->add_option("--resolutions", resolutions_arg,
                         "comma-separated cell counts")
        ->required();
    converge->add_option("--refine-axis", refine_axis, "x or y");
    converge->add_option("--sample-axis", sample_axis, "x or y");
    converge->add_option("--sample-frac", sample_frac,
                         "cross-direction position fraction");
    converge->add_flag("--serial", serial, "disable parallel resolutions");

    auto* sample = app.add_subcommand(
        "sample", "run a case and sample a line through the result");
    add_common(sample);
    add_run_flags(sample);
    std::string axis = "y";
    double position = 0.0;
    sample->add_option("--axis", axis, "line direction, x or y")->required();
    sample->add_option("--position", position,
                       "cross-direction coordinate of the line")
        ->required();

    CLI11_PARSE(app, argc, argv);

    const int verbose = verbosity();
    std::ostream* echo = verbose >= 2 ? &std::cout : nullptr;

    try {
        if (run->parsed()) {
            pnp::CaseConfig cfg = pnp::load_case(common.case_path);
            apply_overrides(cfg, over);
            pnp::Simulation sim = pnp::build_simulation(cfg);
            pnp::RunResult res =
                pnp::run_case(sim, common.output_dir, echo);
            if (!res.ok) {
                std::cerr << "run diverged: " << res.error << "\n";
                std::cerr << "last good state written to " << common.output_dir
                          << "/fields/last_good.vtk\n";
                return 2;
            }
            if (verbose >= 1)
                std::cout << "completed " << res.steps << " step(s), t = "
                          << res.time << ", output in " << common.output_dir
                          << "\n";
        } else if (meshgen->parsed()) {
            pnp::CaseConfig cfg = pnp::load_case(common.case_path);
            apply_overrides(cfg, over);
            pnp::Simulation sim = pnp::build_simulation(cfg);
            std::filesystem::create_directories(
                std::filesystem::path(common.output_dir) / "fields");
            std::vector<double> label(
                static_cast<std::size_t>(sim.parent.nx) * sim.parent.ny, 0.0);
            if (!sim.parent.region_label.empty())
                for (std::size_t c = 0; c < label.size(); ++c)
                    label[c] = sim.parent.region_label[c];
            pnp::write_vtk((std::filesystem::path(common.output_dir) /
                            "fields" / "mesh.vtk")
                               .string(),
                           sim.parent, {{"region", label}});
            if (verbose >= 1)
                std::cout << "mesh " << sim.parent.nx << "x" << sim.parent.ny
                          << ", porosity " << pnp::porosity(sim.parent)
                          << "\n";
        } else if (report->parsed()) {
            pnp::CaseConfig cfg = pnp::load_case(common.case_path);
            pnp::Simulation sim = pnp::build_simulation(cfg);
            std::cout << "mesh: " << cfg.mesh.nx << "x" << cfg.mesh.ny
                      << " on " << cfg.mesh.Lx << " x " << cfg.mesh.Ly
                      << "\n";
            std::cout << "porosity: " << pnp::porosity(sim.parent) << "\n";
            for (const auto& r : cfg.regions)
                std::cout << "region " << r.name << " (" << r.kind
                          << "): mu = " << r.mu << ", eps = " << r.eps
                          << "\n";
            for (const auto& s : cfg.species) {
                std::cout << "species " << s.name << ": z = " << s.z;
                for (const auto& [rn, rc] : s.per_region)
                    std::cout << ", D(" << rn << ") = " << rc.D;
                std::cout << "\n";
            }
            std::cout << (cfg.time.steady
                              ? std::string("steady solve")
                              : "dt = " + std::to_string(cfg.time.dt) +
                                    ", end time = " +
                                    std::to_string(cfg.time.end_time))
                      << ", scheme " << cfg.time.scheme << "\n";
        } else if (converge->parsed()) {
            pnp::CaseConfig cfg = pnp::load_case(common.case_path);
            apply_overrides(cfg, over);
            pnp::StudyOptions opts;
            opts.refine_axis = refine_axis.empty() ? 'y' : refine_axis[0];
            opts.sample_axis = sample_axis.empty() ? 'y' : sample_axis[0];
            opts.sample_frac = sample_frac;
            opts.parallel = !serial;
            pnp::ConvergenceResult res = pnp::convergence_study(
                cfg, parse_resolutions(resolutions_arg), opts,
                pnp::oracle_refs(cfg, oracle));
            std::filesystem::create_directories(common.output_dir);
            pnp::write_convergence_csv(
                (std::filesystem::path(common.output_dir) / "converge.csv")
                    .string(),
                res);
            for (std::size_t f = 0; f < res.fields.size(); ++f) {
                std::cout << res.fields[f] << ": order "
                          << res.orders[f];
                if (!res.monotone[f])
                    std::cout << "  (errors not monotone)";
                std::cout << "\n";
            }
            if (!res.order_defined)
                std::cout << "order undefined: errors vanish "
                             "(self-comparison)\n";
        } else if (sample->parsed()) {
            pnp::CaseConfig cfg = pnp::load_case(common.case_path);
            apply_overrides(cfg, over);
            pnp::Simulation sim = pnp::build_simulation(cfg);
            pnp::RunResult res = pnp::run_case(sim, "", echo);
            if (!res.ok) {
                std::cerr << "run diverged: " << res.error << "\n";
                return 2;
            }
            pnp::LineSample line = pnp::sample_line(
                sim.parent, pnp::snapshot_fields(sim),
                axis.empty() ? 'y' : axis[0], position);
            std::filesystem::create_directories(
                std::filesystem::path(common.output_dir) / "samples");
            std::vector<std::vector<double>> rows = line.rows;
            pnp::write_csv((std::filesystem::path(common.output_dir) /
                            "samples" / "line.csv")
                               .string(),
                           line.header, rows);
            if (verbose >= 1)
                std::cout << "wrote " << rows.size() << " samples\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
