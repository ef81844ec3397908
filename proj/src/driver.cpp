#include "pnp/driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include "pnp/errors.hpp"
#include "pnp/expr.hpp"
#include "pnp/oracle1d.hpp"

namespace pnp {
namespace {

namespace fs = std::filesystem;

PatchKind side_kind(const std::string& s) {
    if (s == "wall") return PatchKind::wall;
    if (s == "inlet") return PatchKind::inlet;
    if (s == "outlet") return PatchKind::outlet;
    if (s == "periodic") return PatchKind::periodic;
    throw ConfigError("unknown side kind '" + s + "'");
}

BCKind bc_kind(const std::string& s) {
    if (s == "zero_gradient") return BCKind::zero_gradient;
    if (s == "dirichlet") return BCKind::dirichlet;
    if (s == "fixed_gradient") return BCKind::fixed_gradient;
    if (s == "flux") return BCKind::flux;
    throw ConfigError("unknown boundary kind '" + s + "'");
}

int region_index(const CaseConfig& cfg, const std::string& name) {
    for (std::size_t i = 0; i < cfg.regions.size(); ++i)
        if (cfg.regions[i].name == name)
            return static_cast<int>(i);
    throw ConfigError("unknown region '" + name + "'");
}

int local_species(const RegionState& st, const std::string& name) {
    for (std::size_t i = 0; i < st.species.size(); ++i)
        if (st.species[i].name == name)
            return static_cast<int>(i);
    throw ConfigError("species '" + name + "' not present in region '" +
                      st.name + "'");
}

/// Quasi-periodic potential offset: positive value means the named patch's
/// side sits `value` above its periodic partner.
void apply_jump(RegionState& st, const std::string& patch, double value) {
    const bool xpair = patch == "left" || patch == "right";
    const double sign = (patch == "left" || patch == "bottom") ? 1.0 : -1.0;
    int count = 0;
    for (std::size_t l = 0; l < st.mesh->periodic_links.size(); ++l) {
        const bool linkx = std::abs(st.mesh->periodic_links[l].normal[0]) > 0.5;
        if (linkx == xpair) {
            st.phi_link_jump[l] = sign * value;
            ++count;
        }
    }
    if (count == 0)
        throw ConfigError("region '" + st.name + "': potential jump on '" +
                          patch + "' but no periodic links in that direction");
}

void fill_initial(const StructuredMesh& mesh, Field& f,
                  const Expression& expr) {
    for (Index c = 0; c < mesh.n_cells(); ++c)
        f.v[c] = expr.eval(mesh.cell_centres[c][0], mesh.cell_centres[c][1]);
    for (std::size_t p = 0; p < mesh.patches.size(); ++p)
        for (int k = 0; k < mesh.patches[p].size(); ++k) {
            const auto& fc = mesh.faces[mesh.patches[p].faces[k]].centre;
            f.bv[p][k] = expr.eval(fc[0], fc[1]);
        }
}

TimeScheme scheme_of(const CaseConfig& cfg) {
    if (cfg.time.steady)
        return TimeScheme::steady;
    return cfg.time.scheme == "backward2" ? TimeScheme::backward2
                                          : TimeScheme::euler;
}

} // namespace

Simulation build_simulation(const CaseConfig& cfg) {
    Simulation sim;
    sim.cfg = cfg;

    SideKinds kinds;
    kinds.left = side_kind(cfg.mesh.left);
    kinds.right = side_kind(cfg.mesh.right);
    kinds.bottom = side_kind(cfg.mesh.bottom);
    kinds.top = side_kind(cfg.mesh.top);
    sim.parent = build_rectangle_mesh(cfg.mesh.nx, cfg.mesh.ny, cfg.mesh.Lx,
                                      cfg.mesh.Ly, kinds);
    if (cfg.mesh.porous) {
        RandomFieldSpec spec;
        spec.seed = cfg.mesh.seed;
        spec.correlation_length = cfg.mesh.correlation_length;
        spec.threshold = cfg.mesh.solid_fraction;
        generate_random_porous(sim.parent, spec);
    }
    for (const auto& b : cfg.mesh.boxes)
        label_box(sim.parent, b.label, b.xmin, b.xmax, b.ymin, b.ymax);

    // meshes: the parent itself for a single region, extractions otherwise
    if (cfg.regions.size() == 1) {
        sim.meshes.push_back(sim.parent);
    } else {
        for (std::size_t i = 0; i < cfg.regions.size(); ++i) {
            std::string other;
            if (cfg.regions.size() == 2)
                other = cfg.regions[1 - i].name;
            sim.meshes.push_back(
                extract_region(sim.parent, cfg.regions[i].label, other));
        }
    }

    for (std::size_t i = 0; i < cfg.regions.size(); ++i) {
        const RegionConfig& rc = cfg.regions[i];
        RegionState st = make_region(
            sim.meshes[i],
            rc.kind == "fluid" ? RegionKind::fluid : RegionKind::solid,
            rc.name);
        st.mu = rc.mu;
        st.eps = rc.eps;
        st.pc.T = cfg.temperature;
        sim.regions.push_back(std::move(st));
    }

    for (const SpeciesConfig& sc : cfg.species)
        for (std::size_t i = 0; i < cfg.regions.size(); ++i) {
            auto it = sc.per_region.find(cfg.regions[i].name);
            if (it == sc.per_region.end())
                continue;
            SpeciesDef def;
            def.name = sc.name;
            def.D = it->second.D;
            def.z = sc.z;
            def.molar_mass = sc.molar_mass;
            int li = add_species(sim.regions[i], def, 0.0);
            if (!it->second.initial.empty()) {
                fill_initial(sim.meshes[i], sim.regions[i].c[li],
                             Expression::parse(it->second.initial));
                // the time history must start from the initial profile, not
                // from the placeholder the species was created with
                sim.regions[i].c_old[li] = sim.regions[i].c[li].v;
                sim.regions[i].c_older[li] = sim.regions[i].c[li].v;
            }
        }

    for (const BCEntry& e : cfg.boundary) {
        RegionState& st = sim.regions[region_index(cfg, e.region)];
        if (e.kind == "jump") {
            apply_jump(st, e.patch, e.value);
            continue;
        }
        const int pid = st.mesh->patch_id(e.patch);
        if (pid < 0)
            throw ConfigError("region '" + e.region + "' has no patch '" +
                              e.patch + "'");
        PatchBC bc{bc_kind(e.kind), e.value};
        if (e.field == "u_x")
            st.ux_bc[pid] = bc;
        else if (e.field == "u_y")
            st.uy_bc[pid] = bc;
        else if (e.field == "p")
            st.p_bc[pid] = bc;
        else if (e.field == "phi")
            st.phi_bc[pid] = bc;
        else
            st.c_bc[local_species(st, e.field)][pid] = bc;
    }

    for (RegionState& st : sim.regions) {
        compile_static_bcs(st);
        for (std::size_t i = 0; i < st.species.size(); ++i)
            compile_species_bcs(st, static_cast<int>(i));
        if (cfg.flow.frozen && st.kind == RegionKind::fluid)
            set_uniform_flow(st, cfg.flow.velocity[0], cfg.flow.velocity[1]);
    }

    for (const InterfaceConfig& ic : cfg.interfaces) {
        RegionInterface ri;
        ri.region_a = region_index(cfg, ic.region_a);
        ri.region_b = region_index(cfg, ic.region_b);
        ri.patch_a = sim.meshes[ri.region_a].patch_id("interface");
        ri.patch_b = sim.meshes[ri.region_b].patch_id("interface");
        if (ri.patch_a < 0 || ri.patch_b < 0)
            throw ConfigError("regions '" + ic.region_a + "' and '" +
                              ic.region_b + "' share no interface");
        ri.conductive = ic.conductive;
        for (const InterfaceSpeciesConfig& l : ic.species) {
            SpeciesLink sl;
            sl.sp_a = local_species(sim.regions[ri.region_a], l.a);
            sl.sp_b = local_species(sim.regions[ri.region_b], l.b);
            sl.k_f = l.k_f;
            sl.k_r = l.k_r;
            sl.restricted = l.restricted;
            ri.species.push_back(sl);
        }
        sim.links.push_back(ri);
    }

    sim.step.time_scheme = scheme_of(cfg);
    sim.step.dt = cfg.time.dt;
    sim.step.convection = cfg.solver.convection == "linear"
                              ? ConvectionScheme::linear
                              : ConvectionScheme::upwind;
    sim.step.J = cfg.flow.body_force;
    sim.step.frozen_flow = cfg.flow.frozen;
    sim.step.electroneutral = cfg.electroneutral;
    sim.step.max_outer = cfg.solver.max_outer;
    sim.step.outer_tol = cfg.solver.outer_tol;
    sim.step.linear.rel_tol = cfg.solver.rel_tol;
    sim.step.linear.abs_tol = cfg.solver.abs_tol;
    sim.step.linear.max_iters = cfg.solver.max_iters;
    sim.max_sweeps = cfg.solver.max_sweeps;
    sim.sweep_tol = cfg.solver.sweep_tol;
    return sim;
}

std::vector<NamedCellField> snapshot_fields(const Simulation& sim) {
    const std::size_t n =
        static_cast<std::size_t>(sim.parent.nx) * sim.parent.ny;
    std::vector<NamedCellField> out;
    std::map<std::string, std::size_t> index;

    auto slot = [&](const std::string& name) -> std::vector<double>& {
        auto it = index.find(name);
        if (it == index.end()) {
            index[name] = out.size();
            out.emplace_back(name, std::vector<double>(n, 0.0));
            return out.back().second;
        }
        return out[it->second].second;
    };
    auto scatter = [&](const RegionState& st, const std::string& name,
                       const std::vector<double>& v) {
        std::vector<double>& dst = slot(name);
        const auto& gc = st.mesh->global_cells;
        for (std::size_t c = 0; c < v.size(); ++c)
            dst[gc.empty() ? c : gc[c]] = v[c];
    };

    for (const RegionState& st : sim.regions) {
        if (st.kind == RegionKind::fluid) {
            scatter(st, "u_x", st.u.x.v);
            scatter(st, "u_y", st.u.y.v);
            scatter(st, "p", st.p.v);
        }
        scatter(st, "phi", st.phi.v);
        for (std::size_t i = 0; i < st.species.size(); ++i)
            scatter(st, st.species[i].name, st.c[i].v);
    }
    std::vector<double>& label = slot("region");
    if (!sim.parent.region_label.empty())
        for (std::size_t c = 0; c < n; ++c)
            label[c] = sim.parent.region_label[c];
    return out;
}

std::vector<std::string> advance_step(Simulation& sim) {
    std::vector<std::string> lines;
    if (sim.multi_region()) {
        MultiRegionReport rep = multi_region_step(sim.regions, sim.links,
                                                  sim.step, sim.max_sweeps,
                                                  sim.sweep_tol);
        lines.push_back("sweeps " + std::to_string(rep.sweeps) +
                        (rep.converged ? "" : "  (not converged)"));
        for (std::size_t i = 0; i < rep.region_reports.size(); ++i)
            for (const std::string& l : rep.region_reports[i].log)
                lines.push_back(sim.regions[i].name + ":" + l);
    } else {
        OuterReport rep = pimple_outer_loop(sim.regions[0], sim.step);
        lines.push_back("outers " + std::to_string(rep.outers) +
                        (rep.converged ? "" : "  (not converged)"));
        for (const std::string& l : rep.log)
            lines.push_back(l);
        advance_history(sim.regions[0]);
    }
    return lines;
}

RunResult run_case(Simulation& sim, const std::string& out_dir,
                   std::ostream* echo) {
    RunResult res;
    const bool writing = !out_dir.empty();
    std::ofstream logf;
    if (writing) {
        fs::create_directories(fs::path(out_dir) / "fields");
        fs::create_directories(fs::path(out_dir) / "samples");
        logf.open(fs::path(out_dir) / "log.txt");
    }
    auto log = [&](const std::string& line) {
        if (logf.is_open())
            logf << line << "\n";
        if (echo)
            *echo << line << "\n";
    };
    auto write_snapshot = [&](const std::string& tag) {
        if (!writing)
            return;
        write_vtk((fs::path(out_dir) / "fields" / (tag + ".vtk")).string(),
                  sim.parent, snapshot_fields(sim));
    };

    std::vector<std::string> totals_header{"time"};
    for (const RegionState& st : sim.regions)
        for (const auto& sp : st.species)
            totals_header.push_back(st.name + ":" + sp.name);
    std::vector<std::vector<double>> totals_rows;
    auto record_totals = [&](double t) {
        std::vector<double> row{t};
        for (const RegionState& st : sim.regions)
            for (std::size_t i = 0; i < st.species.size(); ++i)
                row.push_back(total_moles(st, static_cast<int>(i)));
        totals_rows.push_back(std::move(row));
    };

    const bool steady = sim.cfg.time.steady;
    const double dt = sim.cfg.time.dt;
    const long n_steps =
        steady ? 1 : std::lround(sim.cfg.time.end_time / dt);
    const long write_every =
        (!steady && sim.cfg.time.write_interval > 0.0)
            ? std::max(1L, std::lround(sim.cfg.time.write_interval / dt))
            : 0;

    write_snapshot("step_000000");
    record_totals(0.0);

    char tag[32];
    for (long s = 1; s <= n_steps; ++s) {
        std::vector<RegionState> backup = sim.regions;
        const double t = steady ? 0.0 : s * dt;
        log(steady ? std::string("Steady solve")
                   : "Time = " + std::to_string(t));
        try {
            for (const std::string& l : advance_step(sim))
                log(l);
        } catch (const SolverError& e) {
            sim.regions = backup;
            log(std::string("diverged: ") + e.what());
            write_snapshot("last_good");
            if (writing)
                write_csv((fs::path(out_dir) / "samples" / "totals.csv")
                              .string(),
                          totals_header, totals_rows);
            res.ok = false;
            res.error = e.what();
            return res;
        }
        res.steps = static_cast<int>(s);
        res.time = t;
        record_totals(t);
        if (write_every > 0 && s % write_every == 0 && s != n_steps) {
            std::snprintf(tag, sizeof(tag), "step_%06ld", s);
            write_snapshot(tag);
        }
    }
    std::snprintf(tag, sizeof(tag), "step_%06ld", n_steps);
    write_snapshot(tag);
    if (writing)
        write_csv((fs::path(out_dir) / "samples" / "totals.csv").string(),
                  totals_header, totals_rows);
    return res;
}

// -- convergence studies ------------------------------------------------------

namespace {

struct Profile {
    std::vector<double> coord;
    std::map<std::string, std::vector<double>> values;
};

Profile run_profile(CaseConfig cfg, int res, const StudyOptions& opts) {
    if (opts.refine_axis == 'x')
        cfg.mesh.nx = res;
    else
        cfg.mesh.ny = res;
    Simulation sim = build_simulation(cfg);
    RunResult rr = run_case(sim, "", nullptr);
    if (!rr.ok)
        throw SolverError("resolution " + std::to_string(res) +
                          " diverged: " + rr.error);
    const double cross =
        opts.sample_axis == 'x' ? sim.parent.Ly : sim.parent.Lx;
    LineSample line = sample_line(sim.parent, snapshot_fields(sim),
                                  opts.sample_axis, opts.sample_frac * cross);
    Profile prof;
    for (const auto& row : line.rows)
        prof.coord.push_back(row[0]);
    for (std::size_t f = 1; f < line.header.size(); ++f) {
        std::vector<double> v;
        for (const auto& row : line.rows)
            v.push_back(row[f]);
        prof.values[line.header[f]] = std::move(v);
    }
    return prof;
}

double profile_error(const Profile& prof, const ProfileRef& ref) {
    auto it = prof.values.find(ref.field);
    if (it == prof.values.end())
        throw ConfigError("convergence field '" + ref.field +
                          "' not produced by the case");
    if (!ref.value)
        return 0.0; // self comparison
    std::vector<double> v, r;
    for (std::size_t k = 0; k < prof.coord.size(); ++k) {
        const double x = prof.coord[k];
        if (x < ref.lo || x > ref.hi)
            continue;
        v.push_back(it->second[k]);
        r.push_back(ref.value(x));
    }
    if (v.empty())
        throw ConfigError("convergence field '" + ref.field +
                          "': no sample points in range");
    if (ref.gauge_free) {
        double mv = 0.0, mr = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            mv += v[k];
            mr += r[k];
        }
        mv /= v.size();
        mr /= r.size();
        for (std::size_t k = 0; k < v.size(); ++k) {
            v[k] -= mv;
            r[k] -= mr;
        }
    }
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        num += (v[k] - r[k]) * (v[k] - r[k]);
        den += r[k] * r[k];
    }
    num = std::sqrt(num);
    den = std::sqrt(den);
    return den > 0.0 ? num / den : num;
}

} // namespace

ConvergenceResult convergence_study(const CaseConfig& base,
                                    const std::vector<int>& resolutions,
                                    const StudyOptions& opts,
                                    const std::vector<ProfileRef>& refs) {
    if (resolutions.size() < 2)
        throw ConfigError("convergence study needs at least two resolutions");
    ConvergenceResult out;
    out.resolutions = resolutions;
    for (const ProfileRef& r : refs)
        out.fields.push_back(r.field);

    std::vector<Profile> profiles(resolutions.size());
    if (opts.parallel) {
        std::vector<std::future<Profile>> jobs;
        for (int res : resolutions)
            jobs.push_back(std::async(std::launch::async, run_profile, base,
                                      res, opts));
        for (std::size_t i = 0; i < jobs.size(); ++i)
            profiles[i] = jobs[i].get();
    } else {
        for (std::size_t i = 0; i < resolutions.size(); ++i)
            profiles[i] = run_profile(base, resolutions[i], opts);
    }

    for (const ProfileRef& ref : refs) {
        std::vector<double> errs;
        for (const Profile& p : profiles)
            errs.push_back(profile_error(p, ref));

        bool mono = true;
        for (std::size_t i = 1; i < errs.size(); ++i)
            if (errs[i] >= errs[i - 1])
                mono = false;

        // least-squares slope of log error against log h (h ~ 1/N)
        bool defined = true;
        for (double e : errs)
            if (!(e > 0.0))
                defined = false;
        double order = std::nan("");
        if (defined) {
            double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
            const double n = static_cast<double>(errs.size());
            for (std::size_t i = 0; i < errs.size(); ++i) {
                const double lx = -std::log(out.resolutions[i]);
                const double ly = std::log(errs[i]);
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
            }
            order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        } else {
            out.order_defined = false;
        }
        out.errors.push_back(std::move(errs));
        out.orders.push_back(order);
        out.monotone.push_back(mono);
    }
    return out;
}

void write_convergence_csv(const std::string& path,
                           const ConvergenceResult& r) {
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    out << "N";
    for (const auto& f : r.fields)
        out << ",err_" << f;
    out << "\n";
    char buf[32];
    for (std::size_t i = 0; i < r.resolutions.size(); ++i) {
        out << r.resolutions[i];
        for (std::size_t f = 0; f < r.fields.size(); ++f) {
            std::snprintf(buf, sizeof(buf), "%.17g", r.errors[f][i]);
            out << ',' << buf;
        }
        out << "\n";
    }
    out << "order";
    for (double o : r.orders) {
        std::snprintf(buf, sizeof(buf), "%.6g", o);
        out << ',' << buf;
    }
    out << "\n";
}

// -- oracle references --------------------------------------------------------

namespace {

std::function<double(double)> interp(std::vector<double> xs,
                                     std::vector<double> ys,
                                     double shift = 0.0) {
    return [xs = std::move(xs), ys = std::move(ys), shift](double x) {
        x += shift;
        if (x <= xs.front())
            return ys.front();
        if (x >= xs.back())
            return ys.back();
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin());
        const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        return (1.0 - w) * ys[i - 1] + w * ys[i];
    };
}

const RegionConfig& find_region(const CaseConfig& cfg, const std::string& kind) {
    for (const auto& r : cfg.regions)
        if (r.kind == kind)
            return r;
    throw ConfigError("case has no " + kind + " region");
}

double bc_value(const CaseConfig& cfg, const std::string& field,
                const std::string& patch) {
    for (const auto& e : cfg.boundary)
        if (e.field == field && e.patch == patch && e.kind == "dirichlet")
            return e.value;
    throw ConfigError("case fixes no " + field + " value on '" + patch + "'");
}

double initial_at(const SpeciesConfig& sc, const std::string& region, double x,
                  double y) {
    auto it = sc.per_region.find(region);
    if (it == sc.per_region.end())
        throw ConfigError("species '" + sc.name + "' not in region '" +
                          region + "'");
    if (it->second.initial.empty())
        return 0.0;
    return Expression::parse(it->second.initial).eval(x, y);
}

} // namespace

std::vector<ProfileRef> oracle_refs(const CaseConfig& cfg,
                                    const std::string& kind) {
    std::vector<ProfileRef> refs;
    if (kind == "self") {
        refs.push_back({"phi", nullptr, false, -1e300, 1e300});
        for (const auto& s : cfg.species)
            refs.push_back({s.name, nullptr, false, -1e300, 1e300});
        return refs;
    }
    if (kind == "channel") {
        const RegionConfig& fr = find_region(cfg, "fluid");
        if (cfg.species.empty())
            throw ConfigError("channel reference needs one species");
        const SpeciesConfig& sp = cfg.species[0];
        ChannelProblem p;
        p.H = cfg.mesh.Ly;
        p.mu = fr.mu;
        p.eps = fr.eps;
        p.phi_bottom = bc_value(cfg, "phi", "bottom");
        p.phi_top = bc_value(cfg, "phi", "top");
        p.Jx = cfg.flow.body_force[0];
        p.c_mean = initial_at(sp, fr.name, 0.5 * cfg.mesh.Lx, 0.5 * cfg.mesh.Ly);
        p.z = sp.z;
        p.T = cfg.temperature;
        ChannelSolution sol = solve_channel(p);
        refs.push_back({"u_x", interp(sol.y, sol.u), false, -1e300, 1e300});
        refs.push_back({"phi", interp(sol.y, sol.phi), false, -1e300, 1e300});
        refs.push_back({sp.name, interp(sol.y, sol.c), false, -1e300, 1e300});
        refs.push_back({"p", interp(sol.y, sol.p), true, -1e300, 1e300});
        return refs;
    }
    if (kind == "two_species") {
        const RegionConfig& fr = find_region(cfg, "fluid");
        if (cfg.species.size() < 2)
            throw ConfigError("two-species reference needs two species");
        const SpeciesConfig& s1 = cfg.species[0];
        const SpeciesConfig& s2 = cfg.species[1];
        TwoSpeciesProblem p;
        p.L = cfg.mesh.Lx;
        p.D1 = s1.per_region.at(fr.name).D;
        p.D2 = s2.per_region.at(fr.name).D;
        p.z1 = s1.z;
        p.z2 = s2.z;
        p.eps = fr.eps;
        p.u = cfg.flow.velocity[0];
        p.phi_left = bc_value(cfg, "phi", "left");
        p.phi_right = bc_value(cfg, "phi", "right");
        p.c_init = initial_at(s1, fr.name, 0.5 * cfg.mesh.Lx, 0.5 * cfg.mesh.Ly);
        p.T = cfg.temperature;
        p.t_end = cfg.time.end_time;
        TwoSpeciesSolution sol = solve_two_species(p);
        refs.push_back({s1.name, interp(sol.x, sol.c1), false, -1e300, 1e300});
        refs.push_back({s2.name, interp(sol.x, sol.c2), false, -1e300, 1e300});
        refs.push_back({"phi", interp(sol.x, sol.phi), false, -1e300, 1e300});
        return refs;
    }
    if (kind == "reactive_interface") {
        const RegionConfig& fr = find_region(cfg, "fluid");
        const RegionConfig& sr = find_region(cfg, "solid");
        if (cfg.interfaces.empty() || cfg.interfaces[0].species.empty())
            throw ConfigError(
                "reactive-interface reference needs a species link");
        const InterfaceSpeciesConfig& link = cfg.interfaces[0].species[0];
        auto species_of = [&](const std::string& name) -> const SpeciesConfig& {
            for (const auto& s : cfg.species)
                if (s.name == name)
                    return s;
            throw ConfigError("unknown species '" + name + "'");
        };
        const SpeciesConfig& sf = species_of(link.a);
        const SpeciesConfig& ss = species_of(link.b);
        ReactiveInterfaceProblem p;
        p.u = cfg.flow.velocity[0];
        p.D_f = sf.per_region.at(fr.name).D;
        p.D_s = ss.per_region.at(sr.name).D;
        p.k_f = link.k_f;
        p.k_r = link.k_r;
        ReactiveInterfaceSolution sol = solve_reactive_interface(p);
        // oracle coordinates are centred on the interface; the case runs on
        // [0, Lx] with the interface at Lx/2
        const double shift = -0.5 * cfg.mesh.Lx;
        const double mid = 0.5 * cfg.mesh.Lx;
        refs.push_back(
            {sf.name, interp(sol.x_f, sol.c_f, shift), false, -1e300, mid});
        refs.push_back(
            {ss.name, interp(sol.x_s, sol.c_s, shift), false, mid, 1e300});
        return refs;
    }
    throw ConfigError("unknown reference kind '" + kind + "'");
}

} // namespace pnp
