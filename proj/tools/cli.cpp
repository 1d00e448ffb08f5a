#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "kyano/dynamics.hpp"
#include "kyano/io.hpp"
#include "kyano/kysym.hpp"
#include "kyano/multipole.hpp"
#include "kyano/sampling.hpp"
#include "kyano/version.hpp"

namespace kyano::cli {

using nlohmann::json;

namespace {

struct Common {
    std::string manifold;
    std::string field;
    std::size_t samples = 0;
    std::uint64_t seed = 42;
    double tol = 0.0;
    std::string out;
    std::string format = "json";
    std::vector<std::string> skip;
};

void add_common(CLI::App* cmd, Common& c, bool with_field) {
    cmd->add_option("--manifold", c.manifold, "manifold spec file or catalog selector (flat:N, const-curvature:K, "
                                              "const-curvature-spherical:K, taub-nut:M, taub-nut-16:M)");
    if (with_field) {
        cmd->add_option("--field", c.field, "field spec file or catalog name (flat-eps, taub-nut-1..3, "
                                            "constcurv-printed, constcurv-printed-dual)");
    }
    cmd->add_option("--samples", c.samples, "number of sample points");
    cmd->add_option("--seed", c.seed, "sampling seed");
    cmd->add_option("--tol", c.tol, "tolerance");
    cmd->add_option("--out", c.out, "output path (default stdout)");
    cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember({"json", "table", "csv"}));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty()) {
        out << content;
    } else {
        io::write_file_atomic(path, content);
    }
}

std::vector<double> parse_tuple(const std::string& s, const char* what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(part, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != part.size()) throw io::InputError(std::string("bad number in ") + what);
        v.push_back(x);
    }
    return v;
}

int cmd_verify_ky(const Common& c, std::ostream& out) {
    const geometry::MetricSpec spec = io::load_manifold(c.manifold.empty() ? "flat:3" : c.manifold);
    const AntisymTensorField field = io::load_field(c.field.empty() ? "flat-eps" : c.field, spec);
    if (field.dim() != spec.dim()) throw io::InputError("field and manifold dimensions differ");
    const std::size_t samples = c.samples == 0 ? 20 : c.samples;
    SampleGenerator gen(c.seed);
    const auto pts = sample_chart_points(spec, samples, gen);
    kysym::KYTolerances tol;
    if (c.tol > 0.0) tol.ky = c.tol;
    const kysym::KYReport rep = kysym::verify_ky(spec, field, pts, tol);

    std::string content;
    if (c.format == "json") {
        json j = io::to_json(rep);
        j["seed"] = c.seed;
        j["generator"] = SampleGenerator::kName;
        content = io::dump_json(j);
    } else if (c.format == "csv") {
        content = "metric,field,samples,max_ky_residual,max_covariant_constancy_residual,is_ky,is_covariant_constant,"
                  "is_nondegenerate\n";
        content += "\"" + rep.metric + "\",\"" + rep.field + "\"," + std::to_string(rep.samples) + "," +
                   fmt(rep.max_ky_residual) + "," + fmt(rep.max_covariant_constancy_residual) + "," +
                   (rep.is_ky ? "true" : "false") + "," + (rep.is_covariant_constant ? "true" : "false") + "," +
                   (rep.is_nondegenerate ? "true" : "false") + "\n";
    } else {
        content = "metric            " + rep.metric + "\nfield             " + rep.field + "\nsamples           " +
                  std::to_string(rep.samples) + "\nmax KY residual   " + short_fmt(rep.max_ky_residual) +
                  "  (tol " + short_fmt(rep.tolerances.ky) + ")\nmax |Df|          " +
                  short_fmt(rep.max_covariant_constancy_residual) + "\nKilling-Yano      " +
                  (rep.is_ky ? "yes" : "no") + "\ncovariant const.  " + (rep.is_covariant_constant ? "yes" : "no") +
                  "\nnon-degenerate    " + (rep.is_nondegenerate ? "yes" : "no") + "\n";
    }
    emit(c.out, content, out);
    return rep.is_ky ? kOk : kVerificationFailed;
}

struct GeodesicOptions {
    std::string x;
    std::string p;
    double dt = 1e-3;
    std::size_t steps = 1000;
    std::vector<std::string> monitor;
};

int cmd_geodesic(const Common& c, const GeodesicOptions& g, std::ostream& out, std::ostream& err) {
    const geometry::MetricSpec spec = io::load_manifold(c.manifold.empty() ? "flat:3" : c.manifold);
    const std::size_t n = spec.dim();
    if (!(g.dt > 0.0)) throw io::InputError("--dt must be positive");

    dynamics::PhasePoint z0;
    SampleGenerator gen(c.seed);
    if (g.x.empty()) {
        z0.x = sample_chart_points(spec, 1, gen).front();
    } else {
        z0.x = parse_tuple(g.x, "--x");
    }
    z0.p = g.p.empty() ? sample_cube(n, 1, -1.0, 1.0, gen).front() : parse_tuple(g.p, "--p");
    if (z0.x.size() != n || z0.p.size() != n) throw io::InputError("initial data must have " + std::to_string(n) + " entries");
    spec.check_domain(z0.x);

    std::vector<std::string> monitor = g.monitor.empty() ? std::vector<std::string>{"H"} : g.monitor;
    std::vector<dynamics::PhaseFunction> quantities;
    for (const auto& name : monitor) {
        if (name == "H") {
            quantities.push_back(dynamics::PhaseFunction::hamiltonian(spec));
        } else if (name == "K") {
            if (c.field.empty()) throw io::InputError("monitoring K needs --field");
            quantities.push_back(dynamics::PhaseFunction::killing_quadratic(spec, io::load_field(c.field, spec)));
        } else if (name == "L1" || name == "L2" || name == "L3") {
            if (n != 3) throw io::InputError("angular momentum needs a 3-dimensional manifold");
            quantities.push_back(dynamics::PhaseFunction::angular_momentum(static_cast<std::size_t>(name[1] - '1')));
        } else {
            throw io::InputError("unknown monitored quantity '" + name + "' (use H, K, L1, L2, L3)");
        }
    }

    dynamics::Trajectory traj;
    std::string exit_reason;
    try {
        traj = dynamics::geodesic_integrate(spec, z0, g.dt, g.steps);
    } catch (const dynamics::DomainExit& e) {
        traj = e.partial();
        exit_reason = e.what();
    }

    json drift = json::array();
    bool within = true;
    for (std::size_t k = 0; k < quantities.size(); ++k) {
        const dynamics::Drift d = dynamics::conservation_monitor(traj, quantities[k]);
        const bool ok = c.tol <= 0.0 || d.max_rel <= c.tol;
        within = within && ok;
        drift.push_back({{"quantity", monitor[k]},
                         {"initial", d.initial},
                         {"max_abs_drift", d.max_abs},
                         {"max_rel_drift", d.max_rel},
                         {"within_tol", ok}});
    }
    json summary = {{"schema", io::kSchema},
                    {"metric", spec.name()},
                    {"method", traj.method},
                    {"dt", traj.dt},
                    {"steps_requested", g.steps},
                    {"steps_completed", traj.steps},
                    {"x0", z0.x},
                    {"p0", z0.p},
                    {"seed", c.seed},
                    {"drift", drift}};
    if (c.tol > 0.0) summary["tol"] = c.tol;
    if (!exit_reason.empty()) summary["domain_exit"] = exit_reason;

    if (!c.out.empty()) {
        io::write_file_atomic(c.out, io::trajectory_csv(traj));
        io::write_file_atomic(c.out + ".json", io::dump_json(summary));
    }
    if (c.format == "csv" && c.out.empty()) {
        out << io::trajectory_csv(traj);
    } else if (c.format == "table") {
        out << "metric  " << spec.name() << "\nsteps   " << traj.steps << " of " << g.steps << "\n";
        for (const auto& d : drift) {
            out << d["quantity"].get<std::string>() << "  max abs drift " << short_fmt(d["max_abs_drift"])
                << "  max rel drift " << short_fmt(d["max_rel_drift"]) << "\n";
        }
    } else if (c.out.empty() || c.format == "json") {
        out << io::dump_json(summary);
    }
    if (!exit_reason.empty()) {
        err << "geodesic: " << exit_reason << "\n";
        return kVerificationFailed;
    }
    return within ? kOk : kVerificationFailed;
}

int cmd_multipole(const Common& c, bool samples_given, std::ostream& out, std::ostream& err) {
    const std::size_t samples = samples_given ? c.samples : 1000;
    if (samples == 0) throw io::InputError("--samples must be at least 1");
    const auto pts = multipole::sample_phase_points(samples, c.seed);
    const multipole::IdentityReport rep = multipole::identity_suite(pts);
    const auto mismatches = multipole::compare_with_expectations(rep);

    std::string content;
    if (c.format == "table") {
        content = rep.table();
    } else if (c.format == "csv") {
        content = "identity,anchor,residual,verdict\n";
        for (const auto& r : rep.identities) {
            content += r.id + ",\"" + r.anchor + "\"," + fmt(r.residual) + "," + multipole::to_string(r.verdict) + "\n";
        }
    } else {
        json j = io::to_json(rep);
        j["seed"] = c.seed;
        j["generator"] = SampleGenerator::kName;
        j["quadrupole_fit"] = io::to_json(multipole::fit_quadrupole(pts));
        json mm = json::array();
        for (const auto& m : mismatches) mm.push_back({{"identity", m.id}, {"expected", m.expected}, {"actual", m.actual}});
        j["expectation_mismatches"] = mm;
        content = io::dump_json(j);
    }
    emit(c.out, content, out);
    for (const auto& m : mismatches) {
        err << "multipole: identity " << m.id << " expected " << m.expected << ", got " << m.actual << "\n";
    }
    return mismatches.empty() ? kOk : kVerificationFailed;
}

int cmd_report(const Common& c, bool samples_given, std::ostream& out) {
    ReportConfig cfg;
    cfg.seed = c.seed;
    if (samples_given) {
        if (c.samples == 0) throw io::InputError("--samples must be at least 1");
        cfg.multipole_samples = c.samples;
    }
    for (const auto& s : c.skip) cfg.skip.insert(s);
    const json report = build_report(cfg);

    std::string content;
    if (c.format == "json") {
        content = io::dump_json(report);
    } else {
        content = c.format == "csv" ? "section,status\n" : "";
        for (auto it = report["sections"].begin(); it != report["sections"].end(); ++it) {
            const std::string status = it.value()["status"];
            content += c.format == "csv" ? it.key() + "," + status + "\n" : it.key() + ": " + status + "\n";
        }
        if (c.format != "csv") content += "overall: " + report["status"].get<std::string>() + "\n";
    }
    emit(c.out, content, out);
    return report["status"] == "pass" ? kOk : kVerificationFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Killing-Yano tensor toolkit"};
    app.set_version_flag("--version", std::string("kyano ") + kVersion);
    app.require_subcommand(1);

    Common verify;
    auto* verify_cmd = app.add_subcommand("verify-ky", "check the Killing-Yano equation for a field on a manifold");
    add_common(verify_cmd, verify, true);

    Common geo;
    GeodesicOptions geo_opts;
    auto* geo_cmd = app.add_subcommand("geodesic", "integrate a geodesic and monitor conserved quantities");
    add_common(geo_cmd, geo, true);
    geo_cmd->add_option("--x", geo_opts.x, "initial position, comma separated");
    geo_cmd->add_option("--p", geo_opts.p, "initial momentum, comma separated");
    geo_cmd->add_option("--dt", geo_opts.dt, "step size");
    geo_cmd->add_option("--steps", geo_opts.steps, "number of steps");
    geo_cmd->add_option("--monitor", geo_opts.monitor, "quantities to monitor: H, K, L1, L2, L3");

    Common mp;
    auto* mp_cmd = app.add_subcommand("multipole", "run the multipole identity suite");
    add_common(mp_cmd, mp, false);

    Common rep;
    auto* rep_cmd = app.add_subcommand("report", "aggregate every catalog check into one document");
    add_common(rep_cmd, rep, false);
    rep_cmd->add_option("--skip", rep.skip, "section to skip (repeatable)")->check(CLI::IsMember(report_sections()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kUsage;
    }

    try {
        if (*verify_cmd) return cmd_verify_ky(verify, out);
        if (*geo_cmd) return cmd_geodesic(geo, geo_opts, out, err);
        if (*mp_cmd) return cmd_multipole(mp, mp_cmd->count("--samples") > 0, out, err);
        if (*rep_cmd) return cmd_report(rep, rep_cmd->count("--samples") > 0, out);
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << "\n";
        return kUsage;
    } catch (const io::InputError& e) {
        err << "input error: " << e.what() << "\n";
        return kUsage;
    } catch (const ShapeError& e) {
        err << "input error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << "\n";
        return kUsage;
    } catch (const SingularMetricError& e) {
        err << "singular metric: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kVerificationFailed;
    }
    return kUsage;
}

}  // namespace kyano::cli
