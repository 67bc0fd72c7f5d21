#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "ebsim/calibration.hpp"
#include "ebsim/coincidence.hpp"
#include "ebsim/config.hpp"
#include "ebsim/csv.hpp"
#include "ebsim/dataset_io.hpp"
#include "ebsim/dlm.hpp"
#include "ebsim/eprb.hpp"
#include "ebsim/error.hpp"
#include "ebsim/quantum.hpp"

namespace ebsim::cli {

namespace {

using config::RunConfig;
using io::CsvRow;

constexpr double kRadPerDeg = std::numbers::pi / 180.0;
constexpr double kDegPerRad = 180.0 / std::numbers::pi;

// Key=value flags shared by every subcommand.
struct Flags {
    std::string config_file;
    std::map<std::string, std::string> values;
};

void add_flags(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config_file, "key=value configuration file");
    for (const auto& key : config::known_keys()) {
        cmd->add_option("--" + key, flags.values[key], "configuration key " + key);
    }
}

RunConfig resolve(CLI::App* cmd, const Flags& flags) {
    RunConfig cfg;
    if (!flags.config_file.empty()) {
        std::ifstream in(flags.config_file);
        if (!in) throw ConfigError("config", "cannot read " + flags.config_file);
        std::stringstream text;
        text << in.rdbuf();
        cfg = config::parse_config(text.str());
    }
    std::vector<std::pair<std::string, std::string>> given;
    for (const auto& key : config::known_keys()) {
        if (cmd->get_option("--" + key)->count() > 0) given.emplace_back(key, flags.values.at(key));
    }
    return config::parse_assignments(given, cfg);
}

void emit(const RunConfig& cfg, std::ostream& out, std::string_view title, const std::vector<std::string>& columns,
          const std::vector<CsvRow>& rows) {
    if (cfg.out.empty()) {
        io::emit_curve(out, title, columns, rows, cfg);
    } else {
        io::emit_curve(cfg.out, title, columns, rows, cfg);
        out << "wrote " << rows.size() << " rows to " << cfg.out << '\n';
    }
}

// ---------------------------------------------------------------------------

void cmd_bs(RunConfig cfg, std::ostream& out) {
    BeamSplitterRun run;
    run.events = cfg.N.value_or(100000);
    run.transient = cfg.transient;
    run.p0 = cfg.p0;
    run.psi0 = cfg.psi0 * kRadPerDeg;
    run.psi1 = cfg.psi1 * kRadPerDeg;
    run.alpha = cfg.alpha;
    run.seed = cfg.seed;
    cfg.N = run.events;

    const auto counts = run_beam_splitter(run);
    const auto ref = quantum::bs_intensities(run.p0, run.psi0, run.psi1);
    out << "input0=" << counts.input0 << " input1=" << counts.input1 << " output0=" << counts.output0
        << " output1=" << counts.output1 << '\n';
    out << "output0_fraction=" << counts.output0_fraction() << " quantum_I0=" << ref.first << '\n';
    if (!cfg.out.empty()) {
        emit(cfg, out, "beam splitter", {"p0", "psi0_minus_psi1", "out0_frac", "quantum_ref"},
             {{cfg.p0, cfg.psi0 - cfg.psi1, counts.output0_fraction(), ref.first}});
    }
}

void cmd_mzi(RunConfig cfg, std::ostream& out) {
    MziRun run;
    run.events = cfg.N.value_or(10000);
    run.phi1 = cfg.phi1 * kRadPerDeg;
    run.policy = cfg.psi_policy;
    run.psi0 = cfg.psi0 * kRadPerDeg;
    run.alpha = cfg.alpha;
    cfg.N = run.events;

    if (!cfg.sweep) {
        run.phi0 = cfg.phi0 * kRadPerDeg;
        run.seed = cfg.seed;
        std::ofstream trace;
        std::function<void(const MziEventTrace&)> sink;
        if (!cfg.trace.empty()) {
            trace.open(cfg.trace);
            if (!trace) throw std::runtime_error("cannot open " + cfg.trace + " for writing");
            trace << "# ebsim mzi trace\n# config-digest " << config::digest(cfg) << "\nevent,path,output_channel,detector\n";
            sink = [&trace](const MziEventTrace& t) {
                trace << t.index << ',' << index_of(t.path) << ',' << index_of(t.output) << ",N" << t.detector << '\n';
            };
        }
        const auto c = run_mzi(run, sink);
        const auto ref = quantum::mzi_probabilities(run.phi0, run.phi1);
        out << "N0=" << c.n0 << " N1=" << c.n1 << " N2=" << c.n2 << " N3=" << c.n3 << '\n';
        out << "N2_fraction=" << c.n2_fraction() << " quantum_P2=" << ref.first << '\n';
        return;
    }

    std::vector<CsvRow> rows;
    double worst = 0.0;
    std::uint64_t point = 0;
    for (double phi0 = 0.0; phi0 < 360.0 - 1e-9; phi0 += cfg.phi_step, ++point) {
        run.phi0 = phi0 * kRadPerDeg;
        run.seed = cfg.seed + point;
        const auto c = run_mzi(run);
        const double ref = quantum::mzi_probabilities(run.phi0, run.phi1).first;
        worst = std::max(worst, std::abs(c.n2_fraction() - ref));
        rows.push_back({phi0 - cfg.phi1, c.n2_fraction(), ref, c.n0_fraction()});
    }
    emit(cfg, out, "mzi sweep", {"phi", "N2_frac", "quantum_ref", "N0_frac"}, rows);
    if (!cfg.out.empty()) out << "max |N2_frac - quantum_ref| = " << worst << '\n';
}

std::pair<eprb::StationDataset, eprb::StationDataset> load_or_simulate(const RunConfig& cfg) {
    if (cfg.in1.empty() != cfg.in2.empty()) throw ConfigError("in1", "give both in1 and in2, or neither");
    if (!cfg.in1.empty()) return {io::read_dataset(cfg.in1), io::read_dataset(cfg.in2)};
    return eprb::run_experiment(cfg.experiment(1000000));
}

analysis::AnalysisConfig analysis_with_delta(RunConfig& cfg, const eprb::StationDataset& s1,
                                             const eprb::StationDataset& s2, std::ostream& out) {
    if (cfg.auto_delta) {
        analysis::DeltaSearch search;
        search.resolution = cfg.delta_resolution > 0 ? cfg.delta_resolution : 4.0 * cfg.tau_value();
        search.pairing = cfg.pairing;
        search.search_range = cfg.search_range > 0 ? cfg.search_range : 100.0 * cfg.tau_value();
        cfg.delta = analysis::find_delta(s1, s2, search);
        cfg.auto_delta = false;
        out << "delta=" << cfg.delta << " (maximizes the t1 - t2 histogram)\n";
    }
    return cfg.analysis();
}

void cmd_generate(RunConfig cfg, std::ostream& out) {
    if (cfg.out1.empty()) throw ConfigError("out1", "eprb generate needs out1 and out2");
    if (cfg.out2.empty()) throw ConfigError("out2", "eprb generate needs out1 and out2");
    const auto exp = cfg.experiment(1000000);
    eprb::validate(exp);

    const eprb::StationDataset h1{1, exp.station1.angles, exp.station1.T0, exp.station1.d, exp.seed, {}};
    const eprb::StationDataset h2{2, exp.station2.angles, exp.station2.T0, exp.station2.d, exp.seed, {}};
    io::DatasetWriter w1(cfg.out1, h1, exp.events);
    io::DatasetWriter w2(cfg.out2, h2, exp.events);
    eprb::run_experiment(exp, [&](const eprb::EventRecord& r1, const eprb::EventRecord& r2) {
        w1.write(r1);
        w2.write(r2);
    });
    w1.finish();
    w2.finish();
    out << "wrote " << exp.events << " events to " << cfg.out1 << " and " << cfg.out2 << '\n';
}

void cmd_analyze(RunConfig cfg, std::ostream& out) {
    if (cfg.in1.empty() || cfg.in2.empty()) throw ConfigError("in1", "eprb analyze needs in1 and in2");
    const auto s1 = io::read_dataset(cfg.in1);
    const auto s2 = io::read_dataset(cfg.in2);
    const auto acfg = analysis_with_delta(cfg, s1, s2, out);
    const auto table = analysis::count_coincidences(s1, s2, acfg);

    std::vector<CsvRow> rows;
    for (std::uint32_t m1 = 1; m1 <= table.M1(); ++m1) {
        for (std::uint32_t m2 = 1; m2 <= table.M2(); ++m2) {
            const auto st = analysis::stats_for(table, m1, m2);
            const double a = s1.angles[m1 - 1];
            const double b = s2.angles[m2 - 1];
            rows.push_back({double(m1), double(m2), a * kDegPerRad, b * kDegPerRad, double(table.count(1, 1, m1, m2)),
                            double(table.count(1, -1, m1, m2)), double(table.count(-1, 1, m1, m2)),
                            double(table.count(-1, -1, m1, m2)), st.E1, st.E2, st.E, st.rho,
                            quantum::singlet_E(a, b)});
        }
    }

    std::ostringstream summary;
    summary << "# ebsim analysis summary\n# config-digest " << config::digest(cfg) << '\n';
    summary << "events_station1=" << s1.records.size() << "\nevents_station2=" << s2.records.size() << '\n';
    summary << "coincidences=" << table.total() << "\ndelta=" << acfg.delta << "\ntau=" << acfg.tau
            << "\nW=" << acfg.W << '\n';
    try {
        const auto r = analysis::chsh(analysis::correlation_matrix(table, s1.angles, s2.angles));
        summary << "Smax=" << r.smax << "\nS_at_max=" << r.s << "\nargmax_deg=" << r.angles[0] * kDegPerRad << ','
                << r.angles[1] * kDegPerRad << ',' << r.angles[2] * kDegPerRad << ',' << r.angles[3] * kDegPerRad
                << '\n';
    } catch (const DataError&) {
        summary << "Smax=undefined\n";
    }
    out << summary.str();
    if (!cfg.summary.empty()) {
        std::ofstream f(cfg.summary);
        if (!(f << summary.str())) throw std::runtime_error("cannot write " + cfg.summary);
    }
    if (!cfg.out.empty()) {
        emit(cfg, out, "setting-pair statistics",
             {"m1", "m2", "alpha_deg", "beta_deg", "Cpp", "Cpm", "Cmp", "Cmm", "E1", "E2", "E", "rho", "singlet_E"},
             rows);
    }
}

std::vector<double> default_windows(double tau, double T0) {
    std::vector<double> w;
    for (double v = tau; v < 2.0 * T0; v *= 2.0) w.push_back(v);
    return w;
}

void cmd_smax_sweep(RunConfig cfg, std::ostream& out) {
    const auto [s1, s2] = load_or_simulate(cfg);
    const auto acfg = analysis_with_delta(cfg, s1, s2, out);
    if (cfg.windows.empty()) cfg.windows = default_windows(acfg.tau, s1.T0);
    const auto curve = analysis::smax_vs_window(s1, s2, cfg.windows, acfg);
    std::vector<CsvRow> rows;
    for (const auto& p : curve) rows.push_back({p.W, p.smax, double(p.coincidences)});
    emit(cfg, out, "Smax versus coincidence window", {"W", "Smax", "n_coincidences"}, rows);
}

void cmd_histogram(RunConfig cfg, std::ostream& out) {
    const auto [s1, s2] = load_or_simulate(cfg);
    const auto acfg = analysis_with_delta(cfg, s1, s2, out);
    const double width = cfg.bin_width > 0 ? cfg.bin_width : 8.0 * acfg.tau;
    const analysis::HistogramFilter filter{cfg.x_filter, cfg.y_filter, cfg.m1_filter, cfg.m2_filter};
    const auto h = analysis::coincidence_time_histogram(s1, s2, filter, width, acfg);
    if (!h) throw DataError("no coincident pairs pass the histogram filter");
    std::vector<CsvRow> rows;
    for (std::size_t i = 0; i < h->centers.size(); ++i) rows.push_back({h->centers[i], h->normalized[i]});
    emit(cfg, out, "coincidence time-difference histogram", {"bin_center", "normalized_count"}, rows);
    if (!cfg.out.empty()) out << "entries=" << h->entries << " peak=" << h->peak() << '\n';
}

void cmd_oracle(RunConfig cfg, std::ostream& out) {
    std::vector<CsvRow> rows;
    if (!cfg.angles1.empty() && !cfg.angles2.empty()) {
        for (double a : cfg.angles1) {
            for (double b : cfg.angles2) {
                rows.push_back({a, b, quantum::singlet_E(a * kRadPerDeg, b * kRadPerDeg),
                                quantum::bell_triangle_E(a * kRadPerDeg, b * kRadPerDeg)});
            }
        }
        emit(cfg, out, "reference correlations", {"alpha_deg", "beta_deg", "singlet_E", "bell_triangle_E"}, rows);
        return;
    }
    for (double angle = 0.0; angle <= 180.0 + 1e-9; angle += cfg.grid_step) {
        const double r = angle * kRadPerDeg;
        const auto mzi = quantum::mzi_probabilities(r, 0.0);
        rows.push_back({angle, quantum::singlet_E(r, 0.0), quantum::bell_triangle_E(r, 0.0), mzi.first, mzi.second,
                        quantum::bs_intensities(cfg.p0, r, 0.0).first});
    }
    emit(cfg, out, "reference predictions versus angle difference",
         {"angle_deg", "singlet_E", "bell_triangle_E", "mzi_P2", "mzi_P3", "bs_I0"}, rows);
}

void cmd_calibrate(RunConfig cfg, std::ostream& out) {
    const auto exp = cfg.experiment(1000000);
    cfg.N = exp.events;
    const auto result = analysis::calibrate_d(exp, cfg.d_list, cfg.analysis());
    std::vector<CsvRow> rows;
    for (const auto& p : result.points) {
        const auto& a = p.agreement;
        rows.push_back({p.d, double(a.coincidences), double(a.pairs_defined), a.max_abs_dev, a.rms_dev, a.chi2_per_dof,
                        a.max_abs_E1, a.max_abs_E2});
    }
    emit(cfg, out, "delay exponent calibration against the singlet correlation",
         {"d", "coincidences", "pairs_defined", "max_abs_dev", "rms_dev", "chi2_per_dof", "max_abs_E1", "max_abs_E2"},
         rows);
    out << "best_d=" << result.best_d << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event-by-event simulation of beam splitters, interferometers and two-station photon experiments"};
    app.require_subcommand(1);

    std::vector<std::unique_ptr<Flags>> flag_store;
    std::vector<std::pair<CLI::App*, std::function<void(RunConfig, std::ostream&)>>> commands;
    auto command = [&](CLI::App* parent, const std::string& name, const std::string& help,
                       std::function<void(RunConfig, std::ostream&)> fn) {
        CLI::App* cmd = parent->add_subcommand(name, help);
        flag_store.push_back(std::make_unique<Flags>());
        add_flags(cmd, *flag_store.back());
        commands.emplace_back(cmd, std::move(fn));
    };

    command(&app, "bs", "single beam splitter driven by a two-channel source", cmd_bs);
    command(&app, "mzi", "Mach-Zehnder interferometer (phi0 sweep unless sweep=false)", cmd_mzi);
    CLI::App* eprb_cmd = app.add_subcommand("eprb", "two-station experiment");
    eprb_cmd->require_subcommand(1);
    command(eprb_cmd, "generate", "simulate and write both station datasets", cmd_generate);
    command(eprb_cmd, "analyze", "coincidences, correlations and Smax for two datasets", cmd_analyze);
    command(&app, "smax-sweep", "Smax as a function of the coincidence window", cmd_smax_sweep);
    command(&app, "histogram", "coincidence time-difference histogram", cmd_histogram);
    command(&app, "oracle", "closed-form reference tables", cmd_oracle);
    command(&app, "calibrate-d", "sweep the delay exponent against the singlet correlation", cmd_calibrate);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    for (std::size_t i = 0; i < commands.size(); ++i) {
        auto& [cmd, fn] = commands[i];
        if (!cmd->parsed()) continue;
        try {
            fn(resolve(cmd, *flag_store[i]), out);
            return kOk;
        } catch (const ConfigError& e) {
            err << "config error: " << e.what() << '\n';
            return kConfigError;
        } catch (const DataError& e) {
            err << "data error: " << e.what() << '\n';
            return kDataError;
        } catch (const InvalidArgument& e) {
            err << "data error: " << e.what() << '\n';
            return kDataError;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kRuntimeError;
        }
    }
    err << "error: no command given\n";
    return kConfigError;
}

}  // namespace ebsim::cli
