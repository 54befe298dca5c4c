// tplan: build, solve and analyze transition-planning instances.
#include "CLI11.hpp"

#include "tplan/analysis.hpp"
#include "tplan/errors.hpp"
#include "tplan/scenario.hpp"
#include "tplan/weather.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

using namespace tplan;
namespace fs = std::filesystem;

namespace {

std::string pick_out_dir(const RunConfig& cfg, const std::string& flag) {
    if (!flag.empty()) return flag;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* scratch = std::getenv("TPLAN_SCRATCH")) return std::string(scratch) + "/tplan-out";
    return "out";
}

void apply_env_workers(RunConfig& cfg) {
    if (const char* w = std::getenv("TPLAN_WORKERS")) {
        int n = std::atoi(w);
        if (n >= 1) {
            cfg.milp.workers = n;
            cfg.train.workers = n;
            cfg.train.milp.workers = n;
        }
    }
}

RunConfig load_cfg(const std::string& path, const std::string& backend_flag) {
    RunConfig cfg = load_run_config(path);
    if (backend_flag == "mono" || backend_flag == "monolithic")
        cfg.backend = Backend::Monolithic;
    else if (backend_flag == "sddp")
        cfg.backend = Backend::Sddp;
    else if (!backend_flag.empty())
        throw ValidationError("unknown backend '" + backend_flag + "'");
    apply_env_workers(cfg);
    return cfg;
}

int report_violations(const std::string& what, const ValidationReport& rep) {
    for (const auto& v : rep.violations) std::cout << what << "  ERROR  " << v << "\n";
    for (const auto& w : rep.warnings) std::cout << what << "  warn   " << w << "\n";
    return static_cast<int>(rep.violations.size());
}

DaySet load_days(const std::vector<std::string>& columns, const std::vector<std::string>& files) {
    DaySet set;
    set.columns = columns;
    for (std::size_t i = 0; i < files.size(); ++i) {
        DayVector d = load_day(files[i], columns);
        d.day_index = static_cast<int>(i);
        set.days.push_back(std::move(d));
    }
    return set;
}

std::ostream& open_or_stdout(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw ParseError("cannot write " + path);
    return file;
}

int cmd_validate(const std::string& config, const std::string& network, const std::string& catalog,
                 const std::string& horizon, const std::string& scenarios) {
    int bad = 0;
    std::string net_p = network, cat_p = catalog, hor_p = horizon, scen_p = scenarios;
    if (!config.empty()) {
        RunConfig cfg = load_run_config(config);
        if (net_p.empty()) net_p = cfg.network;
        if (cat_p.empty()) cat_p = cfg.catalog;
        if (hor_p.empty()) hor_p = cfg.horizon;
        if (scen_p.empty()) scen_p = cfg.scenarios;
    }
    if (net_p.empty() && cat_p.empty() && hor_p.empty() && scen_p.empty())
        throw ValidationError("nothing to validate; pass --config or individual files");
    if (!net_p.empty()) bad += report_violations("network", validate_network(load_network(net_p)));
    if (!cat_p.empty()) bad += report_violations("catalog", validate_catalog(load_catalog(cat_p)));
    if (!hor_p.empty()) bad += report_violations("horizon", validate_horizon(load_horizon(hor_p)));
    if (!scen_p.empty())
        bad += report_violations("scenarios", validate_chain(load_scenarios(scen_p)));
    if (bad) throw ValidationError(std::to_string(bad) + " validation error(s)");
    std::cout << "all inputs valid\n";
    return 0;
}

int cmd_physics_dtr(const std::string& weather, double sbase, ConductorSpec spec,
                    const std::string& out_path) {
    auto samples = load_weather_grid(weather);
    std::ofstream file;
    std::ostream& os = open_or_stdout(file, out_path);
    os << std::setprecision(10) << "cell,hour,ampacity_a,power_pu,clipped\n";
    for (const auto& s : samples) {
        DtrResult r = compute_dtr(s, spec, sbase);
        os << s.cell_id << ',' << s.hour << ',' << r.ampacity_a << ',' << r.power_pu << ','
           << (r.clipped ? 1 : 0) << "\n";
    }
    return 0;
}

int cmd_physics_vres(const std::string& curve_path, const std::vector<double>& speeds, bool solar,
                     double lat, double lon, int day, double hour, double direct, double diffuse,
                     double efficiency) {
    if (solar) {
        WeatherSample s;
        s.direct_flux = direct;
        s.diffuse_flux = diffuse;
        double elev = sun_elevation_utc(lat, lon, day, hour);
        double cf = compute_solar_cf(s, elev, efficiency);
        std::cout << std::setprecision(10) << "sun_elevation_deg " << elev << "\ncapacity_factor "
                  << cf << "\n";
        return 0;
    }
    if (curve_path.empty()) throw ValidationError("wind mode needs --curve");
    PowerCurve curve = load_power_curve(curve_path);
    std::cout << std::setprecision(10) << "speed,cf\n";
    for (double v : speeds) std::cout << v << ',' << compute_wind_cf(v, curve) << "\n";
    return 0;
}

int cmd_scenarios_cluster(const std::vector<std::string>& columns,
                          const std::vector<std::string>& files, int k, std::uint64_t seed,
                          const std::string& out_path) {
    DaySet set = load_days(columns, files);
    Clustering cl = cluster_days(set, k, seed);
    std::ofstream file;
    std::ostream& os = open_or_stdout(file, out_path);
    os << std::setprecision(10) << "day,file,cluster\n";
    for (std::size_t i = 0; i < files.size(); ++i)
        os << i << ',' << files[i] << ',' << cl.assignment[i] << "\n";
    std::cout << "total_cost " << cl.total_cost << "\n";
    for (std::size_t p = 0; p < cl.profiles.size(); ++p)
        std::cout << "profile " << p << "  medoid_day " << cl.profiles[p].day.day_index
                  << "  weight " << cl.profiles[p].weight << "\n";
    return 0;
}

int cmd_scenarios_validate(const std::string& bundle, const std::vector<std::string>& columns,
                           const std::vector<std::string>& train,
                           const std::vector<std::string>& holdout, int k, std::uint64_t seed) {
    if (!bundle.empty()) {
        int bad = report_violations("scenarios", validate_chain(load_scenarios(bundle)));
        if (bad) throw ValidationError(std::to_string(bad) + " validation error(s)");
        std::cout << "bundle valid\n";
        return 0;
    }
    if (train.empty() || holdout.empty())
        throw ValidationError("need --bundle, or --train and --holdout day files");
    DaySet tr = load_days(columns, train);
    DaySet ho = load_days(columns, holdout);
    Clustering cl = cluster_days(tr, k, seed);
    ClusterAgreement ag = validate_out_of_sample(tr, cl, ho);
    std::cout << std::setprecision(10) << "mi " << ag.mi << "\nnmi " << ag.nmi << "\nami "
              << ag.ami << "\n";
    if (!ag.note.empty()) std::cout << "note " << ag.note << "\n";
    if (!ag.defined) std::cout << "agreement undefined for this split\n";
    return 0;
}

int cmd_scenarios_build_chain(const std::vector<std::string>& columns,
                              const std::vector<std::string>& files, int k, std::uint64_t seed,
                              int stages, const std::vector<double>& load_f,
                              const std::vector<double>& invest_f,
                              const std::vector<double>& climate_f, const std::string& out_bundle) {
    if (stages < 1) throw ValidationError("need at least one stage");
    auto factor = [&](const std::vector<double>& v, int y) {
        if (v.empty()) return 1.0;
        if (static_cast<int>(v.size()) != stages)
            throw ValidationError("factor list must have one value per stage");
        return v[y];
    };
    DaySet set = load_days(columns, files);
    Clustering cl = cluster_days(set, k, seed);
    std::vector<std::vector<MarkovState>> chain_stages;
    for (int y = 0; y < stages; ++y) {
        MarkovState st;
        st.label = "s" + std::to_string(y + 1);
        st.load_factor = factor(load_f, y);
        st.invest_factor = factor(invest_f, y);
        st.climate_factor = factor(climate_f, y);
        // the root stage must stay deterministic; later stages carry the noise
        if (y == 0 && cl.profiles.size() > 1) {
            NoiseProfile flat;
            flat.day = cl.profiles[0].day;
            flat.weight = 1.0;
            flat.name = cl.profiles[0].name;
            st.profiles.push_back(std::move(flat));
        } else {
            st.profiles = cl.profiles;
        }
        chain_stages.push_back({std::move(st)});
    }
    MarkovChain chain = build_markov_chain(std::move(chain_stages), {}, columns);
    fs::path bundle(out_bundle);
    fs::path dir = bundle.parent_path().empty() ? fs::path(".") : bundle.parent_path();
    save_scenarios(chain, out_bundle, (dir / "profiles").string());
    std::cout << "wrote " << out_bundle << " with " << stages << " stage(s), " << cl.profiles.size()
              << " profile(s)\n";
    return 0;
}

int cmd_solve(const std::string& config, const std::string& backend_flag,
              const std::string& out_flag, bool progress) {
    RunConfig cfg = load_cfg(config, backend_flag);
    cfg.train.progress = cfg.train.progress || progress;
    Instance inst = load_instance(cfg);
    PlanReport rep = run(inst, cfg);
    std::string dir = pick_out_dir(cfg, out_flag);
    fs::create_directories(dir);
    write_report_json(rep, (fs::path(dir) / "report.json").string());
    emit_plot_data(rep, dir);
    print_report(rep, std::cout);
    std::cout << "\nartifacts in " << dir << "\n";
    return rep.converged ? 0 : 3;
}

int cmd_analyze_voss(const std::string& config, const std::string& out_flag) {
    RunConfig cfg = load_cfg(config, "");
    Instance inst = load_instance(cfg);
    VossResult vr = compute_voss(inst, cfg.milp);
    std::cout << std::setprecision(10);
    std::cout << "rp   " << vr.rp << "\n";
    std::cout << "ev   " << vr.ev << "\n";
    std::cout << "eev  " << vr.eev << "\n";
    std::cout << "voss " << vr.voss << "\n";
    std::cout << "# expectation taken per stage and hour across states x profiles,\n"
                 "# weighted by marginal state probability times noise weight\n";
    std::string dir = pick_out_dir(cfg, out_flag);
    fs::create_directories(dir);
    std::ofstream out(fs::path(dir) / "voss.json");
    out << "{\n  \"rp\": " << vr.rp << ",\n  \"ev\": " << vr.ev << ",\n  \"eev\": " << vr.eev
        << ",\n  \"voss\": " << vr.voss << "\n}\n";
    return 0;
}

int cmd_analyze_expost(const std::string& config, const std::string& out_flag) {
    RunConfig cfg = load_cfg(config, "");
    Instance inst = load_instance(cfg);
    VossResult vr = compute_voss(inst, cfg.milp);
    auto records = expost_evaluate(inst, vr.delta_ev, cfg.milp);
    std::string dir = pick_out_dir(cfg, out_flag);
    fs::create_directories(dir);
    std::string csv = (fs::path(dir) / "expost.csv").string();
    write_expost_csv(records, csv);
    double mean = 0;
    for (const auto& r : records) mean += r.probability * r.total;
    std::cout << std::setprecision(10) << "plans evaluated over " << records.size()
              << " path(s)\n";
    std::cout << "expected-value plan mean cost " << mean << "\n";
    std::cout << "stochastic plan cost          " << vr.rp << "\n";
    std::cout << "wrote " << csv << "\n";
    return 0;
}

int cmd_analyze_zones(const std::string& config, std::vector<int> sizes, int reps,
                      const std::string& out_flag) {
    RunConfig cfg = load_cfg(config, "");
    Instance inst = load_instance(cfg);
    auto rows = zone_sweep(inst, sizes, reps, cfg.seed);
    std::string dir = pick_out_dir(cfg, out_flag);
    fs::create_directories(dir);
    std::string csv = (fs::path(dir) / "zones.csv").string();
    write_zone_sweep_csv(rows, csv);
    std::cout << std::setprecision(10) << "n_zones  mean_cost  std_cost  mean_wall_s\n";
    for (const auto& r : rows)
        std::cout << r.n_zones << "  " << r.mean_cost << "  " << r.std_cost << "  "
                  << r.mean_wall_s << "\n";
    std::cout << "wrote " << csv << "\n";
    return 0;
}

int cmd_report(const std::string& path) {
    std::string file = path;
    if (fs::is_directory(path)) file = (fs::path(path) / "report.json").string();
    print_report(read_report_json(file), std::cout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transition planning toolkit"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "check input files");
    std::string v_config, v_net, v_cat, v_hor, v_scen;
    validate->add_option("--config", v_config, "run config naming the inputs");
    validate->add_option("--network", v_net);
    validate->add_option("--catalog", v_cat);
    validate->add_option("--horizon", v_hor);
    validate->add_option("--scenarios", v_scen);

    auto* physics = app.add_subcommand("physics", "standalone physics evaluations");
    physics->require_subcommand(1);
    auto* dtr = physics->add_subcommand("dtr", "weather-dependent line ratings");
    std::string d_weather, d_out;
    double d_sbase = 100.0;
    ConductorSpec d_spec;
    dtr->add_option("--weather", d_weather, "weather grid csv")->required();
    dtr->add_option("--sbase", d_sbase, "system base MVA");
    dtr->add_option("--max-temp", d_spec.max_conductor_temp, "conductor limit degC");
    dtr->add_option("--voltage", d_spec.nominal_voltage, "line-to-line kV");
    dtr->add_option("--azimuth", d_spec.line_azimuth, "line azimuth deg");
    dtr->add_option("-o,--out", d_out, "csv destination, default stdout");
    auto* vres = physics->add_subcommand("vres", "wind and solar capacity factors");
    std::string w_curve;
    std::vector<double> w_speeds;
    bool w_solar = false;
    double w_lat = 0, w_lon = 0, w_hour = 12, w_direct = 0, w_diffuse = 0, w_eff = 0.2;
    int w_day = 172;
    vres->add_option("--curve", w_curve, "power curve csv");
    vres->add_option("--speeds", w_speeds, "wind speeds m/s")->delimiter(',');
    vres->add_flag("--solar", w_solar, "evaluate one solar sample");
    vres->add_option("--lat", w_lat);
    vres->add_option("--lon", w_lon);
    vres->add_option("--day", w_day, "day of year");
    vres->add_option("--hour", w_hour, "utc hour");
    vres->add_option("--direct", w_direct, "direct flux W/m2");
    vres->add_option("--diffuse", w_diffuse, "diffuse flux W/m2");
    vres->add_option("--efficiency", w_eff);

    auto* scen = app.add_subcommand("scenarios", "day clustering and chain bundles");
    scen->require_subcommand(1);
    auto* cluster = scen->add_subcommand("cluster", "k-medoids over day files");
    std::vector<std::string> c_cols, c_files;
    int c_k = 3;
    std::uint64_t c_seed = 1;
    std::string c_out;
    cluster->add_option("--columns", c_cols, "column names")->required()->delimiter(',');
    cluster->add_option("-k,--clusters", c_k);
    cluster->add_option("--seed", c_seed);
    cluster->add_option("-o,--out", c_out, "assignment csv, default stdout");
    cluster->add_option("files", c_files, "day csv files")->required();
    auto* sval = scen->add_subcommand("validate", "bundle check or out-of-sample agreement");
    std::string sv_bundle;
    std::vector<std::string> sv_cols, sv_train, sv_holdout;
    int sv_k = 3;
    std::uint64_t sv_seed = 1;
    sval->add_option("--bundle", sv_bundle, "scenario bundle json");
    sval->add_option("--columns", sv_cols)->delimiter(',');
    sval->add_option("--train", sv_train, "training day files");
    sval->add_option("--holdout", sv_holdout, "held-out day files");
    sval->add_option("-k,--clusters", sv_k);
    sval->add_option("--seed", sv_seed);
    auto* build = scen->add_subcommand("build-chain", "cluster days into a stage chain bundle");
    std::vector<std::string> b_cols, b_files;
    std::vector<double> b_lf, b_iv, b_cf;
    int b_k = 3, b_stages = 2;
    std::uint64_t b_seed = 1;
    std::string b_out = "scenarios.json";
    build->add_option("--columns", b_cols)->required()->delimiter(',');
    build->add_option("-k,--clusters", b_k);
    build->add_option("--seed", b_seed);
    build->add_option("--stages", b_stages);
    build->add_option("--load-factors", b_lf)->delimiter(',');
    build->add_option("--invest-factors", b_iv)->delimiter(',');
    build->add_option("--climate-factors", b_cf)->delimiter(',');
    build->add_option("-o,--out", b_out, "bundle destination");
    build->add_option("files", b_files, "day csv files")->required();

    auto* solve = app.add_subcommand("solve", "build and solve a planning instance");
    std::string s_config, s_backend, s_out;
    bool s_progress = false;
    solve->add_option("config", s_config, "run config json")->required();
    solve->add_option("--backend", s_backend, "mono or sddp");
    solve->add_option("--out", s_out, "artifact directory");
    solve->add_flag("--progress", s_progress, "stream solver progress");

    auto* analyze = app.add_subcommand("analyze", "derived studies on an instance");
    analyze->require_subcommand(1);
    auto* voss = analyze->add_subcommand("voss", "value of the stochastic solution");
    std::string av_config, av_out;
    voss->add_option("config", av_config)->required();
    voss->add_option("--out", av_out);
    auto* expost = analyze->add_subcommand("expost", "re-optimize operations under a fixed plan");
    std::string ae_config, ae_out;
    expost->add_option("config", ae_config)->required();
    expost->add_option("--out", ae_out);
    auto* zones = analyze->add_subcommand("zones", "cost versus zone subset size");
    std::string az_config, az_out;
    std::vector<int> az_sizes = {5, 20, 80};
    int az_reps = 10;
    zones->add_option("config", az_config)->required();
    zones->add_option("--sizes", az_sizes)->delimiter(',');
    zones->add_option("--reps", az_reps);
    zones->add_option("--out", az_out);

    auto* report = app.add_subcommand("report", "pretty-print a saved report");
    std::string r_path;
    report->add_option("path", r_path, "report.json or its directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return cmd_validate(v_config, v_net, v_cat, v_hor, v_scen);
        if (*dtr) return cmd_physics_dtr(d_weather, d_sbase, d_spec, d_out);
        if (*vres)
            return cmd_physics_vres(w_curve, w_speeds, w_solar, w_lat, w_lon, w_day, w_hour,
                                    w_direct, w_diffuse, w_eff);
        if (*cluster) return cmd_scenarios_cluster(c_cols, c_files, c_k, c_seed, c_out);
        if (*sval)
            return cmd_scenarios_validate(sv_bundle, sv_cols, sv_train, sv_holdout, sv_k, sv_seed);
        if (*build)
            return cmd_scenarios_build_chain(b_cols, b_files, b_k, b_seed, b_stages, b_lf, b_iv,
                                             b_cf, b_out);
        if (*solve) return cmd_solve(s_config, s_backend, s_out, s_progress);
        if (*voss) return cmd_analyze_voss(av_config, av_out);
        if (*expost) return cmd_analyze_expost(ae_config, ae_out);
        if (*zones) return cmd_analyze_zones(az_config, az_sizes, az_reps, az_out);
        if (*report) return cmd_report(r_path);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SolverLimit& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
