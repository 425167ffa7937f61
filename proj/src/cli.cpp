#include "fracvisco/cli.hpp"

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fracvisco/calib.hpp"
#include "fracvisco/dataio.hpp"
#include "fracvisco/errors.hpp"
#include "fracvisco/l1solver.hpp"
#include "fracvisco/models.hpp"
#include "fracvisco/pso.hpp"

namespace fracvisco::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using models::ModelKind;

namespace {

// ---- output helpers --------------------------------------------------------

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw DataError("cannot open " + tmp.string() + " for writing");
        os << content;
        if (!os.flush()) throw DataError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw DataError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::ostringstream csv_stream() {
    std::ostringstream os;
    os << std::setprecision(17);
    return os;
}

std::string series_csv(const std::string& header, const std::vector<double>& t,
                       const std::vector<const std::vector<double>*>& cols) {
    auto os = csv_stream();
    os << header << "\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        os << t[i];
        for (const auto* c : cols) os << "," << (*c)[i];
        os << "\n";
    }
    return os.str();
}

fs::path prepare_out_dir(const std::string& out) {
    if (out.empty()) throw ConfigError("--out is required");
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + out + ": " + ec.message());
    return dir;
}

// ---- configuration ---------------------------------------------------------

bool is_meta_option(const CLI::Option* opt) {
    const std::string& n = opt->get_single_name();
    return n == "help" || n == "config" || n.empty();
}

std::string scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) {
        std::ostringstream os;
        os << std::setprecision(17) << v.get<double>();
        if (v.is_number_integer()) return v.dump();
        return os.str();
    }
    throw ConfigError("config: unsupported value " + v.dump());
}

/// Fills options that were not given on the command line from a JSON object
/// keyed by long option name. An output JSON of this tool is accepted too:
/// its "config" member is used.
void merge_config(CLI::App& sub, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (j.contains("config") && j["config"].is_object()) j = j["config"];
    if (!j.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");

    std::set<std::string> known{"command"};
    for (CLI::Option* opt : sub.get_options()) {
        if (is_meta_option(opt)) continue;
        const std::string& name = opt->get_single_name();
        known.insert(name);
        if (opt->count() > 0 || !j.contains(name) || j[name].is_null()) continue;
        if (j[name].is_array() && j[name].empty()) continue;
        const json& v = j[name];
        if (v.is_array()) {
            for (const auto& e : v) opt->add_result(scalar_text(e));
        } else if (opt->get_expected_max() == 0) {  // flag
            if (!v.is_boolean()) throw ConfigError("config: '" + name + "' must be true or false");
            if (!v.get<bool>()) continue;
            opt->add_result("true");
        } else {
            opt->add_result(scalar_text(v));
        }
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw ConfigError("config: bad value for '" + name + "': " + e.what());
        }
    }
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw ConfigError("config: unknown key '" + k + "' for " + sub.get_name());
    }
}

json text_value(const std::string& s) {
    try {
        json v = json::parse(s);
        if (v.is_number() || v.is_boolean()) return v;
    } catch (const json::parse_error&) {
    }
    return s;
}

/// Effective configuration: every option with its given or default value.
json effective_config(const CLI::App& sub) {
    json j = json::object();
    j["command"] = sub.get_name();
    for (const CLI::Option* opt : sub.get_options()) {
        if (is_meta_option(opt)) continue;
        const std::string& name = opt->get_single_name();
        const bool flag = opt->get_expected_max() == 0;
        const bool vec = opt->get_expected_max() > 1;
        if (flag) {
            j[name] = opt->count() > 0;
        } else if (opt->count() > 0) {
            const auto& res = opt->results();
            if (vec) {
                json a = json::array();
                for (const auto& r : res) a.push_back(text_value(r));
                j[name] = a;
            } else {
                j[name] = text_value(res.back());
            }
        } else {
            const std::string d = opt->get_default_str();
            if (vec) {
                j[name] = json::array();
            } else {
                j[name] = d.empty() ? json(nullptr) : text_value(d);
            }
        }
    }
    return j;
}

data::CsvMode parse_mode(const std::string& m) {
    if (m == "auto") return data::CsvMode::Auto;
    if (m == "force-area") return data::CsvMode::ForceArea;
    if (m == "stress") return data::CsvMode::Stress;
    throw ConfigError("--mode must be auto, force-area or stress (got '" + m + "')");
}

// ---- subcommand state ------------------------------------------------------

struct InputOpts {
    std::string input;
    std::string mode = "auto";
    std::size_t filter_window = 31;

    void add(CLI::App* app) {
        app->add_option("--input,-i", input, "input CSV (time_s,force_N,area_m2,strain or time_s,stress_Pa,strain)");
        app->add_option("--mode", mode, "CSV layout: auto, force-area or stress");
        app->add_option("--filter-window", filter_window, "centered moving-average width (odd; 1 disables)");
    }

    data::ExperimentRecord load_raw() const {
        if (input.empty()) throw ConfigError("--input is required");
        return data::ingest_csv(fs::path(input), parse_mode(mode));
    }

    data::ExperimentRecord load() const {
        data::ExperimentRecord rec = load_raw();
        if (filter_window > 1) rec = data::filter_record(rec, filter_window);
        return rec;
    }
};

struct SlopeOpts {
    data::ModulusOptions modulus;
    double slope_tol = 0.05;

    void add(CLI::App* app) {
        app->add_option("--t-short", modulus.t_short_max, "upper end of the short-time slope window (s)");
        app->add_option("--t-long", modulus.t_long_min, "lower end of the long-time slope window (s)");
        app->add_option("--onset-skip", modulus.onset_skip, "samples skipped after each onset");
        app->add_option("--min-samples", modulus.min_samples, "minimum samples per slope fit");
        app->add_option("--slope-tol", slope_tol, "slope difference treated as equal");
    }
};

struct PsoOpts {
    std::uint64_t seed = 1;
    std::size_t n_pop = 30;
    std::optional<std::size_t> n_iter;
    std::size_t restarts = 1;
    std::size_t threads = 1;
    double dt = data::kDefaultDataDt;

    void add(CLI::App* app) {
        app->add_option("--seed", seed, "PSO seed (restart r uses seed + r)");
        app->add_option("--n-pop", n_pop, "PSO particles");
        app->add_option("--n-iter", n_iter, "PSO iterations (default 1000 linear, 100 FQLV)");
        app->add_option("--restarts", restarts, "independent PSO runs, best kept");
        app->add_option("--threads", threads, "cost-evaluation threads (0 = all cores)");
        app->add_option("--dt", dt, "solver time step (s)");
    }

    pso::PsoConfig config(ModelKind kind) const {
        pso::PsoConfig c = calib::default_pso(kind);
        c.seed = seed;
        c.n_pop = n_pop;
        if (n_iter) c.n_iter = *n_iter;
        c.threads = threads;
        return c;
    }
};

std::vector<pso::Bounds> bounds_from_flat(const std::vector<double>& flat, ModelKind kind) {
    if (flat.empty()) return calib::default_bounds(kind);
    if (flat.size() != 2 * models::parameter_count(kind)) {
        std::ostringstream os;
        os << "--bounds needs " << 2 * models::parameter_count(kind) << " numbers (lo hi per parameter of "
           << models::to_string(kind) << "), got " << flat.size();
        throw ConfigError(os.str());
    }
    std::vector<pso::Bounds> b;
    for (std::size_t i = 0; i < flat.size(); i += 2) b.push_back({flat[i], flat[i + 1]});
    return b;
}

json output_header(const CLI::App& sub) {
    return {{"config", effective_config(sub)}, {"generated_at", utc_timestamp()}};
}

json protocol_json(const l1::StrainProtocol& p) {
    json steps = json::array();
    for (const auto& s : p.steps) steps.push_back({{"onset_s", s.onset}, {"level", s.level}});
    return {{"steps", steps}, {"ramp_s", p.ramp}};
}

// ---- ingest ----------------------------------------------------------------

void cmd_ingest(const CLI::App& sub, const InputOpts& in, const std::string& out) {
    const fs::path dir = prepare_out_dir(out);
    const data::ExperimentRecord raw = in.load_raw();
    auto os = csv_stream();
    data::write_record_csv(os, raw);
    write_atomic(dir / "record.csv", os.str());
    data::ExperimentRecord filtered = raw;
    if (in.filter_window > 1) filtered = data::filter_record(raw, in.filter_window);
    auto fos = csv_stream();
    data::write_record_csv(fos, filtered);
    write_atomic(dir / "filtered.csv", fos.str());

    json j = output_header(sub);
    j["sample_id"] = raw.sample_id;
    j["samples"] = raw.stress.size();
    j["protocol"] = protocol_json(raw.protocol);
    j["metadata"] = raw.metadata;
    j["filter"] = filtered.metadata.contains("filter") ? filtered.metadata["filter"] : json(nullptr);
    write_json(dir / "ingest.json", j);
}

// ---- analyze ---------------------------------------------------------------

std::string modulus_csv(const data::StepModulus& s) {
    return series_csv("time_s,G_Pa", s.modulus.time, {&s.modulus.value});
}

void cmd_analyze(const CLI::App& sub, const InputOpts& in, const SlopeOpts& so, const std::string& out,
                 std::ostream& err) {
    const fs::path dir = prepare_out_dir(out);
    const data::ExperimentRecord rec = in.load();
    const data::ModulusEstimate est = data::estimate_modulus(rec, so.modulus);
    const data::Recommendation rec_model = data::recommend_model(est, so.slope_tol);
    for (const auto& s : est.per_step) {
        write_atomic(dir / ("modulus_step" + std::to_string(s.step + 1) + ".csv"), modulus_csv(s));
    }
    json j = output_header(sub);
    j["modulus"] = data::to_json(est);
    j["recommendation"] = {{"family", std::string(data::to_string(rec_model.family))},
                           {"rationale", rec_model.rationale}};
    write_json(dir / "slopes.json", j);
    std::string text = "Recommended family: " + std::string(data::to_string(rec_model.family)) + "\n" +
                       rec_model.rationale + "\n";
    write_atomic(dir / "recommendation.txt", text);
    err << text;
}

// ---- simulate --------------------------------------------------------------

struct SimOpts {
    std::string model;
    std::optional<double> E, alpha, E1, alpha1, E2, alpha2, A, B;
    std::vector<double> steps;
    bool five_step_protocol = false;
    double onset = 0.0;
    std::optional<double> hold;
    double ramp = 0.0;
    std::optional<double> duration;
    double dt = data::kDefaultDataDt;
    std::string out;
};

double need(const std::optional<double>& v, const char* flag, const std::string& model) {
    if (!v) throw ConfigError(std::string("--") + flag + " is required for --model " + model);
    return *v;
}

models::ModelParams sim_params(const SimOpts& o) {
    const ModelKind kind = models::parse_model_kind(o.model);
    models::ModelParams p;
    switch (kind) {
        case ModelKind::SB: p = models::SBParams{need(o.E, "E", o.model), need(o.alpha, "alpha", o.model)}; break;
        case ModelKind::FKV:
            p = models::FKVParams{need(o.E1, "E1", o.model), need(o.alpha1, "alpha1", o.model),
                                  need(o.E2, "E2", o.model), need(o.alpha2, "alpha2", o.model)};
            break;
        case ModelKind::FM:
            p = models::FMParams{need(o.E1, "E1", o.model), need(o.alpha1, "alpha1", o.model),
                                 need(o.E2, "E2", o.model), need(o.alpha2, "alpha2", o.model)};
            break;
        case ModelKind::FQLV:
            p = models::FQLVParams{need(o.A, "A", o.model), need(o.B, "B", o.model), need(o.E, "E", o.model),
                                   need(o.alpha, "alpha", o.model)};
            break;
    }
    models::validate(p);
    return p;
}

void cmd_simulate(const CLI::App& sub, const SimOpts& o) {
    if (o.model.empty()) throw ConfigError("--model is required");
    const models::ModelParams params = sim_params(o);
    if (!(o.dt > 0.0)) throw ConfigError("--dt must be > 0");

    l1::StrainProtocol proto;
    double duration = 0.0;
    if (o.five_step_protocol) {
        if (!o.steps.empty()) throw ConfigError("--five-step and --step are mutually exclusive");
        proto = l1::five_step_protocol(o.onset, o.ramp);
        duration = o.duration.value_or(o.onset + l1::five_step_protocol_duration());
    } else {
        if (o.steps.empty()) throw ConfigError("give --step levels or --five-step");
        if (!o.duration) throw ConfigError("--duration is required with --step");
        duration = *o.duration;
        const double hold = o.hold.value_or((duration - o.onset) / static_cast<double>(o.steps.size()));
        if (!(hold > 0.0)) throw ConfigError("--hold must be > 0");
        for (std::size_t i = 0; i < o.steps.size(); ++i) {
            proto.steps.push_back({o.onset + static_cast<double>(i) * hold, o.steps[i]});
        }
        proto.ramp = o.ramp;
    }
    if (!(duration > 0.0)) throw ConfigError("--duration must be > 0");
    proto.validate();

    const fs::path dir = prepare_out_dir(o.out);
    const l1::UniformGrid grid = l1::UniformGrid::covering(0.0, duration, o.dt);
    const data::ExperimentRecord rec = calib::synthesize_record(params, proto, grid);

    const std::string stress = series_csv("time_s,stress_Pa", rec.stress.time, {&rec.stress.value});
    const std::string strain = series_csv("time_s,strain", rec.strain.time, {&rec.strain.value});
    auto ros = csv_stream();
    data::write_record_csv(ros, rec);
    write_atomic(dir / "stress.csv", stress);
    write_atomic(dir / "strain.csv", strain);
    write_atomic(dir / "record.csv", ros.str());

    json j = output_header(sub);
    j["model"] = std::string(models::to_string(models::kind_of(params)));
    j["params"] = models::to_json(params);
    j["grid"] = {{"t0_s", grid.t0}, {"dt_s", grid.dt}, {"n_steps", grid.n_steps}, {"t_end_s", grid.t_end()}};
    j["protocol"] = protocol_json(rec.protocol);
    j["checksum"] = {{"algorithm", "fnv1a64"},
                     {"stress.csv", hex64(fnv1a64(stress))},
                     {"strain.csv", hex64(fnv1a64(strain))}};
    write_json(dir / "meta.json", j);
}

// ---- fit -------------------------------------------------------------------

void cmd_fit(const CLI::App& sub, const InputOpts& in, const PsoOpts& po, const std::string& model,
             const std::vector<double>& bounds, const std::string& out, std::ostream& err) {
    if (model.empty()) throw ConfigError("--model is required");
    const ModelKind kind = models::parse_model_kind(model);
    const fs::path dir = prepare_out_dir(out);
    const data::ExperimentRecord rec = in.load();
    pso::PsoConfig cfg = po.config(kind);
    cfg.bounds = bounds_from_flat(bounds, kind);
    const calib::FitResult r = calib::fit(rec, kind, cfg, {po.dt, po.restarts});

    json j = output_header(sub);
    j["config"]["n-iter"] = cfg.n_iter;
    j["result"] = calib::to_json(r);
    write_json(dir / "fit.json", j);
    write_atomic(dir / "residual.csv",
                 series_csv("time_s,data_Pa,model_Pa,residual_Pa", r.residual.time,
                            {&r.data_stress.value, &r.model_stress.value, &r.residual.value}));
    auto tos = csv_stream();
    pso::write_trace_csv(tos, r.trace);
    write_atomic(dir / "cost_trace.csv", tos.str());
    err << models::to_string(kind) << ": RMSE " << r.rmse_percent << " %, LSE " << r.lse_percent << " %\n";
}

// ---- report ----------------------------------------------------------------

struct ReportFlags {
    std::optional<std::size_t> fqlv_n_iter;
    double tie_margin = 0.25;
    bool no_fqlv = false;
    bool parallel = false;
};

void cmd_report(const CLI::App& sub, const InputOpts& in, const PsoOpts& po, const SlopeOpts& so,
                const ReportFlags& rf, const std::string& out, std::ostream& err) {
    const fs::path dir = prepare_out_dir(out);
    const data::ExperimentRecord rec = in.load();

    calib::ReportOptions ro;
    ro.fit = {po.dt, po.restarts};
    ro.linear_pso = po.config(ModelKind::SB);
    ro.fqlv_pso = po.config(ModelKind::FQLV);
    ro.fqlv_pso.n_iter = rf.fqlv_n_iter.value_or(calib::default_pso(ModelKind::FQLV).n_iter);
    ro.modulus = so.modulus;
    ro.slope_tol = so.slope_tol;
    ro.tie_margin_pp = rf.tie_margin;
    ro.include_fqlv = !rf.no_fqlv;
    ro.parallel = rf.parallel;
    const calib::ExistenceReport rep = calib::existence_report(rec, ro);

    const std::string table = render_table(rep);
    write_atomic(dir / "report.txt", table);
    json j = output_header(sub);
    j["config"]["n-iter"] = ro.linear_pso.n_iter;
    j["config"]["fqlv-n-iter"] = ro.fqlv_pso.n_iter;
    j["sample_id"] = rec.sample_id;
    j["report"] = calib::to_json(rep);
    write_json(dir / "report.json", j);

    // Plot-data bundle: plain CSV series plus an index describing them.
    const fs::path plots = dir / "plots";
    fs::create_directories(plots);
    json index = json::array();
    for (const auto& s : rep.modulus.per_step) {
        std::vector<double> t, g;
        for (std::size_t i = 0; i < s.modulus.size(); ++i) {
            if (s.modulus.time[i] > 0.0 && s.modulus.value[i] > 0.0) {
                t.push_back(s.modulus.time[i]);
                g.push_back(s.modulus.value[i]);
            }
        }
        const std::string name = "modulus_loglog_step" + std::to_string(s.step + 1) + ".csv";
        write_atomic(plots / name, series_csv("time_s,G_Pa", t, {&g}));
        index.push_back({{"file", name}, {"x", "time_s"}, {"y", "G_Pa"}, {"scale", "loglog"},
                         {"strain_level", s.strain_level}});
    }
    write_atomic(plots / "stress_data.csv", series_csv("time_s,stress_Pa", rec.stress.time, {&rec.stress.value}));
    index.push_back({{"file", "stress_data.csv"}, {"x", "time_s"}, {"y", "stress_Pa"}, {"scale", "linear"}});
    std::vector<const calib::ReportRow*> rows;
    for (const auto& r : rep.linear) rows.push_back(&r);
    if (rep.fqlv) rows.push_back(&*rep.fqlv);
    for (const auto* r : rows) {
        if (!r->fit) continue;
        std::string name = "stress_fit_" + std::string(models::to_string(r->kind)) + ".csv";
        for (auto& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        const auto& f = *r->fit;
        write_atomic(plots / name, series_csv("time_s,data_Pa,model_Pa", f.data_stress.time,
                                              {&f.data_stress.value, &f.model_stress.value}));
        index.push_back({{"file", name}, {"x", "time_s"}, {"y", json::array({"data_Pa", "model_Pa"})},
                         {"scale", "linear"}, {"model", std::string(models::to_string(r->kind))}});
    }
    write_json(plots / "index.json", {{"series", index}});
    err << table;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fractional viscoelastic stress-relaxation toolkit", "fracvisco"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    std::string config_path;
    std::string out_dir;
    InputOpts in;
    SlopeOpts so;
    PsoOpts po;
    SimOpts sim;
    ReportFlags rf;
    std::string fit_model;
    std::vector<double> bounds;

    const auto add_common = [&](CLI::App* s, bool with_out) {
        s->add_option("--config", config_path, "JSON file with option values; flags win");
        if (with_out) s->add_option("--out,-o", out_dir, "output directory");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "validate a CSV, infer its protocol, write a normalized record");
    add_common(ingest, true);
    in.add(ingest);

    CLI::App* analyze = app.add_subcommand("analyze", "relaxation moduli, log-log slopes, model-family advice");
    add_common(analyze, true);
    in.add(analyze);
    so.add(analyze);

    CLI::App* simulate = app.add_subcommand("simulate", "forward-solve a model under a step-strain protocol");
    add_common(simulate, true);
    simulate->add_option("--model,-m", sim.model, "sb, fkv, fm or fqlv");
    simulate->add_option("--E", sim.E, "SB pseudo-constant (Pa s^alpha) or FQLV relaxation amplitude");
    simulate->add_option("--alpha", sim.alpha, "SB or FQLV order");
    simulate->add_option("--E1", sim.E1, "first pseudo-constant (Pa s^alpha1)");
    simulate->add_option("--alpha1", sim.alpha1, "first order");
    simulate->add_option("--E2", sim.E2, "second pseudo-constant (Pa s^alpha2)");
    simulate->add_option("--alpha2", sim.alpha2, "second order");
    simulate->add_option("--A", sim.A, "FQLV elastic scale (Pa)");
    simulate->add_option("--B", sim.B, "FQLV elastic exponent");
    simulate->add_option("--step", sim.steps, "cumulative strain level of each step");
    simulate->add_flag("--five-step", sim.five_step_protocol, "0.25/0.5/1/1.5/2 held 30/45/45/45/45 min");
    simulate->add_option("--onset", sim.onset, "first onset (s)");
    simulate->add_option("--hold", sim.hold, "time between onsets (s); default splits the duration evenly");
    simulate->add_option("--ramp", sim.ramp, "loading ramp length (s); at least one step");
    simulate->add_option("--duration", sim.duration, "simulated time span (s)");
    simulate->add_option("--dt", sim.dt, "time step (s)");

    CLI::App* fit = app.add_subcommand("fit", "calibrate one model with particle swarm optimization");
    add_common(fit, true);
    in.add(fit);
    fit->add_option("--model,-m", fit_model, "sb, fkv, fm or fqlv");
    po.add(fit);
    fit->add_option("--bounds", bounds, "search box as lo hi pairs, one per parameter");

    CLI::App* report = app.add_subcommand("report", "existence study: slopes, all fits, ranked table, plot data");
    add_common(report, true);
    in.add(report);
    so.add(report);
    po.add(report);
    report->add_option("--fqlv-n-iter", rf.fqlv_n_iter, "PSO iterations for the FQLV fit (default 100)");
    report->add_option("--tie-margin", rf.tie_margin, "RMSE gap (percentage points) under which fewer parameters win");
    report->add_flag("--no-fqlv", rf.no_fqlv, "skip the nonlinear multi-step fit");
    report->add_flag("--parallel", rf.parallel, "run the fits concurrently");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        if (!config_path.empty()) merge_config(*sub, config_path);
        sim.out = out_dir;
        err << "fracvisco " << sub->get_name() << ": " << effective_config(*sub).dump() << "\n";
        if (sub == ingest) cmd_ingest(*sub, in, out_dir);
        if (sub == analyze) cmd_analyze(*sub, in, so, out_dir, err);
        if (sub == simulate) cmd_simulate(*sub, sim);
        if (sub == fit) cmd_fit(*sub, in, po, fit_model, bounds, out_dir, err);
        if (sub == report) cmd_report(*sub, in, po, so, rf, out_dir, err);
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainError& e) {
        err << "invalid parameters: " << e.what() << "\n";
        return kUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kData;
    } catch (const RangeError& e) {
        err << "data error: " << e.what() << "\n";
        return kData;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return kData;
    } catch (const FitError& e) {
        err << "fit failed: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace fracvisco::cli
