#include "fracvisco/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "fracvisco/errors.hpp"

namespace fracvisco::data {

void TimeSeries::validate() const {
    if (time.size() != value.size()) throw DataError("time series: time and value lengths differ");
    for (std::size_t i = 1; i < time.size(); ++i) {
        if (!(time[i] > time[i - 1])) {
            std::ostringstream os;
            os << "time series: time not strictly increasing at sample " << i << " (t = " << time[i] << " s)";
            throw DataError(os.str());
        }
    }
}

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& cell, const std::string& source, std::size_t line, const std::string& column) {
    double v = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        std::ostringstream os;
        os << source << ":" << line << ": column '" << column << "': not a finite number: '" << cell << "'";
        throw DataError(os.str());
    }
    return v;
}

}  // namespace

ExperimentRecord ingest_csv(const std::filesystem::path& path, CsvMode mode,
                            const std::optional<l1::StrainProtocol>& protocol) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    ExperimentRecord rec = ingest_csv(in, path.string(), mode, protocol);
    rec.sample_id = path.stem().string();
    return rec;
}

ExperimentRecord ingest_csv(std::istream& in, const std::string& source, CsvMode mode,
                            const std::optional<l1::StrainProtocol>& protocol) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (!trim(line).empty()) {
            header = split(line);
            break;
        }
    }
    if (header.empty()) throw DataError(source + ": missing CSV header");

    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    const auto has = [&](const char* name) { return col.count(name) != 0; };

    if (mode == CsvMode::Auto) {
        if (has("stress_Pa")) {
            mode = CsvMode::Stress;
        } else if (has("force_N") || has("area_m2")) {
            mode = CsvMode::ForceArea;
        } else {
            throw DataError(source + ": schema error: header needs 'stress_Pa' or 'force_N,area_m2'");
        }
    }
    std::vector<std::string> required = {"time_s", "strain"};
    if (mode == CsvMode::Stress) {
        required.push_back("stress_Pa");
    } else {
        required.push_back("force_N");
        required.push_back("area_m2");
    }
    for (const auto& name : required) {
        if (!has(name.c_str())) throw DataError(source + ": schema error: missing column '" + name + "'");
    }

    ExperimentRecord rec;
    rec.sample_id = source;
    rec.stress.unit = "Pa";
    rec.strain.unit = "1";
    TimeSeries force{{}, {}, "N"};
    TimeSeries area{{}, {}, "m^2"};

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        const auto get = [&](const char* name) {
            const std::size_t idx = col.at(name);
            if (idx >= cells.size()) {
                std::ostringstream os;
                os << source << ":" << line_no << ": missing value for column '" << name << "'";
                throw DataError(os.str());
            }
            return parse_number(cells[idx], source, line_no, name);
        };
        const double t = get("time_s");
        if (!rec.stress.time.empty() && !(t > rec.stress.time.back())) {
            std::ostringstream os;
            os << source << ":" << line_no << ": time not strictly increasing (" << t << " s after "
               << rec.stress.time.back() << " s)";
            throw DataError(os.str());
        }
        double sigma = 0.0;
        if (mode == CsvMode::Stress) {
            sigma = get("stress_Pa");
        } else {
            const double f = get("force_N");
            const double a = get("area_m2");
            if (!(a > 0.0)) {
                std::ostringstream os;
                os << source << ":" << line_no << ": nonpositive area " << a << " m^2";
                throw DataError(os.str());
            }
            force.time.push_back(t);
            force.value.push_back(f);
            area.time.push_back(t);
            area.value.push_back(a);
            sigma = f / a;
        }
        rec.stress.time.push_back(t);
        rec.stress.value.push_back(sigma);
        rec.strain.time.push_back(t);
        rec.strain.value.push_back(get("strain"));
    }
    if (rec.stress.empty()) throw DataError(source + ": no data rows");
    if (mode == CsvMode::ForceArea) {
        rec.force = std::move(force);
        rec.area = std::move(area);
    }
    rec.protocol = protocol ? *protocol : infer_protocol(rec.strain);
    rec.metadata["source"] = source;
    rec.metadata["mode"] = mode == CsvMode::Stress ? "stress" : "force_area";
    rec.metadata["rows"] = rec.stress.size();
    rec.metadata["protocol_source"] = protocol ? "supplied" : "inferred";
    return rec;
}

void write_record_csv(std::ostream& os, const ExperimentRecord& rec) {
    os << "time_s,stress_Pa,strain\n" << std::setprecision(17);
    for (std::size_t i = 0; i < rec.stress.size(); ++i) {
        os << rec.stress.time[i] << ',' << rec.stress.value[i] << ',' << rec.strain.value[i] << '\n';
    }
}

l1::StrainProtocol infer_protocol(const TimeSeries& strain, double threshold) {
    strain.validate();
    if (strain.empty()) throw DataError("infer_protocol: empty strain series");
    const auto& e = strain.value;
    const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
    if (threshold <= 0.0) threshold = std::max(1e-6, 0.02 * (*hi - *lo));

    l1::StrainProtocol proto;
    double held = 0.0;
    double max_ramp = 0.0;
    std::size_t i = 1;
    while (i < e.size()) {
        if (e[i] - held > threshold) {
            const std::size_t onset = i - 1;
            std::size_t j = i;
            while (j + 1 < e.size() && e[j + 1] - e[j] > 0.05 * threshold) ++j;
            proto.steps.push_back({strain.time[onset], e[j]});
            max_ramp = std::max(max_ramp, strain.time[j] - strain.time[onset]);
            held = e[j];
            i = j + 1;
        } else {
            ++i;
        }
    }
    if (proto.steps.empty()) throw DataError("infer_protocol: no strain step found");
    proto.ramp = max_ramp;
    return proto;
}

std::size_t centered_window(std::size_t neighbors) { return neighbors % 2 == 0 ? neighbors + 1 : neighbors; }

TimeSeries moving_average(const TimeSeries& series, std::size_t window) {
    if (window < 1) throw ConfigError("moving_average: window must be >= 1");
    if (window % 2 == 0) throw ConfigError("moving_average: window must be odd for a centered filter");
    series.validate();
    const std::size_t n = series.size();
    const std::size_t half = window / 2;
    TimeSeries out{series.time, std::vector<double>(n), series.unit};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t h = std::min({half, i, n - 1 - i});
        double sum = 0.0;
        for (std::size_t k = i - h; k <= i + h; ++k) sum += series.value[k];
        out.value[i] = sum / static_cast<double>(2 * h + 1);
    }
    return out;
}

ExperimentRecord filter_record(const ExperimentRecord& rec, std::size_t window) {
    ExperimentRecord out = rec;
    out.stress = moving_average(rec.stress, window);
    out.strain = moving_average(rec.strain, window);
    if (rec.force) out.force = moving_average(*rec.force, window);
    if (rec.area) out.area = moving_average(*rec.area, window);
    out.metadata["filter"] = {{"kind", "moving_average"},
                              {"window", window},
                              {"centered", true},
                              {"edges", "truncated_symmetric"}};
    return out;
}

SlopeFit loglog_slope(std::span<const double> t, std::span<const double> v, std::size_t min_samples) {
    SlopeFit fit;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.size() && i < v.size(); ++i) {
        if (t[i] > 0.0 && v[i] > 0.0) {
            x.push_back(std::log(t[i]));
            y.push_back(std::log(v[i]));
        }
    }
    fit.samples = x.size();
    if (x.size() < std::max<std::size_t>(min_samples, 2)) return fit;
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) return fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ssr += r * r;
    }
    fit.std_error = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
    fit.available = std::isfinite(fit.slope);
    return fit;
}

ModulusEstimate estimate_modulus(const ExperimentRecord& rec, const ModulusOptions& opts) {
    if (rec.protocol.steps.empty()) throw DataError("estimate_modulus: record has no protocol steps");
    if (rec.stress.empty()) throw DataError("estimate_modulus: record has no stress samples");
    rec.stress.validate();

    ModulusEstimate est;
    est.options = opts;
    if (rec.metadata.contains("filter")) est.filter = rec.metadata.at("filter");

    const auto& t = rec.stress.time;
    const auto& steps = rec.protocol.steps;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const double level = steps[i].level;
        if (!(level > 0.0)) {
            std::ostringstream os;
            os << "estimate_modulus: step " << i << " has nonpositive strain level " << level;
            throw DataError(os.str());
        }
        const double t_begin = steps[i].onset;
        const double t_end = i + 1 < steps.size() ? steps[i + 1].onset : std::numeric_limits<double>::infinity();
        const auto first = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), t_begin) - t.begin());
        const auto last = static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), t_end) - t.begin());
        StepModulus sm;
        sm.step = i;
        sm.strain_level = level;
        sm.modulus.unit = "Pa";
        if (first >= last) {
            est.per_step.push_back(std::move(sm));
            continue;
        }
        sm.onset = t[first];
        for (std::size_t k = first; k < last; ++k) {
            sm.modulus.time.push_back(t[k] - t[first]);
            sm.modulus.value.push_back(rec.stress.value[k] / level);
        }
        std::vector<double> ts, gs, tl, gl;
        for (std::size_t k = opts.onset_skip; k < sm.modulus.size(); ++k) {
            const double tk = sm.modulus.time[k];
            if (tk <= opts.t_short_max) {
                ts.push_back(tk);
                gs.push_back(sm.modulus.value[k]);
            }
            if (tk >= opts.t_long_min) {
                tl.push_back(tk);
                gl.push_back(sm.modulus.value[k]);
            }
        }
        sm.beta1 = loglog_slope(ts, gs, opts.min_samples);
        sm.beta2 = loglog_slope(tl, gl, opts.min_samples);
        est.per_step.push_back(std::move(sm));
    }
    est.beta1 = est.per_step.front().beta1;
    est.beta2 = est.per_step.front().beta2;
    return est;
}

namespace {

nlohmann::json slope_json(const SlopeFit& s) {
    if (!s.available) return {{"available", false}, {"samples", s.samples}};
    return {{"available", true},
            {"slope", s.slope},
            {"std_error", s.std_error},
            {"intercept", s.intercept},
            {"samples", s.samples}};
}

}  // namespace

nlohmann::json to_json(const TimeSeries& s) {
    return {{"time_s", s.time}, {"value", s.value}, {"unit", s.unit}};
}

nlohmann::json to_json(const ModulusEstimate& est) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : est.per_step) {
        steps.push_back({{"step", s.step},
                         {"strain_level", s.strain_level},
                         {"onset_s", s.onset},
                         {"time_s", s.modulus.time},
                         {"G_Pa", s.modulus.value},
                         {"beta1", slope_json(s.beta1)},
                         {"beta2", slope_json(s.beta2)}});
    }
    return {{"beta1", slope_json(est.beta1)},
            {"beta2", slope_json(est.beta2)},
            {"windows",
             {{"t_short_max_s", est.options.t_short_max},
              {"t_long_min_s", est.options.t_long_min},
              {"onset_skip", est.options.onset_skip},
              {"min_samples", est.options.min_samples}}},
            {"filter", est.filter},
            {"per_step", steps}};
}

namespace {

double interp(std::span<const double> t, std::span<const double> v, double x) {
    if (x <= t.front()) return v.front();
    if (x >= t.back()) return v.back();
    const auto it = std::upper_bound(t.begin(), t.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    const double t0 = t[k - 1], t1 = t[k];
    if (x == t0) return v[k - 1];
    const double w = (x - t0) / (t1 - t0);
    return v[k - 1] + w * (v[k] - v[k - 1]);
}

}  // namespace

l1::GridSeries resample_to_grid(const TimeSeries& series, const l1::UniformGrid& grid, Extrapolation extrap) {
    series.validate();
    if (series.size() < 2) throw DataError("resample: need at least two samples");
    const double tol = 1e-9 * grid.dt;
    if (grid.t0 < series.time.front() - tol) throw RangeError("resample: grid starts before the data");
    if (extrap == Extrapolation::Error && grid.t_end() > series.time.back() + tol) {
        std::ostringstream os;
        os << "resample: grid end " << grid.t_end() << " s lies beyond the data end " << series.time.back() << " s";
        throw RangeError(os.str());
    }
    std::vector<double> v(grid.nodes());
    for (std::size_t n = 0; n < v.size(); ++n) v[n] = interp(series.time, series.value, grid.time(n));
    return l1::GridSeries(grid, std::move(v));
}

l1::GridSeries resample_to_uniform(const TimeSeries& series, double dt, Extrapolation extrap) {
    series.validate();
    if (series.size() < 2) throw DataError("resample: need at least two samples");
    if (!(dt > 0.0)) throw ConfigError("resample: dt must be > 0");
    const double t0 = series.time.front();
    const double span = series.time.back() - t0;
    l1::UniformGrid grid;
    if (extrap == Extrapolation::HoldLast) {
        grid = l1::UniformGrid::covering(t0, series.time.back(), dt);
    } else {
        const auto n = static_cast<std::size_t>(std::floor(span / dt + 1e-9));
        if (n < 1) throw RangeError("resample: data span shorter than one step");
        grid = l1::UniformGrid(t0, dt, n);
    }
    return resample_to_grid(series, grid, extrap);
}

TimeSeries resample_to_nonuniform(const l1::GridSeries& series, std::span<const double> times) {
    const auto& g = series.grid;
    const double tol = 1e-9 * g.dt;
    TimeSeries out;
    out.time.assign(times.begin(), times.end());
    out.value.resize(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double x = times[i];
        if (x < g.t0 - tol || x > g.t_end() + tol) {
            std::ostringstream os;
            os << "resample: time " << x << " s outside the grid [" << g.t0 << ", " << g.t_end() << "] s";
            throw RangeError(os.str());
        }
        const double pos = std::clamp((x - g.t0) / g.dt, 0.0, static_cast<double>(g.n_steps));
        auto k = static_cast<std::size_t>(std::floor(pos));
        if (k >= g.n_steps) k = g.n_steps - 1;
        const double w = pos - static_cast<double>(k);
        out.value[i] = w == 0.0 ? series.values[k]
                                : (w == 1.0 ? series.values[k + 1]
                                            : series.values[k] + w * (series.values[k + 1] - series.values[k]));
    }
    return out;
}

std::string_view to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::SB: return "SB";
        case ModelFamily::FMFamily: return "FM-family";
        case ModelFamily::FKVFamily: return "FKV-family";
        case ModelFamily::InsufficientData: return "insufficient data";
    }
    return "?";
}

Recommendation recommend_model(const SlopeFit& beta1, const SlopeFit& beta2, double tol) {
    Recommendation r;
    r.beta1 = beta1;
    r.beta2 = beta2;
    std::ostringstream os;
    os << std::setprecision(4);
    if (!beta1.available || !beta2.available) {
        r.family = ModelFamily::InsufficientData;
        os << "insufficient data: " << (beta1.available ? "" : "short-time slope unavailable; ")
           << (beta2.available ? "" : "long-time slope unavailable");
        r.rationale = os.str();
        return r;
    }
    const double m1 = std::abs(beta1.slope);
    const double m2 = std::abs(beta2.slope);
    os << "beta1 = " << beta1.slope << " (se " << beta1.std_error << "), beta2 = " << beta2.slope << " (se "
       << beta2.std_error << "); ";
    if (std::abs(beta1.slope - beta2.slope) <= tol) {
        r.family = ModelFamily::SB;
        os << "|beta1 - beta2| <= " << tol << ": single scale-free power law";
    } else if (m1 < m2) {
        r.family = ModelFamily::FMFamily;
        os << "|beta1| < |beta2|: slower-to-faster relaxation";
    } else {
        r.family = ModelFamily::FKVFamily;
        os << "|beta1| > |beta2|: faster-to-slower relaxation";
    }
    r.rationale = os.str();
    return r;
}

Recommendation recommend_model(const ModulusEstimate& est, double tol) {
    return recommend_model(est.beta1, est.beta2, tol);
}

}  // namespace fracvisco::data
