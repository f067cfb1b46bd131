#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gaze_events/io.hpp"
#include "gaze_events/simulate.hpp"
#include "gaze_events/tune.hpp"

namespace gaze::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// stable exit-code contract for scripting
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace fs = std::filesystem;

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline unsigned default_workers() {
    if (const char* env = std::getenv("GAZE_EVENTS_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

inline std::string session_id(const std::string& prefix, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%04zu", prefix.c_str(), index);
    return buf;
}

/// Session stems in an input directory: every "<stem>.csv" that has a
/// "<stem>.protocol.json" next to it, sorted by name.
inline std::vector<std::string> discover_sessions(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const fs::path p = entry.path();
        if (p.extension() != ".csv") continue;
        const std::string stem = p.stem().string();
        if (stem.ends_with(".truth") || stem.ends_with(".labels") || stem.ends_with(".fixations"))
            continue;
        if (fs::exists(dir / (stem + ".protocol.json"))) stems.push_back(stem);
    }
    std::sort(stems.begin(), stems.end());
    if (stems.empty()) throw DataError("no session files (<stem>.csv + <stem>.protocol.json) in " +
                                       dir.string());
    return stems;
}

inline StimulusProtocol load_protocol(const fs::path& path) {
    return protocol_from_json(nlohmann::json::parse(io::read_text_file(path)));
}

inline SessionBundle load_bundle(const fs::path& dir, const std::string& stem,
                                 const PreprocessOptions& opt) {
    SessionBundle b;
    b.id = stem;
    b.protocol = load_protocol(dir / (stem + ".protocol.json"));
    auto samples = parse_session_samples(io::read_text_file(dir / (stem + ".csv")));
    b.session = preprocess(std::move(samples), b.protocol.scene, opt);
    b.session.protocol_id = stem;
    b.session.task_kind = b.protocol.task_kind;
    return b;
}

struct CommonOptions {
    bool paper_constant{false};
    bool fqns_full_duration{false};
    std::string merge_mode{"centroid"};
    unsigned workers{0};

    PreprocessOptions preprocess() const { return {VelocityOptions{paper_constant}}; }
    MetricOptions metrics() const {
        MetricOptions m;
        m.fqns_clip_to_window = !fqns_full_duration;
        return m;
    }
    ClassifyOptions classify() const {
        if (merge_mode == "centroid") return {MergeMode::Centroid};
        if (merge_mode == "boundary") return {MergeMode::Boundary};
        throw UsageError("unknown merge mode '" + merge_mode + "'");
    }
    unsigned worker_count() const { return workers ? workers : default_workers(); }
};

template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto body = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, n); ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
}

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

} // namespace detail

// --- simulate ----------------------------------------------------------------

struct SimulateArgs {
    std::string task{"single"};
    std::size_t sessions{100};
    std::uint64_t seed{1};
    std::size_t targets{20};
    double dwell_ms{1500.0};
    double sphere_radius{0.05};
    double room_far_z{4.9};
    std::string prefix{"s"};
    SimulationConfig sim;
    detail::CommonOptions common;
    fs::path out_dir;
};

inline void cmd_simulate(const SimulateArgs& args) {
    if (args.task != "single" && args.task != "multi")
        throw UsageError("--task must be single or multi");
    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    if (ec || !fs::is_directory(args.out_dir))
        throw DataError("cannot create output directory " + args.out_dir.string());

    // independent seeded streams per session, so generation parallelizes
    std::vector<std::string> errors(args.sessions);
    detail::parallel_for(args.sessions, args.common.worker_count(), [&](std::size_t i) {
        try {
            ProtocolOptions popt;
            popt.task_kind =
                args.task == "single" ? TaskKind::SingleTarget : TaskKind::MultiTarget;
            popt.seed = args.seed + 2 * i;
            popt.n_targets = args.targets;
            popt.dwell_ms = args.dwell_ms;
            popt.sphere_radius = args.sphere_radius;
            popt.room.room_max.z = args.room_far_z;
            const StimulusProtocol protocol = generate_protocol(popt);

            SimulationConfig sim = args.sim;
            sim.seed = args.seed + 2 * i + 1;
            const SimulatedSession sess = simulate_session(protocol, sim);

            const std::string id = detail::session_id(args.prefix, i);
            std::ostringstream csv_out;
            write_session_csv(csv_out, sess.samples);
            io::write_text_file(args.out_dir / (id + ".csv"), csv_out.str());
            std::ostringstream truth_out;
            io::write_truth_csv(truth_out, sess.truth);
            io::write_text_file(args.out_dir / (id + ".truth.csv"), truth_out.str());
            io::write_text_file(args.out_dir / (id + ".protocol.json"),
                                to_json(protocol).dump(2) + "\n");
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < args.sessions; ++i)
        if (!errors[i].empty())
            throw DataError("session " + detail::session_id(args.prefix, i) + ": " + errors[i]);

    nlohmann::json config;
    config["task"] = args.task;
    config["sessions"] = args.sessions;
    config["seed"] = args.seed;
    config["targets"] = args.targets;
    config["dwell_ms"] = args.dwell_ms;
    config["sphere_radius"] = args.sphere_radius;
    config["room_far_z"] = args.room_far_z;
    config["prefix"] = args.prefix;
    config["sample_rate_hz"] = args.sim.sample_rate_hz;
    config["rate_jitter"] = args.sim.rate_jitter;
    config["angular_noise_sigma_deg"] = args.sim.angular_noise_sigma_deg;
    config["noise_correlation"] = args.sim.noise_correlation;
    config["saccadic_latency_ms"] = args.sim.saccadic_latency_ms;
    config["blink_rate_per_min"] = args.sim.blink_rate_per_min;
    config["blink_duration_ms"] = args.sim.blink_duration_ms;
    config["far_miss_rate"] = args.sim.far_miss_rate;
    nlohmann::json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["command"] = "simulate";
    manifest["seed"] = args.seed;
    manifest["config"] = config;
    manifest["config_hash"] = detail::hex64(detail::fnv1a(config.dump()));
    io::write_text_file(args.out_dir / ("manifest_" + args.prefix + ".json"),
                        manifest.dump(2) + "\n");
}

// --- classify ----------------------------------------------------------------

struct ClassifyArgs {
    std::string algo;
    std::optional<double> velocity, duration, dispersion, z_threshold;
    std::string preset; // "paper-optimal" or empty
    detail::CommonOptions common;
    fs::path in_dir, out_dir;
};

inline ClassifierParams resolve_params(const ClassifyArgs& args, Algorithm algo) {
    ClassifierParams p = paper_optimal_params(algo);
    if (args.z_threshold) {
        if (algo != Algorithm::MIVDT)
            throw UsageError("--z-threshold is not applicable to " + args.algo);
        p.z_outlier_threshold = *args.z_threshold;
    }
    if (args.preset.empty()) {
        if (uses_velocity(algo) && !args.velocity)
            throw UsageError("--velocity required for " + args.algo + " (or use --preset)");
        if (uses_dispersion(algo) && !args.dispersion)
            throw UsageError("--dispersion required for " + args.algo + " (or use --preset)");
        if (uses_duration(algo) && !args.duration)
            throw UsageError("--duration required for " + args.algo + " (or use --preset)");
    }
    if (args.velocity) {
        if (!uses_velocity(algo)) throw UsageError("--velocity is not applicable to " + args.algo);
        p.velocity_threshold = *args.velocity;
    }
    if (args.dispersion) {
        if (!uses_dispersion(algo))
            throw UsageError("--dispersion is not applicable to " + args.algo);
        p.dispersion_threshold = *args.dispersion;
    }
    if (args.duration) {
        if (!uses_duration(algo)) throw UsageError("--duration is not applicable to " + args.algo);
        p.min_fixation_duration = *args.duration;
    }
    return p;
}

inline void cmd_classify(const ClassifyArgs& args) {
    Algorithm algo;
    try {
        algo = algorithm_from_string(args.algo);
    } catch (const ContractError& e) {
        throw UsageError(e.what());
    }
    const ClassifierParams params = resolve_params(args, algo);
    const auto stems = detail::discover_sessions(args.in_dir);
    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    if (ec || !fs::is_directory(args.out_dir))
        throw DataError("cannot create output directory " + args.out_dir.string());

    std::vector<std::string> errors(stems.size());
    detail::parallel_for(stems.size(), args.common.worker_count(), [&](std::size_t i) {
        try {
            const SessionBundle b =
                detail::load_bundle(args.in_dir, stems[i], args.common.preprocess());
            const LabeledStream stream =
                classify(algo, b.session.points, params, args.common.classify());
            std::ostringstream fix_out, label_out;
            io::write_fixations_csv(fix_out, stream.fixations);
            io::write_labels_csv(label_out, stream.labels);
            const std::string base = stems[i] + "." + to_string(algo);
            io::write_text_file(args.out_dir / (base + ".fixations.csv"), fix_out.str());
            io::write_text_file(args.out_dir / (base + ".labels.csv"), label_out.str());
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < stems.size(); ++i)
        if (!errors[i].empty())
            throw DataError("session " + stems[i] + ": " + errors[i]);
}

// --- evaluate / compare -------------------------------------------------------

struct EvaluateArgs {
    std::string format{"json"};
    detail::CommonOptions common;
    fs::path sessions_dir, labels_dir, out_dir;
};

struct EvaluatedRow {
    std::string session_id;
    Algorithm algo{Algorithm::IVT};
    TaskKind task{TaskKind::SingleTarget};
    MetricReport report;
};

struct EvaluateResult {
    std::vector<EvaluatedRow> rows;
    NormalizationBounds bounds;
    std::string run_id; // hash of the scored (session, algorithm) population
};

/// Evaluate every <stem>.<algo>.labels.csv found for the corpus; the
/// normalization population is everything scored in this invocation.
inline EvaluateResult evaluate_rows(const fs::path& sessions_dir, const fs::path& labels_dir,
                                    const detail::CommonOptions& common) {
    const auto stems = detail::discover_sessions(sessions_dir);
    std::vector<EvaluatedRow> rows;
    std::mutex mu;
    std::vector<std::string> errors(stems.size());
    detail::parallel_for(stems.size(), common.worker_count(), [&](std::size_t i) {
        try {
            std::vector<EvaluatedRow> local;
            SessionBundle b;
            bool loaded = false;
            for (Algorithm algo : {Algorithm::IVT, Algorithm::IDT, Algorithm::IVDT,
                                   Algorithm::MIVDT}) {
                const fs::path labels_path =
                    labels_dir / (stems[i] + "." + to_string(algo) + ".labels.csv");
                const fs::path fix_path =
                    labels_dir / (stems[i] + "." + to_string(algo) + ".fixations.csv");
                if (!fs::exists(labels_path) || !fs::exists(fix_path)) continue;
                if (!loaded) {
                    b = detail::load_bundle(sessions_dir, stems[i], common.preprocess());
                    loaded = true;
                }
                std::istringstream lin(io::read_text_file(labels_path));
                std::istringstream fin(io::read_text_file(fix_path));
                LabeledStream stream;
                stream.labels = io::read_labels_csv(lin);
                stream.fixations = io::read_fixations_csv(fin);
                if (stream.labels.size() != b.session.points.size())
                    throw AlignmentError("label count does not match session " + stems[i]);
                EvaluatedRow row;
                row.session_id = stems[i];
                row.algo = algo;
                row.task = b.protocol.task_kind;
                row.report =
                    compute_metrics(stream, b.session.points, b.protocol, common.metrics());
                local.push_back(row);
            }
            std::lock_guard<std::mutex> lock(mu);
            rows.insert(rows.end(), local.begin(), local.end());
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < stems.size(); ++i)
        if (!errors[i].empty()) throw DataError("session " + stems[i] + ": " + errors[i]);
    if (rows.empty()) throw DataError("no classification outputs found in " + labels_dir.string());
    // deterministic order independent of thread scheduling
    std::sort(rows.begin(), rows.end(), [](const EvaluatedRow& a, const EvaluatedRow& b) {
        return std::make_pair(a.session_id, to_string(a.algo)) <
               std::make_pair(b.session_id, to_string(b.algo));
    });
    std::vector<MetricReport> population;
    std::string population_key;
    for (const auto& r : rows) {
        population.push_back(r.report);
        population_key += r.session_id + "." + to_string(r.algo) + ";";
    }
    EvaluateResult out;
    out.rows = rows;
    out.bounds = normalization_bounds(population);
    out.run_id = detail::hex64(detail::fnv1a(population_key));
    for (auto& r : out.rows) apply_normalization(r.report, out.bounds);
    return out;
}

inline std::string aggregate_csv(const std::vector<EvaluatedRow>& rows) {
    std::ostringstream out;
    out << "algorithm,metric,mean_raw,std_raw,mean_dev,std_dev,mean_norm,std_norm\n";
    for (Algorithm algo : {Algorithm::IVT, Algorithm::IDT, Algorithm::IVDT, Algorithm::MIVDT}) {
        std::vector<const EvaluatedRow*> rs;
        for (const auto& r : rows)
            if (r.algo == algo) rs.push_back(&r);
        if (rs.empty()) continue;
        for (std::size_t m = 0; m < kMetricCount; ++m) {
            std::vector<double> raw, dev, nrm;
            for (const auto* r : rs) {
                raw.push_back(r->report.raw[m]);
                dev.push_back(r->report.deviations[m]);
                nrm.push_back(r->report.normalized[m]);
            }
            out << to_string(algo) << ',' << kMetricNames[m] << ','
                << csv::fmt(detail::mean_of(raw)) << ',' << csv::fmt(detail::std_of(raw)) << ','
                << csv::fmt(detail::mean_of(dev)) << ',' << csv::fmt(detail::std_of(dev)) << ','
                << csv::fmt(detail::mean_of(nrm)) << ',' << csv::fmt(detail::std_of(nrm)) << '\n';
        }
        std::vector<double> overall;
        for (const auto* r : rs) overall.push_back(r->report.overall);
        out << to_string(algo) << ",overall,,,,," << csv::fmt(detail::mean_of(overall)) << ','
            << csv::fmt(detail::std_of(overall)) << '\n';
    }
    return out.str();
}

inline std::string plot_series_csv(const std::vector<EvaluatedRow>& rows) {
    std::ostringstream out;
    out << "metric,algorithm,task,session_id,raw,deviation,normalized\n";
    for (const auto& r : rows) {
        for (std::size_t m = 0; m < kMetricCount; ++m)
            out << kMetricNames[m] << ',' << to_string(r.algo) << ','
                << (r.task == TaskKind::SingleTarget ? "single" : "multi") << ',' << r.session_id
                << ',' << csv::fmt(r.report.raw[m]) << ',' << csv::fmt(r.report.deviations[m])
                << ',' << csv::fmt(r.report.normalized[m]) << '\n';
        out << "overall," << to_string(r.algo) << ','
            << (r.task == TaskKind::SingleTarget ? "single" : "multi") << ',' << r.session_id
            << ",,," << csv::fmt(r.report.overall) << '\n';
    }
    return out.str();
}

inline void cmd_evaluate(const EvaluateArgs& args) {
    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    if (ec || !fs::is_directory(args.out_dir))
        throw DataError("cannot create output directory " + args.out_dir.string());
    const EvaluateResult result = evaluate_rows(args.sessions_dir, args.labels_dir, args.common);
    const auto& rows = result.rows;
    for (const auto& r : rows) {
        const std::string base = r.session_id + "." + to_string(r.algo) + ".report";
        if (args.format == "json") {
            io::write_text_file(
                args.out_dir / (base + ".json"),
                io::report_to_json(r.report, result.bounds, result.run_id).dump(2) + "\n");
        } else {
            std::ostringstream out;
            out << "metric,raw,ideal,deviation,normalized\n";
            const std::array<double, kMetricCount> ideals = {
                r.report.ideals.fqns_pct, r.report.ideals.fqls_m, r.report.ideals.afn,
                r.report.ideals.afd_ms,   r.report.ideals.ans,    r.report.ideals.asa_deg,
                r.report.ideals.sqns_pct};
            for (std::size_t m = 0; m < kMetricCount; ++m)
                out << kMetricNames[m] << ',' << csv::fmt(r.report.raw[m]) << ','
                    << csv::fmt(ideals[m]) << ',' << csv::fmt(r.report.deviations[m]) << ','
                    << csv::fmt(r.report.normalized[m]) << '\n';
            out << "overall,,,," << csv::fmt(r.report.overall) << '\n';
            io::write_text_file(args.out_dir / (base + ".csv"), out.str());
        }
    }
    io::write_text_file(args.out_dir / "aggregate.csv", aggregate_csv(rows));
    io::write_text_file(args.out_dir / "plot_series.csv", plot_series_csv(rows));
}

struct CompareArgs {
    detail::CommonOptions common;
    fs::path sessions_dir, out_dir;
};

/// Classify every session with all four paper-optimal presets, score them
/// against one shared normalization population, and emit the algorithm-by-
/// metric and task-by-metric tables.
inline void cmd_compare(const CompareArgs& args) {
    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    if (ec || !fs::is_directory(args.out_dir))
        throw DataError("cannot create output directory " + args.out_dir.string());
    const auto stems = detail::discover_sessions(args.sessions_dir);

    std::vector<std::vector<EvaluatedRow>> per_session(stems.size());
    std::vector<std::string> errors(stems.size());
    detail::parallel_for(stems.size(), args.common.worker_count(), [&](std::size_t i) {
        try {
            const SessionBundle b =
                detail::load_bundle(args.sessions_dir, stems[i], args.common.preprocess());
            for (Algorithm algo : {Algorithm::IVT, Algorithm::IDT, Algorithm::IVDT,
                                   Algorithm::MIVDT}) {
                const LabeledStream stream = classify(
                    algo, b.session.points, paper_optimal_params(algo), args.common.classify());
                EvaluatedRow row;
                row.session_id = stems[i];
                row.algo = algo;
                row.task = b.protocol.task_kind;
                row.report =
                    compute_metrics(stream, b.session.points, b.protocol, args.common.metrics());
                per_session[i].push_back(row);
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < stems.size(); ++i)
        if (!errors[i].empty()) throw DataError("session " + stems[i] + ": " + errors[i]);

    std::vector<EvaluatedRow> rows;
    for (const auto& v : per_session) rows.insert(rows.end(), v.begin(), v.end());
    std::vector<MetricReport> population;
    for (const auto& r : rows) population.push_back(r.report);
    const NormalizationBounds bounds = normalization_bounds(population);
    for (auto& r : rows) apply_normalization(r.report, bounds);

    io::write_text_file(args.out_dir / "aggregate.csv", aggregate_csv(rows));
    io::write_text_file(args.out_dir / "plot_series.csv", plot_series_csv(rows));

    // task x metric table over normalized deviations
    std::ostringstream task_out;
    task_out << "task,metric,mean_norm,std_norm\n";
    for (TaskKind task : {TaskKind::SingleTarget, TaskKind::MultiTarget}) {
        std::vector<const EvaluatedRow*> rs;
        for (const auto& r : rows)
            if (r.task == task) rs.push_back(&r);
        if (rs.empty()) continue;
        for (std::size_t m = 0; m < kMetricCount; ++m) {
            std::vector<double> nrm;
            for (const auto* r : rs) nrm.push_back(r->report.normalized[m]);
            task_out << (task == TaskKind::SingleTarget ? "single" : "multi") << ','
                     << kMetricNames[m] << ',' << csv::fmt(detail::mean_of(nrm)) << ','
                     << csv::fmt(detail::std_of(nrm)) << '\n';
        }
        std::vector<double> overall;
        for (const auto* r : rs) overall.push_back(r->report.overall);
        task_out << (task == TaskKind::SingleTarget ? "single" : "multi") << ",overall,"
                 << csv::fmt(detail::mean_of(overall)) << ',' << csv::fmt(detail::std_of(overall))
                 << '\n';
    }
    io::write_text_file(args.out_dir / "task_by_metric.csv", task_out.str());
}

// --- tune ----------------------------------------------------------------------

struct TuneArgs {
    std::string algo;
    std::string grid{"default"};
    detail::CommonOptions common;
    bool quiet{false};
    fs::path sessions_dir, out_dir;
};

inline ParamGrid load_grid(const std::string& spec) {
    if (spec == "default") return {};
    const nlohmann::json j = nlohmann::json::parse(io::read_text_file(spec));
    ParamGrid g;
    auto range = [&](const char* name, RangeSpec fallback) {
        if (!j.contains(name)) return fallback;
        return RangeSpec{j[name].at("start").get<double>(), j[name].at("stop").get<double>(),
                         j[name].at("step").get<double>()};
    };
    g.velocity = range("velocity", g.velocity);
    g.duration = range("duration", g.duration);
    g.dispersion = range("dispersion", g.dispersion);
    if (j.contains("z_outlier_threshold"))
        g.z_outlier_threshold = j["z_outlier_threshold"].get<double>();
    return g;
}

inline void cmd_tune(const TuneArgs& args) {
    Algorithm algo;
    try {
        algo = algorithm_from_string(args.algo);
    } catch (const ContractError& e) {
        throw UsageError(e.what());
    }
    const ParamGrid grid = load_grid(args.grid);
    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    if (ec || !fs::is_directory(args.out_dir))
        throw DataError("cannot create output directory " + args.out_dir.string());

    const auto stems = detail::discover_sessions(args.sessions_dir);
    std::vector<SessionBundle> corpus(stems.size());
    std::vector<std::string> errors(stems.size());
    detail::parallel_for(stems.size(), args.common.worker_count(), [&](std::size_t i) {
        try {
            corpus[i] = detail::load_bundle(args.sessions_dir, stems[i], args.common.preprocess());
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < stems.size(); ++i)
        if (!errors[i].empty()) throw DataError("session " + stems[i] + ": " + errors[i]);

    TuneOptions opt;
    opt.workers = args.common.worker_count();
    opt.checkpoint_dir = args.out_dir / ("checkpoints_" + to_string(algo));
    opt.metrics = args.common.metrics();
    opt.classify = args.common.classify();
    if (!args.quiet)
        opt.progress = [](std::size_t done, std::size_t total) {
            if (done % 100 == 0 || done == total)
                std::cerr << "\rtune: " << done << "/" << total << " combos" << std::flush;
        };
    const TuneResult result = run_grid(corpus, algo, grid, opt);
    if (!args.quiet) std::cerr << '\n';

    // full table: one row per combo x session with the raw metric values
    std::ostringstream table;
    table << "algorithm,velocity,duration,dispersion,session_id,fqns,fqls,fn,afd,sn,asa,sqns,"
             "overall\n";
    for (const ComboResult& c : result.combos) {
        if (!c.error.empty()) continue;
        for (std::size_t s = 0; s < c.per_session.size(); ++s) {
            const MetricReport& r = c.per_session[s];
            table << to_string(algo) << ',' << csv::fmt(c.params.velocity_threshold) << ','
                  << csv::fmt(c.params.min_fixation_duration) << ','
                  << csv::fmt(c.params.dispersion_threshold) << ',' << corpus[s].id;
            for (double v : r.raw) table << ',' << csv::fmt(v);
            table << ',' << csv::fmt(r.overall) << '\n';
        }
    }
    io::write_text_file(args.out_dir / (to_string(algo) + "_table.csv"), table.str());

    std::ostringstream summary;
    summary << "algorithm,velocity,duration,dispersion,mean_overall";
    for (const char* m : kMetricNames) summary << ",mean_norm_" << m;
    summary << ",error\n";
    for (const ComboResult& c : result.combos) {
        summary << to_string(algo) << ',' << csv::fmt(c.params.velocity_threshold) << ','
                << csv::fmt(c.params.min_fixation_duration) << ','
                << csv::fmt(c.params.dispersion_threshold) << ','
                << (c.error.empty() ? csv::fmt(c.mean_overall) : std::string{});
        for (std::size_t m = 0; m < kMetricCount; ++m)
            summary << ',' << (c.error.empty() ? csv::fmt(c.mean_normalized[m]) : std::string{});
        std::string err = c.error;
        for (char& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        summary << ',' << err << '\n';
    }
    io::write_text_file(args.out_dir / (to_string(algo) + "_summary.csv"), summary.str());

    const ComboResult& best = result.combos[result.best_index];
    nlohmann::json best_json;
    best_json["algorithm"] = to_string(algo);
    best_json["velocity"] = best.params.velocity_threshold;
    best_json["duration"] = best.params.min_fixation_duration;
    best_json["dispersion"] = best.params.dispersion_threshold;
    best_json["mean_overall"] = best.mean_overall;
    best_json["combos"] = result.combos.size();
    best_json["sessions"] = corpus.size();
    best_json["normalization_min"] = result.bounds.min;
    best_json["normalization_max"] = result.bounds.max;
    io::write_text_file(args.out_dir / (to_string(algo) + "_best.json"),
                        best_json.dump(2) + "\n");
}

// --- driver --------------------------------------------------------------------

inline void add_common(CLI::App* app, detail::CommonOptions& common) {
    app->add_flag("--paper-velocity-constant", common.paper_constant,
                  "use the published literal 5.73e4 instead of (180/pi)*1e3");
    app->add_flag("--fqns-full-duration", common.fqns_full_duration,
                  "credit full fixation durations in FQnS instead of window overlap");
    app->add_option("--merge-mode", common.merge_mode, "adjacent-group merge test")
        ->check(CLI::IsMember({"centroid", "boundary"}));
    app->add_option("--workers", common.workers,
                    "worker threads (default: GAZE_EVENTS_WORKERS or hardware)");
}

inline int run(std::vector<std::string> args) {
    CLI::App app{"fixation/saccade classification toolkit for VR gaze streams"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    CLI::App* sim = app.add_subcommand("simulate", "generate synthetic labeled sessions");
    sim->add_option("--task", sim_args.task, "stimulus protocol")->check(CLI::IsMember({"single", "multi"}));
    sim->add_option("--sessions", sim_args.sessions, "number of sessions");
    sim->add_option("--seed", sim_args.seed, "base seed");
    sim->add_option("--targets", sim_args.targets, "position changes (single) / spheres (multi)");
    sim->add_option("--dwell", sim_args.dwell_ms, "dwell per target, ms");
    sim->add_option("--sphere-radius", sim_args.sphere_radius, "stimulus sphere radius, m");
    sim->add_option("--room-far-z", sim_args.room_far_z, "far wall distance, m");
    sim->add_option("--prefix", sim_args.prefix, "session file prefix");
    sim->add_option("--rate", sim_args.sim.sample_rate_hz, "sample rate, Hz");
    sim->add_option("--rate-jitter", sim_args.sim.rate_jitter, "sampling interval jitter fraction");
    sim->add_option("--sigma", sim_args.sim.angular_noise_sigma_deg, "angular noise sd, deg");
    sim->add_option("--noise-correlation", sim_args.sim.noise_correlation,
                    "AR(1) coefficient of the angular noise");
    sim->add_option("--latency", sim_args.sim.saccadic_latency_ms, "saccadic latency, ms");
    sim->add_option("--blink-rate", sim_args.sim.blink_rate_per_min, "blinks per minute");
    sim->add_option("--blink-duration", sim_args.sim.blink_duration_ms, "blink duration, ms");
    sim->add_option("--far-miss-rate", sim_args.sim.far_miss_rate,
                    "fraction of fixation samples forced onto the far wall");
    sim->add_option("--workers", sim_args.common.workers,
                    "worker threads (default: GAZE_EVENTS_WORKERS or hardware)");
    sim->add_option("out_dir", sim_args.out_dir, "output directory")->required();

    ClassifyArgs cls_args;
    CLI::App* cls = app.add_subcommand("classify", "classify sessions into fixations/saccades");
    cls->add_option("--algo", cls_args.algo, "ivt|idt|ivdt|mivdt")->required();
    cls->add_option("--velocity", cls_args.velocity, "velocity threshold, deg/s");
    cls->add_option("--duration", cls_args.duration, "minimum fixation duration, ms");
    cls->add_option("--dispersion", cls_args.dispersion, "dispersion threshold, deg");
    cls->add_option("--z-threshold", cls_args.z_threshold, "m-IVDT depth outlier threshold, m");
    cls->add_option("--preset", cls_args.preset, "named threshold preset")
        ->check(CLI::IsMember({"paper-optimal"}));
    add_common(cls, cls_args.common);
    cls->add_option("in_dir", cls_args.in_dir, "session directory")->required();
    cls->add_option("out_dir", cls_args.out_dir, "output directory")->required();

    EvaluateArgs eval_args;
    CLI::App* ev = app.add_subcommand("evaluate", "score classifications against protocols");
    ev->add_option("--format", eval_args.format, "per-session report format")
        ->check(CLI::IsMember({"json", "csv"}));
    add_common(ev, eval_args.common);
    ev->add_option("sessions_dir", eval_args.sessions_dir, "session directory")->required();
    ev->add_option("labels_dir", eval_args.labels_dir, "classification directory")->required();
    ev->add_option("out_dir", eval_args.out_dir, "output directory")->required();

    TuneArgs tune_args;
    CLI::App* tn = app.add_subcommand("tune", "grid-search thresholds over a corpus");
    tn->add_option("--algo", tune_args.algo, "ivt|idt|ivdt|mivdt")->required();
    tn->add_option("--grid", tune_args.grid, "default or a JSON grid file");
    tn->add_flag("--quiet", tune_args.quiet, "suppress progress output");
    add_common(tn, tune_args.common);
    tn->add_option("sessions_dir", tune_args.sessions_dir, "session directory")->required();
    tn->add_option("out_dir", tune_args.out_dir, "output directory")->required();

    CompareArgs cmp_args;
    CLI::App* cmp = app.add_subcommand("compare", "four-preset comparison tables");
    add_common(cmp, cmp_args.common);
    cmp->add_option("sessions_dir", cmp_args.sessions_dir, "session directory")->required();
    cmp->add_option("out_dir", cmp_args.out_dir, "output directory")->required();

    std::reverse(args.begin(), args.end()); // CLI11 consumes back to front
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            std::cout << app.help();
            return kExitOk;
        }
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (sim->parsed()) cmd_simulate(sim_args);
        if (cls->parsed()) cmd_classify(cls_args);
        if (ev->parsed()) cmd_evaluate(eval_args);
        if (tn->parsed()) cmd_tune(tune_args);
        if (cmp->parsed()) cmd_compare(cmp_args);
        return kExitOk;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

} // namespace gaze::cli
