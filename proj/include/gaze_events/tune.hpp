#pragma once

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "gaze_events/classify.hpp"
#include "gaze_events/csv.hpp"
#include "gaze_events/metrics.hpp"
#include "gaze_events/session.hpp"

namespace gaze {

struct RangeSpec {
    double start{0.0};
    double stop{0.0};
    double step{1.0};

    std::size_t count() const {
        if (!(step > 0.0) || stop < start) throw ContractError("RangeSpec: bad range");
        const double n = (stop - start) / step;
        const std::size_t c = static_cast<std::size_t>(std::llround(n)) + 1;
        if (std::abs(start + static_cast<double>(c - 1) * step - stop) > 1e-9)
            throw ContractError("RangeSpec: step does not divide the range");
        return c;
    }

    std::vector<double> values() const {
        std::vector<double> v;
        const std::size_t c = count();
        v.reserve(c);
        for (std::size_t i = 0; i < c; ++i) v.push_back(start + static_cast<double>(i) * step);
        return v;
    }
};

// Threshold ranges swept by the grid search. Defaults follow the tuning
// protocol: velocity 30-150 deg/s step 10, duration 50-150 ms step 10,
// dispersion 1.0-6.0 deg step 0.25.
struct ParamGrid {
    RangeSpec velocity{30.0, 150.0, 10.0};
    RangeSpec duration{50.0, 150.0, 10.0};
    RangeSpec dispersion{1.0, 6.0, 0.25};
    double z_outlier_threshold{4.9};
};

/// Cartesian product over the algorithm's applicable dimensions, in
/// lexicographic order (velocity, then duration, then dispersion).
inline std::vector<ClassifierParams> enumerate_grid(const ParamGrid& grid, Algorithm algo) {
    const std::vector<double> vel =
        uses_velocity(algo) ? grid.velocity.values() : std::vector<double>{0.0};
    const std::vector<double> dur =
        uses_duration(algo) ? grid.duration.values() : std::vector<double>{0.0};
    const std::vector<double> disp =
        uses_dispersion(algo) ? grid.dispersion.values() : std::vector<double>{0.0};
    if (vel.empty() || dur.empty() || disp.empty())
        throw ContractError("enumerate_grid: empty applicable dimension");
    std::vector<ClassifierParams> out;
    out.reserve(vel.size() * dur.size() * disp.size());
    for (double v : vel)
        for (double d : dur)
            for (double a : disp)
                out.push_back({v, a, d, grid.z_outlier_threshold});
    return out;
}

struct SessionBundle {
    std::string id;
    Session session;
    StimulusProtocol protocol;
};

struct ComboResult {
    ClassifierParams params;
    std::vector<MetricReport> per_session; // in corpus order
    std::array<double, kMetricCount> mean_normalized{};
    double mean_overall{std::numeric_limits<double>::infinity()};
    std::string error; // non-empty: combo aborted, excluded from selection
};

struct TuneResult {
    Algorithm algorithm{Algorithm::IVT};
    std::vector<ComboResult> combos;
    std::size_t best_index{0};
    NormalizationBounds bounds;
};

struct TuneOptions {
    unsigned workers{1};
    std::filesystem::path checkpoint_dir; // empty: no checkpointing
    MetricOptions metrics;
    ClassifyOptions classify;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

namespace detail {

inline std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t combo) {
    char name[32];
    std::snprintf(name, sizeof(name), "combo_%05zu.csv", combo);
    return dir / name;
}

inline bool load_checkpoint(const std::filesystem::path& path, std::size_t n_sessions,
                            std::vector<MetricReport>& reports) try {
    std::ifstream in(path);
    if (!in) return false;
    std::string line;
    if (!std::getline(in, line)) return false;
    std::vector<MetricReport> loaded;
    while (std::getline(in, line)) {
        if (csv::trim(line).empty()) continue;
        const auto cells = csv::split_line(line);
        if (cells.size() != 1 + 2 * kMetricCount) return false;
        MetricReport r;
        for (std::size_t i = 0; i < kMetricCount; ++i) {
            const auto raw = csv::parse_cell(cells[1 + i], 0, kMetricNames[i]);
            const auto dev = csv::parse_cell(cells[1 + kMetricCount + i], 0, kMetricNames[i]);
            if (!raw || !dev) return false; // truncated checkpoint: recompute
            r.raw[i] = *raw;
            r.deviations[i] = *dev;
        }
        loaded.push_back(r);
    }
    if (loaded.size() != n_sessions) return false;
    reports = std::move(loaded);
    return true;
} catch (const Error&) {
    return false; // unreadable checkpoint: recompute the combo
}

inline void save_checkpoint(const std::filesystem::path& path,
                            const std::vector<std::string>& session_ids,
                            const std::vector<MetricReport>& reports) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out << "session_id";
        for (const char* m : kMetricNames) out << ",raw_" << m;
        for (const char* m : kMetricNames) out << ",dev_" << m;
        out << '\n';
        for (std::size_t s = 0; s < reports.size(); ++s) {
            out << session_ids[s];
            for (double v : reports[s].raw) out << ',' << csv::fmt(v);
            for (double v : reports[s].deviations) out << ',' << csv::fmt(v);
            out << '\n';
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace detail

/// Argmin of mean overall; ties break toward the most conservative
/// classifier: lower velocity, lower dispersion, higher duration.
inline std::size_t select_best(const std::vector<ComboResult>& combos) {
    if (combos.empty()) throw ContractError("select_best: no combos");
    std::size_t best = combos.size();
    for (std::size_t i = 0; i < combos.size(); ++i) {
        if (!combos[i].error.empty()) continue;
        if (best == combos.size()) {
            best = i;
            continue;
        }
        const ComboResult& a = combos[i];
        const ComboResult& b = combos[best];
        const auto key = [](const ComboResult& c) {
            return std::make_tuple(c.mean_overall, c.params.velocity_threshold,
                                   c.params.dispersion_threshold,
                                   -c.params.min_fixation_duration);
        };
        if (key(a) < key(b)) best = i;
    }
    if (best == combos.size()) throw DataError("select_best: every combo failed");
    return best;
}

/// Exhaustive grid search: classify every session under every parameter
/// combination, min-max normalize the deviations over the whole run, and
/// select the combo with the lowest mean Overall score. Embarrassingly
/// parallel across combos; the reduction order is fixed, so worker count
/// does not change the result.
inline TuneResult run_grid(const std::vector<SessionBundle>& corpus, Algorithm algo,
                           const ParamGrid& grid, const TuneOptions& opt = {}) {
    if (corpus.empty()) throw ContractError("run_grid: empty corpus");
    TuneResult result;
    result.algorithm = algo;
    const std::vector<ClassifierParams> combos = enumerate_grid(grid, algo);
    result.combos.resize(combos.size());

    std::vector<std::string> session_ids;
    for (const auto& b : corpus) session_ids.push_back(b.id);

    const bool checkpointing = !opt.checkpoint_dir.empty();
    if (checkpointing) std::filesystem::create_directories(opt.checkpoint_dir);

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t c = next.fetch_add(1);
            if (c >= combos.size()) return;
            ComboResult& combo = result.combos[c];
            combo.params = combos[c];
            const auto path = checkpointing
                                  ? detail::checkpoint_path(opt.checkpoint_dir, c)
                                  : std::filesystem::path{};
            if (checkpointing &&
                detail::load_checkpoint(path, corpus.size(), combo.per_session)) {
                done.fetch_add(1);
                if (opt.progress) opt.progress(done.load(), combos.size());
                continue;
            }
            try {
                combo.per_session.clear();
                for (const SessionBundle& bundle : corpus) {
                    const LabeledStream stream =
                        classify(algo, bundle.session.points, combos[c], opt.classify);
                    combo.per_session.push_back(compute_metrics(
                        stream, bundle.session.points, bundle.protocol, opt.metrics));
                }
                if (checkpointing) detail::save_checkpoint(path, session_ids, combo.per_session);
            } catch (const Error& e) {
                combo.error = e.what();
                combo.per_session.clear();
            }
            done.fetch_add(1);
            if (opt.progress) opt.progress(done.load(), combos.size());
        }
    };
    const unsigned n_workers = std::max(1u, opt.workers);
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // normalization population: every (combo, session) deviation of the run
    std::vector<MetricReport> population;
    for (const ComboResult& c : result.combos)
        if (c.error.empty())
            population.insert(population.end(), c.per_session.begin(), c.per_session.end());
    if (population.empty()) throw DataError("run_grid: all combos failed");
    result.bounds = normalization_bounds(population);

    for (ComboResult& c : result.combos) {
        if (!c.error.empty()) continue;
        c.mean_normalized.fill(0.0);
        double overall_sum = 0.0;
        for (MetricReport& r : c.per_session) {
            apply_normalization(r, result.bounds);
            for (std::size_t i = 0; i < kMetricCount; ++i) c.mean_normalized[i] += r.normalized[i];
            overall_sum += r.overall;
        }
        const double n = static_cast<double>(c.per_session.size());
        for (auto& v : c.mean_normalized) v /= n;
        c.mean_overall = overall_sum / n;
    }
    result.best_index = select_best(result.combos);
    return result;
}

} // namespace gaze
