// Command-line front end for the spike-sorting toolkit: dataset generation,
// filtering, detection, extraction, sorting, neuron-count estimation,
// evaluation and a scaling benchmark.
//
// Exit codes: 0 ok, 2 usage/validation error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "spikesort/datagen.hpp"
#include "spikesort/estimator.hpp"
#include "spikesort/evaluation.hpp"
#include "spikesort/io.hpp"
#include "spikesort/model.hpp"
#include "spikesort/signal.hpp"
#include "spikesort/solver.hpp"

namespace ss = spikesort;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct TraceArgs {
    std::string path;
    double fs = 0.0;  // required for CSV input
};

ss::Trace load_trace(const TraceArgs& args) {
    if (args.path.ends_with(".csv")) return ss::read_trace_csv(args.path, args.fs);
    return ss::read_trace_raw(args.path);
}

void store_trace(const std::string& path, const ss::Trace& t) {
    if (path.ends_with(".csv"))
        ss::write_trace_csv(path, t);
    else
        ss::write_trace_raw(path, t);
}

json sort_result_json(const ss::SortResult& result, int c_hat, int m0,
                      const std::vector<double>& index_scores) {
    std::vector<double> w_row_major;
    w_row_major.reserve(result.projection.w.size());
    for (Eigen::Index i = 0; i < result.projection.w.rows(); ++i)
        for (Eigen::Index j = 0; j < result.projection.w.cols(); ++j)
            w_row_major.push_back(result.projection.w(i, j));

    json j;
    j["c_hat"] = c_hat;
    j["labels"] = result.partition.labels;
    j["objective_history"] = result.objective_history;
    j["iterations"] = result.outer_iterations;
    j["runtime_ms"] = result.runtime_ms;
    j["converged"] = result.converged;
    j["index_scores"] = index_scores;
    j["m0"] = m0;
    j["index_space"] = "pca_m0";
    j["W"] = {{"rows", result.projection.w.rows()},
              {"cols", result.projection.w.cols()},
              {"data", w_row_major}};
    return j;
}

void print_sort_summary(const ss::SortResult& result, int c_hat) {
    std::printf("clusters        %d\n", c_hat);
    std::printf("spikes          %zu\n", result.partition.labels.size());
    std::printf("iterations      %d\n", result.outer_iterations);
    std::printf("converged       %s\n", result.converged ? "yes" : "no");
    if (!result.objective_history.empty())
        std::printf("objective       %.6f\n", result.objective_history.back());
    std::printf("runtime_ms      %.2f\n", result.runtime_ms);
    const std::vector<int> sizes = ss::cluster_sizes(result.partition);
    for (std::size_t k = 0; k < sizes.size(); ++k)
        std::printf("cluster %-2zu      %d spikes\n", k, sizes[k]);
}

int cmd_synth(const ss::SynthSpec& spec, const std::string& out_prefix) {
    const ss::SynthDataset ds = ss::synthesize_spikes(spec);
    const ss::SavedDataset files = ss::save_dataset(out_prefix, spec, ds);
    std::printf("wrote %s\n", files.spikes_path.c_str());
    std::printf("wrote %s\n", files.labels_path.c_str());
    std::printf("wrote %s\n", files.times_path.c_str());
    std::printf("wrote %s\n", files.manifest_path.c_str());
    return kExitOk;
}

int cmd_sort(const std::string& spikes_path, int c, std::uint64_t seed,
             const std::string& out_path) {
    const ss::Matrix x = ss::read_spikes_csv(spikes_path);
    ss::SolverOptions opts;
    opts.c = c;
    opts.seed = seed;
    const ss::SortResult result = ss::fit(x, opts);
    if (!out_path.empty())
        ss::write_text_file(out_path, sort_result_json(result, c, c - 1, {}).dump(2) + "\n");
    print_sort_summary(result, c);
    return kExitOk;
}

int cmd_auto(const std::string& spikes_path, const ss::EstimateOptions& est, std::uint64_t seed,
             const std::string& out_path) {
    const ss::Matrix x = ss::read_spikes_csv(spikes_path);
    ss::SolverOptions opts;
    opts.seed = seed;
    const ss::AutoSortResult result = ss::auto_sort(x, est, opts);
    if (!out_path.empty())
        ss::write_text_file(out_path,
                            sort_result_json(result.sort, result.report.chosen, result.report.m0,
                                             result.report.scores)
                                    .dump(2) +
                                "\n");
    std::printf("index           %s\n",
                est.index_kind == ss::IndexKind::gap ? "gap" : "calinski-harabasz");
    for (std::size_t i = 0; i < result.report.candidates.size(); ++i)
        std::printf("  c=%-2d score %.6g\n", result.report.candidates[i], result.report.scores[i]);
    print_sort_summary(result.sort, result.report.chosen);
    return kExitOk;
}

int cmd_estimate(const std::string& spikes_path, const ss::EstimateOptions& est,
                 const std::string& out_path) {
    const ss::Matrix x = ss::read_spikes_csv(spikes_path);
    const ss::EstimationReport report = ss::estimate_c(x, est);
    json j;
    j["candidates"] = report.candidates;
    j["scores"] = report.scores;
    if (report.index_kind == ss::IndexKind::gap) j["gap_sk"] = report.gap_sk;
    j["chosen"] = report.chosen;
    j["index"] = report.index_kind == ss::IndexKind::gap ? "gap" : "ch";
    j["m0"] = report.m0;
    j["index_space"] = report.index_space;
    if (!out_path.empty()) ss::write_text_file(out_path, j.dump(2) + "\n");
    for (std::size_t i = 0; i < report.candidates.size(); ++i)
        std::printf("c=%-2d score %.6g\n", report.candidates[i], report.scores[i]);
    std::printf("chosen %d\n", report.chosen);
    return kExitOk;
}

int cmd_eval_labels(const std::string& pred_path, const std::string& truth_path,
                    const std::vector<std::string>& result_jsons, const std::string& emit) {
    const std::vector<int> truth = ss::read_labels_csv(truth_path);

    if (!result_jsons.empty()) {
        // mean +- std over several result JSONs, mirroring the 20-trial tables
        std::vector<double> accs, times;
        for (const std::string& path : result_jsons) {
            const json j = json::parse(ss::read_text_file(path));
            ss::Partition pred;
            pred.labels = j.at("labels").get<std::vector<int>>();
            pred.c = j.at("c_hat").get<int>();
            accs.push_back(ss::accuracy(truth, pred));
            times.push_back(j.value("runtime_ms", 0.0));
        }
        const auto mean_std = [](const std::vector<double>& xs, double& mean, double& sd) {
            mean = 0.0;
            for (const double x : xs) mean += x;
            mean /= static_cast<double>(xs.size());
            sd = 0.0;
            if (xs.size() > 1) {
                for (const double x : xs) sd += (x - mean) * (x - mean);
                sd = std::sqrt(sd / static_cast<double>(xs.size() - 1));
            }
        };
        double mean, sd, tmean, tsd;
        mean_std(accs, mean, sd);
        mean_std(times, tmean, tsd);
        if (emit == "json") {
            const json out = {{"n_trials", accs.size()},
                              {"mean_accuracy_pct", mean},
                              {"std_accuracy_pct", sd},
                              {"mean_runtime_ms", tmean},
                              {"std_runtime_ms", tsd}};
            std::printf("%s\n", out.dump(2).c_str());
        } else {
            std::printf("trials  accuracy           time_ms\n");
            std::printf("%-7zu %6.2f+-%-9.2f %8.2f+-%-8.2f\n", accs.size(), mean, sd, tmean, tsd);
        }
        return kExitOk;
    }

    ss::Partition pred;
    pred.labels = ss::read_labels_csv(pred_path);
    int c = 0;
    for (const int l : pred.labels) c = std::max(c, l + 1);
    pred.c = c;
    const double acc = ss::accuracy(truth, pred);
    if (emit == "json")
        std::printf("%s\n", json{{"accuracy_pct", acc}}.dump().c_str());
    else
        std::printf("accuracy %.2f\n", acc);
    return kExitOk;
}

int cmd_eval_times(const std::string& gt_path, const std::string& pred_path, double tol_ms,
                   double fs, const std::string& emit) {
    std::vector<std::int64_t> gt = ss::read_times_csv(gt_path);
    std::vector<std::int64_t> pred = ss::read_times_csv(pred_path);
    std::sort(gt.begin(), gt.end());
    std::sort(pred.begin(), pred.end());
    const auto tol = static_cast<std::int64_t>(std::llround(tol_ms * 1e-3 * fs));
    const ss::DetectionScore score = ss::fpr_fnr(gt, pred, tol);
    if (emit == "json")
        std::printf("%s\n",
                    json{{"fnr", score.fnr}, {"fpr", score.fpr}, {"matched", score.matched}}
                        .dump()
                        .c_str());
    else
        std::printf("fnr %.4f  fpr %.4f  matched %d\n", score.fnr, score.fpr, score.matched);
    return kExitOk;
}

int cmd_bench(const std::vector<int>& sizes, int d, int c, std::uint64_t seed,
              const std::string& out_path) {
    std::string csv = "n,ms,iterations\n";
    for (const int n : sizes) {
        ss::SynthSpec spec;
        spec.d = d;
        spec.n_units = c;
        spec.n_spikes_per_unit = std::max(1, n / c);
        spec.noise_level = 0.1;
        spec.seed = seed;
        const ss::SynthDataset ds = ss::synthesize_spikes(spec);

        ss::SolverOptions opts;
        opts.c = c;
        opts.seed = seed;
        // median of three runs; single-run wall time is noisy at small n
        std::vector<double> ms;
        int iters = 0;
        for (int rep = 0; rep < 3; ++rep) {
            const ss::SortResult r = ss::fit(ds.x.x, opts);
            ms.push_back(r.runtime_ms);
            iters = r.outer_iterations;
        }
        std::sort(ms.begin(), ms.end());
        char line[96];
        std::snprintf(line, sizeof(line), "%d,%.3f,%d\n", static_cast<int>(ds.x.n()), ms[1], iters);
        csv += line;
    }
    if (!out_path.empty())
        ss::write_text_file(out_path, csv);
    else
        std::fputs(csv.c_str(), stdout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"unified trace-ratio spike sorting toolkit"};
    app.require_subcommand(1);

    ss::SynthSpec synth_spec;
    std::string synth_out = "dataset";
    std::string synth_difficulty = "easy";
    auto* synth = app.add_subcommand("synth", "generate a ground-truth synthetic dataset");
    synth->add_option("--units", synth_spec.n_units, "number of units")->check(CLI::Range(2, 64));
    synth->add_option("--n", synth_spec.n_spikes_per_unit, "spikes per unit")
        ->check(CLI::PositiveNumber);
    synth->add_option("--noise", synth_spec.noise_level, "noise std relative to peak")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--d", synth_spec.d, "waveform length in samples")->check(CLI::Range(8, 4096));
    synth->add_option("--difficulty", synth_difficulty, "easy|difficult")
        ->check(CLI::IsMember({"easy", "difficult"}));
    synth->add_option("--overlap", synth_spec.overlap_fraction, "fraction of overlapping spikes")
        ->check(CLI::Range(0.0, 0.999));
    synth->add_flag("--colored-noise", synth_spec.colored_noise, "AR(2) noise instead of white");
    synth->add_option("--fs", synth_spec.fs_hz, "sampling rate in Hz")->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_spec.seed, "RNG seed");
    synth->add_option("--out", synth_out, "output path prefix");

    TraceArgs filter_in;
    std::string filter_out, filter_kind = "bandpass";
    double filter_low = 300.0, filter_high = 6000.0;
    int filter_order = 4;
    auto* filter = app.add_subcommand("filter", "zero-phase Butterworth filtering");
    filter->add_option("--in", filter_in.path, "input trace (.csv or raw float64)")->required();
    filter->add_option("--fs", filter_in.fs, "sampling rate for CSV input");
    filter->add_option("--out", filter_out, "output trace path")->required();
    filter->add_option("--kind", filter_kind, "bandpass|highpass")
        ->check(CLI::IsMember({"bandpass", "highpass"}));
    filter->add_option("--low", filter_low, "low cutoff Hz");
    filter->add_option("--high", filter_high, "high cutoff Hz");
    filter->add_option("--order", filter_order, "filter order")->check(CLI::Range(1, 64));

    TraceArgs detect_in;
    std::string detect_out;
    double detect_k = 4.0, detect_refractory_ms = 1.5;
    auto* detect = app.add_subcommand("detect", "amplitude threshold spike detection");
    detect->add_option("--in", detect_in.path, "input trace")->required();
    detect->add_option("--fs", detect_in.fs, "sampling rate for CSV input");
    detect->add_option("--out", detect_out, "output times CSV")->required();
    detect->add_option("--k-sigma", detect_k, "threshold in robust sigmas")
        ->check(CLI::PositiveNumber);
    detect->add_option("--refractory-ms", detect_refractory_ms, "refractory period")
        ->check(CLI::PositiveNumber);

    TraceArgs extract_in;
    std::string extract_times, extract_out, extract_times_out;
    int extract_window = 64, extract_offset = 20;
    auto* extract = app.add_subcommand("extract", "cut aligned waveforms around event times");
    extract->add_option("--in", extract_in.path, "input trace")->required();
    extract->add_option("--fs", extract_in.fs, "sampling rate for CSV input");
    extract->add_option("--times", extract_times, "event times CSV")->required();
    extract->add_option("--out", extract_out, "output spikes CSV")->required();
    extract->add_option("--times-out", extract_times_out, "kept times CSV");
    extract->add_option("--window", extract_window, "window length")->check(CLI::Range(2, 4096));
    extract->add_option("--align-offset", extract_offset, "peak row inside the window")
        ->check(CLI::NonNegativeNumber);

    std::string sort_spikes, sort_out;
    int sort_c = 3;
    std::uint64_t sort_seed = 42;
    auto* sort_cmd = app.add_subcommand("sort", "run the solver at a fixed cluster count");
    sort_cmd->add_option("--spikes", sort_spikes, "spikes CSV")->required();
    sort_cmd->add_option("--c", sort_c, "cluster count")->check(CLI::Range(2, 64));
    sort_cmd->add_option("--seed", sort_seed, "RNG seed");
    sort_cmd->add_option("--out", sort_out, "result JSON path");

    std::string auto_spikes, auto_out, auto_index = "ch";
    std::vector<int> auto_c_range{2, 10};
    int auto_m0 = 3;
    std::uint64_t auto_seed = 42;
    auto* auto_cmd = app.add_subcommand("auto", "estimate the neuron count, then sort");
    auto* estimate_cmd = app.add_subcommand("estimate", "neuron-count estimation only");
    for (CLI::App* cmd : {auto_cmd, estimate_cmd}) {
        cmd->add_option("--spikes", auto_spikes, "spikes CSV")->required();
        cmd->add_option("--m0", auto_m0, "initial reduced dimension")->check(CLI::Range(1, 256));
        cmd->add_option("--c-range", auto_c_range, "candidate range, two values")->expected(2);
        cmd->add_option("--index", auto_index, "ch|gap")->check(CLI::IsMember({"ch", "gap"}));
        cmd->add_option("--seed", auto_seed, "RNG seed");
        cmd->add_option("--out", auto_out, "result JSON path");
    }

    std::string eval_pred, eval_truth, eval_gt_times, eval_pred_times, eval_emit = "table";
    std::vector<std::string> eval_results;
    double eval_tol_ms = 0.5, eval_fs = 24000.0;
    auto* eval_cmd = app.add_subcommand("eval", "accuracy or FNR/FPR scoring");
    eval_cmd->add_option("--pred", eval_pred, "predicted labels CSV");
    eval_cmd->add_option("--truth", eval_truth, "ground-truth labels CSV");
    eval_cmd->add_option("--results", eval_results, "result JSONs to aggregate against --truth");
    eval_cmd->add_option("--gt-times", eval_gt_times, "ground-truth event times CSV");
    eval_cmd->add_option("--pred-times", eval_pred_times, "predicted event times CSV");
    eval_cmd->add_option("--tol-ms", eval_tol_ms, "matching tolerance in ms");
    eval_cmd->add_option("--fs", eval_fs, "sampling rate for the tolerance");
    eval_cmd->add_option("--emit", eval_emit, "table|json")->check(CLI::IsMember({"table", "json"}));

    std::vector<int> bench_sizes{1000, 2000, 4000, 8000};
    int bench_d = 64, bench_c = 3;
    std::uint64_t bench_seed = 42;
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "fit runtime across spike counts");
    bench->add_option("--sizes", bench_sizes, "spike counts to benchmark");
    bench->add_option("--d", bench_d, "waveform length")->check(CLI::Range(8, 4096));
    bench->add_option("--c", bench_c, "cluster count")->check(CLI::Range(2, 64));
    bench->add_option("--seed", bench_seed, "RNG seed");
    bench->add_option("--out", bench_out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (synth->parsed()) {
            synth_spec.difficulty = synth_difficulty == "difficult" ? ss::Difficulty::difficult
                                                                    : ss::Difficulty::easy;
            return cmd_synth(synth_spec, synth_out);
        }
        if (filter->parsed()) {
            const ss::Trace in = load_trace(filter_in);
            ss::FilterSpec spec;
            spec.kind = filter_kind == "highpass" ? ss::FilterKind::highpass
                                                  : ss::FilterKind::bandpass;
            spec.low_hz = filter_low;
            spec.high_hz = filter_high;
            spec.order = filter_order;
            store_trace(filter_out, ss::filtfilt(ss::design_filter(spec, in.fs_hz), in));
            return kExitOk;
        }
        if (detect->parsed()) {
            const ss::Trace in = load_trace(detect_in);
            const auto refractory =
                static_cast<std::int64_t>(std::llround(detect_refractory_ms * 1e-3 * in.fs_hz));
            ss::write_times_csv(
                detect_out, ss::detect_spikes(in, detect_k, std::max<std::int64_t>(1, refractory)));
            return kExitOk;
        }
        if (extract->parsed()) {
            const ss::Trace in = load_trace(extract_in);
            const ss::ExtractResult result = ss::extract_waveforms(
                in, ss::read_times_csv(extract_times), extract_window, extract_offset);
            ss::write_spikes_csv(extract_out, result.spikes.x);
            if (!extract_times_out.empty())
                ss::write_times_csv(extract_times_out, result.spikes.times);
            std::printf("extracted %lld spikes, dropped %d\n",
                        static_cast<long long>(result.spikes.n()), result.dropped);
            return kExitOk;
        }
        if (sort_cmd->parsed()) return cmd_sort(sort_spikes, sort_c, sort_seed, sort_out);
        if (auto_cmd->parsed() || estimate_cmd->parsed()) {
            ss::EstimateOptions est;
            est.m0 = auto_m0;
            est.c_min = auto_c_range.at(0);
            est.c_max = auto_c_range.at(1);
            est.index_kind =
                auto_index == "gap" ? ss::IndexKind::gap : ss::IndexKind::calinski_harabasz;
            est.seed = auto_seed;
            return auto_cmd->parsed() ? cmd_auto(auto_spikes, est, auto_seed, auto_out)
                                      : cmd_estimate(auto_spikes, est, auto_out);
        }
        if (eval_cmd->parsed()) {
            if (!eval_gt_times.empty() || !eval_pred_times.empty())
                return cmd_eval_times(eval_gt_times, eval_pred_times, eval_tol_ms, eval_fs,
                                      eval_emit);
            return cmd_eval_labels(eval_pred, eval_truth, eval_results, eval_emit);
        }
        if (bench->parsed()) return cmd_bench(bench_sizes, bench_d, bench_c, bench_seed, bench_out);
    } catch (const ss::SingularDenominatorError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const ss::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
