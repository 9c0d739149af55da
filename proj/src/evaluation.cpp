#include "spikesort/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace spikesort {

std::vector<int> assign_min_cost(const Matrix& cost) {
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n) throw DimensionMismatchError("assign_min_cost: matrix must be square");

    // Kuhn-Munkres with row/column potentials, 1-indexed internally.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

double accuracy(const std::vector<int>& truth, const Partition& pred) {
    const std::size_t n = truth.size();
    if (n != pred.labels.size())
        throw LengthMismatchError("accuracy: truth and prediction lengths differ");
    if (n == 0) throw LengthMismatchError("accuracy: empty labelings");

    int k = 0;
    for (const int t : truth) {
        if (t < 0) throw DimensionMismatchError("accuracy: negative truth label");
        k = std::max(k, t + 1);
    }
    const int size = std::max(k, pred.c);

    Matrix confusion = Matrix::Zero(size, size);
    for (std::size_t i = 0; i < n; ++i) confusion(truth[i], pred.labels[i]) += 1.0;

    const std::vector<int> match = assign_min_cost(-confusion);
    double matched = 0.0;
    for (int i = 0; i < size; ++i) matched += confusion(i, match[i]);
    return 100.0 * matched / static_cast<double>(n);
}

DetectionScore fpr_fnr(const std::vector<std::int64_t>& gt_times,
                       const std::vector<std::int64_t>& cluster_times,
                       std::int64_t tol_samples) {
    DetectionScore out;
    std::size_t i = 0, j = 0;
    int matched = 0;
    while (i < gt_times.size() && j < cluster_times.size()) {
        const std::int64_t diff = cluster_times[j] - gt_times[i];
        if (std::llabs(diff) <= tol_samples) {
            ++matched;
            ++i;
            ++j;
        } else if (diff < 0) {
            ++j;
        } else {
            ++i;
        }
    }
    out.matched = matched;
    out.fnr = gt_times.empty() ? 0.0
                               : 1.0 - static_cast<double>(matched) / gt_times.size();
    out.fpr = cluster_times.empty() ? 0.0
                                    : 1.0 - static_cast<double>(matched) / cluster_times.size();
    return out;
}

std::pair<int, DetectionScore> best_cluster_score(const std::vector<std::int64_t>& gt_times,
                                                  const Partition& partition,
                                                  const std::vector<std::int64_t>& spike_times,
                                                  std::int64_t tol_samples) {
    if (partition.labels.size() != spike_times.size())
        throw LengthMismatchError("best_cluster_score: partition and spike times differ in length");

    int best_cluster = 0;
    DetectionScore best_score;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int k = 0; k < partition.c; ++k) {
        std::vector<std::int64_t> cluster_times;
        for (std::size_t i = 0; i < spike_times.size(); ++i)
            if (partition.labels[i] == k) cluster_times.push_back(spike_times[i]);
        std::sort(cluster_times.begin(), cluster_times.end());
        const DetectionScore score = fpr_fnr(gt_times, cluster_times, tol_samples);
        const double cost = score.fnr + score.fpr;
        if (cost < best_cost) {
            best_cost = cost;
            best_cluster = k;
            best_score = score;
        }
    }
    return {best_cluster, best_score};
}

namespace {

void mean_std(const std::vector<double>& xs, double& mean, double& std_dev) {
    mean = 0.0;
    for (const double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    std_dev = 0.0;
    if (xs.size() > 1) {
        double acc = 0.0;
        for (const double x : xs) acc += (x - mean) * (x - mean);
        std_dev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
    }
}

}  // namespace

TrialStats run_trials(const SynthDataset& dataset, Method method, int c, int n_trials,
                      std::uint64_t base_seed, int jobs) {
    if (n_trials < 1) throw DimensionMismatchError("run_trials: need at least one trial");
    if (!dataset.has_labels())
        throw LengthMismatchError("run_trials: dataset has no ground-truth labels");

    std::vector<double> accuracies(n_trials), runtimes(n_trials);
    const auto run_one = [&](int trial) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(trial);
        SortResult result;
        if (method == Method::proposed) {
            SolverOptions opts;
            opts.c = c;
            opts.seed = seed;
            result = fit(dataset.x.x, opts);
        } else {
            result = sequential_baseline(dataset.x.x, c, std::max(1, c - 1), seed);
        }
        accuracies[trial] = accuracy(dataset.labels, result.partition);
        runtimes[trial] = result.runtime_ms;
    };

    if (jobs <= 1) {
        for (int t = 0; t < n_trials; ++t) run_one(t);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_trials; t += jobs) {
            pool.clear();
            for (int j = t; j < std::min(n_trials, t + jobs); ++j)
                pool.emplace_back(run_one, j);
            for (auto& th : pool) th.join();
        }
    }

    TrialStats stats;
    stats.n_trials = n_trials;
    mean_std(accuracies, stats.mean_accuracy_pct, stats.std_accuracy_pct);
    mean_std(runtimes, stats.mean_runtime_ms, stats.std_runtime_ms);
    return stats;
}

MonotonicityReport monotonicity_report(const std::vector<double>& history, double rel_tol) {
    if (history.empty()) throw LengthMismatchError("monotonicity_report: empty history");
    MonotonicityReport out;
    for (std::size_t i = 1; i < history.size(); ++i) {
        if (history[i] < history[i - 1] - rel_tol * std::abs(history[i - 1])) {
            out.is_monotone = false;
            out.violations.push_back(static_cast<int>(i));
        }
    }
    return out;
}

}  // namespace spikesort
