#include "spikesort/estimator.hpp"

#include <cmath>
#include <limits>

#include "spikesort/numerics.hpp"

namespace spikesort {

namespace {

constexpr std::uint64_t kDataDispersionTag = 0xD15A;

// Best-of-restarts K-means value; shared by the data and reference sides of
// the gap so that the data-as-reference hook cancels exactly.
double dispersion(const Matrix& y, int c, int restarts, int max_iters, std::uint64_t seed) {
    Rng rng(seed);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < restarts; ++i) {
        const KmResult run = kmeans(y, c, kmeanspp_seed(y, c, rng), max_iters);
        best = std::min(best, run.sse);
    }
    return best;
}

}  // namespace

ChScore calinski_harabasz(const Matrix& y, const Partition& g) {
    const Eigen::Index n = y.cols();
    if (g.c < 2 || g.c >= n)
        throw DimensionMismatchError("calinski_harabasz: need 2 <= c < n");
    validate_partition(g);

    const Vector grand = y.rowwise().mean();
    const Matrix mu = class_means(y, g);
    const std::vector<int> counts = cluster_sizes(g);

    double between = 0.0;
    for (int j = 0; j < g.c; ++j)
        between += counts[j] * (mu.col(j) - grand).squaredNorm();
    double within = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        within += (y.col(i) - mu.col(g.labels[i])).squaredNorm();

    ChScore out;
    if (within <= 0.0) {
        out.value = std::numeric_limits<double>::infinity();
        out.degenerate_within = true;
        return out;
    }
    out.value = (between / (g.c - 1)) / (within / static_cast<double>(n - g.c));
    return out;
}

GapResult gap_statistic(const Matrix& y, int c, const GapOptions& opts, std::uint64_t seed) {
    const Eigen::Index n = y.cols();
    if (c < 1 || n < c) throw DimensionMismatchError("gap_statistic: need n >= c >= 1");
    if (opts.b_refs < 1) throw DimensionMismatchError("gap_statistic: b_refs must be >= 1");

    const auto log_w = [](double w) { return std::log(std::max(w, 1e-300)); };
    const double data_log_w =
        log_w(dispersion(y, c, opts.restarts, opts.max_km_iters, derive_seed(seed, kDataDispersionTag)));

    // Reference box aligned with the data's principal axes.
    const Vector mean = y.rowwise().mean();
    const Matrix yc = y.colwise() - mean;
    const EigPairs axes = sym_eig(yc * yc.transpose());
    const Matrix rotated = axes.vectors.transpose() * yc;
    const Vector lo = rotated.rowwise().minCoeff();
    const Vector hi = rotated.rowwise().maxCoeff();

    Vector ref_log_w(opts.b_refs);
    for (int b = 0; b < opts.b_refs; ++b) {
        if (opts.data_as_reference) {
            // identical data and identical seeding: log terms cancel exactly
            ref_log_w(b) = log_w(dispersion(y, c, opts.restarts, opts.max_km_iters,
                                            derive_seed(seed, kDataDispersionTag)));
            continue;
        }
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
        Matrix ref(y.rows(), n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < y.rows(); ++i)
                ref(i, j) = rng.uniform(lo(i), hi(i));
        ref = (axes.vectors * ref).colwise() + mean;
        ref_log_w(b) = log_w(dispersion(ref, c, opts.restarts, opts.max_km_iters,
                                        derive_seed(seed, 0x8EF0 + static_cast<std::uint64_t>(b))));
    }

    GapResult out;
    const double mean_ref = ref_log_w.mean();
    out.gap = mean_ref - data_log_w;
    const double sd = std::sqrt((ref_log_w.array() - mean_ref).square().mean());
    out.s_k = sd * std::sqrt(1.0 + 1.0 / opts.b_refs);
    return out;
}

EstimationReport estimate_c(const Matrix& x, const EstimateOptions& opts) {
    const Eigen::Index n = x.cols();
    if (opts.c_min < 2 || opts.c_min > opts.c_max)
        throw DimensionMismatchError("estimate_c: invalid candidate range");
    if (opts.c_max >= n)
        throw RangeTooLargeError("estimate_c: candidate cluster counts must stay below n");

    EstimationReport report;
    report.index_kind = opts.index_kind;
    report.m0 = opts.m0;
    for (int c = opts.c_min; c <= opts.c_max; ++c) report.candidates.push_back(c);

    const Projection w0 = pca_init(x, opts.m0);
    report.m0 = static_cast<int>(w0.m());  // records any rank clipping
    const Matrix embed = w0.w.transpose() * center(x);

    const std::size_t n_cand = report.candidates.size();
    report.scores.resize(n_cand, 0.0);
    report.gap_sk.assign(n_cand, 0.0);
    report.degenerate.assign(n_cand, false);

    for (std::size_t i = 0; i < n_cand; ++i) {
        const int c = report.candidates[i];
        const std::uint64_t cand_seed = derive_seed(opts.seed, static_cast<std::uint64_t>(c));
        if (opts.index_kind == IndexKind::calinski_harabasz) {
            Rng rng(cand_seed);
            KmResult best;
            bool have = false;
            for (int r = 0; r < opts.restarts; ++r) {
                KmResult run = kmeans(embed, c, kmeanspp_seed(embed, c, rng), opts.max_km_iters);
                if (!have || run.sse < best.sse) {
                    best = std::move(run);
                    have = true;
                }
            }
            const ChScore score = calinski_harabasz(embed, best.partition);
            report.scores[i] = score.value;
            report.degenerate[i] = score.degenerate_within;
        } else {
            GapOptions gopts;
            gopts.b_refs = opts.gap_b_refs;
            gopts.restarts = opts.restarts;
            gopts.max_km_iters = opts.max_km_iters;
            const GapResult gap = gap_statistic(embed, c, gopts, cand_seed);
            report.scores[i] = gap.gap;
            report.gap_sk[i] = gap.s_k;
        }
    }

    if (n_cand == 1) {
        report.chosen = report.candidates[0];
        return report;
    }

    if (opts.index_kind == IndexKind::calinski_harabasz) {
        // argmax; degenerate +inf sentinels lose to any finite score
        std::size_t best = 0;
        bool best_finite = !report.degenerate[0];
        for (std::size_t i = 1; i < n_cand; ++i) {
            const bool finite = !report.degenerate[i];
            if ((finite && !best_finite) ||
                (finite == best_finite && report.scores[i] > report.scores[best])) {
                best = i;
                best_finite = finite;
            }
        }
        report.chosen = report.candidates[best];
    } else if (opts.gap_argmax) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n_cand; ++i)
            if (report.scores[i] > report.scores[best]) best = i;
        report.chosen = report.candidates[best];
    } else {
        // first k with gap(k) >= gap(k+1) - s_{k+1}; the last candidate when
        // no k qualifies
        report.chosen = report.candidates.back();
        for (std::size_t i = 0; i + 1 < n_cand; ++i) {
            if (report.scores[i] >= report.scores[i + 1] - report.gap_sk[i + 1]) {
                report.chosen = report.candidates[i];
                break;
            }
        }
    }
    return report;
}

AutoSortResult auto_sort(const Matrix& x, const EstimateOptions& est, SolverOptions solver_opts) {
    AutoSortResult out;
    out.report = estimate_c(x, est);
    solver_opts.c = out.report.chosen;
    out.sort = fit(x, solver_opts);
    return out;
}

}  // namespace spikesort
