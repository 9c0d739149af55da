#include "spikesort/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "spikesort/numerics.hpp"

namespace spikesort {

namespace {

// Squared distance of every column of y to every center; c x n.
Matrix sq_distances(const Matrix& y, const Matrix& centers) {
    Matrix d2 = -2.0 * centers.transpose() * y;
    d2.colwise() += centers.colwise().squaredNorm().transpose();
    d2.rowwise() += y.colwise().squaredNorm();
    return d2.cwiseMax(0.0);
}

// Nearest center per column, lowest index on ties.
void assign_nearest(const Matrix& d2, std::vector<int>& labels) {
    const Eigen::Index n = d2.cols();
    const Eigen::Index c = d2.rows();
    labels.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        int best = 0;
        double dist = d2(0, j);
        for (Eigen::Index k = 1; k < c; ++k)
            if (d2(k, j) < dist) {
                dist = d2(k, j);
                best = static_cast<int>(k);
            }
        labels[j] = best;
    }
}

double sse_of(const Matrix& y, const std::vector<int>& labels, const Matrix& centers) {
    double sse = 0.0;
    for (Eigen::Index j = 0; j < y.cols(); ++j)
        sse += (y.col(j) - centers.col(labels[j])).squaredNorm();
    return sse;
}

int count_distinct_columns(const Matrix& y) {
    int distinct = 0;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        bool seen = false;
        for (Eigen::Index i = 0; i < j && !seen; ++i) seen = y.col(i) == y.col(j);
        if (!seen) ++distinct;
    }
    return distinct;
}

}  // namespace

Matrix kmeanspp_seed(const Matrix& y, int c, Rng& rng) {
    const Eigen::Index n = y.cols();
    if (c < 1 || n < c) throw DegenerateDataError("kmeanspp_seed: need n >= c >= 1");
    if (count_distinct_columns(y) < c)
        throw DegenerateDataError("kmeanspp_seed: fewer distinct points than clusters");

    Matrix centers(y.rows(), c);
    std::vector<Eigen::Index> chosen;
    chosen.push_back(static_cast<Eigen::Index>(rng.uniform_int(n)));
    centers.col(0) = y.col(chosen[0]);

    Vector d2 = (y.colwise() - centers.col(0)).colwise().squaredNorm().transpose();
    for (int k = 1; k < c; ++k) {
        const double total = d2.sum();
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double acc = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                acc += d2(j);
                if (acc > target) {
                    pick = j;
                    break;
                }
            }
            if (pick < 0) {  // roundoff pushed the target past the last positive mass
                for (Eigen::Index j = n - 1; j >= 0; --j)
                    if (d2(j) > 0.0) {
                        pick = j;
                        break;
                    }
            }
        } else {
            // remaining mass is all duplicates of chosen centers; take the
            // first column distinct from every center picked so far
            for (Eigen::Index j = 0; j < n && pick < 0; ++j) {
                bool dup = false;
                for (const Eigen::Index i : chosen)
                    if (y.col(i) == y.col(j)) {
                        dup = true;
                        break;
                    }
                if (!dup) pick = j;
            }
            if (pick < 0) throw DegenerateDataError("kmeanspp_seed: ran out of distinct points");
        }
        chosen.push_back(pick);
        centers.col(k) = y.col(pick);
        d2 = d2.cwiseMin((y.colwise() - centers.col(k)).colwise().squaredNorm().transpose());
    }
    return centers;
}

KmResult kmeans(const Matrix& y, int c, const Matrix& init_centers, int max_iters) {
    const Eigen::Index n = y.cols();
    if (c < 1 || n < c) throw DegenerateDataError("kmeans: need n >= c >= 1");
    if (init_centers.rows() != y.rows() || init_centers.cols() != c)
        throw DimensionMismatchError("kmeans: init centers have wrong shape");

    KmResult out;
    out.centers = init_centers;
    std::vector<int> labels, prev_labels;
    std::vector<int> counts(c);

    for (int iter = 0; iter < max_iters; ++iter) {
        assign_nearest(sq_distances(y, out.centers), labels);
        if (labels == prev_labels) break;
        out.iterations = iter + 1;  // counts center updates

        std::fill(counts.begin(), counts.end(), 0);
        Matrix sums = Matrix::Zero(y.rows(), c);
        for (Eigen::Index j = 0; j < n; ++j) {
            sums.col(labels[j]) += y.col(j);
            ++counts[labels[j]];
        }

        // Empty-cluster repair: hand each empty cluster the point farthest
        // from its current center (never a cluster's sole member).
        for (int k = 0; k < c; ++k) {
            if (counts[k] > 0) continue;
            Eigen::Index worst = -1;
            double worst_d2 = -1.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (counts[labels[j]] <= 1) continue;
                const double d2 = (y.col(j) - out.centers.col(labels[j])).squaredNorm();
                if (d2 > worst_d2) {
                    worst_d2 = d2;
                    worst = j;
                }
            }
            if (worst < 0) throw DegenerateDataError("kmeans: cannot repair empty cluster");
            sums.col(labels[worst]) -= y.col(worst);
            --counts[labels[worst]];
            labels[worst] = k;
            sums.col(k) = y.col(worst);
            counts[k] = 1;
        }

        for (int k = 0; k < c; ++k) out.centers.col(k) = sums.col(k) / counts[k];
        prev_labels = labels;
    }

    out.partition.labels = labels;
    out.partition.c = c;
    out.sse = sse_of(y, labels, out.centers);
    return out;
}

GUpdate update_g(const Matrix& x, const Projection& w, const Partition& g_prev,
                 const SolverOptions& opts, Rng& rng) {
    validate_partition(g_prev);
    const Matrix y = whitened_embedding(x, w, opts.ridge_rel);

    KmResult best;
    bool have_best = false;
    for (int i = 0; i < opts.restarts; ++i) {
        const Matrix seed_centers = kmeanspp_seed(y, opts.c, rng);
        KmResult run = kmeans(y, opts.c, seed_centers, opts.max_km_iters);
        if (!have_best || run.sse < best.sse) {
            best = std::move(run);
            have_best = true;
        }
    }

    // Previous partition re-scored in the current whitened space: its centers
    // are the class means of the current embedding.
    const Matrix m_prev = class_means(y, g_prev);
    const double g_prev_value = sse_of(y, g_prev.labels, m_prev);

    GUpdate out;
    out.g_prev_value = g_prev_value;
    if (have_best && best.sse < g_prev_value) {
        out.partition = std::move(best.partition);
        out.centers = std::move(best.centers);
        out.g_value = best.sse;
        out.took_restart = true;
    } else {
        KmResult cont = kmeans(y, opts.c, m_prev, opts.max_km_iters);
        out.partition = std::move(cont.partition);
        out.centers = std::move(cont.centers);
        out.g_value = cont.sse;
        out.took_restart = false;
    }
    return out;
}

Projection update_w(const Matrix& x, const Partition& g, int m, double ridge_rel) {
    if (m < 1 || m > x.rows()) throw DimensionMismatchError("update_w: m out of range");
    const Matrix s1 = total_scatter(x);
    const Matrix s2 = within_complement_scatter(x, g);

    EigPairs pairs;
    try {
        pairs = gen_eig_spd(s1, s2, m, 0.0);
    } catch (const SingularDenominatorError&) {
        const double d = static_cast<double>(x.rows());
        double ridge = ridge_rel * s2.trace() / d;
        if (ridge <= 0.0) ridge = ridge_rel * s1.trace() / d;
        if (ridge <= 0.0) throw;
        pairs = gen_eig_spd(s1, s2, m, ridge);
    }

    // Re-orthonormalize: the generalized eigenvectors span the optimum but
    // are not orthonormal; the objective is invariant to W -> W A.
    Eigen::HouseholderQR<Matrix> qr(pairs.vectors);
    Matrix q = qr.householderQ() * Matrix::Identity(x.rows(), m);
    for (int j = 0; j < m; ++j) {
        Eigen::Index best = 0;
        double mag = -1.0;
        for (Eigen::Index i = 0; i < q.rows(); ++i)
            if (std::abs(q(i, j)) > mag) {
                mag = std::abs(q(i, j));
                best = i;
            }
        if (q(best, j) < 0.0) q.col(j) = -q.col(j);
    }
    return Projection{std::move(q)};
}

SortResult fit(const Matrix& x, const SolverOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::Index n = x.cols();
    if (opts.c < 2) throw DegenerateDataError("fit: need c >= 2");
    if (n < opts.c) throw DegenerateDataError("fit: need at least c spikes");

    const int m = opts.c - 1;
    SortResult result;

    // PCA start; G0 from one K-means on the PCA embedding.
    Projection w = pca_init(x, m);
    const Matrix embed0 = w.w.transpose() * center(x);
    Rng init_rng(derive_seed(opts.seed, 0));
    Partition g =
        kmeans(embed0, opts.c, kmeanspp_seed(embed0, opts.c, init_rng), opts.max_km_iters).partition;

    for (int t = 1; t <= opts.max_outer; ++t) {
        w = update_w(x, g, static_cast<int>(std::min<Eigen::Index>(m, x.rows())), opts.ridge_rel);

        Rng iter_rng(derive_seed(opts.seed, static_cast<std::uint64_t>(t)));
        GUpdate gu = update_g(x, w, g, opts, iter_rng);

        const Objective j = objective(x, w, gu.partition, opts.ridge_rel);
        result.objective_history.push_back(j.value);
        result.g_history.push_back(gu.g_value);
        result.g_prev_history.push_back(gu.g_prev_value);
        result.outer_iterations = t;

        const std::size_t h = result.objective_history.size();
        if (h >= 2) {
            const double prev = result.objective_history[h - 2];
            if (j.value < prev - 1e-9 * std::abs(prev)) {
                result.objective_decreases.push_back(static_cast<int>(h - 1));
                std::fprintf(stderr, "fit: objective decreased at iteration %d (%.12g -> %.12g)\n",
                             t, prev, j.value);
            }
        }

        const bool stable = same_partition(gu.partition, g);
        g = std::move(gu.partition);
        if (stable) {
            result.converged = true;
            break;
        }
    }

    result.projection = std::move(w);
    result.partition = std::move(g);
    result.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

SortResult sequential_baseline(const Matrix& x, int c, int m, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    if (c < 2) throw DegenerateDataError("sequential_baseline: need c >= 2");
    if (x.cols() < c) throw DegenerateDataError("sequential_baseline: need at least c spikes");

    SortResult result;
    result.projection = pca_init(x, m);
    const Matrix embed = result.projection.w.transpose() * center(x);

    Rng rng(derive_seed(seed, 0));
    KmResult best;
    bool have_best = false;
    for (int i = 0; i < 10; ++i) {
        KmResult run = kmeans(embed, c, kmeanspp_seed(embed, c, rng), 300);
        if (!have_best || run.sse < best.sse) {
            best = std::move(run);
            have_best = true;
        }
    }

    result.partition = std::move(best.partition);
    result.objective_history.push_back(objective(x, result.projection, result.partition).value);
    result.g_history.push_back(best.sse);
    result.g_prev_history.push_back(best.sse);
    result.outer_iterations = 1;
    result.converged = true;
    result.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace spikesort
