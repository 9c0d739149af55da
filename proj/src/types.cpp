#include "spikesort/types.hpp"

#include <cmath>

namespace spikesort {

void validate_partition(const Partition& g) {
    if (g.c < 1)
        throw DimensionMismatchError("partition: cluster count must be >= 1");
    if (g.n() < g.c)
        throw DimensionMismatchError("partition: fewer spikes than clusters");
    std::vector<int> counts(g.c, 0);
    for (int label : g.labels) {
        if (label < 0 || label >= g.c)
            throw DimensionMismatchError("partition: label out of range");
        ++counts[label];
    }
    for (int j = 0; j < g.c; ++j)
        if (counts[j] == 0)
            throw EmptyClusterError("partition: cluster " + std::to_string(j) + " is empty");
}

std::vector<int> cluster_sizes(const Partition& g) {
    std::vector<int> counts(g.c, 0);
    for (int label : g.labels) ++counts[label];
    return counts;
}

Partition canonicalize(const Partition& g) {
    Partition out;
    out.c = g.c;
    out.labels.resize(g.labels.size());
    std::vector<int> remap(g.c, -1);
    int next = 0;
    for (std::size_t i = 0; i < g.labels.size(); ++i) {
        int& slot = remap[g.labels[i]];
        if (slot < 0) slot = next++;
        out.labels[i] = slot;
    }
    return out;
}

bool same_partition(const Partition& a, const Partition& b) {
    if (a.c != b.c || a.labels.size() != b.labels.size()) return false;
    return canonicalize(a).labels == canonicalize(b).labels;
}

bool is_finite(const Matrix& m) {
    return m.allFinite();
}

bool is_symmetric(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

}  // namespace spikesort
