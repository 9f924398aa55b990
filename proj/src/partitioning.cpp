#include "cfmimo/partitioning.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace cfmimo {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out;
    if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("count overflows 64 bits");
    return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t out;
    if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("count overflows 64 bits");
    return out;
}

std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int i = 2; i <= n; ++i) f = checked_mul(f, static_cast<std::uint64_t>(i));
    return f;
}

void check_stirling_args(int m, int n) {
    if (n < 1) throw std::invalid_argument("stirling2: N must be >= 1");
    if (n > m) throw std::invalid_argument("stirling2: N must not exceed M");
}

// Visit restricted growth strings of length `count` with exactly `blocks` blocks
// in lexicographic order. The visitor returns false to stop the walk.
bool visit_partitions(int count, int blocks,
                      const std::function<bool(const std::vector<int>&)>& fn) {
    std::vector<int> rgs(count, 0);
    std::function<bool(int, int)> rec = [&](int pos, int used) -> bool {
        if (pos == count) {
            if (used != blocks) return true;
            return fn(rgs);
        }
        // Remaining positions must still be able to open the missing blocks.
        const int remaining = count - pos;
        const int hi = std::min(used, blocks - 1);
        for (int d = 0; d <= hi; ++d) {
            const int next_used = used + (d == used ? 1 : 0);
            if (blocks - next_used > remaining - 1) continue;
            rgs[pos] = d;
            if (!rec(pos + 1, next_used)) return false;
        }
        return true;
    };
    return rec(0, 0);
}

std::vector<int> block_sizes(const std::vector<int>& labels, int blocks) {
    std::vector<int> sizes(blocks, 0);
    for (int b : labels) {
        if (b < 0 || b >= blocks) throw std::invalid_argument("cluster id out of range");
        ++sizes[b];
    }
    return sizes;
}

}  // namespace

std::vector<int> ClusterConfig::ap_sizes() const { return block_sizes(ap_cluster, num_clusters); }
std::vector<int> ClusterConfig::ue_sizes() const { return block_sizes(ue_cluster, num_clusters); }

std::vector<std::vector<int>> ClusterConfig::aps_of_cluster() const {
    std::vector<std::vector<int>> out(num_clusters);
    for (std::size_t i = 0; i < ap_cluster.size(); ++i) out[ap_cluster[i]].push_back(i);
    return out;
}

std::vector<std::vector<int>> ClusterConfig::ues_of_cluster() const {
    std::vector<std::vector<int>> out(num_clusters);
    for (std::size_t i = 0; i < ue_cluster.size(); ++i) out[ue_cluster[i]].push_back(i);
    return out;
}

void ClusterConfig::validate(int max_ues_per_cluster) const {
    if (num_clusters < 1) throw std::invalid_argument("cluster config: no clusters");
    const auto da = ap_sizes();
    const auto du = ue_sizes();
    for (int n = 0; n < num_clusters; ++n) {
        if (da[n] < 1) throw std::invalid_argument("cluster config: empty AP block");
        if (du[n] < 1) throw std::invalid_argument("cluster config: empty UE block");
        if (du[n] > max_ues_per_cluster)
            throw std::invalid_argument("cluster config: UE block exceeds RF-chain bound");
    }
}

std::uint64_t stirling2(int m, int n) {
    check_stirling_args(m, n);
    // Row-by-row recurrence; row[i] = S(row_index, i).
    std::vector<std::uint64_t> row(n + 1, 0);
    row[0] = 1;  // S(0, 0)
    for (int i = 1; i <= m; ++i) {
        for (int j = std::min(i, n); j >= 1; --j) {
            row[j] = checked_add(checked_mul(static_cast<std::uint64_t>(j), row[j]),
                                 j - 1 < i ? row[j - 1] : 0);
        }
        row[0] = 0;
    }
    return row[n];
}

std::uint64_t stirling2_formula(int m, int n) {
    check_stirling_args(m, n);
    // Exact integers: binomials from Pascal's triangle, powers in 128 bits.
    std::vector<unsigned __int128> binom(n + 1, 0);
    binom[0] = 1;
    for (int i = 1; i <= n; ++i)
        for (int j = i; j >= 1; --j) binom[j] += binom[j - 1];

    __int128 acc = 0;
    for (int i = 0; i <= n; ++i) {
        unsigned __int128 pw = 1;
        for (int p = 0; p < m; ++p) pw *= static_cast<unsigned>(n - i);
        const __int128 term = static_cast<__int128>(binom[i]) * static_cast<__int128>(pw);
        acc += (i % 2 == 0) ? term : -term;
    }
    __int128 nf = 1;
    for (int i = 2; i <= n; ++i) nf *= i;
    const __int128 value = acc / nf;
    if (value < 0 || value > static_cast<__int128>(UINT64_MAX))
        throw std::overflow_error("stirling2_formula: result out of range");
    return static_cast<std::uint64_t>(value);
}

std::uint64_t config_count_exact(int m, int k, int n) {
    if (n < 1 || n > m || n > k)
        throw std::invalid_argument("config count: need 1 <= N <= min(M, K)");
    return checked_mul(factorial(n), checked_mul(stirling2(m, n), stirling2(k, n)));
}

double config_count_paper(int m, int k, int n) {
    if (n < 1 || n > m || n > k)
        throw std::invalid_argument("config count: need 1 <= N <= min(M, K)");
    const double nf = static_cast<double>(factorial(n));
    return (nf * nf / 2.0) * static_cast<double>(stirling2(m, n)) *
           static_cast<double>(stirling2(k, n));
}

std::vector<std::vector<int>> partitions_rgs(int count, int blocks) {
    std::vector<std::vector<int>> out;
    visit_partitions(count, blocks, [&](const std::vector<int>& rgs) {
        out.push_back(rgs);
        return true;
    });
    return out;
}

ConfigSpace::ConfigSpace(int num_aps, int num_ues, int num_clusters, int max_ues_per_cluster,
                         std::size_t cap)
    : num_aps_(num_aps), num_ues_(num_ues), num_clusters_(num_clusters),
      max_ues_(max_ues_per_cluster) {
    if (num_clusters < 1 || num_clusters > num_aps || num_clusters > num_ues)
        throw std::invalid_argument("config space: need 1 <= N <= min(M, K)");
    if ((num_ues + num_clusters - 1) / num_clusters > max_ues_per_cluster)
        throw std::invalid_argument("config space: no UE partition satisfies the RF-chain bound");

    std::uint64_t ap_count, n_fact;
    try {
        ap_count = stirling2(num_aps, num_clusters);
        n_fact = factorial(num_clusters);
        if (checked_mul(ap_count, n_fact) > cap)
            throw ActionSpaceTooLarge("action space too large: exceeds the enumeration cap");
    } catch (const std::overflow_error&) {
        throw ActionSpaceTooLarge("action space too large: exceeds the enumeration cap");
    }

    // UE partitions that respect the per-cluster UE bound, in RGS order.
    std::vector<std::vector<int>> ue_parts;
    visit_partitions(num_ues, num_clusters, [&](const std::vector<int>& rgs) {
        const auto sizes = block_sizes(rgs, num_clusters);
        if (*std::max_element(sizes.begin(), sizes.end()) <= max_ues_per_cluster)
            ue_parts.push_back(rgs);
        return ap_count * n_fact * (ue_parts.size() + 1) <= cap + n_fact * ap_count;
    });
    if (ap_count * n_fact * ue_parts.size() > cap)
        throw ActionSpaceTooLarge("action space too large: exceeds the enumeration cap");

    std::vector<int> matching(num_clusters);
    visit_partitions(num_aps, num_clusters, [&](const std::vector<int>& ap_rgs) {
        for (const auto& ue_rgs : ue_parts) {
            std::iota(matching.begin(), matching.end(), 0);
            do {
                ClusterConfig c;
                c.num_clusters = num_clusters;
                c.ap_cluster = ap_rgs;
                // cluster n serves UE block matching[n]
                std::vector<int> inverse(num_clusters);
                for (int n = 0; n < num_clusters; ++n) inverse[matching[n]] = n;
                c.ue_cluster.resize(num_ues);
                for (int j = 0; j < num_ues; ++j) c.ue_cluster[j] = inverse[ue_rgs[j]];
                configs_.push_back(std::move(c));
            } while (std::next_permutation(matching.begin(), matching.end()));
        }
        return true;
    });
    if (configs_.size() > cap)
        throw ActionSpaceTooLarge("action space too large: exceeds the enumeration cap");
}

const ClusterConfig& ConfigSpace::at(std::size_t j) const {
    if (j >= configs_.size()) throw std::out_of_range("config index out of range");
    return configs_[j];
}

std::size_t ConfigSpace::index_of(const ClusterConfig& c) const {
    if (c.num_clusters != num_clusters_ ||
        c.ap_cluster.size() != static_cast<std::size_t>(num_aps_) ||
        c.ue_cluster.size() != static_cast<std::size_t>(num_ues_))
        throw std::invalid_argument("config index: shape mismatch");

    // Canonicalize labels by first occurrence over the AP map, so relabeled
    // copies of the same physical configuration resolve to one index.
    std::vector<int> relabel(num_clusters_, -1);
    int next = 0;
    for (int b : c.ap_cluster) {
        if (b < 0 || b >= num_clusters_)
            throw std::invalid_argument("config index: cluster id out of range");
        if (relabel[b] < 0) relabel[b] = next++;
    }
    if (next != num_clusters_) throw std::invalid_argument("config index: empty AP block");

    ClusterConfig canon;
    canon.num_clusters = num_clusters_;
    canon.ap_cluster.reserve(num_aps_);
    canon.ue_cluster.reserve(num_ues_);
    for (int b : c.ap_cluster) canon.ap_cluster.push_back(relabel[b]);
    for (int b : c.ue_cluster) {
        if (b < 0 || b >= num_clusters_)
            throw std::invalid_argument("config index: cluster id out of range");
        canon.ue_cluster.push_back(relabel[b]);
    }

    for (std::size_t j = 0; j < configs_.size(); ++j)
        if (configs_[j] == canon) return j;
    throw std::invalid_argument("config index: configuration not in the enumerated space");
}

}  // namespace cfmimo
