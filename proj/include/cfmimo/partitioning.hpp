#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cfmimo {

/// Thrown when the enumerated clustering space would exceed the configured cap.
class ActionSpaceTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One labeled partition of M eAPs and K UEs into N cell-free subnetworks.
/// Cluster ids are 0..N-1; cluster n pairs one AP block with one UE block.
struct ClusterConfig {
    std::vector<int> ap_cluster;  // size M, values in [0, N)
    std::vector<int> ue_cluster;  // size K
    int num_clusters = 0;

    std::vector<int> ap_sizes() const;
    std::vector<int> ue_sizes() const;
    std::vector<std::vector<int>> aps_of_cluster() const;
    std::vector<std::vector<int>> ues_of_cluster() const;

    /// Every cluster holds >= 1 AP and >= 1 UE, UE blocks respect the RF-chain
    /// bound (D_U <= max_ues_per_cluster), and the maps are consistent.
    void validate(int max_ues_per_cluster) const;

    bool operator==(const ClusterConfig& o) const {
        return num_clusters == o.num_clusters && ap_cluster == o.ap_cluster &&
               ue_cluster == o.ue_cluster;
    }
};

/// Stirling number of the second kind via the recurrence
/// S(M,N) = N*S(M-1,N) + S(M-1,N-1). Exact; throws on N = 0 or N > M.
std::uint64_t stirling2(int m, int n);

/// The same number via the alternating-sum closed form
/// (1/N!) * sum_i (-1)^i C(N,i) (N-i)^M, evaluated in exact integer arithmetic.
std::uint64_t stirling2_formula(int m, int n);

/// Count of labeled configurations: N! * S(M,N) * S(K,N) (no RF-chain filter).
std::uint64_t config_count_exact(int m, int k, int n);

/// The published closed form (N!/sqrt(2))^2 * S(M,N) * S(K,N), evaluated as
/// printed. Non-integral for N = 1 and diverges from the labeled count for
/// N >= 3; reported for comparison, never used as ground truth.
double config_count_paper(int m, int k, int n);

/// Deterministically ordered clustering action space: AP partitions in
/// restricted-growth-string order, then UE partitions (filtered so every block
/// has at most `max_ues_per_cluster` UEs), then the N! block matchings in
/// lexicographic order.
class ConfigSpace {
public:
    ConfigSpace(int num_aps, int num_ues, int num_clusters, int max_ues_per_cluster,
                std::size_t cap = 100000);

    std::size_t size() const { return configs_.size(); }
    const ClusterConfig& at(std::size_t j) const;        // config_from_index
    std::size_t index_of(const ClusterConfig& c) const;  // config_index

    int num_aps() const { return num_aps_; }
    int num_ues() const { return num_ues_; }
    int num_clusters() const { return num_clusters_; }
    int max_ues_per_cluster() const { return max_ues_; }

private:
    int num_aps_, num_ues_, num_clusters_, max_ues_;
    std::vector<ClusterConfig> configs_;
};

/// All restricted growth strings of length `count` with exactly `blocks` blocks,
/// in lexicographic order (shared by the ConfigSpace enumeration and tests).
std::vector<std::vector<int>> partitions_rgs(int count, int blocks);

}  // namespace cfmimo
