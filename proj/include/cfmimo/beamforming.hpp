#pragma once

#include <vector>

#include "cfmimo/channel.hpp"
#include "cfmimo/network_config.hpp"
#include "cfmimo/partitioning.hpp"
#include "cfmimo/svd.hpp"

namespace cfmimo {

using RealVec = std::vector<double>;

/// Analog/digital beamforming variables. `steer[m]` is the a x D_U phase matrix
/// of eAP m (D_U = UE count of m's cluster), `combiner[k]` the unit-modulus
/// combining vector of UE k, `digital[m]` the real beamforming columns indexed
/// by beam slot. Beam slot z of a cluster is its z-th UE in ascending global id.
struct BeamState {
    std::vector<ComplexMatrix> steer;
    std::vector<CVec> combiner;
    std::vector<CVec> combiner_prev;
    std::vector<std::vector<RealVec>> digital;
};

/// Beam slot of UE `ue` within its cluster (position among the cluster's UEs in
/// ascending global id).
int beam_slot(const ClusterConfig& config, int ue);

/// All-ones phases everywhere, unit-norm uniform digital columns.
BeamState make_all_ones_state(const ClusterConfig& config, const NetworkConfig& cfg);

/// Checks the unit-modulus and column-norm constraints; throws on violation.
void validate_beam_state(const BeamState& state, const ClusterConfig& config,
                         const NetworkConfig& cfg);

/// Effective rows 𝓗[k][m] = combiner_k^T * H_km * steer_m for every UE/AP pair,
/// plus the per-UE noise factor (sigma * D_U / (2P))^2.
struct EffectiveChannels {
    std::vector<std::vector<CVec>> rows;
    std::vector<double> noise_factor;
};

CVec effective_channel(const CVec& delta, const ComplexMatrix& h, const ComplexMatrix& steer);

EffectiveChannels compute_effective(const ClusterConfig& config, const ChannelSet& channels,
                                    const BeamState& state, const NetworkConfig& cfg);

/// Per-link SVD factors and null bases, computed once per channel set.
struct LinkSvds {
    std::vector<std::vector<SvdFactors>> factors;  // [ue][ap]
    std::vector<std::vector<NullBases>> bases;
};
LinkSvds compute_link_svds(const ChannelSet& channels);

/// Secrecy sum power gain of one cluster: range-side projection power of the
/// in-cluster links plus null-side projection power of the out-of-cluster links
/// (those evaluated with the previous-slot combiners).
double beamsteer_objective(int cluster, const ClusterConfig& config, const LinkSvds& svds,
                           const BeamState& state);

/// SIC decode order of a cluster's UEs: ascending effective-gain-to-ISNI ratio,
/// ties broken by UE index. With a single cluster the ISNI denominator is 1.
std::vector<int> order_ues(int cluster, const ClusterConfig& config,
                           const EffectiveChannels& eff);

using SicOrders = std::vector<std::vector<int>>;  // [cluster] -> UE ids in decode order
SicOrders order_all(const ClusterConfig& config, const EffectiveChannels& eff);

/// Post-SIC SINR of a UE: intra-cluster interference only from UEs later in the
/// decode order; inter-subnetwork terms weighted by (D_U[n]/D_U[l])^2.
double sinr_post_sic(int ue, const ClusterConfig& config, const EffectiveChannels& eff,
                     const BeamState& state, const SicOrders& orders, const NetworkConfig& cfg);

/// Pre-SIC SINR: same structure with intra-cluster interference from every other
/// UE of the cluster.
double sinr_pre_sic(int ue, const ClusterConfig& config, const EffectiveChannels& eff,
                    const BeamState& state, const SicOrders& orders, const NetworkConfig& cfg);

struct RateReport {
    std::vector<double> gamma;        // per UE, post-SIC
    std::vector<double> rate_bps_hz;  // log2(1 + gamma)
    double sum_rate = 0.0;
};

RateReport sum_rate(const ClusterConfig& config, const EffectiveChannels& eff,
                    const BeamState& state, const SicOrders& orders, const NetworkConfig& cfg);

struct SolveOptions {
    int max_iterations = 500;
    double gradient_tol = 1e-6;
};

struct SolveResult {
    bool feasible = true;
    bool used_zero_margin = false;  // margin constraint retried at epsilon = 0
    double objective = 0.0;         // cluster sum-rate at the returned point
    double start_objective = 0.0;
    double kkt_residual = 0.0;      // projected-gradient norm over the active set
    int iterations = 0;
};

/// Projected gradient ascent on the cluster's digital columns under the SIC
/// power-ordering margin and the unit column-norm cap. Other clusters' columns
/// stay frozen. Updates `state.digital` for the cluster's eAPs.
SolveResult solve_digital_beamforming(int cluster, const ClusterConfig& config,
                                      const EffectiveChannels& eff, BeamState& state,
                                      const SicOrders& orders, const NetworkConfig& cfg,
                                      double epsilon_w, const SolveOptions& opts = {});

enum class SteeringMode { conventional, matched, p2_refined, leakage_aware };

/// Fills steer/combiner phases: `conventional` sets every phase to zero (the
/// all-digital baseline), `matched` aligns them with each link's dominant
/// singular vectors, `p2_refined` additionally runs a coordinate phase ascent
/// on the per-cluster secrecy sum power objective. Digital columns are left
/// untouched.
void apply_steering(SteeringMode mode, const ClusterConfig& config, const ChannelSet& channels,
                    BeamState& state);

/// Coordinate phase ascent on beamsteer_objective for every cluster, in place.
void refine_steering_p2(const ClusterConfig& config, const LinkSvds& svds, BeamState& state,
                        int sweeps = 2);

/// Coordinate phase ascent on the per-beam desired-power to cross-cluster
/// leakage ratio (steer matrices), then on the per-UE received desired-power to
/// ISNI ratio (combiners), in place.
void refine_steering_leakage(const ClusterConfig& config, const ChannelSet& channels,
                             BeamState& state, int sweeps = 2);

struct PipelineResult {
    RateReport rates;
    std::vector<SolveResult> solves;  // per cluster
    EffectiveChannels eff;
    SicOrders orders;
};

/// Full per-slot chain: steering, effective channels, UE ordering, per-cluster
/// digital solves (other clusters frozen at their starting columns), final
/// post-SIC rates. When `carry` is non-null its combiners become the
/// previous-slot combiners and the solved state is written back through it.
PipelineResult run_pipeline(const ClusterConfig& config, const ChannelSet& channels,
                            const NetworkConfig& cfg, SteeringMode mode,
                            BeamState* carry = nullptr);

/// All-digital comparison point: zero phases everywhere, then the digital solve.
PipelineResult conventional_baseline(const ClusterConfig& config, const ChannelSet& channels,
                                     const NetworkConfig& cfg);

}  // namespace cfmimo
