#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace cfmimo {

/// System-wide scalar parameters. Defaults follow the simulation setup:
/// 24 GHz carrier, 3 paths, -169 dBm/Hz noise PSD, discount 0.01, learning
/// rate 0.001, 2000 episodes x 200 steps.
struct NetworkConfig {
    int num_aps = 4;       // M
    int num_ues = 3;       // K
    int num_clusters = 2;  // N

    std::array<int, 2> ap_grid{2, 1};  // antenna columns x rows at each eAP; a = product
    std::array<int, 2> ue_grid{1, 1};  // at each UE; u = product

    int num_paths = 3;            // per-link mmWave paths
    double rician_factor = 10.0;  // LoS-to-NLoS power ratio, linear
    double spacing_ratio = 0.5;   // antenna spacing d / wavelength

    double tx_power_dbm = 35.0;       // per-eAP power budget P
    double noise_psd_dbm_hz = -169.0;
    double bandwidth_hz = 100e6;
    double pathloss_exponent = 2.0;
    double radius_m = 18.0;           // node placement disc
    double carrier_ghz = 24.0;
    double sic_margin_dbm = 1.0;      // SIC sensitivity, mapped to the P3 margin

    int cluster_period = 1;    // slots between re-clustering (tau)
    double discount = 0.01;    // zeta
    double learn_rate = 0.001; // alpha
    int episodes_cluster = 2000;
    int steps_cluster = 200;
    int episodes_beam = 2000;
    int steps_beam = 200;

    int antennas_per_ap() const { return ap_grid[0] * ap_grid[1]; }
    int antennas_per_ue() const { return ue_grid[0] * ue_grid[1]; }
    int rf_chains() const { return num_ues - num_clusters + 1; }  // L = K - N + 1

    double tx_power_w() const { return dbm_to_watts(tx_power_dbm); }
    double sic_margin_w() const { return dbm_to_watts(sic_margin_dbm); }
    double noise_power_w() const {
        return dbm_to_watts(noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz));
    }
    double wavelength_m() const { return 3.0e8 / (carrier_ghz * 1.0e9); }

    static double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

    void validate() const {
        if (num_clusters < 1 || num_clusters > num_aps)
            throw std::invalid_argument("config: need 1 <= N <= M");
        if (num_ues < num_clusters) throw std::invalid_argument("config: need K >= N");
        if (num_paths < 1) throw std::invalid_argument("config: need at least one path");
        if (rician_factor <= 0.0) throw std::invalid_argument("config: Rician factor must be > 0");
        if (ap_grid[0] < 1 || ap_grid[1] < 1 || ue_grid[0] < 1 || ue_grid[1] < 1)
            throw std::invalid_argument("config: antenna grids must be at least 1x1");
        if (antennas_per_ap() <= antennas_per_ue())
            throw std::invalid_argument("config: eAP antenna count must exceed UE antenna count");
        if (cluster_period < 1) throw std::invalid_argument("config: cluster period must be >= 1");
        if (episodes_cluster < 1 || steps_cluster < 1 || episodes_beam < 1 || steps_beam < 1)
            throw std::invalid_argument("config: episode/step counts must be >= 1");
        if (discount < 0.0 || discount >= 1.0)
            throw std::invalid_argument("config: discount must lie in [0, 1)");
        if (learn_rate <= 0.0) throw std::invalid_argument("config: learning rate must be > 0");
    }
};

}  // namespace cfmimo
