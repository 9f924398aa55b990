#include <cstdio>

#include "cfmimo/beamforming.hpp"
#include "cfmimo/rng.hpp"

using namespace cfmimo;

int main() {
    NetworkConfig cfg;
    cfg.num_aps = 4;
    cfg.num_ues = 4;
    cfg.num_clusters = 2;
    cfg.ap_grid = {2, 2};
    cfg.ue_grid = {2, 1};
    cfg.tx_power_dbm = 35.0;

    ClusterConfig config;
    config.num_clusters = 2;
    config.ap_cluster = {0, 0, 1, 1};
    config.ue_cluster = {0, 0, 1, 1};

    RngStream rng(1234);
    for (int t = 0; t < 12; ++t) {
        Geometry geom = sample_geometry(cfg, rng);
        ChannelSet set = sample_channel(geom, cfg, rng);
        PipelineResult hyb = run_pipeline(config, set, cfg, SteeringMode::matched);
        PipelineResult conv = conventional_baseline(config, set, cfg);
        const char* tag = hyb.rates.sum_rate > conv.rates.sum_rate ? "WIN " : "LOSS";
        std::printf("%s draw %2d: hyb %8.3f conv %8.3f | hyb g: %.2e %.2e %.2e %.2e | conv g: %.2e %.2e %.2e %.2e | it %d %d\n",
                    tag, t, hyb.rates.sum_rate, conv.rates.sum_rate, hyb.rates.gamma[0],
                    hyb.rates.gamma[1], hyb.rates.gamma[2], hyb.rates.gamma[3],
                    conv.rates.gamma[0], conv.rates.gamma[1], conv.rates.gamma[2],
                    conv.rates.gamma[3], hyb.solves[0].iterations, hyb.solves[1].iterations);
    }
    return 0;
}
