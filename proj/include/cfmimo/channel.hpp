#pragma once

#include <array>
#include <string>
#include <vector>

#include "cfmimo/complex_matrix.hpp"
#include "cfmimo/network_config.hpp"
#include "cfmimo/rng.hpp"

namespace cfmimo {

/// Angles of one propagation path: departure (elevation, azimuth) at the eAP and
/// arrival (elevation, azimuth) at the UE, radians.
struct PathAngles {
    double aod_elev = 0.0, aod_azim = 0.0;
    double aoa_elev = 0.0, aoa_azim = 0.0;
};

struct LinkGeometry {
    std::vector<PathAngles> paths;  // length = num_paths; path 0 is LoS
    CVec gains;                     // complex path gains h_l for the draw that built this geometry
    double large_scale_gain = 1.0;  // linear power gain
    double distance_m = 0.0;
};

struct Geometry {
    std::vector<std::array<double, 2>> ap_positions;  // meters
    std::vector<std::array<double, 2>> ue_positions;
    std::vector<std::vector<LinkGeometry>> links;  // [ue][ap]
};

/// Channel matrices H[k][m] (u x a) for one time slot.
struct ChannelSet {
    std::vector<std::vector<ComplexMatrix>> matrices;  // [ue][ap]
    long slot_index = 0;
};

/// Uniform planar array response. Entry for antenna index pair (w, z),
/// w = 0..cols-1 (w-major flattening: index = w*rows + z), equals
/// exp(j*2*pi*spacing_ratio*(w*sin(elev)*cos(azim) + z*sin(azim))).
CVec upa_response(double elev, double azim, std::array<int, 2> grid, double spacing_ratio);

/// Clustered-model path gains: h_l = sqrt(1/(kappa+L-1)) * alpha_l with
/// alpha_1 ~ CN(0, kappa) and alpha_l ~ CN(0, 1) for l >= 2.
CVec sample_path_gains(int num_paths, double rician_factor, RngStream& rng);

/// Free-space-anchored large-scale gain: (lambda/(4 pi d_ref))^2 * (d_ref/d)^exponent,
/// d_ref = 1 m; distances are floored at d_ref.
double large_scale_gain(double distance_m, double wavelength_m, double exponent);

Geometry sample_geometry(const NetworkConfig& cfg, RngStream& rng);

/// Assembles H[k][m] from the geometry's angles and large-scale gains with path
/// gains redrawn from `rng` (per-slot small-scale fading). Hold the returned set
/// to model a fixed-CSI schedule.
ChannelSet sample_channel(const Geometry& geom, const NetworkConfig& cfg, RngStream& rng,
                          long slot_index = 0);

/// Fixture dumps. Geometry columns:
///   k,m,path,gain_re,gain_im,aod_elev,aod_azim,aoa_elev,aoa_azim,large_scale_gain
/// Channel columns:
///   slot,k,m,row,col,re,im
void dump_geometry_csv(const Geometry& geom, const std::string& path);
void dump_channelset_csv(const ChannelSet& set, const std::string& path);

}  // namespace cfmimo
