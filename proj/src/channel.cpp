#include "cfmimo/channel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cfmimo {

namespace {

std::array<double, 2> disc_point(double radius, RngStream& rng) {
    const double r = radius * std::sqrt(rng.uniform());
    const double phi = rng.uniform(0.0, 2.0 * M_PI);
    return {r * std::cos(phi), r * std::sin(phi)};
}

void append_fmt(std::string& out, const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    out += buf;
}

// Sampling-side preconditions only; the a > u null-space rule is enforced by the
// beamforming pipeline, not here, so degenerate antenna layouts stay testable.
void check_sampling_config(const NetworkConfig& cfg) {
    if (cfg.num_aps < 1 || cfg.num_ues < 1)
        throw std::invalid_argument("channel: need at least one eAP and one UE");
    if (cfg.num_paths < 1) throw std::invalid_argument("channel: need at least one path");
    if (cfg.rician_factor <= 0.0) throw std::invalid_argument("channel: kappa must be > 0");
    if (cfg.ap_grid[0] < 1 || cfg.ap_grid[1] < 1 || cfg.ue_grid[0] < 1 || cfg.ue_grid[1] < 1)
        throw std::invalid_argument("channel: antenna grids must be at least 1x1");
    if (cfg.radius_m < 0.0) throw std::invalid_argument("channel: radius must be >= 0");
}

}  // namespace

CVec upa_response(double elev, double azim, std::array<int, 2> grid, double spacing_ratio) {
    const int cols = grid[0], rows = grid[1];
    if (cols < 1 || rows < 1) throw std::invalid_argument("upa_response: grid must be >= 1x1");
    CVec v(static_cast<std::size_t>(cols) * rows);
    const double se_ca = std::sin(elev) * std::cos(azim);
    const double sa = std::sin(azim);
    for (int w = 0; w < cols; ++w) {
        for (int z = 0; z < rows; ++z) {
            const double phase = 2.0 * M_PI * spacing_ratio * (w * se_ca + z * sa);
            v[static_cast<std::size_t>(w) * rows + z] = std::polar(1.0, phase);
        }
    }
    return v;
}

CVec sample_path_gains(int num_paths, double rician_factor, RngStream& rng) {
    if (num_paths < 1) throw std::invalid_argument("sample_path_gains: need at least one path");
    if (rician_factor <= 0.0) throw std::invalid_argument("sample_path_gains: kappa must be > 0");
    const double scale = std::sqrt(1.0 / (rician_factor + num_paths - 1));
    CVec h(num_paths);
    h[0] = scale * rng.complex_normal(rician_factor);
    for (int l = 1; l < num_paths; ++l) h[l] = scale * rng.complex_normal(1.0);
    return h;
}

double large_scale_gain(double distance_m, double wavelength_m, double exponent) {
    constexpr double kRefDistance = 1.0;
    const double d = std::max(distance_m, kRefDistance);
    const double anchor = wavelength_m / (4.0 * M_PI * kRefDistance);
    return anchor * anchor * std::pow(kRefDistance / d, exponent);
}

Geometry sample_geometry(const NetworkConfig& cfg, RngStream& rng) {
    check_sampling_config(cfg);
    Geometry g;
    g.ap_positions.reserve(cfg.num_aps);
    g.ue_positions.reserve(cfg.num_ues);
    for (int m = 0; m < cfg.num_aps; ++m) g.ap_positions.push_back(disc_point(cfg.radius_m, rng));
    for (int k = 0; k < cfg.num_ues; ++k) g.ue_positions.push_back(disc_point(cfg.radius_m, rng));

    g.links.assign(cfg.num_ues, std::vector<LinkGeometry>(cfg.num_aps));
    for (int k = 0; k < cfg.num_ues; ++k) {
        for (int m = 0; m < cfg.num_aps; ++m) {
            LinkGeometry& link = g.links[k][m];
            const double dx = g.ue_positions[k][0] - g.ap_positions[m][0];
            const double dy = g.ue_positions[k][1] - g.ap_positions[m][1];
            link.distance_m = std::hypot(dx, dy);
            link.large_scale_gain =
                large_scale_gain(link.distance_m, cfg.wavelength_m(), cfg.pathloss_exponent);

            link.paths.resize(cfg.num_paths);
            PathAngles& los = link.paths[0];
            los.aod_elev = 0.0;
            los.aod_azim = std::atan2(dy, dx);
            los.aoa_elev = 0.0;
            los.aoa_azim = std::atan2(-dy, -dx);
            for (int l = 1; l < cfg.num_paths; ++l) {
                PathAngles& p = link.paths[l];
                p.aod_elev = rng.uniform(-M_PI / 2.0, M_PI / 2.0);
                p.aod_azim = rng.uniform(-M_PI, M_PI);
                p.aoa_elev = rng.uniform(-M_PI / 2.0, M_PI / 2.0);
                p.aoa_azim = rng.uniform(-M_PI, M_PI);
            }
            link.gains = sample_path_gains(cfg.num_paths, cfg.rician_factor, rng);
        }
    }
    return g;
}

ChannelSet sample_channel(const Geometry& geom, const NetworkConfig& cfg, RngStream& rng,
                          long slot_index) {
    const int u = cfg.antennas_per_ue();
    const int a = cfg.antennas_per_ap();
    if (geom.links.size() != static_cast<std::size_t>(cfg.num_ues) ||
        geom.links.empty() || geom.links[0].size() != static_cast<std::size_t>(cfg.num_aps))
        throw std::invalid_argument("sample_channel: geometry inconsistent with config");

    ChannelSet set;
    set.slot_index = slot_index;
    set.matrices.assign(cfg.num_ues, std::vector<ComplexMatrix>(cfg.num_aps));
    for (int k = 0; k < cfg.num_ues; ++k) {
        for (int m = 0; m < cfg.num_aps; ++m) {
            const LinkGeometry& link = geom.links[k][m];
            const CVec gains = sample_path_gains(cfg.num_paths, cfg.rician_factor, rng);
            const double amp = std::sqrt(link.large_scale_gain);
            ComplexMatrix h(u, a);
            for (int l = 0; l < cfg.num_paths; ++l) {
                const PathAngles& p = link.paths[l];
                const CVec bu = upa_response(p.aoa_elev, p.aoa_azim, cfg.ue_grid, cfg.spacing_ratio);
                const CVec ba = upa_response(p.aod_elev, p.aod_azim, cfg.ap_grid, cfg.spacing_ratio);
                const cxd coeff = amp * gains[l];
                for (int r = 0; r < u; ++r)
                    for (int c = 0; c < a; ++c) h(r, c) += coeff * bu[r] * std::conj(ba[c]);
            }
            set.matrices[k][m] = std::move(h);
        }
    }
    return set;
}

void dump_geometry_csv(const Geometry& geom, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_geometry_csv: cannot write " + path);
    out << "k,m,path,gain_re,gain_im,aod_elev,aod_azim,aoa_elev,aoa_azim,large_scale_gain\n";
    for (std::size_t k = 0; k < geom.links.size(); ++k) {
        for (std::size_t m = 0; m < geom.links[k].size(); ++m) {
            const LinkGeometry& link = geom.links[k][m];
            for (std::size_t l = 0; l < link.paths.size(); ++l) {
                std::string row = std::to_string(k) + "," + std::to_string(m) + "," + std::to_string(l);
                const double cells[] = {link.gains[l].real(),    link.gains[l].imag(),
                                        link.paths[l].aod_elev,  link.paths[l].aod_azim,
                                        link.paths[l].aoa_elev,  link.paths[l].aoa_azim,
                                        link.large_scale_gain};
                for (double c : cells) {
                    row += ',';
                    append_fmt(row, "%.17g", c);
                }
                out << row << '\n';
            }
        }
    }
}

void dump_channelset_csv(const ChannelSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("dump_channelset_csv: cannot write " + path);
    out << "slot,k,m,row,col,re,im\n";
    for (std::size_t k = 0; k < set.matrices.size(); ++k) {
        for (std::size_t m = 0; m < set.matrices[k].size(); ++m) {
            const ComplexMatrix& h = set.matrices[k][m];
            for (std::size_t r = 0; r < h.rows(); ++r) {
                for (std::size_t c = 0; c < h.cols(); ++c) {
                    std::string row = std::to_string(set.slot_index) + "," + std::to_string(k) + "," +
                                      std::to_string(m) + "," + std::to_string(r) + "," +
                                      std::to_string(c);
                    row += ',';
                    append_fmt(row, "%.17g", h(r, c).real());
                    row += ',';
                    append_fmt(row, "%.17g", h(r, c).imag());
                    out << row << '\n';
                }
            }
        }
    }
}

}  // namespace cfmimo
