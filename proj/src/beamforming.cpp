#include "cfmimo/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Dense>

namespace cfmimo {

namespace {

constexpr double kLn2 = 0.6931471805599453;

cxd row_dot_real(const CVec& row, const RealVec& w) {
    cxd s{};
    for (std::size_t z = 0; z < row.size(); ++z) s += row[z] * w[z];
    return s;
}

double col_norm(const RealVec& w) {
    double s = 0.0;
    for (double x : w) s += x * x;
    return std::sqrt(s);
}

// |delta| = 1 phases from a complex reference vector (entry 1 where the
// reference vanishes).
CVec unit_phases(const CVec& ref, bool conjugated) {
    CVec out(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double mag = std::abs(ref[i]);
        if (mag < 1e-300) {
            out[i] = 1.0;
        } else {
            out[i] = conjugated ? std::conj(ref[i]) / mag : ref[i] / mag;
        }
    }
    return out;
}

}  // namespace

int beam_slot(const ClusterConfig& config, int ue) {
    const int n = config.ue_cluster[ue];
    int slot = 0;
    for (int k = 0; k < ue; ++k)
        if (config.ue_cluster[k] == n) ++slot;
    return slot;
}

BeamState make_all_ones_state(const ClusterConfig& config, const NetworkConfig& cfg) {
    const int a = cfg.antennas_per_ap();
    const int u = cfg.antennas_per_ue();
    const auto du = config.ue_sizes();

    BeamState s;
    s.steer.resize(cfg.num_aps);
    s.digital.resize(cfg.num_aps);
    for (int m = 0; m < cfg.num_aps; ++m) {
        const int d = du[config.ap_cluster[m]];
        s.steer[m] = ComplexMatrix(a, d, cxd{1.0, 0.0});
        s.digital[m].assign(d, RealVec(d, 1.0 / std::sqrt(static_cast<double>(d))));
    }
    s.combiner.assign(cfg.num_ues, CVec(u, cxd{1.0, 0.0}));
    s.combiner_prev = s.combiner;
    return s;
}

void validate_beam_state(const BeamState& state, const ClusterConfig& config,
                         const NetworkConfig& cfg) {
    const auto du = config.ue_sizes();
    for (int m = 0; m < cfg.num_aps; ++m) {
        const int d = du[config.ap_cluster[m]];
        const ComplexMatrix& a = state.steer[m];
        if (a.rows() != static_cast<std::size_t>(cfg.antennas_per_ap()) ||
            a.cols() != static_cast<std::size_t>(d))
            throw std::invalid_argument("beam state: steer matrix shape mismatch");
        for (const auto& e : a.data())
            if (std::abs(std::abs(e) - 1.0) > 1e-9)
                throw std::invalid_argument("beam state: steer entry off the unit circle");
        if (state.digital[m].size() != static_cast<std::size_t>(d))
            throw std::invalid_argument("beam state: digital column count mismatch");
        for (const auto& w : state.digital[m])
            if (w.size() != static_cast<std::size_t>(d) || col_norm(w) > 1.0 + 1e-9)
                throw std::invalid_argument("beam state: digital column violates the norm cap");
    }
    for (const auto& delta : state.combiner)
        for (const auto& e : delta)
            if (std::abs(std::abs(e) - 1.0) > 1e-9)
                throw std::invalid_argument("beam state: combiner entry off the unit circle");
}

CVec effective_channel(const CVec& delta, const ComplexMatrix& h, const ComplexMatrix& steer) {
    if (delta.size() != h.rows() || h.cols() != steer.rows())
        throw std::invalid_argument("effective_channel: dimension mismatch");
    return row_times_matrix(row_times_matrix(delta, h), steer);
}

EffectiveChannels compute_effective(const ClusterConfig& config, const ChannelSet& channels,
                                    const BeamState& state, const NetworkConfig& cfg) {
    EffectiveChannels eff;
    eff.rows.assign(cfg.num_ues, std::vector<CVec>(cfg.num_aps));
    eff.noise_factor.assign(cfg.num_ues, 0.0);
    const auto du = config.ue_sizes();
    const double sigma = cfg.noise_power_w();
    const double p = cfg.tx_power_w();
    for (int k = 0; k < cfg.num_ues; ++k) {
        for (int m = 0; m < cfg.num_aps; ++m)
            eff.rows[k][m] = effective_channel(state.combiner[k], channels.matrices[k][m],
                                               state.steer[m]);
        const double f = sigma * du[config.ue_cluster[k]] / (2.0 * p);
        eff.noise_factor[k] = f * f;
    }
    return eff;
}

LinkSvds compute_link_svds(const ChannelSet& channels) {
    LinkSvds out;
    const std::size_t nk = channels.matrices.size();
    out.factors.resize(nk);
    out.bases.resize(nk);
    for (std::size_t k = 0; k < nk; ++k) {
        const std::size_t nm = channels.matrices[k].size();
        out.factors[k].reserve(nm);
        out.bases[k].reserve(nm);
        for (std::size_t m = 0; m < nm; ++m) {
            out.factors[k].push_back(svd(channels.matrices[k][m]));
            out.bases[k].push_back(null_bases(out.factors[k].back()));
        }
    }
    return out;
}

double beamsteer_objective(int cluster, const ClusterConfig& config, const LinkSvds& svds,
                           const BeamState& state) {
    const auto aps = config.aps_of_cluster();
    const auto ues = config.ues_of_cluster();
    double total = 0.0;
    for (int m : aps[cluster]) {
        const ComplexMatrix& steer = state.steer[m];
        for (int n = 0; n < config.num_clusters; ++n) {
            const bool own = (n == cluster);
            for (int k : ues[n]) {
                const SvdFactors& f = svds.factors[k][m];
                const NullBases& b = svds.bases[k][m];
                const CVec& delta = own ? state.combiner[k] : state.combiner_prev[k];
                const CVec drow = project_vector(delta, own ? b.u1 : b.u0);
                const ComplexMatrix arange = project_matrix(steer, own ? b.v1 : b.v0);
                // drow (1 x u) * Sigma (u x a) * projected steer (a x D)
                CVec scaled(f.v.cols(), cxd{});
                for (std::size_t i = 0; i < f.sigma.size(); ++i) scaled[i] = drow[i] * f.sigma[i];
                const CVec prod = row_times_matrix(scaled, arange);
                double power = 0.0;
                for (const auto& e : prod) power += std::norm(e);
                total += power;
            }
        }
    }
    return total;
}

std::vector<int> order_ues(int cluster, const ClusterConfig& config,
                           const EffectiveChannels& eff) {
    const auto aps = config.aps_of_cluster();
    const auto ues = config.ues_of_cluster();
    std::vector<int> order = ues[cluster];
    std::vector<double> metric(order.size());
    for (std::size_t idx = 0; idx < order.size(); ++idx) {
        const int k = order[idx];
        double num = 0.0;
        for (int m : aps[cluster])
            for (const auto& e : eff.rows[k][m]) num += std::norm(e);
        double den = 0.0;
        if (config.num_clusters > 1) {
            for (int l = 0; l < config.num_clusters; ++l) {
                if (l == cluster) continue;
                for (int m : aps[l])
                    for (const auto& e : eff.rows[k][m]) den += std::norm(e);
            }
        } else {
            den = 1.0;  // single cluster: order by the numerator alone
        }
        metric[idx] = den > 0.0 ? num / den : num;
    }
    std::vector<std::size_t> perm(order.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t i, std::size_t j) {
        if (metric[i] != metric[j]) return metric[i] < metric[j];
        return order[i] < order[j];
    });
    std::vector<int> out(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) out[i] = order[perm[i]];
    return out;
}

SicOrders order_all(const ClusterConfig& config, const EffectiveChannels& eff) {
    SicOrders orders(config.num_clusters);
    for (int n = 0; n < config.num_clusters; ++n) orders[n] = order_ues(n, config, eff);
    return orders;
}

namespace {

double sinr_impl(int ue, const ClusterConfig& config, const EffectiveChannels& eff,
                 const BeamState& state, const SicOrders& orders, const NetworkConfig& cfg,
                 bool post_sic) {
    const int n = config.ue_cluster[ue];
    const auto aps = config.aps_of_cluster();
    const auto du = config.ue_sizes();
    const auto& order = orders[n];
    const int pos = static_cast<int>(std::find(order.begin(), order.end(), ue) - order.begin());

    double desired = 0.0, iui = 0.0, isni = 0.0;
    for (int m : aps[n]) {
        const CVec& row = eff.rows[ue][m];
        desired += std::norm(row_dot_real(row, state.digital[m][beam_slot(config, ue)]));
        for (int j = 0; j < du[n]; ++j) {
            const int other = order[j];
            if (other == ue) continue;
            if (post_sic && j <= pos) continue;  // earlier-decoded UEs are cancelled
            iui += std::norm(row_dot_real(row, state.digital[m][beam_slot(config, other)]));
        }
    }
    const auto ues = config.ues_of_cluster();
    for (int l = 0; l < config.num_clusters; ++l) {
        if (l == n) continue;
        const double weight = static_cast<double>(du[n]) / du[l];
        double acc = 0.0;
        for (int m : aps[l]) {
            const CVec& row = eff.rows[ue][m];
            for (int k : ues[l])
                acc += std::norm(row_dot_real(row, state.digital[m][beam_slot(config, k)]));
        }
        isni += weight * weight * acc;
    }
    const double noise = eff.noise_factor[ue] * cfg.antennas_per_ue();
    return desired / (iui + isni + noise);
}

}  // namespace

double sinr_post_sic(int ue, const ClusterConfig& config, const EffectiveChannels& eff,
                     const BeamState& state, const SicOrders& orders, const NetworkConfig& cfg) {
    return sinr_impl(ue, config, eff, state, orders, cfg, true);
}

double sinr_pre_sic(int ue, const ClusterConfig& config, const EffectiveChannels& eff,
                    const BeamState& state, const SicOrders& orders, const NetworkConfig& cfg) {
    return sinr_impl(ue, config, eff, state, orders, cfg, false);
}

RateReport sum_rate(const ClusterConfig& config, const EffectiveChannels& eff,
                    const BeamState& state, const SicOrders& orders, const NetworkConfig& cfg) {
    RateReport r;
    r.gamma.resize(cfg.num_ues);
    r.rate_bps_hz.resize(cfg.num_ues);
    for (int k = 0; k < cfg.num_ues; ++k) {
        r.gamma[k] = sinr_post_sic(k, config, eff, state, orders, cfg);
        r.rate_bps_hz[k] = std::log2(1.0 + r.gamma[k]);
        r.sum_rate += r.rate_bps_hz[k];
    }
    return r;
}

// ---------------------------------------------------------------------------
// Digital beamforming solve (projected gradient ascent)
// ---------------------------------------------------------------------------

namespace {

// Columns of one cluster laid out as [ap][sic position] -> RealVec.
using Cols = std::vector<std::vector<RealVec>>;

struct ClusterProblem {
    int dim = 0;  // D_U of the cluster
    int num_aps = 0;
    std::vector<std::vector<CVec>> rows;  // [sic position][ap] effective row
    std::vector<double> constant_den;     // frozen ISNI + noise per sic position
    double epsilon = 0.0;

    double desired_power(const Cols& x, int i) const {
        double s = 0.0;
        for (int m = 0; m < num_aps; ++m) s += std::norm(row_dot_real(rows[i][m], x[m][i]));
        return s;
    }

    // Power of SIC-position z's beam observed at position i.
    double cross_power(const Cols& x, int i, int z) const {
        double s = 0.0;
        for (int m = 0; m < num_aps; ++m) s += std::norm(row_dot_real(rows[i][m], x[m][z]));
        return s;
    }

    double objective(const Cols& x) const {
        double f = 0.0;
        for (int i = 0; i < dim; ++i) {
            double iui = 0.0;
            for (int j = i + 1; j < dim; ++j) iui += cross_power(x, i, j);
            const double den = iui + constant_den[i];
            f += std::log2(1.0 + desired_power(x, i) / den);
        }
        return f;
    }

    void gradient(const Cols& x, Cols& g) const {
        for (int m = 0; m < num_aps; ++m)
            for (int z = 0; z < dim; ++z) std::fill(g[m][z].begin(), g[m][z].end(), 0.0);
        for (int i = 0; i < dim; ++i) {
            double iui = 0.0;
            for (int j = i + 1; j < dim; ++j) iui += cross_power(x, i, j);
            const double den = iui + constant_den[i];
            const double s = desired_power(x, i);
            const double dfds = 1.0 / (kLn2 * (den + s));
            const double dfdden = -s / (kLn2 * den * (den + s));
            for (int m = 0; m < num_aps; ++m) {
                const CVec& row = rows[i][m];
                {  // own column
                    const cxd rw = row_dot_real(row, x[m][i]);
                    for (int q = 0; q < dim; ++q)
                        g[m][i][q] += dfds * 2.0 *
                                      (rw.real() * row[q].real() + rw.imag() * row[q].imag());
                }
                for (int j = i + 1; j < dim; ++j) {  // interfering columns
                    const cxd rw = row_dot_real(row, x[m][j]);
                    for (int q = 0; q < dim; ++q)
                        g[m][j][q] += dfdden * 2.0 *
                                      (rw.real() * row[q].real() + rw.imag() * row[q].imag());
                }
            }
        }
    }

    double margin_lhs(const Cols& x, int i, int d) const {
        double lhs = cross_power(x, i, d);
        for (int v = d + 1; v <= i; ++v) lhs -= cross_power(x, i, v);
        return lhs;
    }

    // Clamp columns into the unit balls, then restore the SIC power-ordering
    // margins by scaling down interfering columns. Returns false when the
    // margin cannot be restored.
    bool project(Cols& x, std::string* violation = nullptr) const {
        for (int m = 0; m < num_aps; ++m)
            for (int z = 0; z < dim; ++z) {
                const double nrm = col_norm(x[m][z]);
                if (nrm > 1.0)
                    for (double& q : x[m][z]) q /= nrm;
            }
        for (int pass = 0; pass < 50; ++pass) {
            bool dirty = false;
            for (int i = 1; i < dim; ++i) {
                for (int d = 0; d < i; ++d) {
                    if (margin_lhs(x, i, d) >= epsilon - 1e-12) continue;
                    double pd = cross_power(x, i, d);
                    if (pd < epsilon) {
                        // boost the desired column to full power first
                        double nrm = 0.0;
                        for (int m = 0; m < num_aps; ++m) nrm = std::max(nrm, col_norm(x[m][d]));
                        if (nrm > 1e-300 && nrm < 1.0) {
                            for (int m = 0; m < num_aps; ++m)
                                for (double& q : x[m][d]) q /= nrm;
                            pd = cross_power(x, i, d);
                        }
                    }
                    double interf = 0.0;
                    for (int v = d + 1; v <= i; ++v) interf += cross_power(x, i, v);
                    if (pd - epsilon < -1e-12 || (interf <= 0.0 && pd < epsilon - 1e-12)) {
                        if (violation)
                            *violation = "margin constraint (i=" + std::to_string(i + 1) +
                                         ", d=" + std::to_string(d + 1) + ") unsatisfiable";
                        return false;
                    }
                    if (interf > 0.0) {
                        const double s = std::sqrt(std::max(0.0, (pd - epsilon) / interf));
                        if (s < 1.0) {
                            for (int v = d + 1; v <= i; ++v)
                                for (int m = 0; m < num_aps; ++m)
                                    for (double& q : x[m][v]) q *= s;
                            dirty = true;
                        }
                    }
                }
            }
            if (!dirty) return true;
        }
        if (violation) *violation = "margin repair did not settle";
        return false;
    }

    int flat_size() const { return num_aps * dim * dim; }

    Eigen::VectorXd flatten(const Cols& x) const {
        Eigen::VectorXd v(flat_size());
        int idx = 0;
        for (int m = 0; m < num_aps; ++m)
            for (int z = 0; z < dim; ++z)
                for (int q = 0; q < dim; ++q) v[idx++] = x[m][z][q];
        return v;
    }

    void unflatten(const Eigen::VectorXd& v, Cols& x) const {
        int idx = 0;
        for (int m = 0; m < num_aps; ++m)
            for (int z = 0; z < dim; ++z)
                for (int q = 0; q < dim; ++q) x[m][z][q] = v[idx++];
    }

    // Gradients of the active inequality constraints in <= 0 form:
    // ||w||^2 - 1 <= 0 per column, epsilon - margin_lhs <= 0 per (i, d).
    Eigen::MatrixXd active_constraint_gradients(const Cols& x) const {
        std::vector<Eigen::VectorXd> cols;
        for (int m = 0; m < num_aps; ++m) {
            for (int z = 0; z < dim; ++z) {
                const double nrm2 = [&] {
                    double s = 0.0;
                    for (double q : x[m][z]) s += q * q;
                    return s;
                }();
                if (nrm2 >= 1.0 - 1e-8) {
                    Eigen::VectorXd g = Eigen::VectorXd::Zero(flat_size());
                    const int base = (m * dim + z) * dim;
                    for (int q = 0; q < dim; ++q) g[base + q] = 2.0 * x[m][z][q];
                    cols.push_back(std::move(g));
                }
            }
        }
        for (int i = 1; i < dim; ++i) {
            for (int d = 0; d < i; ++d) {
                const double lhs = margin_lhs(x, i, d);
                const double scale = std::max(1.0, std::abs(lhs));
                if (lhs > epsilon + 1e-8 * scale) continue;
                Eigen::VectorXd g = Eigen::VectorXd::Zero(flat_size());
                for (int m = 0; m < num_aps; ++m) {
                    const CVec& row = rows[i][m];
                    const auto add = [&](int z, double sign) {
                        const cxd rw = row_dot_real(row, x[m][z]);
                        const int base = (m * dim + z) * dim;
                        for (int q = 0; q < dim; ++q)
                            g[base + q] += sign * 2.0 *
                                           (rw.real() * row[q].real() + rw.imag() * row[q].imag());
                    };
                    add(d, -1.0);  // d/dx of (epsilon - lhs)
                    for (int v = d + 1; v <= i; ++v) add(v, +1.0);
                }
                cols.push_back(std::move(g));
            }
        }
        Eigen::MatrixXd out(flat_size(), static_cast<int>(cols.size()));
        for (int c = 0; c < out.cols(); ++c) out.col(c) = cols[c];
        return out;
    }
};

// Lawson-Hanson nonnegative least squares: min ||A*lambda - b||, lambda >= 0.
// Returns the residual vector b - A*lambda.
Eigen::VectorXd nnls_residual(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    const int k = static_cast<int>(a.cols());
    if (k == 0) return b;
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(k);
    std::vector<bool> passive(k, false);
    Eigen::VectorXd residual = b;
    for (int outer = 0; outer < 3 * k + 10; ++outer) {
        const Eigen::VectorXd w = a.transpose() * residual;
        int best = -1;
        double best_w = 1e-12 * (1.0 + b.norm());
        for (int i = 0; i < k; ++i)
            if (!passive[i] && w[i] > best_w) {
                best_w = w[i];
                best = i;
            }
        if (best < 0) break;
        passive[best] = true;
        for (int inner = 0; inner < 3 * k + 10; ++inner) {
            std::vector<int> idx;
            for (int i = 0; i < k; ++i)
                if (passive[i]) idx.push_back(i);
            Eigen::MatrixXd ap(a.rows(), static_cast<int>(idx.size()));
            for (std::size_t c = 0; c < idx.size(); ++c) ap.col(c) = a.col(idx[c]);
            const Eigen::VectorXd s = ap.colPivHouseholderQr().solve(b);
            bool all_positive = true;
            for (int c = 0; c < s.size(); ++c)
                if (s[c] <= 0.0) all_positive = false;
            if (all_positive) {
                lambda.setZero();
                for (std::size_t c = 0; c < idx.size(); ++c) lambda[idx[c]] = s[c];
                break;
            }
            double alpha = 1.0;
            for (std::size_t c = 0; c < idx.size(); ++c)
                if (s[c] <= 0.0) {
                    const double li = lambda[idx[c]];
                    if (li - s[c] > 0.0) alpha = std::min(alpha, li / (li - s[c]));
                }
            for (std::size_t c = 0; c < idx.size(); ++c) {
                lambda[idx[c]] += alpha * (s[c] - lambda[idx[c]]);
                if (lambda[idx[c]] <= 1e-14) {
                    lambda[idx[c]] = 0.0;
                    passive[idx[c]] = false;
                }
            }
        }
        residual = b - a * lambda;
    }
    return residual;
}

double cols_dot(const Cols& a, const Cols& b) {
    double s = 0.0;
    for (std::size_t m = 0; m < a.size(); ++m)
        for (std::size_t z = 0; z < a[m].size(); ++z)
            for (std::size_t q = 0; q < a[m][z].size(); ++q) s += a[m][z][q] * b[m][z][q];
    return s;
}

// Ascend from `x` in place; returns the achieved objective. The stationarity
// measure is the projected-gradient norm: the nonnegative-least-squares
// residual of the gradient against the active constraint gradients.
double ascend(const ClusterProblem& prob, Cols& x, const SolveOptions& opts, double& residual_out,
              int& iters_out) {
    Cols g = x, dir = x;
    double fx = prob.objective(x);
    double step = 1.0;
    residual_out = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        prob.gradient(x, g);
        const Eigen::VectorXd grad = prob.flatten(g);
        const Eigen::MatrixXd active = prob.active_constraint_gradients(x);
        const Eigen::VectorXd proj = nnls_residual(active, grad);
        residual_out = proj.norm();
        if (residual_out <= opts.gradient_tol) break;
        prob.unflatten(proj, dir);

        bool accepted = false;
        for (int bt = 0; bt < 60 && !accepted; ++bt) {
            Cols y = x;
            for (std::size_t m = 0; m < y.size(); ++m)
                for (std::size_t z = 0; z < y[m].size(); ++z)
                    for (std::size_t q = 0; q < y[m][z].size(); ++q)
                        y[m][z][q] += step * dir[m][z][q];
            if (prob.project(y)) {
                Cols diff = y;
                for (std::size_t m = 0; m < y.size(); ++m)
                    for (std::size_t z = 0; z < y[m].size(); ++z)
                        for (std::size_t q = 0; q < y[m][z].size(); ++q)
                            diff[m][z][q] -= x[m][z][q];
                const double fy = prob.objective(y);
                const double slope = cols_dot(dir, diff);
                if (fy >= fx + 1e-4 * slope && fy >= fx) {
                    x = std::move(y);
                    fx = fy;
                    step *= 1.25;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if (!accepted) {
            // no improving feasible step along the projected direction; try the
            // raw gradient once before giving up (active-set change)
            bool rescued = false;
            double t = 1.0;
            for (int bt = 0; bt < 60 && !rescued; ++bt) {
                Cols y = x;
                for (std::size_t m = 0; m < y.size(); ++m)
                    for (std::size_t z = 0; z < y[m].size(); ++z)
                        for (std::size_t q = 0; q < y[m][z].size(); ++q)
                            y[m][z][q] += t * g[m][z][q];
                if (prob.project(y)) {
                    const double fy = prob.objective(y);
                    if (fy > fx + 1e-14 * std::abs(fx)) {
                        x = std::move(y);
                        fx = fy;
                        rescued = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if (!rescued) break;
            step = std::max(step, 1e-6);
        }
    }
    iters_out = it;
    return fx;
}

}  // namespace

SolveResult solve_digital_beamforming(int cluster, const ClusterConfig& config,
                                      const EffectiveChannels& eff, BeamState& state,
                                      const SicOrders& orders, const NetworkConfig& cfg,
                                      double epsilon_w, const SolveOptions& opts) {
    const auto aps = config.aps_of_cluster();
    const auto ues = config.ues_of_cluster();
    const auto du = config.ue_sizes();
    const auto& order = orders[cluster];
    const int dim = du[cluster];
    const int na = static_cast<int>(aps[cluster].size());

    ClusterProblem prob;
    prob.dim = dim;
    prob.num_aps = na;
    prob.epsilon = epsilon_w;
    prob.rows.assign(dim, std::vector<CVec>(na));
    prob.constant_den.assign(dim, 0.0);
    for (int i = 0; i < dim; ++i) {
        const int ue = order[i];
        for (int mi = 0; mi < na; ++mi) prob.rows[i][mi] = eff.rows[ue][aps[cluster][mi]];
        double isni = 0.0;
        for (int l = 0; l < config.num_clusters; ++l) {
            if (l == cluster) continue;
            const double weight = static_cast<double>(dim) / du[l];
            double acc = 0.0;
            for (int m : aps[l]) {
                const CVec& row = eff.rows[ue][m];
                for (int k : ues[l])
                    acc += std::norm(row_dot_real(row, state.digital[m][beam_slot(config, k)]));
            }
            isni += weight * weight * acc;
        }
        prob.constant_den[i] = isni + eff.noise_factor[ue] * cfg.antennas_per_ue();
    }

    // Deterministic starting points: matched filter, uniform, slot-aligned,
    // signal-to-leakage, and (tiny instances only) the best of a coarse grid.
    std::vector<Cols> starts;
    {
        Cols matched(na, std::vector<RealVec>(dim, RealVec(dim, 0.0)));
        for (int mi = 0; mi < na; ++mi)
            for (int z = 0; z < dim; ++z) {
                double nrm = 0.0;
                for (int q = 0; q < dim; ++q) {
                    matched[mi][z][q] = std::abs(prob.rows[z][mi][q]);
                    nrm += matched[mi][z][q] * matched[mi][z][q];
                }
                nrm = std::sqrt(nrm);
                if (nrm < 1e-300)
                    for (int q = 0; q < dim; ++q)
                        matched[mi][z][q] = 1.0 / std::sqrt(static_cast<double>(dim));
                else
                    for (int q = 0; q < dim; ++q) matched[mi][z][q] /= nrm;
            }
        starts.push_back(std::move(matched));

        Cols uniform(na, std::vector<RealVec>(
                             dim, RealVec(dim, 1.0 / std::sqrt(static_cast<double>(dim)))));
        starts.push_back(std::move(uniform));

        Cols slots(na, std::vector<RealVec>(dim, RealVec(dim, 0.0)));
        for (int mi = 0; mi < na; ++mi)
            for (int z = 0; z < dim; ++z) slots[mi][z][beam_slot(config, order[z])] = 1.0;
        starts.push_back(std::move(slots));

        if (dim > 1) {
            // Signal-to-leakage: per (AP, position), the top generalized
            // eigenvector of own power vs power leaked into earlier-decoded UEs.
            Cols slr(na, std::vector<RealVec>(dim, RealVec(dim, 0.0)));
            for (int mi = 0; mi < na; ++mi) {
                std::vector<Eigen::MatrixXd> quad(dim);
                for (int i = 0; i < dim; ++i) {
                    Eigen::VectorXd re(dim), im(dim);
                    for (int q = 0; q < dim; ++q) {
                        re[q] = prob.rows[i][mi][q].real();
                        im[q] = prob.rows[i][mi][q].imag();
                    }
                    quad[i] = re * re.transpose() + im * im.transpose();
                }
                for (int z = 0; z < dim; ++z) {
                    Eigen::MatrixXd leak = Eigen::MatrixXd::Identity(dim, dim) *
                                           (prob.constant_den[z] + 1e-12);
                    for (int i = 0; i < z; ++i) leak += quad[i];
                    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(quad[z], leak);
                    Eigen::VectorXd w = es.eigenvectors().col(dim - 1);
                    const double nrm = w.norm();
                    if (nrm > 1e-300) w /= nrm;
                    for (int q = 0; q < dim; ++q) slr[mi][z][q] = w[q];
                }
            }
            starts.push_back(std::move(slr));
        }

        if (na * dim * dim <= 4 && dim > 1) {
            // Coarse 0.2-step scan (first entry of each column nonnegative; the
            // overall column sign never enters the objective or constraints).
            const double step = 0.2;
            Cols best_grid;
            double best_val = -std::numeric_limits<double>::infinity();
            Cols x(na, std::vector<RealVec>(dim, RealVec(dim, 0.0)));
            const int total = na * dim * dim;
            std::vector<double> flat(total, 0.0);
            std::vector<int> level(total, 0);
            const auto apply = [&]() {
                int idx = 0;
                for (int mi = 0; mi < na; ++mi)
                    for (int z = 0; z < dim; ++z)
                        for (int q = 0; q < dim; ++q) x[mi][z][q] = flat[idx++];
            };
            // iterative odometer over the grid
            std::vector<int> levels(total);
            for (int d = 0; d < total; ++d) levels[d] = (d % dim == 0) ? 6 : 11;
            std::fill(level.begin(), level.end(), 0);
            bool done = false;
            while (!done) {
                int idx = 0;
                bool ball_ok = true;
                for (int mi = 0; mi < na && ball_ok; ++mi)
                    for (int z = 0; z < dim && ball_ok; ++z) {
                        double nrm = 0.0;
                        for (int q = 0; q < dim; ++q) {
                            const int lv = level[idx + q];
                            flat[idx + q] = (q == 0) ? lv * step : -1.0 + lv * step;
                            nrm += flat[idx + q] * flat[idx + q];
                        }
                        if (nrm > 1.0 + 1e-12) ball_ok = false;
                        idx += dim;
                    }
                if (ball_ok) {
                    apply();
                    bool feasible = true;
                    for (int i = 1; i < dim && feasible; ++i)
                        for (int d = 0; d < i && feasible; ++d)
                            if (prob.margin_lhs(x, i, d) < prob.epsilon - 1e-12) feasible = false;
                    if (feasible) {
                        const double f = prob.objective(x);
                        if (f > best_val) {
                            best_val = f;
                            best_grid = x;
                        }
                    }
                }
                int d = 0;
                for (; d < total; ++d) {
                    if (++level[d] < levels[d]) break;
                    level[d] = 0;
                }
                done = (d == total);
            }
            if (best_val > -std::numeric_limits<double>::infinity())
                starts.push_back(std::move(best_grid));
        }
    }

    SolveResult result;
    result.used_zero_margin = false;
    std::string violation;

    // Feasibility bootstrap on the matched start; retry at zero margin if needed.
    if (!prob.project(starts[0], &violation)) {
        prob.epsilon = 0.0;
        result.used_zero_margin = true;
        if (!prob.project(starts[0], &violation)) {
            result.feasible = false;
            result.objective = 0.0;
            return result;
        }
    }
    result.start_objective = prob.objective(starts[0]);

    bool have_best = false;
    Cols best;
    double best_f = 0.0, best_residual = 0.0;
    int best_iters = 0;
    for (auto& x : starts) {
        if (!prob.project(x)) continue;
        double residual = 0.0;
        int iters = 0;
        const double f = ascend(prob, x, opts, residual, iters);
        if (!have_best || f > best_f) {
            have_best = true;
            best = std::move(x);
            best_f = f;
            best_residual = residual;
            best_iters = iters;
        }
    }

    result.feasible = have_best;
    result.objective = best_f;
    result.kkt_residual = best_residual;
    result.iterations = best_iters;
    if (have_best) {
        for (int mi = 0; mi < na; ++mi) {
            const int m = aps[cluster][mi];
            for (int z = 0; z < dim; ++z)
                state.digital[m][beam_slot(config, order[z])] = best[mi][z];
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Steering and the per-slot pipeline
// ---------------------------------------------------------------------------

void refine_steering_p2(const ClusterConfig& config, const LinkSvds& svds, BeamState& state,
                        int sweeps) {
    static const double kShifts[] = {M_PI / 2, -M_PI / 2, M_PI / 4, -M_PI / 4,
                                     M_PI / 8, -M_PI / 8, M_PI / 16, -M_PI / 16};
    const auto aps = config.aps_of_cluster();
    const auto ues = config.ues_of_cluster();
    for (int n = 0; n < config.num_clusters; ++n) {
        double best = beamsteer_objective(n, config, svds, state);
        for (int sweep = 0; sweep < sweeps; ++sweep) {
            for (int m : aps[n]) {
                ComplexMatrix& a = state.steer[m];
                for (auto& entry : a.data()) {
                    const cxd saved = entry;
                    cxd winner = saved;
                    for (double shift : kShifts) {
                        entry = saved * std::polar(1.0, shift);
                        const double val = beamsteer_objective(n, config, svds, state);
                        if (val > best) {
                            best = val;
                            winner = entry;
                        }
                    }
                    entry = winner;
                }
            }
            for (int k : ues[n]) {
                CVec& delta = state.combiner[k];
                for (auto& entry : delta) {
                    const cxd saved = entry;
                    cxd winner = saved;
                    for (double shift : kShifts) {
                        entry = saved * std::polar(1.0, shift);
                        const double val = beamsteer_objective(n, config, svds, state);
                        if (val > best) {
                            best = val;
                            winner = entry;
                        }
                    }
                    entry = winner;
                }
            }
        }
    }
}

void refine_steering_leakage(const ClusterConfig& config, const ChannelSet& channels,
                             BeamState& state, int sweeps) {
    static const double kShifts[] = {M_PI / 2, -M_PI / 2, M_PI / 4, -M_PI / 4,
                                     M_PI / 8, -M_PI / 8, M_PI / 16, -M_PI / 16};
    const auto ues = config.ues_of_cluster();
    const auto aps = config.aps_of_cluster();
    const int num_aps = static_cast<int>(state.steer.size());

    for (int sweep = 0; sweep < sweeps; ++sweep) {
        // Steer columns: own-UE power over leakage into other clusters' UEs.
        for (int m = 0; m < num_aps; ++m) {
            const int n = config.ap_cluster[m];
            std::vector<CVec> victim_rows;  // delta^T H for out-of-cluster UEs
            for (int l = 0; l < config.num_clusters; ++l) {
                if (l == n) continue;
                for (int k : ues[l])
                    victim_rows.push_back(
                        row_times_matrix(state.combiner[k], channels.matrices[k][m]));
            }
            for (std::size_t z = 0; z < ues[n].size(); ++z) {
                const int served = ues[n][z];
                const CVec own_row =
                    row_times_matrix(state.combiner[served], channels.matrices[served][m]);
                double floor = 1e-12;
                for (const auto& e : own_row) floor = std::max(floor, 1e-9 * std::norm(e));
                CVec col = state.steer[m].col(z);
                const auto ratio = [&]() {
                    cxd num{};
                    for (std::size_t q = 0; q < col.size(); ++q) num += own_row[q] * col[q];
                    double leak = 0.0;
                    for (const auto& row : victim_rows) {
                        cxd v{};
                        for (std::size_t q = 0; q < col.size(); ++q) v += row[q] * col[q];
                        leak += std::norm(v);
                    }
                    return std::norm(num) / (leak + floor);
                };
                double best = ratio();
                for (std::size_t q = 0; q < col.size(); ++q) {
                    const cxd saved = col[q];
                    cxd winner = saved;
                    for (double shift : kShifts) {
                        col[q] = saved * std::polar(1.0, shift);
                        const double val = ratio();
                        if (val > best) {
                            best = val;
                            winner = col[q];
                        }
                    }
                    col[q] = winner;
                }
                state.steer[m].set_col(z, col);
            }
        }
        // Combiners: received desired power over received ISNI.
        for (int k = 0; k < static_cast<int>(state.combiner.size()); ++k) {
            const int n = config.ue_cluster[k];
            const int slot = beam_slot(config, k);
            std::vector<CVec> own_cols;  // H * steer column serving this UE
            for (int m : aps[n])
                own_cols.push_back(
                    matrix_times_vec(channels.matrices[k][m], state.steer[m].col(slot)));
            std::vector<CVec> isni_cols;
            for (int l = 0; l < config.num_clusters; ++l) {
                if (l == n) continue;
                for (int m : aps[l])
                    for (std::size_t z = 0; z < ues[l].size(); ++z)
                        isni_cols.push_back(
                            matrix_times_vec(channels.matrices[k][m], state.steer[m].col(z)));
            }
            CVec& delta = state.combiner[k];
            double floor = 1e-12;
            for (const auto& c : own_cols)
                for (const auto& e : c) floor = std::max(floor, 1e-9 * std::norm(e));
            const auto ratio = [&]() {
                double num = 0.0;
                for (const auto& c : own_cols) {
                    cxd v{};
                    for (std::size_t q = 0; q < delta.size(); ++q) v += delta[q] * c[q];
                    num += std::norm(v);
                }
                double den = 0.0;
                for (const auto& c : isni_cols) {
                    cxd v{};
                    for (std::size_t q = 0; q < delta.size(); ++q) v += delta[q] * c[q];
                    den += std::norm(v);
                }
                return num / (den + floor);
            };
            double best = ratio();
            for (std::size_t q = 0; q < delta.size(); ++q) {
                const cxd saved = delta[q];
                cxd winner = saved;
                for (double shift : kShifts) {
                    delta[q] = saved * std::polar(1.0, shift);
                    const double val = ratio();
                    if (val > best) {
                        best = val;
                        winner = delta[q];
                    }
                }
                delta[q] = winner;
            }
        }
    }
}

void apply_steering(SteeringMode mode, const ClusterConfig& config, const ChannelSet& channels,
                    BeamState& state) {
    const int num_aps = static_cast<int>(state.steer.size());
    const auto ues = config.ues_of_cluster();

    if (mode == SteeringMode::conventional) {
        for (int m = 0; m < num_aps; ++m)
            for (auto& e : state.steer[m].data()) e = cxd{1.0, 0.0};
        for (auto& delta : state.combiner) std::fill(delta.begin(), delta.end(), cxd{1.0, 0.0});
        return;
    }

    // Matched mode: per-link dominant singular vectors picked up as phases.
    for (int m = 0; m < num_aps; ++m) {
        const int n = config.ap_cluster[m];
        const auto& cluster_ues = ues[n];
        for (std::size_t z = 0; z < cluster_ues.size(); ++z) {
            const SvdFactors f = svd(channels.matrices[cluster_ues[z]][m]);
            const CVec v1 = f.v.col(0);
            const CVec phases = unit_phases(v1, false);
            state.steer[m].set_col(z, phases);
        }
    }
    for (std::size_t k = 0; k < state.combiner.size(); ++k) {
        const int n = config.ue_cluster[k];
        const auto aps = config.aps_of_cluster()[n];
        int strongest = aps[0];
        double best = -1.0;
        for (int m : aps) {
            const double norm = channels.matrices[k][m].frobenius_norm();
            if (norm > best) {
                best = norm;
                strongest = m;
            }
        }
        const SvdFactors f = svd(channels.matrices[k][strongest]);
        state.combiner[k] = unit_phases(f.u.col(0), true);
    }

    if (mode == SteeringMode::p2_refined) {
        const LinkSvds svds = compute_link_svds(channels);
        refine_steering_p2(config, svds, state);
    } else if (mode == SteeringMode::leakage_aware) {
        refine_steering_leakage(config, channels, state);
    }
}

PipelineResult run_pipeline(const ClusterConfig& config, const ChannelSet& channels,
                            const NetworkConfig& cfg, SteeringMode mode, BeamState* carry) {
    BeamState state = make_all_ones_state(config, cfg);
    if (carry && carry->combiner.size() == static_cast<std::size_t>(cfg.num_ues))
        state.combiner_prev = carry->combiner;
    apply_steering(mode, config, channels, state);

    PipelineResult out;
    out.eff = compute_effective(config, channels, state, cfg);
    out.orders = order_all(config, out.eff);

    // Independent per-cluster solves against a frozen snapshot, joined after.
    BeamState solved = state;
    out.solves.resize(config.num_clusters);
    const auto aps = config.aps_of_cluster();
    for (int n = 0; n < config.num_clusters; ++n) {
        BeamState work = state;
        out.solves[n] = solve_digital_beamforming(n, config, out.eff, work, out.orders, cfg,
                                                  cfg.sic_margin_w());
        for (int m : aps[n]) solved.digital[m] = work.digital[m];
    }

    out.rates = sum_rate(config, out.eff, solved, out.orders, cfg);
    if (carry) *carry = solved;
    return out;
}

PipelineResult conventional_baseline(const ClusterConfig& config, const ChannelSet& channels,
                                     const NetworkConfig& cfg) {
    return run_pipeline(config, channels, cfg, SteeringMode::conventional);
}

}  // namespace cfmimo
