#pragma once

namespace cfmimo {

/// Inference cost of the two-hidden-layer (256, 128) network:
/// 2 * (256*|S| + 128*|A| + 32768) floating-point operations.
inline long long flops_inference(int state_dim, int action_dim) {
    return 2LL * (256LL * state_dim + 128LL * action_dim + 32768LL);
}

/// The unfactored per-agent tabulated form, 32768 + 256*K + 128; kept alongside
/// the factored estimate because the two published forms disagree by the
/// leading factor of two.
inline long long flops_table_row(int num_ues) { return 32768LL + 256LL * num_ues + 128LL; }

}  // namespace cfmimo
