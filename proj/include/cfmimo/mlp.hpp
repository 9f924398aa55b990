#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cfmimo/rng.hpp"

namespace cfmimo {

struct MlpGradients {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
    void scale(double s);
    void accumulate(const MlpGradients& other);
};

/// Dense network with rectifier hidden layers and a linear output. Batches are
/// column-major: one sample per column. Task heads (softmax, Gaussian, tanh
/// squashing) live with the agents.
class Mlp {
public:
    Mlp() = default;
    Mlp(int input, int output, std::vector<int> hidden, std::uint64_t seed);

    /// The two hidden layers used by every agent network here.
    static Mlp standard(int input, int output, std::uint64_t seed) {
        return Mlp(input, output, {256, 128}, seed);
    }

    int input_dim() const { return input_; }
    int output_dim() const { return output_; }
    std::size_t parameter_count() const;

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

    /// Accumulates dL/dparams for the given upstream dL/dy (one column per
    /// sample) into `grads`, and returns dL/dx.
    Eigen::MatrixXd backward_batch(const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream,
                                   MlpGradients& grads) const;

    MlpGradients zero_gradients() const;
    void apply_gradient(const MlpGradients& g, double scale);  // params += scale * g
    void soft_update_from(const Mlp& src, double tau);         // this = tau*src + (1-tau)*this

    void save(std::ostream& out) const;
    static Mlp load(std::istream& in);

    const std::vector<Eigen::MatrixXd>& weights() const { return w_; }
    std::vector<Eigen::MatrixXd>& weights() { return w_; }
    std::vector<Eigen::VectorXd>& biases() { return b_; }

private:
    int input_ = 0, output_ = 0;
    std::vector<Eigen::MatrixXd> w_;  // layer l: rows = dims[l+1], cols = dims[l]
    std::vector<Eigen::VectorXd> b_;
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
int sample_categorical(const Eigen::VectorXd& probs, RngStream& rng);

}  // namespace cfmimo
