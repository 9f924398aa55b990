#include "cfmimo/mlp.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace cfmimo {

void MlpGradients::scale(double s) {
    for (auto& m : w) m *= s;
    for (auto& v : b) v *= s;
}

void MlpGradients::accumulate(const MlpGradients& other) {
    for (std::size_t l = 0; l < w.size(); ++l) {
        w[l] += other.w[l];
        b[l] += other.b[l];
    }
}

Mlp::Mlp(int input, int output, std::vector<int> hidden, std::uint64_t seed)
    : input_(input), output_(output) {
    if (input < 1 || output < 1) throw std::invalid_argument("mlp: dims must be positive");
    std::vector<int> dims;
    dims.push_back(input);
    for (int h : hidden) dims.push_back(h);
    dims.push_back(output);
    RngStream rng(seed);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double bound = std::sqrt(6.0 / (dims[l] + dims[l + 1]));
        Eigen::MatrixXd w(dims[l + 1], dims[l]);
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
        w_.push_back(std::move(w));
        b_.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
    }
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) n += w_[l].size() + b_[l].size();
    return n;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    return forward_batch(x).col(0);
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x) const {
    if (x.rows() != input_) throw std::invalid_argument("mlp: input dimension mismatch");
    Eigen::MatrixXd a = x;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        a = (w_[l] * a).colwise() + b_[l];
        if (l + 1 < w_.size()) a = a.cwiseMax(0.0);
    }
    return a;
}

Eigen::MatrixXd Mlp::backward_batch(const Eigen::MatrixXd& x, const Eigen::MatrixXd& upstream,
                                    MlpGradients& grads) const {
    if (x.rows() != input_) throw std::invalid_argument("mlp: input dimension mismatch");
    if (upstream.rows() != output_ || upstream.cols() != x.cols())
        throw std::invalid_argument("mlp: upstream gradient shape mismatch");

    std::vector<Eigen::MatrixXd> acts;  // post-activation per layer, acts[0] = x
    acts.reserve(w_.size() + 1);
    acts.push_back(x);
    for (std::size_t l = 0; l < w_.size(); ++l) {
        Eigen::MatrixXd z = (w_[l] * acts.back()).colwise() + b_[l];
        if (l + 1 < w_.size()) z = z.cwiseMax(0.0);
        acts.push_back(std::move(z));
    }

    Eigen::MatrixXd delta = upstream;
    for (std::size_t l = w_.size(); l-- > 0;) {
        grads.w[l] += delta * acts[l].transpose();
        grads.b[l] += delta.rowwise().sum();
        if (l == 0) return w_[0].transpose() * delta;
        delta = w_[l].transpose() * delta;
        // rectifier gate: zero where the activation was clamped
        delta = delta.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
    return {};
}

MlpGradients Mlp::zero_gradients() const {
    MlpGradients g;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        g.w.push_back(Eigen::MatrixXd::Zero(w_[l].rows(), w_[l].cols()));
        g.b.push_back(Eigen::VectorXd::Zero(b_[l].size()));
    }
    return g;
}

void Mlp::apply_gradient(const MlpGradients& g, double scale) {
    for (std::size_t l = 0; l < w_.size(); ++l) {
        w_[l] += scale * g.w[l];
        b_[l] += scale * g.b[l];
    }
}

void Mlp::soft_update_from(const Mlp& src, double tau) {
    for (std::size_t l = 0; l < w_.size(); ++l) {
        w_[l] = tau * src.w_[l] + (1.0 - tau) * w_[l];
        b_[l] = tau * src.b_[l] + (1.0 - tau) * b_[l];
    }
}

void Mlp::save(std::ostream& out) const {
    out << "mlp " << w_.size() << '\n';
    out << input_;
    for (const auto& w : w_) out << ' ' << w.rows();
    out << '\n' << std::setprecision(17);
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (int r = 0; r < w_[l].rows(); ++r)
            for (int c = 0; c < w_[l].cols(); ++c) out << w_[l](r, c) << ' ';
        for (int r = 0; r < b_[l].size(); ++r) out << b_[l][r] << ' ';
        out << '\n';
    }
}

Mlp Mlp::load(std::istream& in) {
    std::string tag;
    std::size_t layers = 0;
    in >> tag >> layers;
    if (tag != "mlp" || !in) throw std::runtime_error("mlp: bad snapshot header");
    std::vector<int> dims(layers + 1);
    for (auto& d : dims) in >> d;
    Mlp net;
    net.input_ = dims[0];
    net.output_ = dims[layers];
    for (std::size_t l = 0; l < layers; ++l) {
        Eigen::MatrixXd w(dims[l + 1], dims[l]);
        for (int r = 0; r < w.rows(); ++r)
            for (int c = 0; c < w.cols(); ++c) in >> w(r, c);
        Eigen::VectorXd b(dims[l + 1]);
        for (int r = 0; r < b.size(); ++r) in >> b[r];
        net.w_.push_back(std::move(w));
        net.b_.push_back(std::move(b));
    }
    if (!in) throw std::runtime_error("mlp: truncated snapshot");
    return net;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp();
    return e / e.sum();
}

int sample_categorical(const Eigen::VectorXd& probs, RngStream& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return static_cast<int>(probs.size()) - 1;
}

}  // namespace cfmimo
