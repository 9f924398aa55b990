#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "cfmimo/rng.hpp"

namespace cfmimo {

struct Transition {
    Eigen::VectorXd state;
    int action = -1;                // discrete agents
    Eigen::VectorXd action_cont;    // continuous agents
    double reward = 0.0;
    Eigen::VectorXd next_state;
    int next_action = -1;           // SARSA
    bool terminal = false;
};

/// Fixed-capacity ring with uniform sampling.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(Transition t) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[head_] = std::move(t);
            head_ = (head_ + 1) % capacity_;
        }
    }

    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return data_[i]; }

    std::vector<const Transition*> sample(std::size_t batch, RngStream& rng) const {
        std::vector<const Transition*> out;
        out.reserve(batch);
        for (std::size_t i = 0; i < batch; ++i)
            out.push_back(&data_[rng.uniform_int(static_cast<int>(data_.size()))]);
        return out;
    }

private:
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::vector<Transition> data_;
};

}  // namespace cfmimo
