#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cfmimo/mlp.hpp"
#include "cfmimo/replay.hpp"

namespace cfmimo {

struct AgentHyper {
    double discount = 0.01;      // zeta
    double learn_rate = 0.001;   // alpha
    double eps_start = 1.0;      // epsilon-greedy schedule (DDQN / SARSA)
    double eps_end = 0.05;
    double target_tau = 0.005;   // soft target update rate
    double sac_temperature = 0.2;
    double ddpg_noise = 0.1;     // exploration noise std on the squashed action
    std::size_t replay_capacity = 100000;
    int batch_size = 64;
};

/// Linear decay from eps_start to eps_end over the first half of training.
double epsilon_at(const AgentHyper& hp, long step, long total_steps);

// Target arithmetic, shared between the agents and their tests.
double ddqn_target(double reward, double discount, double next_best_q, bool terminal);
double sarsa_target(double reward, double discount, double next_q, bool terminal);
double sac_value_target(double q, double log_pi, double temperature);
double sac_q_target(double reward, double discount, double next_value, bool terminal);

/// Episode return as printed for the policy-gradient agent:
/// G_t = sum_{l=t}^{T} zeta^(l-1) * r_l with 1-based indices.
double pg_return(const std::vector<double>& rewards, double discount, int t_one_based);

/// Conventional per-step discounting used by the actor-critic value targets:
/// G_t = sum_{l=t}^{T} zeta^(l-t) * r_l.
double ac_return(const std::vector<double>& rewards, double discount, int t_one_based);

struct EpisodeStep {
    Eigen::VectorXd state;
    int action = 0;
    double reward = 0.0;
};

// ---------------------------------------------------------------------------
// Discrete-action agents (network partitioning)
// ---------------------------------------------------------------------------

class DdqnAgent {
public:
    DdqnAgent(int state_dim, int num_actions, AgentHyper hp, std::uint64_t seed);

    int act(const Eigen::VectorXd& s, RngStream& rng, double epsilon) const;
    int act_greedy(const Eigen::VectorXd& s) const;
    void observe(Transition t) { replay_.push(std::move(t)); }

    double update(RngStream& rng);                                   // sampled batch
    double update_batch(const std::vector<const Transition*>& batch);  // explicit batch

    const Mlp& online() const { return online_; }
    const Mlp& target() const { return target_; }
    const ReplayBuffer& replay() const { return replay_; }
    const AgentHyper& hyper() const { return hp_; }
    double mean_q(const Eigen::VectorXd& s) const;

    void save(std::ostream& out) const;
    void load(std::istream& in);

private:
    AgentHyper hp_;
    Mlp online_, target_;
    ReplayBuffer replay_;
};

class SarsaAgent {
public:
    SarsaAgent(int state_dim, int num_actions, AgentHyper hp, std::uint64_t seed);

    int act(const Eigen::VectorXd& s, RngStream& rng, double epsilon) const;
    int act_greedy(const Eigen::VectorXd& s) const;
    double update(const Transition& t);  // on-policy single transition

    const Mlp& q() const { return q_; }
    double mean_q(const Eigen::VectorXd& s) const;

    void save(std::ostream& out) const;
    void load(std::istream& in);

private:
    AgentHyper hp_;
    Mlp q_;
};

struct PolicyUpdateStats {
    double pseudo_loss = 0.0;  // -(sum_t G_t log pi_t) for logging
    double grad_norm = 0.0;
    double critic_loss = 0.0;  // actor-critic only
};

class PgAgent {
public:
    PgAgent(int state_dim, int num_actions, AgentHyper hp, std::uint64_t seed);

    int act(const Eigen::VectorXd& s, RngStream& rng) const;  // sample the softmax policy
    int act_greedy(const Eigen::VectorXd& s) const;
    Eigen::VectorXd probs(const Eigen::VectorXd& s) const;

    PolicyUpdateStats update_episode(const std::vector<EpisodeStep>& episode);

    void save(std::ostream& out) const;
    void load(std::istream& in);

private:
    AgentHyper hp_;
    Mlp policy_;
};

class AcAgent {
public:
    AcAgent(int state_dim, int num_actions, AgentHyper hp, std::uint64_t seed);

    int act(const Eigen::VectorXd& s, RngStream& rng) const;
    int act_greedy(const Eigen::VectorXd& s) const;
    Eigen::VectorXd probs(const Eigen::VectorXd& s) const;
    double value(const Eigen::VectorXd& s) const;

    PolicyUpdateStats update_episode(const std::vector<EpisodeStep>& episode);

    void save(std::ostream& out) const;
    void load(std::istream& in);

private:
    AgentHyper hp_;
    Mlp actor_, critic_;
};

// ---------------------------------------------------------------------------
// Continuous-action agents (analog beamsteering); actions live in [-1, 1]^dim
// ---------------------------------------------------------------------------

class DdpgAgent {
public:
    DdpgAgent(int state_dim, int action_dim, AgentHyper hp, std::uint64_t seed);

    Eigen::VectorXd act(const Eigen::VectorXd& s, RngStream& rng, double noise_std) const;
    Eigen::VectorXd act_greedy(const Eigen::VectorXd& s) const;
    void observe(Transition t) { replay_.push(std::move(t)); }

    std::pair<double, double> update(RngStream& rng);  // (critic loss, actor objective)
    std::pair<double, double> update_batch(const std::vector<const Transition*>& batch);

    const ReplayBuffer& replay() const { return replay_; }
    const Mlp& critic() const { return critic_; }
    const Mlp& actor() const { return actor_; }

    void save(std::ostream& out) const;
    void load(std::istream& in);

private:
    AgentHyper hp_;
    Mlp actor_, critic_, actor_target_, critic_target_;
    ReplayBuffer replay_;
};

struct SacLosses {
    double value = 0.0, q = 0.0, policy = 0.0;
};

struct SacGradients {
    MlpGradients value, q, policy;
};

class SacAgent {
public:
    SacAgent(int state_dim, int action_dim, AgentHyper hp, std::uint64_t seed);

    Eigen::VectorXd act(const Eigen::VectorXd& s, RngStream& rng) const;
    Eigen::VectorXd act_mean(const Eigen::VectorXd& s) const;
    void observe(Transition t) { replay_.push(std::move(t)); }

    SacLosses update(RngStream& rng);
    /// `noise` holds one standard-normal column per batch entry (the fresh
    /// policy sample shared by all three losses).
    SacLosses update_batch(const std::vector<const Transition*>& batch,
                           const Eigen::MatrixXd& noise);
    SacLosses compute_losses(const std::vector<const Transition*>& batch,
                             const Eigen::MatrixXd& noise) const;
    SacGradients compute_gradients(const std::vector<const Transition*>& batch,
                                   const Eigen::MatrixXd& noise) const;

    const ReplayBuffer& replay() const { return replay_; }
    Mlp& policy_net() { return policy_; }
    Mlp& q_net() { return q_; }
    Mlp& value_net() { return value_; }
    const Mlp& value_target() const { return value_target_; }
    int action_dim() const { return action_dim_; }

    void save(std::ostream& out) const;
    void load(std::istream& in);

private:
    AgentHyper hp_;
    int action_dim_;
    Mlp policy_;  // outputs [mean; log_std]
    Mlp q_;       // input [state; action]
    Mlp value_, value_target_;
    ReplayBuffer replay_;
};

}  // namespace cfmimo
