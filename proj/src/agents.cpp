#include "cfmimo/agents.hpp"

#include <cmath>
#include <istream>
#include <ostream>

namespace cfmimo {

namespace {

constexpr double kLogStdMin = -5.0;
constexpr double kLogStdMax = 2.0;
constexpr double kSquashEps = 1e-6;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)

Eigen::MatrixXd states_matrix(const std::vector<const Transition*>& batch, bool next) {
    const int dim = static_cast<int>((next ? batch[0]->next_state : batch[0]->state).size());
    Eigen::MatrixXd x(dim, static_cast<int>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i)
        x.col(i) = next ? batch[i]->next_state : batch[i]->state;
    return x;
}

Eigen::MatrixXd vstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() + b.rows(), a.cols());
    out.topRows(a.rows()) = a;
    out.bottomRows(b.rows()) = b;
    return out;
}

double grad_norm(const MlpGradients& g) {
    double s = 0.0;
    for (const auto& m : g.w) s += m.squaredNorm();
    for (const auto& v : g.b) s += v.squaredNorm();
    return std::sqrt(s);
}

}  // namespace

double epsilon_at(const AgentHyper& hp, long step, long total_steps) {
    const long half = std::max(1L, total_steps / 2);
    if (step >= half) return hp.eps_end;
    return hp.eps_start + (hp.eps_end - hp.eps_start) * static_cast<double>(step) / half;
}

double ddqn_target(double reward, double discount, double next_best_q, bool terminal) {
    return terminal ? reward : reward + discount * next_best_q;
}

double sarsa_target(double reward, double discount, double next_q, bool terminal) {
    return terminal ? reward : reward + discount * next_q;
}

double sac_value_target(double q, double log_pi, double temperature) {
    return q - temperature * log_pi;
}

double sac_q_target(double reward, double discount, double next_value, bool terminal) {
    return terminal ? reward : reward + discount * next_value;
}

double pg_return(const std::vector<double>& rewards, double discount, int t_one_based) {
    double g = 0.0;
    for (std::size_t l = t_one_based; l <= rewards.size(); ++l)
        g += std::pow(discount, static_cast<double>(l - 1)) * rewards[l - 1];
    return g;
}

double ac_return(const std::vector<double>& rewards, double discount, int t_one_based) {
    double g = 0.0;
    for (std::size_t l = t_one_based; l <= rewards.size(); ++l)
        g += std::pow(discount, static_cast<double>(l - t_one_based)) * rewards[l - 1];
    return g;
}

// ---------------------------------------------------------------------------
// DDQN
// ---------------------------------------------------------------------------

DdqnAgent::DdqnAgent(int state_dim, int num_actions, AgentHyper hp, std::uint64_t seed)
    : hp_(hp),
      online_(Mlp::standard(state_dim, num_actions, seed)),
      target_(online_),
      replay_(hp.replay_capacity) {}

int DdqnAgent::act(const Eigen::VectorXd& s, RngStream& rng, double epsilon) const {
    if (rng.uniform() < epsilon) return rng.uniform_int(online_.output_dim());
    return act_greedy(s);
}

int DdqnAgent::act_greedy(const Eigen::VectorXd& s) const {
    Eigen::Index best;
    online_.forward(s).maxCoeff(&best);
    return static_cast<int>(best);
}

double DdqnAgent::mean_q(const Eigen::VectorXd& s) const { return online_.forward(s).mean(); }

double DdqnAgent::update(RngStream& rng) {
    if (replay_.size() < static_cast<std::size_t>(hp_.batch_size)) return 0.0;
    return update_batch(replay_.sample(hp_.batch_size, rng));
}

double DdqnAgent::update_batch(const std::vector<const Transition*>& batch) {
    const int b = static_cast<int>(batch.size());
    const Eigen::MatrixXd x = states_matrix(batch, false);
    const Eigen::MatrixXd xn = states_matrix(batch, true);
    const Eigen::MatrixXd q = online_.forward_batch(x);
    const Eigen::MatrixXd qn_online = online_.forward_batch(xn);
    const Eigen::MatrixXd qn_target = target_.forward_batch(xn);

    Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(q.rows(), b);
    double loss = 0.0;
    for (int i = 0; i < b; ++i) {
        Eigen::Index best;
        qn_online.col(i).maxCoeff(&best);
        const double y =
            ddqn_target(batch[i]->reward, hp_.discount, qn_target(best, i), batch[i]->terminal);
        const double d = q(batch[i]->action, i) - y;
        loss += d * d;
        upstream(batch[i]->action, i) = 2.0 * d / b;
    }
    loss /= b;

    MlpGradients grads = online_.zero_gradients();
    online_.backward_batch(x, upstream, grads);
    online_.apply_gradient(grads, -hp_.learn_rate);
    target_.soft_update_from(online_, hp_.target_tau);
    return loss;
}

void DdqnAgent::save(std::ostream& out) const {
    out << "ddqn\n";
    online_.save(out);
    target_.save(out);
}

void DdqnAgent::load(std::istream& in) {
    std::string tag;
    in >> tag;
    if (tag != "ddqn") throw std::runtime_error("agent snapshot: expected ddqn");
    online_ = Mlp::load(in);
    target_ = Mlp::load(in);
}

// ---------------------------------------------------------------------------
// SARSA
// ---------------------------------------------------------------------------

SarsaAgent::SarsaAgent(int state_dim, int num_actions, AgentHyper hp, std::uint64_t seed)
    : hp_(hp), q_(Mlp::standard(state_dim, num_actions, seed)) {}

int SarsaAgent::act(const Eigen::VectorXd& s, RngStream& rng, double epsilon) const {
    if (rng.uniform() < epsilon) return rng.uniform_int(q_.output_dim());
    return act_greedy(s);
}

int SarsaAgent::act_greedy(const Eigen::VectorXd& s) const {
    Eigen::Index best;
    q_.forward(s).maxCoeff(&best);
    return static_cast<int>(best);
}

double SarsaAgent::mean_q(const Eigen::VectorXd& s) const { return q_.forward(s).mean(); }

double SarsaAgent::update(const Transition& t) {
    const Eigen::VectorXd qs = q_.forward(t.state);
    const double next_q = t.terminal ? 0.0 : q_.forward(t.next_state)[t.next_action];
    const double y = sarsa_target(t.reward, hp_.discount, next_q, t.terminal);
    const double d = qs[t.action] - y;

    Eigen::MatrixXd upstream = Eigen::MatrixXd::Zero(q_.output_dim(), 1);
    upstream(t.action, 0) = 2.0 * d;
    MlpGradients grads = q_.zero_gradients();
    q_.backward_batch(t.state, upstream, grads);
    q_.apply_gradient(grads, -hp_.learn_rate);
    return d * d;
}

void SarsaAgent::save(std::ostream& out) const {
    out << "sarsa\n";
    q_.save(out);
}

void SarsaAgent::load(std::istream& in) {
    std::string tag;
    in >> tag;
    if (tag != "sarsa") throw std::runtime_error("agent snapshot: expected sarsa");
    q_ = Mlp::load(in);
}

// ---------------------------------------------------------------------------
// Policy gradient
// ---------------------------------------------------------------------------

PgAgent::PgAgent(int state_dim, int num_actions, AgentHyper hp, std::uint64_t seed)
    : hp_(hp), policy_(Mlp::standard(state_dim, num_actions, seed)) {}

Eigen::VectorXd PgAgent::probs(const Eigen::VectorXd& s) const {
    return softmax(policy_.forward(s));
}

int PgAgent::act(const Eigen::VectorXd& s, RngStream& rng) const {
    return sample_categorical(probs(s), rng);
}

int PgAgent::act_greedy(const Eigen::VectorXd& s) const {
    Eigen::Index best;
    policy_.forward(s).maxCoeff(&best);
    return static_cast<int>(best);
}

PolicyUpdateStats PgAgent::update_episode(const std::vector<EpisodeStep>& episode) {
    const int t_len = static_cast<int>(episode.size());
    Eigen::MatrixXd x(policy_.input_dim(), t_len);
    std::vector<double> rewards(t_len);
    for (int t = 0; t < t_len; ++t) {
        x.col(t) = episode[t].state;
        rewards[t] = episode[t].reward;
    }
    const Eigen::MatrixXd logits = policy_.forward_batch(x);

    PolicyUpdateStats stats;
    Eigen::MatrixXd upstream(logits.rows(), t_len);
    for (int t = 0; t < t_len; ++t) {
        const Eigen::VectorXd p = softmax(logits.col(t));
        const double g = pg_return(rewards, hp_.discount, t + 1);
        Eigen::VectorXd u = -g * p;
        u[episode[t].action] += g;
        upstream.col(t) = u;
        stats.pseudo_loss -= g * std::log(std::max(p[episode[t].action], 1e-300));
    }
    MlpGradients grads = policy_.zero_gradients();
    policy_.backward_batch(x, upstream, grads);
    stats.grad_norm = grad_norm(grads);
    policy_.apply_gradient(grads, hp_.learn_rate);  // ascent
    return stats;
}

void PgAgent::save(std::ostream& out) const {
    out << "pg\n";
    policy_.save(out);
}

void PgAgent::load(std::istream& in) {
    std::string tag;
    in >> tag;
    if (tag != "pg") throw std::runtime_error("agent snapshot: expected pg");
    policy_ = Mlp::load(in);
}

// ---------------------------------------------------------------------------
// Actor-critic
// ---------------------------------------------------------------------------

AcAgent::AcAgent(int state_dim, int num_actions, AgentHyper hp, std::uint64_t seed)
    : hp_(hp),
      actor_(Mlp::standard(state_dim, num_actions, seed)),
      critic_(Mlp::standard(state_dim, 1, seed ^ 0x5bd1e995u)) {}

Eigen::VectorXd AcAgent::probs(const Eigen::VectorXd& s) const {
    return softmax(actor_.forward(s));
}

int AcAgent::act(const Eigen::VectorXd& s, RngStream& rng) const {
    return sample_categorical(probs(s), rng);
}

int AcAgent::act_greedy(const Eigen::VectorXd& s) const {
    Eigen::Index best;
    actor_.forward(s).maxCoeff(&best);
    return static_cast<int>(best);
}

double AcAgent::value(const Eigen::VectorXd& s) const { return critic_.forward(s)[0]; }

PolicyUpdateStats AcAgent::update_episode(const std::vector<EpisodeStep>& episode) {
    const int t_len = static_cast<int>(episode.size());
    Eigen::MatrixXd x(actor_.input_dim(), t_len);
    std::vector<double> rewards(t_len);
    for (int t = 0; t < t_len; ++t) {
        x.col(t) = episode[t].state;
        rewards[t] = episode[t].reward;
    }
    const Eigen::MatrixXd logits = actor_.forward_batch(x);
    const Eigen::MatrixXd values = critic_.forward_batch(x);

    PolicyUpdateStats stats;
    Eigen::MatrixXd actor_up(logits.rows(), t_len);
    Eigen::MatrixXd critic_up(1, t_len);
    for (int t = 0; t < t_len; ++t) {
        const Eigen::VectorXd p = softmax(logits.col(t));
        const double g = ac_return(rewards, hp_.discount, t + 1);
        const double advantage = g - values(0, t);
        Eigen::VectorXd u = -advantage * p;
        u[episode[t].action] += advantage;
        actor_up.col(t) = u;
        const double d = values(0, t) - g;
        critic_up(0, t) = 2.0 * d / t_len;
        stats.critic_loss += d * d / t_len;
        stats.pseudo_loss -= advantage * std::log(std::max(p[episode[t].action], 1e-300));
    }
    MlpGradients actor_grads = actor_.zero_gradients();
    actor_.backward_batch(x, actor_up, actor_grads);
    stats.grad_norm = grad_norm(actor_grads);
    actor_.apply_gradient(actor_grads, hp_.learn_rate);

    MlpGradients critic_grads = critic_.zero_gradients();
    critic_.backward_batch(x, critic_up, critic_grads);
    critic_.apply_gradient(critic_grads, -hp_.learn_rate);
    return stats;
}

void AcAgent::save(std::ostream& out) const {
    out << "ac\n";
    actor_.save(out);
    critic_.save(out);
}

void AcAgent::load(std::istream& in) {
    std::string tag;
    in >> tag;
    if (tag != "ac") throw std::runtime_error("agent snapshot: expected ac");
    actor_ = Mlp::load(in);
    critic_ = Mlp::load(in);
}

// ---------------------------------------------------------------------------
// DDPG
// ---------------------------------------------------------------------------

DdpgAgent::DdpgAgent(int state_dim, int action_dim, AgentHyper hp, std::uint64_t seed)
    : hp_(hp),
      actor_(Mlp::standard(state_dim, action_dim, seed)),
      critic_(Mlp::standard(state_dim + action_dim, 1, seed ^ 0x2545f491u)),
      actor_target_(actor_),
      critic_target_(critic_),
      replay_(hp.replay_capacity) {}

Eigen::VectorXd DdpgAgent::act_greedy(const Eigen::VectorXd& s) const {
    return actor_.forward(s).array().tanh().matrix();
}

Eigen::VectorXd DdpgAgent::act(const Eigen::VectorXd& s, RngStream& rng, double noise_std) const {
    Eigen::VectorXd a = act_greedy(s);
    for (int i = 0; i < a.size(); ++i)
        a[i] = std::clamp(a[i] + noise_std * rng.normal(), -1.0, 1.0);
    return a;
}

std::pair<double, double> DdpgAgent::update(RngStream& rng) {
    if (replay_.size() < static_cast<std::size_t>(hp_.batch_size)) return {0.0, 0.0};
    return update_batch(replay_.sample(hp_.batch_size, rng));
}

std::pair<double, double> DdpgAgent::update_batch(const std::vector<const Transition*>& batch) {
    const int b = static_cast<int>(batch.size());
    const Eigen::MatrixXd x = states_matrix(batch, false);
    const Eigen::MatrixXd xn = states_matrix(batch, true);
    Eigen::MatrixXd acts(actor_.output_dim(), b);
    for (int i = 0; i < b; ++i) acts.col(i) = batch[i]->action_cont;

    // critic regression on the bootstrapped target
    const Eigen::MatrixXd an = actor_target_.forward_batch(xn).array().tanh().matrix();
    const Eigen::MatrixXd qn = critic_target_.forward_batch(vstack(xn, an));
    const Eigen::MatrixXd xq = vstack(x, acts);
    const Eigen::MatrixXd qb = critic_.forward_batch(xq);
    Eigen::MatrixXd critic_up(1, b);
    double critic_loss = 0.0;
    for (int i = 0; i < b; ++i) {
        const double y = batch[i]->terminal ? batch[i]->reward
                                            : batch[i]->reward + hp_.discount * qn(0, i);
        const double d = qb(0, i) - y;
        critic_loss += d * d / b;
        critic_up(0, i) = 2.0 * d / b;
    }
    MlpGradients critic_grads = critic_.zero_gradients();
    critic_.backward_batch(xq, critic_up, critic_grads);
    critic_.apply_gradient(critic_grads, -hp_.learn_rate);

    // deterministic policy gradient through the critic's action input
    const Eigen::MatrixXd z = actor_.forward_batch(x);
    const Eigen::MatrixXd a0 = z.array().tanh().matrix();
    const Eigen::MatrixXd xa = vstack(x, a0);
    const Eigen::MatrixXd q0 = critic_.forward_batch(xa);
    const double actor_objective = q0.mean();
    MlpGradients scratch = critic_.zero_gradients();
    const Eigen::MatrixXd input_grad = critic_.backward_batch(
        xa, Eigen::MatrixXd::Constant(1, b, 1.0 / b), scratch);
    const Eigen::MatrixXd dq_da = input_grad.bottomRows(actor_.output_dim());
    const Eigen::MatrixXd dz = dq_da.cwiseProduct((1.0 - a0.array().square()).matrix());
    MlpGradients actor_grads = actor_.zero_gradients();
    actor_.backward_batch(x, dz, actor_grads);
    actor_.apply_gradient(actor_grads, hp_.learn_rate);  // ascent on Q

    actor_target_.soft_update_from(actor_, hp_.target_tau);
    critic_target_.soft_update_from(critic_, hp_.target_tau);
    return {critic_loss, actor_objective};
}

void DdpgAgent::save(std::ostream& out) const {
    out << "ddpg\n";
    actor_.save(out);
    critic_.save(out);
    actor_target_.save(out);
    critic_target_.save(out);
}

void DdpgAgent::load(std::istream& in) {
    std::string tag;
    in >> tag;
    if (tag != "ddpg") throw std::runtime_error("agent snapshot: expected ddpg");
    actor_ = Mlp::load(in);
    critic_ = Mlp::load(in);
    actor_target_ = Mlp::load(in);
    critic_target_ = Mlp::load(in);
}

// ---------------------------------------------------------------------------
// SAC
// ---------------------------------------------------------------------------

SacAgent::SacAgent(int state_dim, int action_dim, AgentHyper hp, std::uint64_t seed)
    : hp_(hp),
      action_dim_(action_dim),
      policy_(Mlp::standard(state_dim, 2 * action_dim, seed)),
      q_(Mlp::standard(state_dim + action_dim, 1, seed ^ 0x9e3779b9u)),
      value_(Mlp::standard(state_dim, 1, seed ^ 0x85ebca6bu)),
      value_target_(value_),
      replay_(hp.replay_capacity) {}

namespace {

struct SquashedSample {
    Eigen::MatrixXd mean, log_std, std_dev, z, action;
    Eigen::VectorXd log_pi;            // per sample
    Eigen::ArrayXXd squash_term;       // 2a(1-a^2)/(1-a^2+eps), the dlogpi/dz part
    Eigen::ArrayXXd clamp_mask;        // 1 where log_std was inside the clamp range
};

SquashedSample squashed_sample(const Mlp& policy, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& noise, int action_dim) {
    SquashedSample s;
    const Eigen::MatrixXd out = policy.forward_batch(x);
    s.mean = out.topRows(action_dim);
    const Eigen::MatrixXd raw_log_std = out.bottomRows(action_dim);
    s.clamp_mask = ((raw_log_std.array() > kLogStdMin) && (raw_log_std.array() < kLogStdMax))
                       .cast<double>();
    s.log_std = raw_log_std.array().min(kLogStdMax).max(kLogStdMin);
    s.std_dev = s.log_std.array().exp();
    s.z = s.mean + s.std_dev.cwiseProduct(noise);
    s.action = s.z.array().tanh().matrix();

    const Eigen::ArrayXXd a2 = s.action.array().square();
    s.squash_term = 2.0 * s.action.array() * (1.0 - a2) / (1.0 - a2 + kSquashEps);
    s.log_pi = Eigen::VectorXd::Zero(x.cols());
    for (int i = 0; i < x.cols(); ++i) {
        double lp = 0.0;
        for (int j = 0; j < action_dim; ++j) {
            lp += -0.5 * noise(j, i) * noise(j, i) - s.log_std(j, i) - kHalfLog2Pi;
            lp -= std::log(1.0 - a2(j, i) + kSquashEps);
        }
        s.log_pi[i] = lp;
    }
    return s;
}

}  // namespace

Eigen::VectorXd SacAgent::act(const Eigen::VectorXd& s, RngStream& rng) const {
    Eigen::MatrixXd noise(action_dim_, 1);
    for (int j = 0; j < action_dim_; ++j) noise(j, 0) = rng.normal();
    return squashed_sample(policy_, s, noise, action_dim_).action.col(0);
}

Eigen::VectorXd SacAgent::act_mean(const Eigen::VectorXd& s) const {
    return policy_.forward(s).topRows(action_dim_).array().tanh().matrix();
}

SacLosses SacAgent::compute_losses(const std::vector<const Transition*>& batch,
                                   const Eigen::MatrixXd& noise) const {
    const int b = static_cast<int>(batch.size());
    const Eigen::MatrixXd x = states_matrix(batch, false);
    const Eigen::MatrixXd xn = states_matrix(batch, true);
    const SquashedSample s = squashed_sample(policy_, x, noise, action_dim_);

    const Eigen::MatrixXd q_fresh = q_.forward_batch(vstack(x, s.action));
    const Eigen::MatrixXd v = value_.forward_batch(x);
    const Eigen::MatrixXd v_bar = value_target_.forward_batch(xn);
    Eigen::MatrixXd acts(action_dim_, b);
    for (int i = 0; i < b; ++i) acts.col(i) = batch[i]->action_cont;
    const Eigen::MatrixXd q_replay = q_.forward_batch(vstack(x, acts));

    SacLosses losses;
    for (int i = 0; i < b; ++i) {
        const double vt = sac_value_target(q_fresh(0, i), s.log_pi[i], hp_.sac_temperature);
        losses.value += 0.5 * (v(0, i) - vt) * (v(0, i) - vt) / b;
        const double qt = sac_q_target(batch[i]->reward, hp_.discount, v_bar(0, i),
                                       batch[i]->terminal);
        losses.q += 0.5 * (q_replay(0, i) - qt) * (q_replay(0, i) - qt) / b;
        losses.policy += (hp_.sac_temperature * s.log_pi[i] - q_fresh(0, i)) / b;
    }
    return losses;
}

SacGradients SacAgent::compute_gradients(const std::vector<const Transition*>& batch,
                                         const Eigen::MatrixXd& noise) const {
    const int b = static_cast<int>(batch.size());
    const Eigen::MatrixXd x = states_matrix(batch, false);
    const Eigen::MatrixXd xn = states_matrix(batch, true);
    const SquashedSample s = squashed_sample(policy_, x, noise, action_dim_);

    SacGradients g{value_.zero_gradients(), q_.zero_gradients(), policy_.zero_gradients()};

    // value net: 1/2 (V - (Q - temp*logpi))^2, target frozen
    const Eigen::MatrixXd xa_fresh = vstack(x, s.action);
    const Eigen::MatrixXd q_fresh = q_.forward_batch(xa_fresh);
    const Eigen::MatrixXd v = value_.forward_batch(x);
    Eigen::MatrixXd value_up(1, b);
    for (int i = 0; i < b; ++i)
        value_up(0, i) =
            (v(0, i) - sac_value_target(q_fresh(0, i), s.log_pi[i], hp_.sac_temperature)) / b;
    value_.backward_batch(x, value_up, g.value);

    // q net: 1/2 (Q - (r + zeta*Vbar))^2 on the replay actions
    Eigen::MatrixXd acts(action_dim_, b);
    for (int i = 0; i < b; ++i) acts.col(i) = batch[i]->action_cont;
    const Eigen::MatrixXd xa_replay = vstack(x, acts);
    const Eigen::MatrixXd q_replay = q_.forward_batch(xa_replay);
    const Eigen::MatrixXd v_bar = value_target_.forward_batch(xn);
    Eigen::MatrixXd q_up(1, b);
    for (int i = 0; i < b; ++i)
        q_up(0, i) = (q_replay(0, i) - sac_q_target(batch[i]->reward, hp_.discount, v_bar(0, i),
                                                    batch[i]->terminal)) /
                     b;
    q_.backward_batch(xa_replay, q_up, g.q);

    // policy net: E[temp*logpi - Q(s, a~)] through the reparameterized sample
    MlpGradients q_scratch = q_.zero_gradients();
    const Eigen::MatrixXd input_grad =
        q_.backward_batch(xa_fresh, Eigen::MatrixXd::Constant(1, b, 1.0), q_scratch);
    const Eigen::MatrixXd dq_da = input_grad.bottomRows(action_dim_);

    Eigen::MatrixXd policy_up(2 * action_dim_, b);
    const double temp = hp_.sac_temperature;
    for (int i = 0; i < b; ++i) {
        for (int j = 0; j < action_dim_; ++j) {
            const double one_minus_a2 = 1.0 - s.action(j, i) * s.action(j, i);
            const double dlogpi_dz = s.squash_term(j, i);
            const double dq_dz = dq_da(j, i) * one_minus_a2;
            const double dmean = (temp * dlogpi_dz - dq_dz) / b;
            const double sn = s.std_dev(j, i) * noise(j, i);
            double dlog_std = (temp * (-1.0 + dlogpi_dz * sn) - dq_dz * sn) / b;
            dlog_std *= s.clamp_mask(j, i);
            policy_up(j, i) = dmean;
            policy_up(action_dim_ + j, i) = dlog_std;
        }
    }
    policy_.backward_batch(x, policy_up, g.policy);
    return g;
}

SacLosses SacAgent::update_batch(const std::vector<const Transition*>& batch,
                                 const Eigen::MatrixXd& noise) {
    const SacLosses losses = compute_losses(batch, noise);
    const SacGradients g = compute_gradients(batch, noise);
    value_.apply_gradient(g.value, -hp_.learn_rate);
    q_.apply_gradient(g.q, -hp_.learn_rate);
    policy_.apply_gradient(g.policy, -hp_.learn_rate);
    value_target_.soft_update_from(value_, hp_.target_tau);
    return losses;
}

SacLosses SacAgent::update(RngStream& rng) {
    if (replay_.size() < static_cast<std::size_t>(hp_.batch_size)) return {};
    const auto batch = replay_.sample(hp_.batch_size, rng);
    Eigen::MatrixXd noise(action_dim_, static_cast<int>(batch.size()));
    for (int i = 0; i < noise.cols(); ++i)
        for (int j = 0; j < action_dim_; ++j) noise(j, i) = rng.normal();
    return update_batch(batch, noise);
}

void SacAgent::save(std::ostream& out) const {
    out << "sac " << action_dim_ << '\n';
    policy_.save(out);
    q_.save(out);
    value_.save(out);
    value_target_.save(out);
}

void SacAgent::load(std::istream& in) {
    std::string tag;
    in >> tag >> action_dim_;
    if (tag != "sac") throw std::runtime_error("agent snapshot: expected sac");
    policy_ = Mlp::load(in);
    q_ = Mlp::load(in);
    value_ = Mlp::load(in);
    value_target_ = Mlp::load(in);
}

}  // namespace cfmimo
