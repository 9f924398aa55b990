#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cfmimo/agents.hpp"

using namespace cfmimo;

namespace {

Eigen::VectorXd scalar_state(double v) {
    Eigen::VectorXd s(1);
    s[0] = v;
    return s;
}

// Continuous 1-D bandit: reward -(action - 0.7)^2, one step per episode.
template <typename Agent, typename ActFn>
double train_continuous_bandit(Agent& agent, ActFn act, int steps, std::uint64_t seed) {
    RngStream rng(seed);
    const Eigen::VectorXd s0 = scalar_state(0.0);
    for (int t = 0; t < steps; ++t) {
        const Eigen::VectorXd a = act(agent, s0, rng);
        Transition tr;
        tr.state = s0;
        tr.action_cont = a;
        tr.reward = -(a[0] - 0.7) * (a[0] - 0.7);
        tr.next_state = s0;
        tr.terminal = true;
        agent.observe(std::move(tr));
        agent.update(rng);
    }
    return 0.0;
}

}  // namespace

TEST_CASE("target arithmetic") {
    CHECK(ddqn_target(1.0, 0.01, 2.0, false) == doctest::Approx(1.02));
    CHECK(ddqn_target(1.0, 0.01, 2.0, true) == doctest::Approx(1.0));
    CHECK(sarsa_target(1.0, 0.01, 2.0, false) == doctest::Approx(1.02));
    CHECK(sarsa_target(-0.5, 0.9, 3.0, true) == doctest::Approx(-0.5));
    CHECK(sac_value_target(4.0, 0.0, 0.2) == doctest::Approx(4.0));  // point-mass policy
    CHECK(sac_value_target(4.0, 2.0, 0.2) == doctest::Approx(3.6));
    CHECK(sac_q_target(1.5, 0.01, 7.0, false) == doctest::Approx(1.57));
    CHECK(sac_q_target(1.5, 0.01, 7.0, true) == doctest::Approx(1.5));
}

TEST_CASE("episode returns") {
    // printed form: G_1 = zeta^0 r_1 + zeta^1 r_2
    CHECK(pg_return({1.0, 1.0}, 0.01, 1) == doctest::Approx(1.01));
    CHECK(pg_return({1.0, 1.0}, 0.01, 2) == doctest::Approx(0.01));
    CHECK(pg_return({0.0, 0.0, 0.0}, 0.5, 1) == doctest::Approx(0.0));
    // conventional per-step discounting for the critic targets
    CHECK(ac_return({1.0, 1.0}, 0.01, 2) == doctest::Approx(1.0));
    CHECK(ac_return({1.0, 1.0, 1.0}, 0.5, 1) == doctest::Approx(1.75));
}

TEST_CASE("epsilon schedule decays linearly over the first half") {
    AgentHyper hp;
    CHECK(epsilon_at(hp, 0, 1000) == doctest::Approx(1.0));
    CHECK(epsilon_at(hp, 250, 1000) == doctest::Approx(0.525));
    CHECK(epsilon_at(hp, 500, 1000) == doctest::Approx(0.05));
    CHECK(epsilon_at(hp, 900, 1000) == doctest::Approx(0.05));
}

TEST_CASE("replay buffer stays within capacity and samples uniformly") {
    ReplayBuffer buf(100);
    RngStream rng(3);
    for (int i = 0; i < 250; ++i) {
        Transition t;
        t.state = scalar_state(i);
        buf.push(std::move(t));
    }
    CHECK(buf.size() == 100);

    // chi-squared uniformity over the 100 slots
    std::vector<int> counts(100, 0);
    const int draws = 40000;
    for (int i = 0; i < draws / 64; ++i)
        for (const Transition* t : buf.sample(64, rng))
            ++counts[static_cast<int>(t->state[0]) % 100];
    double chi2 = 0.0;
    const double expected = static_cast<double>(draws / 64 * 64) / 100.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    // df = 99; critical value at p = 0.001 is ~148.2
    CHECK(chi2 < 148.2);
}

TEST_CASE("ddqn batch loss matches a hand-computed value") {
    AgentHyper hp;
    hp.batch_size = 4;
    DdqnAgent agent(2, 3, hp, 42);

    std::vector<Transition> data(4);
    RngStream rng(5);
    for (int i = 0; i < 4; ++i) {
        data[i].state = Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
        data[i].next_state = Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
        data[i].action = i % 3;
        data[i].reward = rng.uniform(0, 1);
        data[i].terminal = (i == 3);
    }
    std::vector<const Transition*> batch;
    for (const auto& t : data) batch.push_back(&t);

    // hand recomputation with the same networks before the update step
    double expect = 0.0;
    for (const auto& t : data) {
        const Eigen::VectorXd qn_online = agent.online().forward(t.next_state);
        Eigen::Index best;
        qn_online.maxCoeff(&best);
        const double y = ddqn_target(t.reward, hp.discount,
                                     agent.target().forward(t.next_state)[best], t.terminal);
        const double d = agent.online().forward(t.state)[t.action] - y;
        expect += d * d / 4.0;
    }
    CHECK(agent.update_batch(batch) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("ddqn terminal transitions bootstrap nothing") {
    AgentHyper hp;
    DdqnAgent agent(1, 2, hp, 7);
    Transition t;
    t.state = scalar_state(0.3);
    t.next_state = scalar_state(0.9);
    t.action = 1;
    t.reward = 2.5;
    t.terminal = true;
    std::vector<const Transition*> batch{&t};
    const double q0 = agent.online().forward(t.state)[1];
    const double loss = agent.update_batch(batch);
    CHECK(loss == doctest::Approx((q0 - 2.5) * (q0 - 2.5)).epsilon(1e-12));
}

TEST_CASE("sarsa converges to the two-state fixed point") {
    // deterministic cycle: A --(r=1)--> B --(r=0)--> A, single action
    AgentHyper hp;
    hp.learn_rate = 0.05;
    SarsaAgent agent(2, 1, hp, 11);
    const Eigen::Vector2d sa(1.0, 0.0), sb(0.0, 1.0);

    Transition t_ab, t_ba;
    t_ab.state = sa;
    t_ab.action = 0;
    t_ab.reward = 1.0;
    t_ab.next_state = sb;
    t_ab.next_action = 0;
    t_ba.state = sb;
    t_ba.action = 0;
    t_ba.reward = 0.0;
    t_ba.next_state = sa;
    t_ba.next_action = 0;

    for (int it = 0; it < 3000; ++it) {
        agent.update(t_ab);
        agent.update(t_ba);
    }
    const double zeta = hp.discount;
    const double qa_star = 1.0 / (1.0 - zeta * zeta);
    const double qb_star = zeta / (1.0 - zeta * zeta);
    CHECK(agent.q().forward(sa)[0] == doctest::Approx(qa_star).epsilon(1e-3));
    CHECK(agent.q().forward(sb)[0] == doctest::Approx(qb_star).epsilon(1e-3));
}

TEST_CASE("pg improves the better arm monotonically") {
    // one pull per episode: a reward-0 pull contributes no gradient, so the
    // winning arm's probability can only rise
    AgentHyper hp;
    hp.learn_rate = 0.1;
    PgAgent agent(1, 2, hp, 21);
    RngStream rng(22);
    const Eigen::VectorXd s0 = scalar_state(0.0);

    double prev = agent.probs(s0)[0];
    const double first = prev;
    for (int ep = 0; ep < 200; ++ep) {
        std::vector<EpisodeStep> episode(1);
        episode[0].state = s0;
        episode[0].action = agent.act(s0, rng);
        episode[0].reward = episode[0].action == 0 ? 1.0 : 0.0;
        agent.update_episode(episode);
        const double p = agent.probs(s0)[0];
        CHECK(p >= prev - 1e-12);
        prev = p;
    }
    CHECK(prev > first);
    CHECK(prev > 0.9);
}

TEST_CASE("pg zero rewards give a zero gradient step") {
    AgentHyper hp;
    PgAgent agent(1, 3, hp, 31);
    const Eigen::VectorXd before = agent.probs(scalar_state(0.0));
    std::vector<EpisodeStep> episode(5);
    for (auto& s : episode) {
        s.state = scalar_state(0.0);
        s.action = 1;
        s.reward = 0.0;
    }
    const PolicyUpdateStats stats = agent.update_episode(episode);
    CHECK(stats.grad_norm == doctest::Approx(0.0));
    CHECK((agent.probs(scalar_state(0.0)) - before).norm() <= 1e-15);
}

TEST_CASE("actor-critic learns the recurrent-state value") {
    AgentHyper hp;
    hp.learn_rate = 0.01;
    AcAgent agent(1, 2, hp, 41);
    RngStream rng(42);
    const Eigen::VectorXd s0 = scalar_state(0.0);

    const int horizon = 50;
    for (int ep = 0; ep < 400; ++ep) {
        std::vector<EpisodeStep> episode(horizon);
        for (auto& step : episode) {
            step.state = s0;
            step.action = agent.act(s0, rng);
            step.reward = 1.0;  // constant reward regardless of the arm
        }
        agent.update_episode(episode);
    }
    CHECK(agent.value(s0) == doctest::Approx(1.0 / (1.0 - hp.discount)).epsilon(1e-2));
}

TEST_CASE("actor-critic tracks the better arm with lower gradient variance than pg") {
    double pg_var_sum = 0.0, ac_var_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        AgentHyper hp;
        hp.learn_rate = 0.05;
        PgAgent pg(1, 2, hp, seed);
        AcAgent ac(1, 2, hp, seed);
        RngStream rng_pg(100 + seed), rng_ac(100 + seed);
        const Eigen::VectorXd s0 = scalar_state(0.0);

        std::vector<double> pg_norms, ac_norms;
        for (int ep = 0; ep < 300; ++ep) {
            std::vector<EpisodeStep> episode(1);
            episode[0].state = s0;
            episode[0].action = pg.act(s0, rng_pg);
            episode[0].reward = episode[0].action == 0 ? 1.0 : 0.0;
            pg_norms.push_back(pg.update_episode(episode).grad_norm);
            episode[0].action = ac.act(s0, rng_ac);
            episode[0].reward = episode[0].action == 0 ? 1.0 : 0.0;
            ac_norms.push_back(ac.update_episode(episode).grad_norm);
        }
        const auto variance = [](const std::vector<double>& v) {
            double mean = 0.0;
            for (double x : v) mean += x / v.size();
            double var = 0.0;
            for (double x : v) var += (x - mean) * (x - mean) / v.size();
            return var;
        };
        pg_var_sum += variance(pg_norms);
        ac_var_sum += variance(ac_norms);

        CHECK(ac.probs(s0)[0] > 0.8);  // optimal arm dominates
    }
    CHECK(ac_var_sum < pg_var_sum);
}

TEST_CASE("ddpg moves its action toward higher critic value") {
    AgentHyper hp;
    hp.learn_rate = 3e-3;
    DdpgAgent agent(1, 1, hp, 51);
    RngStream rng(52);
    const Eigen::VectorXd s0 = scalar_state(0.0);

    // seed the replay with spread-out actions
    for (int t = 0; t < 200; ++t) {
        Transition tr;
        tr.state = s0;
        tr.action_cont = scalar_state(rng.uniform(-1.0, 1.0));
        tr.reward = -(tr.action_cont[0] - 0.7) * (tr.action_cont[0] - 0.7);
        tr.next_state = s0;
        tr.terminal = true;
        agent.observe(std::move(tr));
    }
    for (int t = 0; t < 500; ++t) agent.update(rng);
    train_continuous_bandit(
        agent,
        [&](DdpgAgent& a, const Eigen::VectorXd& s, RngStream& r) { return a.act(s, r, 0.2); },
        2500, 53);
    CHECK(agent.act_greedy(s0)[0] == doctest::Approx(0.7).epsilon(0.08));
}

TEST_CASE("sac finds the continuous bandit optimum") {
    AgentHyper hp;
    hp.learn_rate = 3e-3;
    SacAgent agent(1, 1, hp, 61);
    train_continuous_bandit(
        agent, [&](SacAgent& a, const Eigen::VectorXd& s, RngStream& r) { return a.act(s, r); },
        2000, 62);
    CHECK(agent.act_mean(scalar_state(0.0))[0] == doctest::Approx(0.7).epsilon(0.08));
}

TEST_CASE("sac losses and gradients agree with finite differences") {
    AgentHyper hp;
    SacAgent agent(2, 1, hp, 71);
    RngStream rng(72);

    std::vector<Transition> data(4);
    for (auto& t : data) {
        t.state = Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
        t.next_state = Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
        t.action_cont = scalar_state(rng.uniform(-0.9, 0.9));
        t.reward = rng.uniform(-1, 1);
        t.terminal = (&t == &data.back());
    }
    std::vector<const Transition*> batch;
    for (const auto& t : data) batch.push_back(&t);
    Eigen::MatrixXd noise(1, 4);
    for (int i = 0; i < 4; ++i) noise(0, i) = rng.normal() * 0.5;

    const SacGradients grads = agent.compute_gradients(batch, noise);
    const double h = 1e-6;

    const auto fd_check = [&](Mlp& net, const MlpGradients& g,
                              double SacLosses::*member) {
        // spot-check a handful of entries in the first weight layer
        for (int probe = 0; probe < 6; ++probe) {
            const int r = probe % static_cast<int>(net.weights()[0].rows());
            const int c = probe % static_cast<int>(net.weights()[0].cols());
            const double saved = net.weights()[0](r, c);
            net.weights()[0](r, c) = saved + h;
            const double plus = agent.compute_losses(batch, noise).*member;
            net.weights()[0](r, c) = saved - h;
            const double minus = agent.compute_losses(batch, noise).*member;
            net.weights()[0](r, c) = saved;
            const double fd = (plus - minus) / (2.0 * h);
            const double an = g.w[0](r, c);
            const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
            CHECK(std::abs(fd - an) / denom <= 1e-3);
        }
    };
    fd_check(agent.value_net(), grads.value, &SacLosses::value);
    fd_check(agent.q_net(), grads.q, &SacLosses::q);
    fd_check(agent.policy_net(), grads.policy, &SacLosses::policy);
}

TEST_CASE("agents snapshot round trip") {
    AgentHyper hp;
    PgAgent pg(2, 3, hp, 81);
    std::stringstream ss;
    pg.save(ss);
    PgAgent copy(2, 3, hp, 99);
    copy.load(ss);
    const Eigen::Vector2d s(0.3, -0.4);
    CHECK((pg.probs(s) - copy.probs(s)).norm() <= 1e-12);

    SacAgent sac(2, 2, hp, 82);
    std::stringstream s2;
    sac.save(s2);
    SacAgent sac2(2, 2, hp, 17);
    sac2.load(s2);
    CHECK((sac.act_mean(s) - sac2.act_mean(s)).norm() <= 1e-12);
}
