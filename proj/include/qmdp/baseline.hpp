#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmdp/layout.hpp"
#include "qmdp/mdp.hpp"

namespace qmdp {

/// Every nonzero-probability trajectory under uniform action choice, sorted by canonical bitstring.
std::vector<TrajectoryRecord> enumerate_trajectories(const MdpSpec& spec, int horizon,
                                                     const InitialDistribution& initial);

/// Sum of probability * return.
double expected_return(const std::vector<TrajectoryRecord>& records);

struct ValueIterationResult {
    std::vector<double> values;            // V_horizon(s)
    std::vector<std::vector<int>> policy;  // policy[k-1][s]: best action with k steps to go
    std::vector<std::vector<double>> q;    // action values with `horizon` steps to go, q[s][a]

    /// Action with the full horizon remaining.
    const std::vector<int>& first_step_policy() const { return policy.back(); }
};

/// Finite-horizon dynamic program; ties go to the lower action index.
ValueIterationResult value_iteration(const MdpSpec& spec, int horizon);

class QTable {
  public:
    QTable(int num_states, int num_actions)
        : num_actions_(num_actions), values_(static_cast<std::size_t>(num_states * num_actions), 0.0) {}

    int num_states() const noexcept { return static_cast<int>(values_.size()) / num_actions_; }
    int num_actions() const noexcept { return num_actions_; }

    double& at(int s, int a) { return values_[index(s, a)]; }
    double at(int s, int a) const { return values_[index(s, a)]; }
    double max_value(int s) const;
    /// Highest-valued action; ties go to the lower index.
    int greedy_action(int s) const;
    std::vector<int> greedy_policy() const;

  private:
    std::size_t index(int s, int a) const;

    int num_actions_;
    std::vector<double> values_;
};

struct QlConfig {
    double alpha = 0.1;
    double gamma = 1.0;
    double epsilon = 0.1;
    int episodes = 10000;
    int horizon = 3;
    std::uint64_t seed = 0;
    InitialDistribution start = UniformStart{};
};

/// Throws std::invalid_argument when a hyperparameter is out of range.
void check_config(const QlConfig& config);

/**
 * One temporal-difference update:
 * Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
 * The bootstrap term is dropped on the last step of an episode.
 */
void q_update(QTable& q, int s, int a, int reward, int next, bool terminal, double alpha, double gamma);

/// Epsilon-greedy tabular Q-learning over fixed-length episodes.
QTable q_learning(const MdpSpec& spec, const QlConfig& config);

struct Rollout {
    std::vector<Step> steps;
    int total_reward = 0;
    std::uint64_t count = 0; // trials that produced this trajectory
};

/// Greedy-policy rollouts; distinct trajectories in order of first appearance.
std::vector<Rollout> greedy_rollouts(const MdpSpec& spec, const QTable& q, int trials, int horizon,
                                     const InitialDistribution& start, std::uint64_t seed);

/// Trajectory CSV: bitstring,return,prob,count,s0,a0,sp0,r0,... by descending probability then bitstring.
std::string trajectories_csv(std::vector<TrajectoryRecord> records, int horizon);

/// "s0:a0 s1:a1 ..."
std::string format_policy(const std::vector<int>& policy);

} // namespace qmdp
