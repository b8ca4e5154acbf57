#include "qmdp/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>

namespace qmdp {

namespace {

double uniform53(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int sample_start(const MdpSpec& spec, const InitialDistribution& start, std::mt19937_64& rng) {
    if (const auto* fixed = std::get_if<FixedStart>(&start)) return fixed->state;
    return static_cast<int>(rng() % static_cast<std::uint64_t>(spec.num_states));
}

// Inverse-CDF draw over the successors in ascending next-state order.
int sample_next(const std::vector<Successor>& succ, std::mt19937_64& rng) {
    const double u = uniform53(rng);
    double running = 0.0;
    for (const auto& s : succ) {
        running += s.prob;
        if (u < running) return s.next;
    }
    return succ.back().next;
}

using SupportTable = std::vector<std::vector<std::vector<Successor>>>;

SupportTable support_table(const MdpSpec& spec) {
    SupportTable table(static_cast<std::size_t>(spec.num_states));
    for (int s = 0; s < spec.num_states; ++s) {
        for (int a = 0; a < spec.num_actions; ++a) table[static_cast<std::size_t>(s)].push_back(support(spec, s, a));
    }
    return table;
}

void require_valid(const MdpSpec& spec) {
    if (auto violations = validate(spec); !violations.empty()) throw ValidationError(std::move(violations));
}

} // namespace

std::vector<TrajectoryRecord> enumerate_trajectories(const MdpSpec& spec, int horizon,
                                                     const InitialDistribution& initial) {
    require_valid(spec);
    const RegisterLayout layout(spec, horizon);
    const auto table = support_table(spec);
    const double action_prob = 1.0 / spec.num_actions;

    std::vector<TrajectoryRecord> out;
    std::vector<Step> path;
    path.reserve(static_cast<std::size_t>(horizon));

    auto dfs = [&](auto&& self, int state, double prob, int ret) -> void {
        if (static_cast<int>(path.size()) == horizon) {
            TrajectoryRecord rec;
            rec.steps = path;
            rec.ret = ret;
            rec.probability = prob;
            rec.bitstring = qsim::bitstring(encode_trajectory(layout, path, layout.return_bits() ? ret : 0),
                                            layout.total_qubits());
            out.push_back(std::move(rec));
            return;
        }
        for (int a = 0; a < spec.num_actions; ++a) {
            for (const auto& succ : table[static_cast<std::size_t>(state)][static_cast<std::size_t>(a)]) {
                const int r = spec.rewards[static_cast<std::size_t>(succ.next)];
                path.push_back({state, a, succ.next, r});
                self(self, succ.next, prob * action_prob * succ.prob, ret + r);
                path.pop_back();
            }
        }
    };
    for (int s = 0; s < spec.num_states; ++s) {
        const double p0 = initial_probability(spec, initial, s);
        if (p0 > 0.0) dfs(dfs, s, p0, 0);
    }
    std::sort(out.begin(), out.end(),
              [](const TrajectoryRecord& x, const TrajectoryRecord& y) { return x.bitstring < y.bitstring; });
    return out;
}

double expected_return(const std::vector<TrajectoryRecord>& records) {
    double total = 0.0;
    for (const auto& r : records) total += r.probability * r.ret;
    return total;
}

ValueIterationResult value_iteration(const MdpSpec& spec, int horizon) {
    require_valid(spec);
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    const auto table = support_table(spec);
    const auto n = static_cast<std::size_t>(spec.num_states);

    ValueIterationResult result;
    std::vector<double> v(n, 0.0);
    for (int k = 1; k <= horizon; ++k) {
        std::vector<double> next_v(n, 0.0);
        std::vector<int> policy(n, 0);
        std::vector<std::vector<double>> q(n, std::vector<double>(static_cast<std::size_t>(spec.num_actions), 0.0));
        for (std::size_t s = 0; s < n; ++s) {
            for (int a = 0; a < spec.num_actions; ++a) {
                double value = 0.0;
                for (const auto& succ : table[s][static_cast<std::size_t>(a)]) {
                    const auto sp = static_cast<std::size_t>(succ.next);
                    value += succ.prob * (spec.rewards[sp] + v[sp]);
                }
                q[s][static_cast<std::size_t>(a)] = value;
                if (a == 0 || value > next_v[s]) {
                    next_v[s] = value;
                    policy[s] = a;
                }
            }
        }
        v = std::move(next_v);
        result.policy.push_back(std::move(policy));
        result.q = std::move(q);
    }
    result.values = std::move(v);
    return result;
}

std::size_t QTable::index(int s, int a) const {
    if (s < 0 || s >= num_states() || a < 0 || a >= num_actions_) throw std::out_of_range("Q-table index out of range");
    return static_cast<std::size_t>(s * num_actions_ + a);
}

double QTable::max_value(int s) const { return at(s, greedy_action(s)); }

int QTable::greedy_action(int s) const {
    int best = 0;
    for (int a = 1; a < num_actions_; ++a) {
        if (at(s, a) > at(s, best)) best = a;
    }
    return best;
}

std::vector<int> QTable::greedy_policy() const {
    std::vector<int> out;
    for (int s = 0; s < num_states(); ++s) out.push_back(greedy_action(s));
    return out;
}

void check_config(const QlConfig& c) {
    if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0,1]");
    if (!(c.gamma >= 0.0 && c.gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0,1]");
    if (!(c.epsilon >= 0.0 && c.epsilon <= 1.0)) throw std::invalid_argument("epsilon must be in [0,1]");
    if (c.episodes < 0) throw std::invalid_argument("episodes must be non-negative");
    if (c.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
}

void q_update(QTable& q, int s, int a, int reward, int next, bool terminal, double alpha, double gamma) {
    const double target = reward + (terminal ? 0.0 : gamma * q.max_value(next));
    q.at(s, a) += alpha * (target - q.at(s, a));
}

QTable q_learning(const MdpSpec& spec, const QlConfig& config) {
    require_valid(spec);
    check_config(config);
    const auto table = support_table(spec);
    QTable q(spec.num_states, spec.num_actions);
    std::mt19937_64 rng(config.seed);
    for (int episode = 0; episode < config.episodes; ++episode) {
        int s = sample_start(spec, config.start, rng);
        for (int t = 0; t < config.horizon; ++t) {
            int a = 0;
            if (uniform53(rng) < config.epsilon) {
                a = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.num_actions));
            } else {
                a = q.greedy_action(s);
            }
            const int next = sample_next(table[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)], rng);
            const int r = spec.rewards[static_cast<std::size_t>(next)];
            q_update(q, s, a, r, next, t + 1 == config.horizon, config.alpha, config.gamma);
            s = next;
        }
    }
    return q;
}

std::vector<Rollout> greedy_rollouts(const MdpSpec& spec, const QTable& q, int trials, int horizon,
                                     const InitialDistribution& start, std::uint64_t seed) {
    require_valid(spec);
    if (q.num_states() != spec.num_states || q.num_actions() != spec.num_actions) {
        throw std::invalid_argument("Q-table dimensions do not match the MDP");
    }
    const auto table = support_table(spec);
    std::mt19937_64 rng(seed);
    std::vector<Rollout> out;
    for (int trial = 0; trial < trials; ++trial) {
        Rollout r;
        int s = sample_start(spec, start, rng);
        for (int t = 0; t < horizon; ++t) {
            const int a = q.greedy_action(s);
            const int next = sample_next(table[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)], rng);
            const int reward = spec.rewards[static_cast<std::size_t>(next)];
            r.steps.push_back({s, a, next, reward});
            r.total_reward += reward;
            s = next;
        }
        auto it = std::find_if(out.begin(), out.end(), [&](const Rollout& x) { return x.steps == r.steps; });
        if (it == out.end()) {
            r.count = 1;
            out.push_back(std::move(r));
        } else {
            ++it->count;
        }
    }
    return out;
}

std::string trajectories_csv(std::vector<TrajectoryRecord> records, int horizon) {
    std::stable_sort(records.begin(), records.end(), [](const TrajectoryRecord& x, const TrajectoryRecord& y) {
        if (x.probability != y.probability) return x.probability > y.probability;
        return x.bitstring < y.bitstring;
    });
    std::string out = "bitstring,return,prob,count";
    for (int t = 0; t < horizon; ++t) {
        const auto i = std::to_string(t);
        out += ",s" + i + ",a" + i + ",sp" + i + ",r" + i;
    }
    out += "\n";
    char buf[64];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.17g", r.probability);
        out += r.bitstring + "," + std::to_string(r.ret) + "," + buf + "," + std::to_string(r.count);
        for (const auto& s : r.steps) {
            out += "," + std::to_string(s.state) + "," + std::to_string(s.action) + "," + std::to_string(s.next) + "," +
                   std::to_string(s.reward);
        }
        out += "\n";
    }
    return out;
}

std::string format_policy(const std::vector<int>& policy) {
    std::string out;
    for (std::size_t s = 0; s < policy.size(); ++s) {
        if (s) out += " ";
        out += "s" + std::to_string(s) + ":a" + std::to_string(policy[s]);
    }
    return out;
}

} // namespace qmdp
