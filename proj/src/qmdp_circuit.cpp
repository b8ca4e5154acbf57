#include "qmdp/qmdp_circuit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qmdp {

using qsim::Circuit;
using qsim::Control;
using qsim::Gate;

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<Control> concat(std::vector<Control> a, const std::vector<Control>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace

double theta_for(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("probability " + std::to_string(p) + " outside [0,1]");
    return 2.0 * std::asin(std::sqrt(p));
}

Circuit build_init(const RegisterLayout& layout, const MdpSpec& spec, const InitialDistribution& initial) {
    Circuit c(layout.total_qubits());
    if (std::holds_alternative<UniformStart>(initial)) {
        if (!is_power_of_two(spec.num_states) || (1 << layout.state_bits()) != spec.num_states) {
            throw std::invalid_argument("uniform start needs a power-of-two number of states, got " +
                                        std::to_string(spec.num_states));
        }
        for (int q : layout.register_qubits(Role::State, 0)) c.add(Gate::h(q));
    } else {
        const int s = std::get<FixedStart>(initial).state;
        if (s < 0 || s >= spec.num_states) throw std::out_of_range("fixed start state out of range");
        for (const auto& bit : layout.pattern(Role::State, 0, static_cast<std::uint64_t>(s))) {
            if (bit.bit) c.add(Gate::x(bit.qubit));
        }
    }
    for (int t = 0; t < layout.horizon(); ++t) {
        for (int q : layout.register_qubits(Role::Action, t)) c.add(Gate::h(q));
    }
    return c;
}

Circuit build_transition(const RegisterLayout& layout, const MdpSpec& spec, int t) {
    if (t < 0 || t >= layout.horizon()) throw std::out_of_range("time step out of range");
    const int n_s = layout.state_bits();
    const std::size_t width = std::size_t{1} << n_s;
    Circuit c(layout.total_qubits());
    for (int s = 0; s < spec.num_states; ++s) {
        for (int a = 0; a < spec.num_actions; ++a) {
            std::vector<double> dist(width, 0.0);
            for (const auto& succ : support(spec, s, a)) dist[static_cast<std::size_t>(succ.next)] = succ.prob;
            const auto sa_controls = concat(layout.pattern(Role::State, t, static_cast<std::uint64_t>(s)),
                                            layout.pattern(Role::Action, t, static_cast<std::uint64_t>(a)));
            // Most significant bit first; each level is conditioned on the bits above it.
            for (int k = n_s - 1; k >= 0; --k) {
                const std::size_t prefixes = std::size_t{1} << (n_s - 1 - k);
                for (std::size_t prefix = 0; prefix < prefixes; ++prefix) {
                    double p_prefix = 0.0;
                    double p_one = 0.0;
                    for (std::size_t v = 0; v < width; ++v) {
                        if ((v >> (k + 1)) != prefix) continue;
                        p_prefix += dist[v];
                        if ((v >> k) & 1U) p_one += dist[v];
                    }
                    const double cond = p_prefix > 0.0 ? std::clamp(p_one / p_prefix, 0.0, 1.0) : 0.0;
                    if (cond == 0.0) continue;
                    auto controls = sa_controls;
                    for (int above = k + 1; above < n_s; ++above) {
                        controls.push_back({layout.qubit(Role::Next, t, above),
                                            static_cast<int>((prefix >> (above - k - 1)) & 1U)});
                    }
                    c.add(Gate::ry(layout.qubit(Role::Next, t, k), theta_for(cond), std::move(controls)));
                }
            }
        }
    }
    return c;
}

Circuit build_reward(const RegisterLayout& layout, const MdpSpec& spec, int t) {
    if (t < 0 || t >= layout.horizon()) throw std::out_of_range("time step out of range");
    const int n_r = layout.reward_bits();
    for (int r : spec.rewards) {
        if (r < 0 || (n_r < 31 && r >= (1 << n_r))) throw std::invalid_argument("reward overflow");
    }
    Circuit c(layout.total_qubits());
    bool identity_map = n_r == layout.state_bits();
    for (int v = 0; v < spec.num_states && identity_map; ++v) identity_map = spec.rewards[static_cast<std::size_t>(v)] == v;
    if (identity_map) {
        // r(s') = s': one CNOT per bit copies the next state into the reward register.
        for (int b = 0; b < n_r; ++b) {
            c.add(Gate::x(layout.qubit(Role::Reward, t, b), {{layout.qubit(Role::Next, t, b), 1}}));
        }
        return c;
    }
    for (int v = 0; v < spec.num_states; ++v) {
        const int r = spec.rewards[static_cast<std::size_t>(v)];
        for (int b = 0; b < n_r; ++b) {
            if (!((r >> b) & 1)) continue;
            c.add(Gate::x(layout.qubit(Role::Reward, t, b), layout.pattern(Role::Next, t, static_cast<std::uint64_t>(v))));
        }
    }
    return c;
}

Circuit build_step_chain(const RegisterLayout& layout, int t) {
    if (t < 0 || t + 1 >= layout.horizon()) throw std::out_of_range("step chain needs t < horizon - 1");
    Circuit c(layout.total_qubits());
    for (int b = 0; b < layout.state_bits(); ++b) {
        c.add(Gate::x(layout.qubit(Role::State, t + 1, b), {{layout.qubit(Role::Next, t, b), 1}}));
    }
    return c;
}

Circuit build_return_adder(const RegisterLayout& layout) {
    Circuit c(layout.total_qubits());
    const int n_g = layout.return_bits();
    if (n_g == 0) return c;
    for (int t = 0; t < layout.horizon(); ++t) {
        for (int j = 0; j < layout.reward_bits(); ++j) {
            const int reward_q = layout.qubit(Role::Reward, t, j);
            // Increment the return register's bits j..n_g-1 when reward bit j is set:
            // carries ripple from the top down so each flip sees the pre-increment bits.
            for (int k = n_g - 1; k > j; --k) {
                std::vector<Control> controls{{reward_q, 1}};
                for (int m = j; m < k; ++m) controls.push_back({layout.qubit(Role::Return, 0, m), 1});
                c.add(Gate::x(layout.qubit(Role::Return, 0, k), std::move(controls)));
            }
            c.add(Gate::x(layout.qubit(Role::Return, 0, j), {{reward_q, 1}}));
        }
    }
    return c;
}

PreparedModel build_preparation(const MdpSpec& spec, int horizon, const InitialDistribution& initial) {
    if (auto violations = validate(spec); !violations.empty()) throw ValidationError(std::move(violations));
    if (!is_power_of_two(spec.num_actions)) {
        throw std::invalid_argument("the action register needs a power-of-two number of actions, got " +
                                    std::to_string(spec.num_actions));
    }
    RegisterLayout layout(spec, horizon);
    if (layout.total_qubits() > qsim::kMaxSparseQubits) {
        throw qsim::CapacityError("trajectory register needs " + std::to_string(layout.total_qubits()) + " qubits");
    }
    Circuit circuit(layout.total_qubits());
    circuit.append(build_init(layout, spec, initial));
    for (int t = 0; t < horizon; ++t) {
        circuit.append(build_transition(layout, spec, t));
        circuit.append(build_reward(layout, spec, t));
        if (t + 1 < horizon) circuit.append(build_step_chain(layout, t));
    }
    circuit.append(build_return_adder(layout));
    return PreparedModel{spec, initial, layout, std::move(circuit)};
}

qsim::Statevector prepare_state(const PreparedModel& model, qsim::Backend backend) {
    auto state = qsim::Statevector::zero(model.layout.total_qubits(), backend);
    state.apply(model.circuit);
    return state;
}

} // namespace qmdp
