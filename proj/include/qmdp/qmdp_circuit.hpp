#pragma once

#include "qmdp/layout.hpp"
#include "qmdp/mdp.hpp"
#include "qmdp/qsim.hpp"

namespace qmdp {

/// Ry angle whose |1> branch has probability p: 2 asin(sqrt(p)).
double theta_for(double p);

/// Start-state preparation on step 0 plus Hadamards on every action register.
qsim::Circuit build_init(const RegisterLayout& layout, const MdpSpec& spec, const InitialDistribution& initial);

/// Amplitude-encodes P(.|s,a) into step t's next-state register with a controlled-Ry tree.
qsim::Circuit build_transition(const RegisterLayout& layout, const MdpSpec& spec, int t);

/// Writes rewards[next] into step t's reward register.
qsim::Circuit build_reward(const RegisterLayout& layout, const MdpSpec& spec, int t);

/// Copies step t's next state onto step t+1's state register.
qsim::Circuit build_step_chain(const RegisterLayout& layout, int t);

/// Adds every step's reward into the return register (undiscounted).
qsim::Circuit build_return_adder(const RegisterLayout& layout);

/// The compiled trajectory-preparation unitary and everything needed to read its output.
struct PreparedModel {
    MdpSpec spec;
    InitialDistribution initial;
    RegisterLayout layout;
    qsim::Circuit circuit;
};

/**
 * Full preparation: init, then per step transition / reward / chain, then the
 * return adder. Requires a valid spec, a power-of-two action count, and a
 * power-of-two state count when the start is uniform.
 */
PreparedModel build_preparation(const MdpSpec& spec, int horizon, const InitialDistribution& initial);

/// Runs the preparation circuit on |0...0>.
qsim::Statevector prepare_state(const PreparedModel& model, qsim::Backend backend);

} // namespace qmdp
