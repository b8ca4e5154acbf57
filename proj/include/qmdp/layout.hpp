#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qmdp/mdp.hpp"
#include "qmdp/qsim.hpp"

namespace qmdp {

enum class Role { State, Action, Next, Reward, Return };

/**
 * Qubit assignment for a T-step trajectory register.
 *
 * Step t occupies one contiguous block [state | action | next | reward],
 * ascending from qubit 0 for t = 0. The return register sits above the last
 * block. A single-step layout carries no return register: the return of one
 * step is its reward.
 */
class RegisterLayout {
  public:
    RegisterLayout(const MdpSpec& spec, int horizon);

    int state_bits() const noexcept { return n_s_; }
    int action_bits() const noexcept { return n_a_; }
    int reward_bits() const noexcept { return n_r_; }
    int return_bits() const noexcept { return n_g_; }
    int horizon() const noexcept { return horizon_; }
    int step_width() const noexcept { return 2 * n_s_ + n_a_ + n_r_; }
    int total_qubits() const noexcept { return horizon_ * step_width() + n_g_; }

    /// Global qubit of `bit` (0 = least significant) in the register of `role` at step t.
    int qubit(Role role, int t, int bit) const;
    /// All qubits of a register, least significant first. `t` is ignored for Return.
    std::vector<int> register_qubits(Role role, int t = 0) const;
    int register_width(Role role) const;

    /// Reads a register's value out of a basis index.
    std::uint64_t read(qsim::BasisIndex index, Role role, int t = 0) const;
    /// Control pattern requiring the register to hold `value`.
    std::vector<qsim::Control> pattern(Role role, int t, std::uint64_t value) const;

  private:
    int n_s_, n_a_, n_r_, n_g_, horizon_;
};

struct Step {
    int state = 0;
    int action = 0;
    int next = 0;
    int reward = 0;
    bool operator==(const Step&) const = default;
};

struct TrajectoryRecord {
    std::vector<Step> steps;
    int ret = 0;
    double probability = 0.0;
    std::uint64_t count = 0;
    std::string bitstring;
};

/// Number of bits needed to index `count` values (0 for count <= 1).
int bits_for(int count);

/// Basis index of a trajectory under the layout; the return register holds `ret`.
qsim::BasisIndex encode_trajectory(const RegisterLayout& layout, const std::vector<Step>& steps, int ret);

/// Splits a basis index into per-step fields and the return.
TrajectoryRecord decode_trajectory(const RegisterLayout& layout, qsim::BasisIndex index);
/// Bit-string form; throws std::invalid_argument on a length mismatch.
TrajectoryRecord decode_trajectory(const RegisterLayout& layout, std::string_view bitstring);

} // namespace qmdp
