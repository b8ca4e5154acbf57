#include "qmdp/layout.hpp"

#include <algorithm>
#include <stdexcept>

namespace qmdp {

int bits_for(int count) {
    int bits = 0;
    while ((1LL << bits) < count) ++bits;
    return bits;
}

RegisterLayout::RegisterLayout(const MdpSpec& spec, int horizon)
    : n_s_(std::max(1, bits_for(spec.num_states))),
      n_a_(bits_for(spec.num_actions)),
      n_r_(reward_width(spec)),
      n_g_(0),
      horizon_(horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
    if (horizon > 1) {
        const std::int64_t max_return = static_cast<std::int64_t>(horizon) * ((std::int64_t{1} << n_r_) - 1);
        while ((std::int64_t{1} << n_g_) < max_return + 1) ++n_g_;
    }
}

int RegisterLayout::register_width(Role role) const {
    switch (role) {
    case Role::State:
    case Role::Next: return n_s_;
    case Role::Action: return n_a_;
    case Role::Reward: return n_r_;
    case Role::Return: return n_g_;
    }
    return 0;
}

int RegisterLayout::qubit(Role role, int t, int bit) const {
    if (bit < 0 || bit >= register_width(role)) throw std::out_of_range("register bit out of range");
    if (role == Role::Return) return horizon_ * step_width() + bit;
    if (t < 0 || t >= horizon_) throw std::out_of_range("time step " + std::to_string(t) + " out of range");
    int offset = t * step_width();
    switch (role) {
    case Role::State: break;
    case Role::Action: offset += n_s_; break;
    case Role::Next: offset += n_s_ + n_a_; break;
    case Role::Reward: offset += 2 * n_s_ + n_a_; break;
    case Role::Return: break;
    }
    return offset + bit;
}

std::vector<int> RegisterLayout::register_qubits(Role role, int t) const {
    std::vector<int> out;
    for (int b = 0; b < register_width(role); ++b) out.push_back(qubit(role, t, b));
    return out;
}

std::uint64_t RegisterLayout::read(qsim::BasisIndex index, Role role, int t) const {
    std::uint64_t value = 0;
    const int width = register_width(role);
    for (int b = 0; b < width; ++b) value |= ((index >> qubit(role, t, b)) & 1U) << b;
    return value;
}

std::vector<qsim::Control> RegisterLayout::pattern(Role role, int t, std::uint64_t value) const {
    const int width = register_width(role);
    if (width < 64 && (value >> width) != 0) {
        throw std::invalid_argument("value " + std::to_string(value) + " does not fit a " + std::to_string(width) +
                                    "-bit register");
    }
    std::vector<qsim::Control> out;
    for (int b = 0; b < width; ++b) out.push_back({qubit(role, t, b), static_cast<int>((value >> b) & 1U)});
    return out;
}

qsim::BasisIndex encode_trajectory(const RegisterLayout& layout, const std::vector<Step>& steps, int ret) {
    if (static_cast<int>(steps.size()) != layout.horizon()) throw std::invalid_argument("step count != horizon");
    qsim::BasisIndex index = 0;
    auto put = [&](Role role, int t, std::uint64_t value) {
        for (const auto& c : layout.pattern(role, t, value)) index |= static_cast<qsim::BasisIndex>(c.bit) << c.qubit;
    };
    for (int t = 0; t < layout.horizon(); ++t) {
        const auto& s = steps[static_cast<std::size_t>(t)];
        put(Role::State, t, static_cast<std::uint64_t>(s.state));
        put(Role::Action, t, static_cast<std::uint64_t>(s.action));
        put(Role::Next, t, static_cast<std::uint64_t>(s.next));
        put(Role::Reward, t, static_cast<std::uint64_t>(s.reward));
    }
    put(Role::Return, 0, static_cast<std::uint64_t>(ret));
    return index;
}

TrajectoryRecord decode_trajectory(const RegisterLayout& layout, qsim::BasisIndex index) {
    TrajectoryRecord rec;
    int reward_sum = 0;
    for (int t = 0; t < layout.horizon(); ++t) {
        Step s{static_cast<int>(layout.read(index, Role::State, t)), static_cast<int>(layout.read(index, Role::Action, t)),
               static_cast<int>(layout.read(index, Role::Next, t)), static_cast<int>(layout.read(index, Role::Reward, t))};
        reward_sum += s.reward;
        rec.steps.push_back(s);
    }
    rec.ret = layout.return_bits() > 0 ? static_cast<int>(layout.read(index, Role::Return)) : reward_sum;
    rec.bitstring = qsim::bitstring(index, layout.total_qubits());
    return rec;
}

TrajectoryRecord decode_trajectory(const RegisterLayout& layout, std::string_view bits) {
    if (static_cast<int>(bits.size()) != layout.total_qubits()) {
        throw std::invalid_argument("bitstring has " + std::to_string(bits.size()) + " bits, layout expects " +
                                    std::to_string(layout.total_qubits()));
    }
    return decode_trajectory(layout, qsim::parse_bitstring(bits));
}

} // namespace qmdp
