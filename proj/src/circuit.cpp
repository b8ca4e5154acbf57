#include "qmdp/qsim.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace qmdp::qsim {

Gate Gate::h(int target, std::vector<Control> controls) {
    return Gate{GateKind::H, target, 0.0, std::move(controls)};
}

Gate Gate::x(int target, std::vector<Control> controls) {
    return Gate{GateKind::X, target, 0.0, std::move(controls)};
}

Gate Gate::ry(int target, double theta, std::vector<Control> controls) {
    return Gate{GateKind::Ry, target, theta, std::move(controls)};
}

Gate Gate::phase_flip(std::vector<Control> pattern) {
    return Gate{GateKind::PhaseFlip, -1, 0.0, std::move(pattern)};
}

Gate Gate::inverse() const {
    Gate inv = *this;
    if (kind == GateKind::Ry) inv.theta = -theta;
    return inv;
}

Circuit& Circuit::add(Gate gate) {
    auto check = [&](int q) {
        if (q < 0 || q >= num_qubits_) {
            throw std::out_of_range("gate qubit " + std::to_string(q) + " outside circuit of " +
                                    std::to_string(num_qubits_) + " qubits");
        }
    };
    std::set<int> used;
    if (gate.kind != GateKind::PhaseFlip) {
        check(gate.target);
        used.insert(gate.target);
    } else {
        gate.target = -1;
    }
    for (const auto& c : gate.controls) {
        check(c.qubit);
        if (c.bit != 0 && c.bit != 1) throw std::invalid_argument("control bit must be 0 or 1");
        if (!used.insert(c.qubit).second) {
            throw std::invalid_argument("qubit " + std::to_string(c.qubit) + " used twice in one gate");
        }
    }
    gates_.push_back(std::move(gate));
    return *this;
}

Circuit& Circuit::append(const Circuit& other) {
    if (other.num_qubits_ > num_qubits_) throw std::invalid_argument("appended circuit is wider than the target");
    gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
    return *this;
}

Circuit inverse(const Circuit& circuit) {
    Circuit out(circuit.num_qubits());
    const auto& gates = circuit.gates();
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) out.add(it->inverse());
    return out;
}

std::string to_listing(const Circuit& circuit) {
    std::string out;
    char buf[64];
    for (const auto& g : circuit.gates()) {
        switch (g.kind) {
        case GateKind::H: out += "H"; break;
        case GateKind::X: out += "X"; break;
        case GateKind::Ry:
            std::snprintf(buf, sizeof buf, "Ry(%.17g)", g.theta);
            out += buf;
            break;
        case GateKind::PhaseFlip: out += "PhaseFlip"; break;
        }
        out += " target=";
        out += g.kind == GateKind::PhaseFlip ? std::string("none") : std::to_string(g.target);
        out += " controls=[";
        for (std::size_t i = 0; i < g.controls.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(g.controls[i].qubit) + ":" + std::to_string(g.controls[i].bit);
        }
        out += "]\n";
    }
    return out;
}

std::string bitstring(BasisIndex index, int width) {
    std::string s(static_cast<std::size_t>(width), '0');
    for (int i = 0; i < width; ++i) {
        if ((index >> i) & 1U) s[static_cast<std::size_t>(width - 1 - i)] = '1';
    }
    return s;
}

BasisIndex parse_bitstring(std::string_view bits) {
    if (bits.size() > 64) throw std::invalid_argument("bitstring longer than 64 bits");
    BasisIndex index = 0;
    for (char c : bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("bitstring must contain only 0 and 1");
        index = (index << 1) | static_cast<BasisIndex>(c == '1');
    }
    return index;
}

const char* to_string(Backend backend) { return backend == Backend::Dense ? "dense" : "sparse"; }

Backend parse_backend(std::string_view text) {
    if (text == "dense") return Backend::Dense;
    if (text == "sparse") return Backend::Sparse;
    throw std::invalid_argument("backend must be 'dense' or 'sparse'");
}

} // namespace qmdp::qsim
