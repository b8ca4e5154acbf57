#include "qmdp/grover.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace qmdp {

namespace {

std::vector<qsim::Control> oracle_pattern(const RegisterLayout& layout, const OracleSpec& oracle) {
    std::vector<qsim::Control> pattern;
    auto add = [&](std::vector<qsim::Control> part) {
        for (const auto& c : part) {
            for (const auto& existing : pattern) {
                if (existing.qubit == c.qubit && existing.bit != c.bit) {
                    throw std::invalid_argument("oracle constraints contradict each other");
                }
            }
            pattern.push_back(c);
        }
    };
    if (layout.return_bits() > 0) {
        add(layout.pattern(Role::Return, 0, oracle.target_return));
    } else {
        // Single-step layouts have no return register; the reward is the return.
        add(layout.pattern(Role::Reward, 0, oracle.target_return));
    }
    for (const auto& c : oracle.constraints) add(layout.pattern(c.role, c.step, c.value));

    std::vector<qsim::Control> unique;
    for (const auto& c : pattern) {
        bool dup = false;
        for (const auto& u : unique) dup = dup || u.qubit == c.qubit;
        if (!dup) unique.push_back(c);
    }
    return unique;
}

} // namespace

bool oracle_matches(const RegisterLayout& layout, const OracleSpec& oracle, qsim::BasisIndex index) {
    for (const auto& c : oracle_pattern(layout, oracle)) {
        if (static_cast<int>((index >> c.qubit) & 1U) != c.bit) return false;
    }
    return true;
}

qsim::Circuit build_oracle(const RegisterLayout& layout, const OracleSpec& oracle) {
    qsim::Circuit c(layout.total_qubits());
    c.add(qsim::Gate::phase_flip(oracle_pattern(layout, oracle)));
    return c;
}

qsim::Circuit build_diffuser(const PreparedModel& prepared) {
    const int n = prepared.circuit.num_qubits();
    qsim::Circuit c(n);
    c.append(inverse(prepared.circuit));
    std::vector<qsim::Control> zeros;
    for (int q = 0; q < n; ++q) zeros.push_back({q, 0});
    // -(I - 2|0><0|) = 2|0><0| - I
    c.add(qsim::Gate::phase_flip(std::move(zeros)));
    c.add(qsim::Gate::phase_flip({}));
    c.append(prepared.circuit);
    return c;
}

namespace {

SearchReport run_search(const PreparedModel& prepared, const OracleSpec& oracle, int iterations,
                        qsim::Backend backend, std::uint64_t shots, std::uint64_t seed) {
    if (iterations < 0) throw std::invalid_argument("iterations must be non-negative");
    const auto& layout = prepared.layout;
    const auto oracle_circuit = build_oracle(layout, oracle);
    const auto diffuser = build_diffuser(prepared);

    auto state = prepare_state(prepared, backend);
    SearchReport report;
    report.iterations = iterations;
    for (const auto& [index, amp] : state.entries()) {
        if (!oracle_matches(layout, oracle, index)) continue;
        MarkedTrajectory m;
        m.record = decode_trajectory(layout, index);
        m.p_before = std::norm(amp);
        m.record.probability = m.p_before;
        report.p0 += m.p_before;
        report.marked.push_back(std::move(m));
    }
    for (int k = 0; k < iterations; ++k) {
        state.apply(oracle_circuit);
        state.apply(diffuser);
    }
    for (auto& m : report.marked) {
        m.p_after = std::norm(state.amplitude(qsim::parse_bitstring(m.record.bitstring)));
        report.p_after += m.p_after;
    }
    if (shots > 0) {
        report.samples = state.sample(shots, seed);
        for (auto& m : report.marked) {
            auto it = report.samples.counts.find(m.record.bitstring);
            m.record.count = it == report.samples.counts.end() ? 0 : it->second;
        }
    }
    return report;
}

} // namespace

SearchReport grover_search(const PreparedModel& prepared, const OracleSpec& oracle, int iterations,
                           std::uint64_t shots, std::uint64_t seed, qsim::Backend backend) {
    if (shots == 0) throw std::invalid_argument("shots must be at least 1");
    return run_search(prepared, oracle, iterations, backend, shots, seed);
}

SearchReport grover_search_exact(const PreparedModel& prepared, const OracleSpec& oracle, int iterations,
                                 qsim::Backend backend) {
    return run_search(prepared, oracle, iterations, backend, 0, 0);
}

double marked_probability(const PreparedModel& prepared, const OracleSpec& oracle, qsim::Backend backend) {
    double p0 = 0.0;
    for (const auto& [index, amp] : prepare_state(prepared, backend).entries()) {
        if (oracle_matches(prepared.layout, oracle, index)) p0 += std::norm(amp);
    }
    return p0;
}

double amplified_probability(double p0, int iterations) {
    const double theta = std::asin(std::sqrt(p0));
    const double s = std::sin((2.0 * iterations + 1.0) * theta);
    return s * s;
}

int iterations_hint(double p0) {
    if (!(p0 > 0.0 && p0 < 1.0)) throw std::domain_error("iterations_hint needs 0 < p0 < 1");
    const double theta = std::asin(std::sqrt(p0));
    const auto k = static_cast<int>(std::lround(std::numbers::pi / (4.0 * theta) - 0.5));
    return std::max(1, k);
}

std::string report_json(const SearchReport& report) {
    nlohmann::ordered_json doc;
    doc["iterations"] = report.iterations;
    doc["p0"] = report.p0;
    doc["p_after"] = report.p_after;
    auto marked = nlohmann::ordered_json::array();
    for (const auto& m : report.marked) {
        nlohmann::ordered_json row;
        row["bitstring"] = m.record.bitstring;
        auto steps = nlohmann::ordered_json::array();
        for (const auto& s : m.record.steps) {
            steps.push_back({{"s", s.state}, {"a", s.action}, {"next", s.next}, {"r", s.reward}});
        }
        row["steps"] = std::move(steps);
        row["return"] = m.record.ret;
        row["p_before"] = m.p_before;
        row["p_after"] = m.p_after;
        row["count"] = m.record.count;
        marked.push_back(std::move(row));
    }
    doc["marked"] = std::move(marked);
    doc["shots"] = report.samples.shots;
    doc["seed"] = report.samples.seed;
    return doc.dump(2) + "\n";
}

} // namespace qmdp
