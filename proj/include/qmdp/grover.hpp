#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmdp/layout.hpp"
#include "qmdp/qmdp_circuit.hpp"
#include "qmdp/qsim.hpp"

namespace qmdp {

/// Requires the register (role, step) to hold `value`.
struct RegisterConstraint {
    Role role = Role::Next;
    int step = 0;
    std::uint64_t value = 0;
};

struct OracleSpec {
    std::uint64_t target_return = 0;
    std::vector<RegisterConstraint> constraints;
};

/// True when the basis index satisfies every oracle condition.
bool oracle_matches(const RegisterLayout& layout, const OracleSpec& oracle, qsim::BasisIndex index);

/// Phase flip on the target-return pattern conjoined with every constraint pattern.
qsim::Circuit build_oracle(const RegisterLayout& layout, const OracleSpec& oracle);

/// Reflection about the prepared state: A, then 2|0><0| - I, then A^-1, applied right to left.
qsim::Circuit build_diffuser(const PreparedModel& prepared);

struct MarkedTrajectory {
    TrajectoryRecord record;
    double p_before = 0.0;
    double p_after = 0.0;
};

struct SearchReport {
    int iterations = 0;
    double p0 = 0.0;
    double p_after = 0.0;
    std::vector<MarkedTrajectory> marked; // ascending bitstring; record.count holds sampled hits
    qsim::SampleCounts samples;
};

/// Prepares the trajectory state, runs `iterations` oracle/diffuser rounds and samples the result.
SearchReport grover_search(const PreparedModel& prepared, const OracleSpec& oracle, int iterations,
                           std::uint64_t shots, std::uint64_t seed, qsim::Backend backend = qsim::Backend::Sparse);

/// Same as grover_search without measurement sampling (samples stay empty).
SearchReport grover_search_exact(const PreparedModel& prepared, const OracleSpec& oracle, int iterations,
                                 qsim::Backend backend = qsim::Backend::Sparse);

/// Total prepared-state probability of the strings the oracle marks.
double marked_probability(const PreparedModel& prepared, const OracleSpec& oracle,
                          qsim::Backend backend = qsim::Backend::Sparse);

/// Grover-optimal round count round(pi / (4 asin sqrt(p0)) - 1/2), at least 1.
int iterations_hint(double p0);

/// Closed-form marked probability after k rounds.
double amplified_probability(double p0, int iterations);

/// JSON document: iterations, p0, p_after, marked[], shots, seed.
std::string report_json(const SearchReport& report);

} // namespace qmdp
