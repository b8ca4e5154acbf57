#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace qmdp::qsim {

using Amplitude = std::complex<double>;
using BasisIndex = std::uint64_t;

enum class Backend { Dense, Sparse };

inline constexpr int kMaxDenseQubits = 26;
inline constexpr int kMaxSparseQubits = 64;
/// Sparse entries with |amplitude| below this are dropped after every gate.
inline constexpr double kPruneThreshold = 1e-14;

class CapacityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One (qubit, required bit) condition.
struct Control {
    int qubit = 0;
    int bit = 1;
    bool operator==(const Control&) const = default;
};

enum class GateKind { H, X, Ry, PhaseFlip };

/**
 * A single-target gate with an arbitrary control pattern.
 *
 * PhaseFlip has no target: it negates every basis amplitude that matches
 * all of `controls`. An empty pattern is a global phase of -1.
 */
struct Gate {
    GateKind kind = GateKind::X;
    int target = -1;
    double theta = 0.0;
    std::vector<Control> controls;

    static Gate h(int target, std::vector<Control> controls = {});
    static Gate x(int target, std::vector<Control> controls = {});
    static Gate ry(int target, double theta, std::vector<Control> controls = {});
    static Gate phase_flip(std::vector<Control> pattern);

    Gate inverse() const;
    bool operator==(const Gate&) const = default;
};

class Circuit {
  public:
    explicit Circuit(int num_qubits = 0) : num_qubits_(num_qubits) {}

    int num_qubits() const noexcept { return num_qubits_; }
    const std::vector<Gate>& gates() const noexcept { return gates_; }
    std::size_t size() const noexcept { return gates_.size(); }
    bool empty() const noexcept { return gates_.empty(); }

    /// Throws std::out_of_range / std::invalid_argument on a malformed gate.
    Circuit& add(Gate gate);
    Circuit& append(const Circuit& other);

    bool operator==(const Circuit&) const = default;

  private:
    int num_qubits_;
    std::vector<Gate> gates_;
};

/// Reverses gate order and inverts each gate.
Circuit inverse(const Circuit& circuit);

/// Plain-text listing: `<kind>(<theta>) target=<q> controls=[<q>:<bit>,...]`, one gate per line.
std::string to_listing(const Circuit& circuit);

/// Most-significant-first rendering of the low `width` bits of `index`.
std::string bitstring(BasisIndex index, int width);
/// Inverse of bitstring(); throws std::invalid_argument on non-binary input.
BasisIndex parse_bitstring(std::string_view bits);

struct SampleCounts {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;
};

/// Caps the worker threads used by gate kernels (>= 1).
void set_max_threads(int threads);
int max_threads();

class Statevector {
  public:
    /// |0...0> on `num_qubits` qubits.
    static Statevector zero(int num_qubits, Backend backend);
    /// Builds a state from explicit (index, amplitude) entries; used mostly by tests.
    static Statevector from_entries(int num_qubits, Backend backend,
                                    std::span<const std::pair<BasisIndex, Amplitude>> entries);

    int num_qubits() const noexcept { return num_qubits_; }
    Backend backend() const noexcept;

    void apply(const Gate& gate);
    void apply(const Circuit& circuit);
    void phase_flip(std::span<const Control> pattern);

    Amplitude amplitude(BasisIndex index) const;
    /// Entries with |amplitude| >= kPruneThreshold in ascending basis order.
    std::vector<std::pair<BasisIndex, Amplitude>> entries() const;
    double norm_squared() const;

    /// P(pattern) over the listed qubits; bit i of the key is qubits[i].
    std::map<BasisIndex, double> marginal(std::span<const int> qubits) const;
    /// Inverse-CDF sampling over ascending basis order, seeded mt19937_64.
    SampleCounts sample(std::uint64_t shots, std::uint64_t seed) const;

    Statevector to_backend(Backend backend) const;
    /// One line per entry: `<bitstring> <re> <im>`.
    std::string dump() const;

  private:
    using Dense = std::vector<Amplitude>;
    using Sparse = std::unordered_map<BasisIndex, Amplitude>;

    Statevector(int num_qubits, Dense amps);
    Statevector(int num_qubits, Sparse amps);

    void check_qubit(int q) const;

    int num_qubits_ = 0;
    std::variant<Dense, Sparse> store_;
};

// Value-style wrappers over the Statevector members.
Statevector prepare_zero(int num_qubits, Backend backend);
Statevector apply(Statevector state, const Gate& gate);
Statevector apply_circuit(Statevector state, const Circuit& circuit);
Statevector phase_flip(Statevector state, std::span<const Control> pattern);

const char* to_string(Backend backend);
Backend parse_backend(std::string_view text);

} // namespace qmdp::qsim
