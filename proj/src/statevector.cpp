#include "qmdp/qsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <new>
#include <random>
#include <thread>

namespace qmdp::qsim {

namespace {

std::atomic<int> g_max_threads{1};

// Real 2x2 matrix; every gate in the set with a target is real-valued.
struct Mat2 {
    double m00, m01, m10, m11;
};

Mat2 matrix_of(const Gate& g) {
    switch (g.kind) {
    case GateKind::H: {
        const double s = 1.0 / std::sqrt(2.0);
        return {s, s, s, -s};
    }
    case GateKind::Ry: {
        const double c = std::cos(g.theta / 2.0);
        const double s = std::sin(g.theta / 2.0);
        return {c, -s, s, c};
    }
    case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
    case GateKind::PhaseFlip: break;
    }
    return {1.0, 0.0, 0.0, 1.0};
}

// Shared by both backends so they produce bit-identical amplitudes.
inline void apply_mat2(const Mat2& m, Amplitude& a0, Amplitude& a1) {
    const Amplitude n0 = m.m00 * a0 + m.m01 * a1;
    const Amplitude n1 = m.m10 * a0 + m.m11 * a1;
    a0 = n0;
    a1 = n1;
}

struct ControlMask {
    BasisIndex mask = 0;
    BasisIndex value = 0;

    explicit ControlMask(std::span<const Control> controls) {
        for (const auto& c : controls) {
            const BasisIndex bit = BasisIndex{1} << c.qubit;
            mask |= bit;
            if (c.bit) value |= bit;
        }
    }
    bool matches(BasisIndex i) const { return (i & mask) == value; }
};

// Maps a compact counter onto indices with zeros at the (ascending) fixed positions.
inline BasisIndex insert_zeros(BasisIndex j, std::span<const int> sorted_positions) {
    for (int p : sorted_positions) {
        const BasisIndex low = j & ((BasisIndex{1} << p) - 1);
        j = ((j >> p) << (p + 1)) | low;
    }
    return j;
}

template <typename Fn>
void parallel_range(BasisIndex count, Fn&& fn) {
    const int threads = std::max(1, g_max_threads.load());
    constexpr BasisIndex kMinPerThread = BasisIndex{1} << 14;
    if (threads == 1 || count < 2 * kMinPerThread) {
        fn(BasisIndex{0}, count);
        return;
    }
    const BasisIndex workers = std::min<BasisIndex>(static_cast<BasisIndex>(threads), count / kMinPerThread);
    const BasisIndex chunk = (count + workers - 1) / workers;
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (BasisIndex w = 0; w < workers; ++w) {
        const BasisIndex begin = w * chunk;
        const BasisIndex end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
}

void dense_apply(std::vector<Amplitude>& amps, int num_qubits, const Gate& g) {
    const ControlMask ctrl(g.controls);
    std::vector<int> fixed;
    fixed.reserve(g.controls.size() + 1);
    for (const auto& c : g.controls) fixed.push_back(c.qubit);

    if (g.kind == GateKind::PhaseFlip) {
        std::sort(fixed.begin(), fixed.end());
        const BasisIndex count = BasisIndex{1} << (num_qubits - static_cast<int>(fixed.size()));
        parallel_range(count, [&](BasisIndex begin, BasisIndex end) {
            for (BasisIndex j = begin; j < end; ++j) {
                auto& a = amps[insert_zeros(j, fixed) | ctrl.value];
                a = -a;
            }
        });
        return;
    }

    fixed.push_back(g.target);
    std::sort(fixed.begin(), fixed.end());
    const BasisIndex tbit = BasisIndex{1} << g.target;
    const BasisIndex count = BasisIndex{1} << (num_qubits - static_cast<int>(fixed.size()));
    const Mat2 m = matrix_of(g);
    const bool is_x = g.kind == GateKind::X;
    parallel_range(count, [&](BasisIndex begin, BasisIndex end) {
        for (BasisIndex j = begin; j < end; ++j) {
            const BasisIndex i0 = insert_zeros(j, fixed) | ctrl.value;
            const BasisIndex i1 = i0 | tbit;
            if (is_x) {
                std::swap(amps[i0], amps[i1]);
            } else {
                apply_mat2(m, amps[i0], amps[i1]);
            }
        }
    });
}

using SparseMap = std::unordered_map<BasisIndex, Amplitude>;

void prune_insert(SparseMap& out, BasisIndex index, Amplitude a) {
    if (std::abs(a) >= kPruneThreshold) out.emplace(index, a);
}

void sparse_apply(SparseMap& amps, const Gate& g) {
    const ControlMask ctrl(g.controls);
    if (g.kind == GateKind::PhaseFlip) {
        for (auto& [index, a] : amps) {
            if (ctrl.matches(index)) a = -a;
        }
        return;
    }
    const BasisIndex tbit = BasisIndex{1} << g.target;
    if (g.kind == GateKind::X) {
        SparseMap out;
        out.reserve(amps.size());
        for (const auto& [index, a] : amps) out.emplace(ctrl.matches(index) ? index ^ tbit : index, a);
        amps = std::move(out);
        return;
    }

    // Gather (a0, a1) pairs keyed by the index with the target bit cleared.
    std::unordered_map<BasisIndex, std::pair<Amplitude, Amplitude>> pairs;
    SparseMap out;
    out.reserve(amps.size() * 2);
    for (const auto& [index, a] : amps) {
        if (!ctrl.matches(index)) {
            out.emplace(index, a);
            continue;
        }
        auto& slot = pairs[index & ~tbit];
        if (index & tbit) {
            slot.second = a;
        } else {
            slot.first = a;
        }
    }
    const Mat2 m = matrix_of(g);
    for (auto& [base, slot] : pairs) {
        apply_mat2(m, slot.first, slot.second);
        prune_insert(out, base, slot.first);
        prune_insert(out, base | tbit, slot.second);
    }
    amps = std::move(out);
}

double uniform53(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

void set_max_threads(int threads) { g_max_threads.store(std::max(1, threads)); }
int max_threads() { return g_max_threads.load(); }

Statevector::Statevector(int num_qubits, Dense amps) : num_qubits_(num_qubits), store_(std::move(amps)) {}
Statevector::Statevector(int num_qubits, Sparse amps) : num_qubits_(num_qubits), store_(std::move(amps)) {}

Statevector Statevector::zero(int num_qubits, Backend backend) {
    if (num_qubits < 1) throw std::invalid_argument("a state needs at least one qubit");
    if (backend == Backend::Dense) {
        if (num_qubits > kMaxDenseQubits) {
            throw CapacityError("dense backend is limited to " + std::to_string(kMaxDenseQubits) + " qubits, requested " +
                                std::to_string(num_qubits));
        }
        Dense amps;
        try {
            amps.assign(std::size_t{1} << num_qubits, Amplitude{0.0, 0.0});
        } catch (const std::bad_alloc&) {
            throw CapacityError("cannot allocate dense state of " + std::to_string(num_qubits) + " qubits");
        }
        amps[0] = 1.0;
        return Statevector(num_qubits, std::move(amps));
    }
    if (num_qubits > kMaxSparseQubits) {
        throw CapacityError("sparse backend is limited to " + std::to_string(kMaxSparseQubits) + " qubits");
    }
    return Statevector(num_qubits, Sparse{{0, Amplitude{1.0, 0.0}}});
}

Statevector Statevector::from_entries(int num_qubits, Backend backend,
                                      std::span<const std::pair<BasisIndex, Amplitude>> entries) {
    Statevector sv = zero(num_qubits, backend);
    const BasisIndex limit = num_qubits >= 64 ? ~BasisIndex{0} : (BasisIndex{1} << num_qubits) - 1;
    std::visit(
        [&](auto& store) {
            using T = std::decay_t<decltype(store)>;
            if constexpr (std::is_same_v<T, Dense>) {
                store[0] = 0.0;
            } else {
                store.clear();
            }
            for (const auto& [index, a] : entries) {
                if (index > limit) throw std::out_of_range("basis index outside the register");
                if constexpr (std::is_same_v<T, Dense>) {
                    store[index] = a;
                } else if (std::abs(a) >= kPruneThreshold) {
                    store[index] = a;
                }
            }
        },
        sv.store_);
    return sv;
}

Backend Statevector::backend() const noexcept {
    return std::holds_alternative<Dense>(store_) ? Backend::Dense : Backend::Sparse;
}

void Statevector::check_qubit(int q) const {
    if (q < 0 || q >= num_qubits_) {
        throw std::out_of_range("qubit " + std::to_string(q) + " outside state of " + std::to_string(num_qubits_) +
                                " qubits");
    }
}

void Statevector::apply(const Gate& gate) {
    if (gate.kind != GateKind::PhaseFlip) check_qubit(gate.target);
    BasisIndex seen = 0;
    if (gate.kind != GateKind::PhaseFlip) seen |= BasisIndex{1} << gate.target;
    for (const auto& c : gate.controls) {
        check_qubit(c.qubit);
        const BasisIndex bit = BasisIndex{1} << c.qubit;
        if (seen & bit) throw std::invalid_argument("qubit " + std::to_string(c.qubit) + " used twice in one gate");
        seen |= bit;
    }
    if (auto* dense = std::get_if<Dense>(&store_)) {
        dense_apply(*dense, num_qubits_, gate);
    } else {
        sparse_apply(std::get<Sparse>(store_), gate);
    }
}

void Statevector::apply(const Circuit& circuit) {
    if (circuit.num_qubits() > num_qubits_) {
        throw std::invalid_argument("circuit of " + std::to_string(circuit.num_qubits()) +
                                    " qubits applied to a state of " + std::to_string(num_qubits_));
    }
    for (const auto& g : circuit.gates()) apply(g);
}

void Statevector::phase_flip(std::span<const Control> pattern) {
    apply(Gate::phase_flip({pattern.begin(), pattern.end()}));
}

Amplitude Statevector::amplitude(BasisIndex index) const {
    if (const auto* dense = std::get_if<Dense>(&store_)) {
        return index < dense->size() ? (*dense)[index] : Amplitude{};
    }
    const auto& sparse = std::get<Sparse>(store_);
    auto it = sparse.find(index);
    return it == sparse.end() ? Amplitude{} : it->second;
}

std::vector<std::pair<BasisIndex, Amplitude>> Statevector::entries() const {
    std::vector<std::pair<BasisIndex, Amplitude>> out;
    if (const auto* dense = std::get_if<Dense>(&store_)) {
        for (BasisIndex i = 0; i < dense->size(); ++i) {
            if (std::abs((*dense)[i]) >= kPruneThreshold) out.emplace_back(i, (*dense)[i]);
        }
        return out;
    }
    const auto& sparse = std::get<Sparse>(store_);
    out.assign(sparse.begin(), sparse.end());
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
}

double Statevector::norm_squared() const {
    double total = 0.0;
    if (const auto* dense = std::get_if<Dense>(&store_)) {
        for (const auto& a : *dense) total += std::norm(a);
        return total;
    }
    for (const auto& [index, a] : entries()) total += std::norm(a);
    return total;
}

std::map<BasisIndex, double> Statevector::marginal(std::span<const int> qubits) const {
    BasisIndex seen = 0;
    for (int q : qubits) {
        check_qubit(q);
        const BasisIndex bit = BasisIndex{1} << q;
        if (seen & bit) throw std::invalid_argument("marginal qubits must be distinct");
        seen |= bit;
    }
    std::map<BasisIndex, double> out;
    for (const auto& [index, a] : entries()) {
        BasisIndex pattern = 0;
        for (std::size_t i = 0; i < qubits.size(); ++i) pattern |= ((index >> qubits[i]) & 1U) << i;
        out[pattern] += std::norm(a);
    }
    return out;
}

SampleCounts Statevector::sample(std::uint64_t shots, std::uint64_t seed) const {
    if (shots == 0) throw std::invalid_argument("shots must be at least 1");
    const auto items = entries();
    std::vector<double> cumulative;
    cumulative.reserve(items.size());
    double running = 0.0;
    for (const auto& [index, a] : items) {
        running += std::norm(a);
        cumulative.push_back(running);
    }
    std::vector<std::uint64_t> hits(items.size(), 0);
    std::mt19937_64 rng(seed);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = uniform53(rng) * running;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        ++hits[static_cast<std::size_t>(it - cumulative.begin())];
    }
    SampleCounts out;
    out.shots = shots;
    out.seed = seed;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (hits[i]) out.counts.emplace(bitstring(items[i].first, num_qubits_), hits[i]);
    }
    return out;
}

Statevector Statevector::to_backend(Backend target) const {
    const auto items = entries();
    return from_entries(num_qubits_, target, items);
}

std::string Statevector::dump() const {
    std::string out;
    char buf[96];
    for (const auto& [index, a] : entries()) {
        std::snprintf(buf, sizeof buf, " %.17g %.17g\n", a.real(), a.imag());
        out += bitstring(index, num_qubits_);
        out += buf;
    }
    return out;
}

Statevector prepare_zero(int num_qubits, Backend backend) { return Statevector::zero(num_qubits, backend); }

Statevector apply(Statevector state, const Gate& gate) {
    state.apply(gate);
    return state;
}

Statevector apply_circuit(Statevector state, const Circuit& circuit) {
    state.apply(circuit);
    return state;
}

Statevector phase_flip(Statevector state, std::span<const Control> pattern) {
    state.phase_flip(pattern);
    return state;
}

} // namespace qmdp::qsim
