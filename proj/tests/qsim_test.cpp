#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qmdp/qsim.hpp"
#include "test_support.hpp"

using namespace qmdp::qsim;
using qmdp::testing::random_circuit;
using qmdp::testing::random_entries;

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

// Scatter-style reference: every basis state contributes to its image under the gate.
std::vector<Amplitude> reference_apply(const std::vector<Amplitude>& psi, const Gate& g) {
    std::vector<Amplitude> out(psi.size(), 0.0);
    auto matches = [&](std::size_t i) {
        for (const auto& c : g.controls) {
            if (static_cast<int>((i >> c.qubit) & 1U) != c.bit) return false;
        }
        return true;
    };
    double m[2][2] = {{1, 0}, {0, 1}};
    if (g.kind == GateKind::H) {
        m[0][0] = m[0][1] = m[1][0] = kInvSqrt2;
        m[1][1] = -kInvSqrt2;
    } else if (g.kind == GateKind::X) {
        m[0][0] = m[1][1] = 0;
        m[0][1] = m[1][0] = 1;
    } else if (g.kind == GateKind::Ry) {
        m[0][0] = m[1][1] = std::cos(g.theta / 2);
        m[0][1] = -std::sin(g.theta / 2);
        m[1][0] = std::sin(g.theta / 2);
    }
    for (std::size_t i = 0; i < psi.size(); ++i) {
        if (!matches(i)) {
            out[i] += psi[i];
            continue;
        }
        if (g.kind == GateKind::PhaseFlip) {
            out[i] -= psi[i];
            continue;
        }
        const std::size_t bit = (i >> g.target) & 1U;
        const std::size_t base = i & ~(std::size_t{1} << g.target);
        for (std::size_t b = 0; b < 2; ++b) out[base | (b << g.target)] += m[b][bit] * psi[i];
    }
    return out;
}

std::vector<Amplitude> dense_vector(const Statevector& sv) {
    std::vector<Amplitude> v(std::size_t{1} << sv.num_qubits(), 0.0);
    for (const auto& [i, a] : sv.entries()) v[i] = a;
    return v;
}

double linf(const Statevector& x, const Statevector& y) {
    const auto a = dense_vector(x);
    const auto b = dense_vector(y);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

double l2(const Statevector& x, const Statevector& y) {
    const auto a = dense_vector(x);
    const auto b = dense_vector(y);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::norm(a[i] - b[i]);
    return std::sqrt(sum);
}

class BothBackends : public ::testing::TestWithParam<Backend> {};

} // namespace

TEST_P(BothBackends, PrepareZero) {
    const auto sv = prepare_zero(3, GetParam());
    EXPECT_EQ(sv.entries().size(), 1u);
    EXPECT_EQ(sv.amplitude(0), Amplitude(1.0));
    EXPECT_EQ(prepare_zero(1, GetParam()).amplitude(1), Amplitude(0.0));
}

TEST(Qsim, DenseCapacity) {
    EXPECT_THROW(prepare_zero(31, Backend::Dense), CapacityError);
    EXPECT_THROW(prepare_zero(27, Backend::Dense), CapacityError);
    EXPECT_NO_THROW(prepare_zero(40, Backend::Sparse));
    EXPECT_THROW(prepare_zero(0, Backend::Sparse), std::invalid_argument);
}

TEST_P(BothBackends, HadamardOnZero) {
    const auto sv = apply(prepare_zero(1, GetParam()), Gate::h(0));
    EXPECT_NEAR(sv.amplitude(0).real(), kInvSqrt2, 1e-15);
    EXPECT_NEAR(sv.amplitude(1).real(), kInvSqrt2, 1e-15);
}

TEST_P(BothBackends, RyPiFlipsZeroToOne) {
    const auto sv = apply(prepare_zero(1, GetParam()), Gate::ry(0, std::numbers::pi));
    EXPECT_NEAR(sv.amplitude(1).real(), 1.0, 1e-15);
    EXPECT_NEAR(std::abs(sv.amplitude(0)), 0.0, 1e-15);
}

TEST_P(BothBackends, RyConvention) {
    const double theta = 1.1;
    const auto sv = apply(prepare_zero(1, GetParam()), Gate::ry(0, theta));
    EXPECT_NEAR(std::norm(sv.amplitude(0)), std::pow(std::cos(theta / 2), 2), 1e-15);
    EXPECT_NEAR(std::norm(sv.amplitude(1)), std::pow(std::sin(theta / 2), 2), 1e-15);
}

TEST_P(BothBackends, ControlledXTruthTable) {
    // |01>: q0 = 1, q1 = 0
    auto sv = apply(prepare_zero(2, GetParam()), Gate::x(0));
    sv.apply(Gate::x(1, {{0, 1}}));
    EXPECT_EQ(sv.amplitude(0b11), Amplitude(1.0));
    // control on 0 does not fire when q0 = 1
    sv.apply(Gate::x(1, {{0, 0}}));
    EXPECT_EQ(sv.amplitude(0b11), Amplitude(1.0));
}

TEST_P(BothBackends, ApplyRejectsBadIndices) {
    auto sv = prepare_zero(2, GetParam());
    EXPECT_THROW(sv.apply(Gate::x(2)), std::out_of_range);
    EXPECT_THROW(sv.apply(Gate::x(0, {{0, 1}})), std::invalid_argument);
    EXPECT_THROW(sv.apply(Gate::x(0, {{5, 1}})), std::out_of_range);
}

TEST(QsimCircuit, InverseReversesAndNegates) {
    Circuit c(3);
    c.add(Gate::h(0)).add(Gate::x(1));
    Circuit expected(3);
    expected.add(Gate::x(1)).add(Gate::h(0));
    EXPECT_EQ(inverse(c), expected);

    Circuit r(3);
    r.add(Gate::ry(2, 0.7));
    EXPECT_EQ(inverse(r).gates().at(0), Gate::ry(2, -0.7));
}

TEST(QsimCircuit, AddValidates) {
    Circuit c(2);
    EXPECT_THROW(c.add(Gate::h(2)), std::out_of_range);
    EXPECT_THROW(c.add(Gate::x(0, {{0, 1}})), std::invalid_argument);
    EXPECT_THROW(c.add(Gate::x(0, {{1, 2}})), std::invalid_argument);
    EXPECT_THROW(c.add(Gate::phase_flip({{1, 1}, {1, 0}})), std::invalid_argument);
    EXPECT_NO_THROW(c.add(Gate::phase_flip({})));
}

TEST(QsimCircuit, Listing) {
    Circuit c(3);
    c.add(Gate::ry(2, 0.5, {{0, 1}, {1, 0}})).add(Gate::h(0)).add(Gate::phase_flip({{1, 0}}));
    EXPECT_EQ(to_listing(c), "Ry(0.5) target=2 controls=[0:1,1:0]\n"
                             "H target=0 controls=[]\n"
                             "PhaseFlip target=none controls=[1:0]\n");
}

TEST_P(BothBackends, CircuitThenInverseIsIdentityOnTenQubits) {
    std::mt19937_64 rng(99);
    const auto entries = random_entries(rng, 10);
    const auto start = Statevector::from_entries(10, GetParam(), entries);
    const auto c = random_circuit(rng, 10, 150);
    const auto back = apply_circuit(apply_circuit(start, c), inverse(c));
    EXPECT_LT(l2(back, start), 1e-9);
}

TEST_P(BothBackends, MarginalExamples) {
    // Bell pair (|00> + |11>)/sqrt2
    auto bell = apply(prepare_zero(2, GetParam()), Gate::h(0));
    bell.apply(Gate::x(1, {{0, 1}}));
    const std::vector<int> q0{0};
    const auto m = bell.marginal(q0);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_NEAR(m.at(0), 0.5, 1e-15);
    EXPECT_NEAR(m.at(1), 0.5, 1e-15);

    const std::vector<int> all{0, 1, 2};
    const auto z = prepare_zero(3, GetParam()).marginal(all);
    ASSERT_EQ(z.size(), 1u);
    EXPECT_EQ(z.at(0), 1.0);

    const std::vector<int> dup{0, 0};
    EXPECT_THROW(bell.marginal(dup), std::invalid_argument);
    const std::vector<int> bad{4};
    EXPECT_THROW(bell.marginal(bad), std::out_of_range);
}

TEST_P(BothBackends, MarginalKeyOrderFollowsQubitList) {
    // |q1 q0> = |10>; listing (q1, q0) puts q1 in bit 0 of the key.
    const auto sv = apply(prepare_zero(2, GetParam()), Gate::x(1));
    const std::vector<int> order{1, 0};
    EXPECT_EQ(sv.marginal(order).at(0b01), 1.0);
}

TEST_P(BothBackends, SampleExamples) {
    const auto one = apply(prepare_zero(1, GetParam()), Gate::x(0));
    const auto c1 = one.sample(100, 5);
    EXPECT_EQ(c1.counts, (std::map<std::string, std::uint64_t>{{"1", 100}}));

    const auto plus = apply(prepare_zero(1, GetParam()), Gate::h(0));
    const auto c2 = plus.sample(1000, 42);
    ASSERT_EQ(c2.counts.size(), 2u);
    EXPECT_EQ(c2.counts.at("0") + c2.counts.at("1"), 1000u);
    EXPECT_EQ(c2.shots, 1000u);
    EXPECT_EQ(c2.seed, 42u);
    EXPECT_EQ(plus.sample(1000, 42).counts, c2.counts);
    EXPECT_THROW(plus.sample(0, 1), std::invalid_argument);
}

TEST_P(BothBackends, PhaseFlipExamples) {
    auto uniform = apply(prepare_zero(2, GetParam()), Gate::h(0));
    uniform.apply(Gate::h(1));
    const std::vector<Control> both{{0, 1}, {1, 1}};
    const auto flipped = phase_flip(uniform, both);
    EXPECT_NEAR(flipped.amplitude(0).real(), 0.5, 1e-15);
    EXPECT_NEAR(flipped.amplitude(1).real(), 0.5, 1e-15);
    EXPECT_NEAR(flipped.amplitude(2).real(), 0.5, 1e-15);
    EXPECT_NEAR(flipped.amplitude(3).real(), -0.5, 1e-15);

    const auto global = phase_flip(uniform, {});
    for (BasisIndex i = 0; i < 4; ++i) EXPECT_EQ(global.amplitude(i), -uniform.amplitude(i));

    const auto zero = prepare_zero(2, GetParam());
    const auto unchanged = phase_flip(zero, both);
    EXPECT_EQ(unchanged.amplitude(0), Amplitude(1.0));
    EXPECT_EQ(unchanged.entries().size(), 1u);
}

TEST_P(BothBackends, DumpFormat) {
    auto sv = apply(prepare_zero(2, GetParam()), Gate::x(1));
    EXPECT_EQ(sv.dump(), "10 1 0\n");
}

TEST(QsimBits, BitstringRoundTrip) {
    EXPECT_EQ(bitstring(0b0010011, 7), "0010011");
    EXPECT_EQ(parse_bitstring("0010011"), 0b0010011u);
    EXPECT_THROW(parse_bitstring("01x"), std::invalid_argument);
}

INSTANTIATE_TEST_SUITE_P(Backends, BothBackends, ::testing::Values(Backend::Dense, Backend::Sparse),
                         [](const auto& info) { return std::string(to_string(info.param)); });

// ---- properties -----------------------------------------------------------

TEST(QsimProperty, KernelsMatchScatterReference) {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + trial % 5;
        auto entries = random_entries(rng, n);
        std::vector<Amplitude> ref(entries.size());
        for (const auto& [i, a] : entries) ref[i] = a;
        auto dense = Statevector::from_entries(n, Backend::Dense, entries);
        auto sparse = Statevector::from_entries(n, Backend::Sparse, entries);
        for (int g = 0; g < 20; ++g) {
            const auto gate = qmdp::testing::random_gate(rng, n);
            ref = reference_apply(ref, gate);
            dense.apply(gate);
            sparse.apply(gate);
        }
        for (BasisIndex i = 0; i < ref.size(); ++i) {
            EXPECT_LT(std::abs(dense.amplitude(i) - ref[i]), 1e-12);
            EXPECT_LT(std::abs(sparse.amplitude(i) - ref[i]), 1e-12);
        }
    }
}

TEST(QsimProperty, UnitarityBackendEquivalenceInvertibility) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 250; ++trial) {
        const int n = 1 + trial % 12;
        const int gates = 1 + static_cast<int>(rng() % 200);
        const auto c = random_circuit(rng, n, gates);
        const auto dense = apply_circuit(prepare_zero(n, Backend::Dense), c);
        const auto sparse = apply_circuit(prepare_zero(n, Backend::Sparse), c);
        EXPECT_NEAR(dense.norm_squared(), 1.0, 1e-9);
        EXPECT_NEAR(sparse.norm_squared(), 1.0, 1e-9);
        EXPECT_LT(linf(dense, sparse), 1e-9);
        const auto back = apply_circuit(sparse, inverse(c));
        EXPECT_LT(l2(back, prepare_zero(n, Backend::Sparse)), 1e-9);
    }
}

TEST(QsimProperty, SamplingDeterminismAcrossBackendsAndThreads) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + trial % 8;
        const auto c = random_circuit(rng, n, 60);
        const auto dense = apply_circuit(prepare_zero(n, Backend::Dense), c);
        const auto sparse = apply_circuit(prepare_zero(n, Backend::Sparse), c);
        const auto a = dense.sample(500, static_cast<std::uint64_t>(trial));
        EXPECT_EQ(a.counts, sparse.sample(500, static_cast<std::uint64_t>(trial)).counts);
        EXPECT_EQ(a.counts, dense.sample(500, static_cast<std::uint64_t>(trial)).counts);
        std::uint64_t total = 0;
        for (const auto& [k, v] : a.counts) total += v;
        EXPECT_EQ(total, 500u);
    }
}

TEST(QsimProperty, ThreadedDenseKernelsAreBitIdentical) {
    std::mt19937_64 rng(17);
    const auto c = random_circuit(rng, 18, 60);
    set_max_threads(1);
    const auto single = apply_circuit(prepare_zero(18, Backend::Dense), c);
    set_max_threads(4);
    const auto multi = apply_circuit(prepare_zero(18, Backend::Dense), c);
    set_max_threads(1);
    EXPECT_EQ(single.entries(), multi.entries());
    EXPECT_EQ(single.sample(1000, 3).counts, multi.sample(1000, 3).counts);
}

TEST(QsimProperty, SamplingLawWithinFiveStandardErrors) {
    std::mt19937_64 rng(123);
    const auto c = random_circuit(rng, 4, 40);
    const auto sv = apply_circuit(prepare_zero(4, Backend::Sparse), c);
    const std::uint64_t shots = 100000;
    const auto counts = sv.sample(shots, 9);
    const std::vector<int> all{0, 1, 2, 3};
    for (const auto& [pattern, p] : sv.marginal(all)) {
        const auto it = counts.counts.find(bitstring(pattern, 4));
        const double freq = it == counts.counts.end() ? 0.0 : static_cast<double>(it->second) / shots;
        const double se = std::sqrt(p * (1 - p) / shots);
        EXPECT_LE(std::abs(freq - p), 5 * se + 1e-12) << bitstring(pattern, 4);
    }
}
