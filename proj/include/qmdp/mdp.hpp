#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace qmdp {

/// Every state equally likely at t = 0.
struct UniformStart {
    bool operator==(const UniformStart&) const = default;
};

/// Deterministic start in a single state.
struct FixedStart {
    int state = 0;
    bool operator==(const FixedStart&) const = default;
};

using InitialDistribution = std::variant<UniformStart, FixedStart>;

struct Transition {
    int state = 0;
    int action = 0;
    int next = 0;
    double prob = 0.0;
    bool operator==(const Transition&) const = default;
};

struct Successor {
    int next = 0;
    double prob = 0.0;
    bool operator==(const Successor&) const = default;
};

/**
 * Finite Markov decision process with rewards attached to the next state.
 *
 * `rewards[v]` is the reward received on arriving in state v. The reward
 * register width is derived from the largest reward unless `reward_bits`
 * pins it explicitly.
 */
struct MdpSpec {
    int num_states = 0;
    int num_actions = 0;
    std::vector<Transition> transitions;
    std::vector<int> rewards;
    InitialDistribution initial = UniformStart{};
    std::optional<int> reward_bits;

    bool operator==(const MdpSpec&) const = default;
};

struct Violation {
    std::string message;
    std::optional<std::pair<int, int>> pair; // offending (state, action)
};

/// Returns every invariant violation; an empty list means the spec is valid.
std::vector<Violation> validate(const MdpSpec& spec);

/// Reward register width: the pinned value, else ceil(log2(max reward + 1)), at least 1.
int reward_width(const MdpSpec& spec);

/// Nonzero-probability successors of (state, action), sorted by next state.
std::vector<Successor> support(const MdpSpec& spec, int state, int action);

/// Probability of one initial state under the given distribution.
double initial_probability(const MdpSpec& spec, const InitialDistribution& init, int state);

/// The 4-state / 2-action example with 15 supported transitions.
MdpSpec paper_example_mdp();

class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::string field, int line = 0)
        : std::runtime_error(what), field_(std::move(field)), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

  private:
    std::string field_;
    int line_;
};

class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

  private:
    std::vector<Violation> violations_;
};

/// Parses the JSON MDP document and validates it.
MdpSpec load_mdp(std::string_view document);
/// Canonical JSON rendering; load_mdp(save_mdp(x)) == x for valid x.
std::string save_mdp(const MdpSpec& spec);

MdpSpec load_mdp_file(const std::string& path);

std::string to_string(const InitialDistribution& init);
/// Accepts "uniform" or "fixed:<n>".
InitialDistribution parse_start(std::string_view text);

} // namespace qmdp
