#include "qmdp/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace qmdp {

namespace {

constexpr double kRowSumTolerance = 1e-9;

std::string pair_label(int s, int a) {
    return "(s" + std::to_string(s) + ",a" + std::to_string(a) + ")";
}

int line_of_offset(std::string_view doc, std::size_t offset) {
    offset = std::min(offset, doc.size());
    return 1 + static_cast<int>(std::count(doc.begin(), doc.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

template <typename T>
T required(const nlohmann::json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError("missing field \"" + std::string(key) + "\"" + where, key);
    }
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("field \"" + std::string(key) + "\"" + where + " has the wrong type: " + e.what(), key);
    }
}

} // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error([&] {
          std::string msg = "invalid MDP:";
          for (const auto& v : violations) msg += "\n  " + v.message;
          return msg;
      }()),
      violations_(std::move(violations)) {}

int reward_width(const MdpSpec& spec) {
    if (spec.reward_bits) return *spec.reward_bits;
    int max_reward = 0;
    for (int r : spec.rewards) max_reward = std::max(max_reward, r);
    int bits = 1;
    while ((std::int64_t{1} << bits) <= max_reward) ++bits;
    return bits;
}

std::vector<Violation> validate(const MdpSpec& spec) {
    std::vector<Violation> out;
    if (spec.num_states <= 0) out.push_back({"num_states must be positive", std::nullopt});
    if (spec.num_actions <= 0) out.push_back({"num_actions must be positive", std::nullopt});
    if (!out.empty()) return out;

    std::set<std::tuple<int, int, int>> seen;
    std::map<std::pair<int, int>, double> row_sum;
    for (const auto& t : spec.transitions) {
        const bool in_range = t.state >= 0 && t.state < spec.num_states && t.action >= 0 &&
                              t.action < spec.num_actions && t.next >= 0 && t.next < spec.num_states;
        if (!in_range) {
            out.push_back({"transition index out of range: " + pair_label(t.state, t.action) + " -> s" +
                               std::to_string(t.next),
                           std::make_pair(t.state, t.action)});
            continue;
        }
        if (!(t.prob >= 0.0 && t.prob <= 1.0)) {
            out.push_back({"probability outside [0,1] for " + pair_label(t.state, t.action),
                           std::make_pair(t.state, t.action)});
        }
        if (!seen.insert({t.state, t.action, t.next}).second) {
            out.push_back({"duplicate transition " + pair_label(t.state, t.action) + " -> s" + std::to_string(t.next),
                           std::make_pair(t.state, t.action)});
        }
        row_sum[{t.state, t.action}] += t.prob;
    }
    for (int s = 0; s < spec.num_states; ++s) {
        for (int a = 0; a < spec.num_actions; ++a) {
            auto it = row_sum.find({s, a});
            const double sum = it == row_sum.end() ? 0.0 : it->second;
            if (std::abs(sum - 1.0) > kRowSumTolerance) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "probabilities of " << pair_label(s, a) << " sum to " << sum;
                out.push_back({msg.str(), std::make_pair(s, a)});
            }
        }
    }

    if (static_cast<int>(spec.rewards.size()) != spec.num_states) {
        out.push_back({"rewards must have one entry per state", std::nullopt});
    }
    if (spec.reward_bits && (*spec.reward_bits < 1 || *spec.reward_bits > 16)) {
        out.push_back({"reward_bits must be in [1,16]", std::nullopt});
    } else {
        const int bits = reward_width(spec);
        for (std::size_t v = 0; v < spec.rewards.size(); ++v) {
            const int r = spec.rewards[v];
            if (r < 0) {
                out.push_back({"negative reward for s" + std::to_string(v), std::nullopt});
            } else if (bits < 31 && r >= (1 << bits)) {
                out.push_back({"reward overflow: reward " + std::to_string(r) + " of s" + std::to_string(v) +
                                   " needs more than " + std::to_string(bits) + " bits",
                               std::nullopt});
            }
        }
    }
    if (const auto* fixed = std::get_if<FixedStart>(&spec.initial)) {
        if (fixed->state < 0 || fixed->state >= spec.num_states) {
            out.push_back({"fixed initial state out of range", std::nullopt});
        }
    }
    return out;
}

std::vector<Successor> support(const MdpSpec& spec, int state, int action) {
    if (state < 0 || state >= spec.num_states || action < 0 || action >= spec.num_actions) {
        throw std::out_of_range("support: " + pair_label(state, action) + " out of range");
    }
    std::vector<Successor> out;
    for (const auto& t : spec.transitions) {
        if (t.state == state && t.action == action && t.prob > 0.0) out.push_back({t.next, t.prob});
    }
    std::sort(out.begin(), out.end(), [](const Successor& x, const Successor& y) { return x.next < y.next; });
    return out;
}

double initial_probability(const MdpSpec& spec, const InitialDistribution& init, int state) {
    if (std::holds_alternative<UniformStart>(init)) return 1.0 / spec.num_states;
    return std::get<FixedStart>(init).state == state ? 1.0 : 0.0;
}

MdpSpec paper_example_mdp() {
    MdpSpec spec;
    spec.num_states = 4;
    spec.num_actions = 2;
    spec.rewards = {0, 1, 2, 3};
    spec.initial = UniformStart{};
    // Support as read off the single-interaction sample table; only the
    // (s0,a0) and (s3,a1) rows carry published probabilities.
    spec.transitions = {
        {0, 0, 1, 0.6}, {0, 0, 2, 0.4}, //
        {0, 1, 0, 0.5}, {0, 1, 1, 0.5}, //
        {1, 0, 0, 0.5}, {1, 0, 1, 0.5}, //
        {1, 1, 2, 0.5}, {1, 1, 3, 0.5}, //
        {2, 0, 0, 0.5}, {2, 0, 2, 0.5}, //
        {2, 1, 1, 0.5}, {2, 1, 3, 0.5}, //
        {3, 0, 2, 0.5}, {3, 0, 3, 0.5}, //
        {3, 1, 3, 1.0},
    };
    return spec;
}

MdpSpec load_mdp(std::string_view document) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        const int line = line_of_offset(document, e.byte);
        throw ParseError("line " + std::to_string(line) + ": " + e.what(), "", line);
    }
    if (!doc.is_object()) throw ParseError("MDP document must be a JSON object", "");

    MdpSpec spec;
    spec.num_states = required<int>(doc, "num_states", "");
    spec.num_actions = required<int>(doc, "num_actions", "");
    const auto transitions = required<nlohmann::json>(doc, "transitions", "");
    if (!transitions.is_array()) throw ParseError("field \"transitions\" must be an array", "transitions");
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        const auto& t = transitions[i];
        const std::string where = " in transitions[" + std::to_string(i) + "]";
        if (!t.is_object()) throw ParseError("transitions[" + std::to_string(i) + "] must be an object", "transitions");
        spec.transitions.push_back({required<int>(t, "state", where), required<int>(t, "action", where),
                                    required<int>(t, "next", where), required<double>(t, "prob", where)});
    }
    spec.rewards = required<std::vector<int>>(doc, "rewards", "");

    const auto initial = required<nlohmann::json>(doc, "initial", "");
    if (initial.is_string() && initial.get<std::string>() == "uniform") {
        spec.initial = UniformStart{};
    } else if (initial.is_object() && initial.contains("fixed")) {
        spec.initial = FixedStart{required<int>(initial, "fixed", " in initial")};
    } else {
        throw ParseError("field \"initial\" must be \"uniform\" or {\"fixed\": <int>}", "initial");
    }
    if (doc.contains("reward_bits")) spec.reward_bits = required<int>(doc, "reward_bits", "");

    if (auto violations = validate(spec); !violations.empty()) throw ValidationError(std::move(violations));
    return spec;
}

std::string save_mdp(const MdpSpec& spec) {
    nlohmann::ordered_json doc;
    doc["num_states"] = spec.num_states;
    doc["num_actions"] = spec.num_actions;
    auto transitions = nlohmann::ordered_json::array();
    for (const auto& t : spec.transitions) {
        nlohmann::ordered_json row;
        row["state"] = t.state;
        row["action"] = t.action;
        row["next"] = t.next;
        row["prob"] = t.prob;
        transitions.push_back(std::move(row));
    }
    doc["transitions"] = std::move(transitions);
    doc["rewards"] = spec.rewards;
    if (const auto* fixed = std::get_if<FixedStart>(&spec.initial)) {
        doc["initial"] = {{"fixed", fixed->state}};
    } else {
        doc["initial"] = "uniform";
    }
    if (spec.reward_bits) doc["reward_bits"] = *spec.reward_bits;
    return doc.dump(2) + "\n";
}

MdpSpec load_mdp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open MDP file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_mdp(buf.str());
}

std::string to_string(const InitialDistribution& init) {
    if (const auto* fixed = std::get_if<FixedStart>(&init)) return "fixed:" + std::to_string(fixed->state);
    return "uniform";
}

InitialDistribution parse_start(std::string_view text) {
    if (text == "uniform") return UniformStart{};
    constexpr std::string_view prefix = "fixed:";
    if (text.substr(0, prefix.size()) == prefix) {
        const std::string digits(text.substr(prefix.size()));
        if (!digits.empty() && std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            return FixedStart{std::stoi(digits)};
        }
    }
    throw std::invalid_argument("start must be 'uniform' or 'fixed:<state>', got '" + std::string(text) + "'");
}

} // namespace qmdp
