#include "qmdp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qmdp/baseline.hpp"
#include "qmdp/grover.hpp"
#include "qmdp/mdp.hpp"
#include "qmdp/qmdp_circuit.hpp"

namespace qmdp::cli {

namespace {

struct RunConfig {
    std::string subcommand;
    std::string mdp = "bundled";
    int steps = 3;
    std::string start;
    std::string backend = "sparse";
    std::optional<std::uint64_t> shots;
    std::optional<std::uint64_t> seed;
    std::string target_return;
    std::string iterations = "auto";
    std::string dump_circuit;
    std::string out;
    std::string format;
    std::string svg;
    // qlearn
    double alpha = 0.1;
    double gamma = 1.0;
    double epsilon = 0.1;
    int episodes = 10000;
    int trials = 100;
};

class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << content;
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

// Primary artifact goes to --out, or to stdout when --out is absent.
void emit(const RunConfig& cfg, const std::string& content, std::ostream& out) {
    if (cfg.out.empty()) {
        out << content;
    } else {
        write_file(cfg.out, content);
    }
}

// Auxiliary artifacts sit beside --out and are skipped when writing to stdout.
void emit_aux(const RunConfig& cfg, const std::string& suffix, const std::string& content) {
    if (!cfg.out.empty()) write_file(cfg.out + suffix, content);
}

MdpSpec load_spec(const RunConfig& cfg) {
    return cfg.mdp == "bundled" ? paper_example_mdp() : load_mdp_file(cfg.mdp);
}

InitialDistribution start_of(const RunConfig& cfg, const MdpSpec& spec) {
    return cfg.start.empty() ? spec.initial : parse_start(cfg.start);
}

void check_config(const RunConfig& cfg) {
    if (cfg.steps < 1) throw UsageError("--steps must be at least 1");
    if (cfg.shots && !cfg.seed) throw UsageError("--shots requires --seed");
    if (cfg.shots && *cfg.shots == 0) throw UsageError("--shots must be at least 1");
    if (cfg.format != "csv" && cfg.format != "json") throw UsageError("--format must be csv or json");
}

nlohmann::ordered_json steps_json(const std::vector<Step>& steps) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : steps) arr.push_back({{"s", s.state}, {"a", s.action}, {"next", s.next}, {"r", s.reward}});
    return arr;
}

nlohmann::ordered_json trajectories_json(const std::vector<TrajectoryRecord>& records, bool with_counts) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        nlohmann::ordered_json row;
        row["bitstring"] = r.bitstring;
        row["return"] = r.ret;
        row["prob"] = r.probability;
        if (with_counts) row["count"] = r.count;
        row["steps"] = steps_json(r.steps);
        arr.push_back(std::move(row));
    }
    return arr;
}

void maybe_dump_circuit(const RunConfig& cfg, const PreparedModel& model) {
    if (!cfg.dump_circuit.empty()) write_file(cfg.dump_circuit, qsim::to_listing(model.circuit));
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const auto spec = load_spec(cfg);
    const auto start = start_of(cfg, spec);
    const auto model = build_preparation(spec, cfg.steps, start);
    maybe_dump_circuit(cfg, model);
    const auto state = prepare_state(model, qsim::parse_backend(cfg.backend));

    std::optional<qsim::SampleCounts> samples;
    if (cfg.shots) samples = state.sample(*cfg.shots, *cfg.seed);

    std::vector<TrajectoryRecord> records;
    for (const auto& [index, amp] : state.entries()) {
        auto rec = decode_trajectory(model.layout, index);
        rec.probability = std::norm(amp);
        if (samples) {
            auto it = samples->counts.find(rec.bitstring);
            rec.count = it == samples->counts.end() ? 0 : it->second;
        }
        records.push_back(std::move(rec));
    }

    // Conditional next-state table P(s'|s,a) read back from the single-step state.
    std::string heat_csv;
    nlohmann::ordered_json heat_json = nlohmann::ordered_json::array();
    if (cfg.steps == 1) {
        const auto& L = model.layout;
        std::vector<int> qubits = L.register_qubits(Role::State, 0);
        for (int q : L.register_qubits(Role::Action, 0)) qubits.push_back(q);
        const auto sa_marginal = state.marginal(qubits);
        for (int q : L.register_qubits(Role::Next, 0)) qubits.push_back(q);
        const auto joint = state.marginal(qubits);
        const int sa_width = L.state_bits() + L.action_bits();
        heat_csv = "sa_bits,state,action,next,prob\n";
        for (const auto& [pattern, p] : joint) {
            const auto sa = pattern & ((qsim::BasisIndex{1} << sa_width) - 1);
            const int s = static_cast<int>(sa & ((1U << L.state_bits()) - 1));
            const int a = static_cast<int>(sa >> L.state_bits());
            const int next = static_cast<int>(pattern >> sa_width);
            const double cond = p / sa_marginal.at(sa);
            heat_csv += qsim::bitstring(sa, sa_width) + "," + std::to_string(s) + "," + std::to_string(a) + "," +
                        std::to_string(next) + "," + fmt_double(cond) + "\n";
            heat_json.push_back({{"state", s}, {"action", a}, {"next", next}, {"prob", cond}});
        }
    }

    if (cfg.format == "json") {
        nlohmann::ordered_json doc;
        doc["steps"] = cfg.steps;
        doc["start"] = to_string(start);
        doc["qubits"] = model.layout.total_qubits();
        doc["trajectories"] = trajectories_json(records, samples.has_value());
        if (cfg.steps == 1) doc["transition_matrix"] = heat_json;
        if (samples) {
            doc["shots"] = samples->shots;
            doc["seed"] = samples->seed;
        }
        emit(cfg, doc.dump(2) + "\n", out);
    } else {
        emit(cfg, trajectories_csv(records, cfg.steps), out);
        if (cfg.steps == 1) emit_aux(cfg, ".transitions.csv", heat_csv);
    }
    if (!cfg.svg.empty()) {
        std::vector<std::pair<std::string, double>> bars;
        for (std::size_t i = 0; i < records.size(); ++i) {
            bars.emplace_back(std::to_string(i + 1), samples ? static_cast<double>(records[i].count)
                                                             : records[i].probability);
        }
        write_file(cfg.svg, bar_chart_svg(bars, samples ? "trajectory counts" : "trajectory probabilities"));
    }
    if (!cfg.out.empty()) {
        out << "trajectories: " << records.size() << " qubits: " << model.layout.total_qubits() << "\n";
    }
    return 0;
}

int cmd_enumerate(const RunConfig& cfg, std::ostream& out) {
    const auto spec = load_spec(cfg);
    const auto start = start_of(cfg, spec);
    const auto records = enumerate_trajectories(spec, cfg.steps, start);
    if (cfg.format == "json") {
        nlohmann::ordered_json doc;
        doc["steps"] = cfg.steps;
        doc["start"] = to_string(start);
        doc["expected_return"] = expected_return(records);
        doc["trajectories"] = trajectories_json(records, false);
        emit(cfg, doc.dump(2) + "\n", out);
    } else {
        emit(cfg, trajectories_csv(records, cfg.steps), out);
    }
    if (!cfg.out.empty()) {
        out << "trajectories: " << records.size() << " expected return: " << fmt_double(expected_return(records))
            << "\n";
    }
    return 0;
}

int cmd_search(const RunConfig& cfg, std::ostream& out) {
    const auto spec = load_spec(cfg);
    const auto start = start_of(cfg, spec);
    const auto backend = qsim::parse_backend(cfg.backend);
    if (cfg.target_return.empty()) throw UsageError("search needs --target-return N|max");

    const auto catalog = enumerate_trajectories(spec, cfg.steps, start);
    OracleSpec oracle;
    if (cfg.target_return == "max") {
        int best = 0;
        for (const auto& r : catalog) best = std::max(best, r.ret);
        oracle.target_return = static_cast<std::uint64_t>(best);
    } else {
        try {
            oracle.target_return = std::stoull(cfg.target_return);
        } catch (const std::exception&) {
            throw UsageError("--target-return must be a non-negative integer or 'max'");
        }
    }

    const auto model = build_preparation(spec, cfg.steps, start);
    maybe_dump_circuit(cfg, model);

    int iterations = 0;
    if (cfg.iterations == "auto") {
        const double p0 = marked_probability(model, oracle, backend);
        iterations = p0 > 0.0 && p0 < 1.0 ? iterations_hint(p0) : 0;
    } else {
        try {
            iterations = std::stoi(cfg.iterations);
        } catch (const std::exception&) {
            throw UsageError("--iterations must be an integer or 'auto'");
        }
        if (iterations < 0) throw UsageError("--iterations must be non-negative");
    }

    const auto report = cfg.shots ? grover_search(model, oracle, iterations, *cfg.shots, *cfg.seed, backend)
                                  : grover_search_exact(model, oracle, iterations, backend);

    // Trajectory number = 1-based rank of the canonical bitstring among all supported trajectories.
    std::string bars = "# trajectory = rank of canonical bitstring (ascending) among nonzero-probability trajectories\n"
                       "trajectory,bitstring,return,count,marked\n";
    std::vector<std::pair<std::string, double>> svg_bars;
    for (std::size_t i = 0; i < catalog.size(); ++i) {
        const auto& r = catalog[i];
        auto it = report.samples.counts.find(r.bitstring);
        const std::uint64_t count = it == report.samples.counts.end() ? 0 : it->second;
        const bool marked = oracle_matches(model.layout, oracle, qsim::parse_bitstring(r.bitstring));
        bars += std::to_string(i + 1) + "," + r.bitstring + "," + std::to_string(r.ret) + "," + std::to_string(count) +
                "," + (marked ? "1" : "0") + "\n";
        svg_bars.emplace_back(std::to_string(i + 1), static_cast<double>(count));
    }

    if (cfg.format == "json") {
        emit(cfg, report_json(report), out);
        emit_aux(cfg, ".bars.csv", bars);
    } else {
        emit(cfg, bars, out);
        emit_aux(cfg, ".report.json", report_json(report));
    }
    if (!cfg.svg.empty()) write_file(cfg.svg, bar_chart_svg(svg_bars, "Grover-amplified trajectory counts"));
    if (!cfg.out.empty()) {
        out << "target return: " << oracle.target_return << " iterations: " << iterations
            << " marked: " << report.marked.size() << " p0: " << fmt_double(report.p0)
            << " p_after: " << fmt_double(report.p_after) << "\n";
    }
    return 0;
}

int cmd_qlearn(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.seed) throw UsageError("qlearn needs --seed");
    const auto spec = load_spec(cfg);
    QlConfig ql;
    ql.alpha = cfg.alpha;
    ql.gamma = cfg.gamma;
    ql.epsilon = cfg.epsilon;
    ql.episodes = cfg.episodes;
    ql.horizon = cfg.steps;
    ql.seed = *cfg.seed;
    ql.start = start_of(cfg, spec);
    const auto q = q_learning(spec, ql);
    const auto policy = q.greedy_policy();
    const auto rollouts = greedy_rollouts(spec, q, cfg.trials, cfg.steps, ql.start, *cfg.seed);

    std::string rollout_csv = "trajectory,total_reward,count,steps\n";
    for (std::size_t i = 0; i < rollouts.size(); ++i) {
        std::string steps;
        for (const auto& s : rollouts[i].steps) {
            steps += "(" + std::to_string(s.state) + "," + std::to_string(s.action) + "," + std::to_string(s.next) +
                     "," + std::to_string(s.reward) + ")";
        }
        rollout_csv += "T" + std::to_string(i + 1) + "," + std::to_string(rollouts[i].total_reward) + "," +
                       std::to_string(rollouts[i].count) + "," + steps + "\n";
    }

    if (cfg.format == "json") {
        nlohmann::ordered_json doc;
        doc["policy"] = format_policy(policy);
        auto table = nlohmann::ordered_json::array();
        for (int s = 0; s < q.num_states(); ++s) {
            auto row = nlohmann::ordered_json::array();
            for (int a = 0; a < q.num_actions(); ++a) row.push_back(q.at(s, a));
            table.push_back(std::move(row));
        }
        doc["q"] = std::move(table);
        auto rolls = nlohmann::ordered_json::array();
        for (const auto& r : rollouts) {
            rolls.push_back({{"total_reward", r.total_reward}, {"count", r.count}, {"steps", steps_json(r.steps)}});
        }
        doc["rollouts"] = std::move(rolls);
        doc["seed"] = *cfg.seed;
        emit(cfg, doc.dump(2) + "\n", out);
    } else {
        std::string csv = "# policy: " + format_policy(policy) + "\nstate";
        for (int a = 0; a < q.num_actions(); ++a) csv += ",a" + std::to_string(a);
        csv += ",greedy\n";
        for (int s = 0; s < q.num_states(); ++s) {
            csv += std::to_string(s);
            for (int a = 0; a < q.num_actions(); ++a) csv += "," + fmt_double(q.at(s, a));
            csv += ",a" + std::to_string(policy[static_cast<std::size_t>(s)]) + "\n";
        }
        emit(cfg, csv, out);
        emit_aux(cfg, ".rollouts.csv", rollout_csv);
    }
    if (!cfg.svg.empty()) {
        std::vector<std::pair<std::string, double>> bars;
        for (std::size_t i = 0; i < rollouts.size(); ++i) {
            bars.emplace_back("T" + std::to_string(i + 1), rollouts[i].total_reward);
        }
        write_file(cfg.svg, bar_chart_svg(bars, "greedy rollout total reward"));
    }
    if (!cfg.out.empty()) out << "policy: " << format_policy(policy) << "\n";
    return 0;
}

void apply_thread_env() {
    if (const char* env = std::getenv("QMDP_THREADS")) {
        try {
            qsim::set_max_threads(std::max(1, std::stoi(env)));
        } catch (const std::exception&) {
            throw UsageError("QMDP_THREADS must be a positive integer");
        }
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum MDP trajectory simulator and Grover search", "qmdp"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&](CLI::App* sub, bool sampling) {
        sub->add_option("--mdp", cfg.mdp, "MDP JSON file or 'bundled'");
        sub->add_option("--steps", cfg.steps, "time steps T");
        sub->add_option("--start", cfg.start, "uniform | fixed:N (default: the MDP's own)");
        sub->add_option("--out", cfg.out, "output path (default stdout)");
        sub->add_option("--format", cfg.format, "csv | json");
        sub->add_option("--seed", cfg.seed, "RNG seed");
        if (sampling) {
            sub->add_option("--backend", cfg.backend, "dense | sparse");
            sub->add_option("--shots", cfg.shots, "measurement shots");
            sub->add_option("--dump-circuit", cfg.dump_circuit, "write the preparation circuit listing");
        }
        sub->add_option("--svg", cfg.svg, "also write an SVG bar chart");
    };

    auto* simulate = app.add_subcommand("simulate", "exact trajectory distribution of the prepared state");
    add_common(simulate, true);
    auto* search = app.add_subcommand("search", "Grover search for trajectories with a target return");
    add_common(search, true);
    search->add_option("--target-return", cfg.target_return, "N | max");
    search->add_option("--iterations", cfg.iterations, "N | auto");
    auto* enumerate = app.add_subcommand("enumerate", "classical trajectory catalog");
    add_common(enumerate, false);
    auto* qlearn = app.add_subcommand("qlearn", "tabular Q-learning and greedy rollouts");
    add_common(qlearn, false);
    qlearn->add_option("--alpha", cfg.alpha);
    qlearn->add_option("--gamma", cfg.gamma);
    qlearn->add_option("--epsilon", cfg.epsilon);
    qlearn->add_option("--episodes", cfg.episodes);
    qlearn->add_option("--trials", cfg.trials);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "qmdp: " << e.what() << "\n";
        return 2;
    }

    try {
        apply_thread_env();
        if (cfg.format.empty()) cfg.format = search->parsed() ? "json" : "csv";
        check_config(cfg);
        if (simulate->parsed()) return cmd_simulate(cfg, out);
        if (search->parsed()) return cmd_search(cfg, out);
        if (enumerate->parsed()) return cmd_enumerate(cfg, out);
        return cmd_qlearn(cfg, out);
    } catch (const UsageError& e) {
        err << "qmdp: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "qmdp: " << e.what() << "\n";
        return 1;
    }
}

std::string bar_chart_svg(const std::vector<std::pair<std::string, double>>& bars, const std::string& title) {
    constexpr double kWidth = 960, kHeight = 360, kMargin = 40;
    double top = 0.0;
    for (const auto& b : bars) top = std::max(top, b.second);
    if (top <= 0.0) top = 1.0;
    const double slot = bars.empty() ? 0.0 : (kWidth - 2 * kMargin) / static_cast<double>(bars.size());
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
    svg << "<text x=\"" << kMargin << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title
        << "</text>\n";
    char buf[256];
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double h = (kHeight - 2 * kMargin) * bars[i].second / top;
        const double x = kMargin + slot * static_cast<double>(i);
        std::snprintf(buf, sizeof buf,
                      "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"steelblue\"><title>%s: %g</title></rect>\n",
                      x, kHeight - kMargin - h, std::max(slot * 0.8, 0.5), h, bars[i].first.c_str(), bars[i].second);
        svg << buf;
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace qmdp::cli
