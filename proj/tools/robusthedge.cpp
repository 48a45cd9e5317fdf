// Command-line front end: validation, arbitrage reports, pricing, hedging,
// intervals, replication, decomposition and inequality proofs.

#include "robusthedge/robusthedge.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/sha.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

namespace rh = robusthedge;
using json = nlohmann::ordered_json;
using rh::Rational;

namespace {

struct Settings {
    std::string command;
    std::string model_path;
    std::string claim;
    std::string process;
    std::string bound;
    std::string method;
    std::string dominate;
    bool enumerate = false;
    bool exact_flag = false;
    bool float_flag = false;
    double tol = 1e-9;
    bool json_out = false;
    std::string dump_lp;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
};

/// Exit status and report body of one command.
struct Outcome {
    int code = 0;
    json result;
    std::string text;
};

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), digest);
    std::ostringstream os;
    for (unsigned char c : digest) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
    return os.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw rh::MalformedDocument("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json value(const Rational& x) { return rh::to_fraction_string(x); }
json value(double x) { return x; }

std::string text(const Rational& x) { return rh::format_value(x); }
std::string text(double x) { return rh::decimal_string(x); }

template <class T>
json values(const std::vector<T>& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(value(x));
    return a;
}

template <class T>
std::string vec_text(const std::vector<T>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + text(v[i]);
    return s + ")";
}

template <class T>
const std::string& leaf_id(const rh::ScenarioTree<T>& tree, std::size_t leaf) {
    return tree.node(tree.leaf_node(leaf)).id;
}

template <class T>
json measure_json(const rh::ScenarioTree<T>& tree, const rh::PathMeasure<T>& q) {
    json o = json::object();
    for (std::size_t l = 0; l < tree.num_leaves(); ++l) o[leaf_id(tree, l)] = value(q.weights[l]);
    return o;
}

template <class T>
std::string measure_text(const rh::ScenarioTree<T>& tree, const rh::PathMeasure<T>& q) {
    std::string s;
    for (std::size_t l = 0; l < tree.num_leaves(); ++l)
        s += "  " + leaf_id(tree, l) + ": " + text(q.weights[l]) + "\n";
    return s;
}

template <class T>
json strategy_json(const rh::ScenarioTree<T>& tree, const std::vector<rh::StaticOption<T>>& options,
                   const rh::Strategy<T>& s) {
    json dyn = json::object();
    for (std::size_t n = 0; n < tree.size(); ++n)
        if (!tree.node(n).is_leaf()) dyn[tree.node(n).id] = values(s.dynamic[n]);
    json st = json::object();
    for (std::size_t i = 0; i < options.size(); ++i) st[options[i].name] = value(s.statics[i]);
    return json{{"initial", value(s.initial)}, {"dynamic", dyn}, {"static", st}};
}

template <class T>
const rh::Claim<T>& require_claim(const rh::Model<T>& m, const std::string& name) {
    if (name.empty()) throw rh::InputError("--claim is required for this command");
    auto it = m.claims.find(name);
    if (it == m.claims.end()) throw rh::InputError("model has no claim named '" + name + "'");
    return it->second;
}

void verified(const std::string& err, const std::string& what) {
    if (!err.empty()) throw rh::InternalError(what + " failed re-verification: " + err);
}

template <class T>
Outcome cmd_validate(const rh::Model<T>& m, const rh::SupportMask& mask) {
    const auto& t = m.tree;
    std::size_t polar_nodes = 0;
    for (std::size_t n = 0; n < t.size(); ++n) polar_nodes += !mask.relevant(n);
    Outcome o;
    json claims = json::array();
    for (const auto& [name, c] : m.claims) claims.push_back(name);
    o.result = {{"valid", true},
                {"horizon", t.horizon()},
                {"dimension", t.dimension()},
                {"nodes", t.size()},
                {"leaves", t.num_leaves()},
                {"relevant_leaves", mask.num_relevant_leaves()},
                {"polar_nodes", polar_nodes},
                {"options", m.options.size()},
                {"claims", claims}};
    std::ostringstream os;
    os << "valid model: " << t.size() << " nodes, " << t.num_leaves() << " leaves (" << mask.num_relevant_leaves()
       << " relevant), horizon " << t.horizon() << ", dimension " << t.dimension() << ", " << m.options.size()
       << " options\n";
    o.text = os.str();
    return o;
}

template <class T>
Outcome cmd_na(const rh::Model<T>& m, const rh::SupportMask& mask, const Settings& s) {
    const auto& t = m.tree;
    auto res = rh::global_na(t, mask, m.options, s.threads);
    Outcome o;
    json reports = json::array();
    std::ostringstream os;
    os << std::left << std::setw(16) << "node" << std::setw(8) << "status" << "certificate\n";
    for (const auto& r : res.reports) {
        json j{{"node", t.node(r.node).id}, {"status", r.pass ? "pass" : "fail"}};
        if (r.certificate) j["certificate"] = values(*r.certificate);
        reports.push_back(j);
        os << std::setw(16) << t.node(r.node).id << std::setw(8) << (r.pass ? "pass" : "FAIL")
           << (r.certificate ? "y = " + vec_text(*r.certificate) : std::string("-")) << "\n";
    }
    o.result["nodes"] = reports;
    if (res.pass) {
        o.result["verdict"] = "pass";
        os << "no arbitrage: pass\n";
    } else {
        verified(rh::check_arbitrage(t, mask, m.options, *res.strategy, res.witness_leaves), "arbitrage strategy");
        o.code = 2;
        o.result["verdict"] = "fail";
        if (res.failing_node) o.result["failing_node"] = t.node(*res.failing_node).id;
        o.result["strategy"] = strategy_json(t, m.options, *res.strategy);
        json w = json::array();
        for (auto l : res.witness_leaves) w.push_back(leaf_id(t, l));
        o.result["witness_leaves"] = w;
        os << "no arbitrage: FAIL";
        if (res.failing_node) os << " at node " << t.node(*res.failing_node).id;
        else os << " (semistatic, through the option quotes)";
        os << "\nwitness leaves:";
        for (auto l : res.witness_leaves) os << " " << leaf_id(t, l);
        os << "\nstrategy: " << strategy_json(t, m.options, *res.strategy).dump() << "\n";
    }
    o.text = os.str();
    return o;
}

Outcome cmd_enumerate(const rh::Model<Rational>& m, const rh::SupportMask& mask) {
    auto poly = rh::enumerate_vertices(m.tree, mask, m.options);
    Outcome o;
    json vs = json::array();
    std::ostringstream os;
    os << poly.vertices.size() << " vertices\n";
    for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
        vs.push_back(measure_json(m.tree, poly.vertices[i]));
        os << "vertex " << i << ":\n" << measure_text(m.tree, poly.vertices[i]);
    }
    o.result["vertices"] = vs;
    o.text = os.str();
    return o;
}

template <class T>
Outcome cmd_dominate(const rh::Model<T>& m, const rh::SupportMask& mask, const Settings& s) {
    const auto& t = m.tree;
    rh::PathMeasure<T> p;
    if (s.dominate == "uniform") {
        p = rh::reference_selector(t);
    } else {
        auto it = m.measures.find(s.dominate);
        if (it == m.measures.end()) throw rh::InputError("model has no measure named '" + s.dominate + "'");
        p = it->second;
    }
    auto res = rh::find_dominating_mm(t, mask, m.options, p);
    if (res.status == rh::DominationStatus::Indeterminate)
        throw rh::NumericalBreakdown("domination margin is within tolerance of zero");
    Outcome o;
    o.result["dominated"] = s.dominate;
    if (res.t_star) o.result["t_star"] = value(*res.t_star);
    if (res.status == rh::DominationStatus::Witness) {
        verified(rh::check_witness(t, mask, m.options, *res.witness), "martingale measure");
        o.result["status"] = "witness";
        o.result["q"] = measure_json(t, res.witness->q);
        o.text = "dominating martingale measure:\n" + measure_text(t, res.witness->q);
    } else {
        o.code = 2;
        o.result["status"] = "none exists";
        o.text = "none exists\n";
    }
    return o;
}

// Randomized weak-duality check: martingale measures built from random
// mixtures of local vertex kernels never price the claim above `price`.
Outcome self_check(const rh::Model<Rational>& m, const rh::SupportMask& mask, const rh::Claim<Rational>& f,
                   const Rational& price, std::uint64_t seed) {
    const auto& t = m.tree;
    std::mt19937_64 rng(seed);
    std::vector<std::vector<rh::Measure<Rational>>> local(t.size());
    for (std::size_t n = 0; n < t.size(); ++n)
        if (!t.node(n).is_leaf() && mask.relevant(n)) local[n] = rh::enumerate_local_vertices(t, mask, n);
    const int samples = 100;
    for (int i = 0; i < samples; ++i) {
        std::vector<std::optional<rh::Measure<Rational>>> kernels(t.size());
        for (std::size_t n = 0; n < t.size(); ++n) {
            if (local[n].empty()) continue;
            rh::Measure<Rational> k;
            k.weights.assign(t.node(n).children.size(), Rational(0));
            Rational total = 0;
            std::vector<int> w(local[n].size());
            for (auto& x : w) total += (x = std::uniform_int_distribution<int>(1, 9)(rng));
            for (std::size_t v = 0; v < w.size(); ++v)
                for (std::size_t c = 0; c < k.weights.size(); ++c) k.weights[c] += w[v] / total * local[n][v].weights[c];
            kernels[n] = std::move(k);
        }
        auto q = rh::product_measure(t, kernels);
        if (rh::expectation(q, f.values) > price)
            throw rh::InternalError("self-check found a martingale measure priced above the superhedging price");
    }
    Outcome o;
    o.result = {{"seed", seed}, {"samples", samples}, {"passed", true}};
    return o;
}

template <class T>
Outcome cmd_price(const rh::Model<T>& m, const rh::SupportMask& mask, const Settings& s,
                  const rh::Model<Rational>& exact_model) {
    const auto& t = m.tree;
    const auto& f = require_claim(m, s.claim);
    rh::PricingOptions po{s.threads, true};
    std::string method = s.method.empty() ? (m.options.empty() ? "both" : "lp") : s.method;
    if (method != "lp" && !m.options.empty())
        throw rh::InputError("method '" + method + "' ignores static options; use --method lp");
    Outcome o;
    std::optional<T> dp_price, lp_price;
    if (method == "dp" || method == "both") {
        auto dp = rh::superhedge_dynamic(t, mask, f, po);
        verified(rh::check_superhedge(t, mask, m.options, dp.strategy, f), "superhedging strategy");
        dp_price = dp.price;
        o.result["dp"] = value(dp.price);
        po.check_na = false;
    }
    if (method == "lp" || method == "both") {
        auto sp = rh::superhedge_semistatic(t, mask, f, m.options, po);
        verified(rh::check_superhedge(t, mask, m.options, sp.strategy, f), "superhedging strategy");
        verified(rh::check_martingale_measure(t, mask, m.options, sp.q), "dual measure");
        lp_price = sp.price;
        o.result["lp"] = value(sp.price);
        o.result["q"] = measure_json(t, sp.q);
    }
    if (dp_price && lp_price && !rh::approx_eq(t.arith(), *dp_price, *lp_price))
        throw rh::InternalError("dynamic and global prices differ");
    const T price = lp_price ? *lp_price : *dp_price;
    json head{{"claim", s.claim}, {"method", method}, {"price", value(price)}};
    head.update(o.result);
    o.result = std::move(head);
    o.text = text(price) + "\n";
    if constexpr (std::is_same_v<T, Rational>) {
        if (s.seed && exact_model.options.empty()) {
            auto chk = self_check(exact_model, mask, f, price, *s.seed);
            o.result["self_check"] = chk.result;
        }
    }
    return o;
}

template <class T>
Outcome cmd_hedge(const rh::Model<T>& m, const rh::SupportMask& mask, const Settings& s) {
    const auto& f = require_claim(m, s.claim);
    auto sp = rh::superhedge_semistatic(m.tree, mask, f, m.options, {s.threads, true});
    verified(rh::check_superhedge(m.tree, mask, m.options, sp.strategy, f), "superhedging strategy");
    Outcome o;
    o.result = {{"claim", s.claim}, {"price", value(sp.price)}, {"strategy", strategy_json(m.tree, m.options, sp.strategy)}};
    o.text = o.result["strategy"].dump(2) + "\n";
    return o;
}

template <class T>
Outcome cmd_interval(const rh::Model<T>& m, const rh::SupportMask& mask, const Settings& s) {
    const auto& t = m.tree;
    const auto& f = require_claim(m, s.claim);
    auto iv = rh::price_interval(t, mask, f, m.options, {s.threads, true});
    verified(rh::check_martingale_measure(t, mask, m.options, iv.q_low), "lower measure");
    verified(rh::check_martingale_measure(t, mask, m.options, iv.q_high), "upper measure");
    Outcome o;
    const bool point = iv.kind == rh::IntervalKind::Point;
    o.result = {{"claim", s.claim},
                {"lower", value(iv.lower)},
                {"upper", value(iv.upper)},
                {"kind", point ? "point" : "open interval"},
                {"q_low", measure_json(t, iv.q_low)},
                {"q_high", measure_json(t, iv.q_high)}};
    o.text = point ? "point: " + text(iv.upper) + "\n" : "(" + text(iv.lower) + ", " + text(iv.upper) + ")\n";
    return o;
}

template <class T>
Outcome cmd_replicate(const rh::Model<T>& m, const rh::SupportMask& mask, const Settings& s) {
    const auto& t = m.tree;
    const auto& f = require_claim(m, s.claim);
    auto r = rh::check_replicable(t, mask, f, m.options, {s.threads, true});
    Outcome o;
    o.result = {{"claim", s.claim}, {"replicable", r.replicable}, {"lower", value(r.lower)}, {"upper", value(r.upper)}};
    if (r.replicable) {
        for (std::size_t l = 0; l < t.num_leaves(); ++l)
            if (mask.relevant_leaf[l] && !rh::approx_eq(t.arith(), rh::wealth(t, *r.strategy, m.options, l), f.values[l]))
                verified("wealth differs at leaf '" + leaf_id(t, l) + "'", "replicating strategy");
        o.result["strategy"] = strategy_json(t, m.options, *r.strategy);
        o.text = "replicable at " + text(r.upper) + "\nstrategy: " + o.result["strategy"].dump() + "\n";
    } else {
        verified(rh::check_martingale_measure(t, mask, m.options, *r.q_low), "lower measure");
        verified(rh::check_martingale_measure(t, mask, m.options, *r.q_high), "upper measure");
        o.result["q_low"] = measure_json(t, *r.q_low);
        o.result["q_high"] = measure_json(t, *r.q_high);
        o.result["e_low"] = value(rh::expectation(*r.q_low, f.values));
        o.result["e_high"] = value(rh::expectation(*r.q_high, f.values));
        o.text = "not replicable: E values " + text(rh::expectation(*r.q_low, f.values)) + " and " +
                 text(rh::expectation(*r.q_high, f.values)) + "\n";
    }
    return o;
}

template <class T>
Outcome cmd_complete(const rh::Model<T>& m, const rh::SupportMask& mask, const Settings& s) {
    Outcome o;
    const bool c = rh::check_complete(m.tree, mask, m.options, {s.threads, true});
    o.result = {{"complete", c}};
    o.text = c ? "complete\n" : "incomplete\n";
    return o;
}

template <class T>
Outcome cmd_decompose(const rh::Model<T>& m, const rh::SupportMask& mask, const Settings& s) {
    const auto& t = m.tree;
    if (s.process.empty()) throw rh::InputError("--process is required for decompose");
    auto it = m.processes.find(s.process);
    if (it == m.processes.end()) throw rh::InputError("model has no process named '" + s.process + "'");
    const auto& v = it->second;
    rh::PricingOptions po{s.threads, true};
    auto verdict = rh::check_supermartingale(t, mask, v, po);
    Outcome o;
    if (!verdict.yes) {
        o.code = 2;
        o.result = {{"process", s.process},
                    {"supermartingale", false},
                    {"node", t.node(*verdict.node).id},
                    {"gap", value(*verdict.gap)}};
        o.text = "not a supermartingale at node " + t.node(*verdict.node).id + ", gap " + text(*verdict.gap) + "\n";
        return o;
    }
    po.check_na = false;
    auto d = rh::optional_decomposition(t, mask, v, po);
    verified(rh::check_decomposition(t, mask, v, d), "decomposition");
    json h = json::object(), k = json::object();
    for (std::size_t n = 0; n < t.size(); ++n) {
        if (!mask.relevant(n)) continue;
        if (!t.node(n).is_leaf()) h[t.node(n).id] = values(d.strategy.dynamic[n]);
        k[t.node(n).id] = value(*d.consumption[n]);
    }
    o.result = {{"process", s.process}, {"supermartingale", true}, {"H", h}, {"K", k}};
    o.text = json{{"H", h}, {"K", k}}.dump(2) + "\n";
    return o;
}

template <class T>
Outcome cmd_prove(const rh::Model<T>& m, const rh::SupportMask& mask, const Settings& s) {
    const auto& t = m.tree;
    const auto& f = require_claim(m, s.claim);
    if (s.bound.empty()) throw rh::InputError("--bound is required for prove");
    if (!m.options.empty()) throw rh::InputError("prove works on models without static options");
    T bound;
    try {
        bound = rh::scalar_cast<T>(rh::parse_rational(s.bound));
    } catch (const std::invalid_argument& e) {
        throw rh::InputError(std::string("--bound: ") + e.what());
    }
    auto r = rh::prove_inequality(t, mask, f, bound, {s.threads, true});
    Outcome o;
    o.result = {{"claim", s.claim}, {"bound", value(bound)}, {"price", value(r.price)}, {"proved", r.proved}};
    if (r.proved) {
        verified(rh::check_superhedge(t, mask, m.options, *r.certificate, f), "pathwise certificate");
        o.result["certificate"] = strategy_json(t, m.options, *r.certificate);
        o.text = "proved: E_Q[" + s.claim + "] <= " + text(bound) + " for every martingale measure\ncertificate: " +
                 o.result["certificate"].dump() + "\n";
    } else {
        verified(rh::check_martingale_measure(t, mask, m.options, *r.refutation), "refuting measure");
        const T e = rh::expectation(*r.refutation, f.values);
        if (!rh::is_pos(t.arith(), T(e - bound))) throw rh::InternalError("refuting measure does not exceed the bound");
        o.result["refutation"] = measure_json(t, *r.refutation);
        o.result["expectation"] = value(e);
        o.text = "refuted: E_q[" + s.claim + "] = " + text(e) + " > " + text(bound) + " under\n" +
                 measure_text(t, *r.refutation);
    }
    return o;
}

template <class T>
Outcome dispatch(const rh::Model<T>& m, const Settings& s, const rh::Model<Rational>& exact_model) {
    auto mask = rh::compute_support(m.tree);
    const auto& c = s.command;
    if (c == "validate") return cmd_validate(m, mask);
    if (c == "na") return cmd_na(m, mask, s);
    if (c == "mm") {
        if (s.enumerate) return cmd_enumerate(exact_model, rh::compute_support(exact_model.tree));
        if (s.dominate.empty()) throw rh::InputError("mm needs --dominate or --enumerate");
        return cmd_dominate(m, mask, s);
    }
    if (c == "price") return cmd_price(m, mask, s, exact_model);
    if (c == "hedge") return cmd_hedge(m, mask, s);
    if (c == "interval") return cmd_interval(m, mask, s);
    if (c == "replicate") return cmd_replicate(m, mask, s);
    if (c == "complete") return cmd_complete(m, mask, s);
    if (c == "decompose") return cmd_decompose(m, mask, s);
    if (c == "prove") return cmd_prove(m, mask, s);
    throw rh::InputError("unknown command '" + c + "'");
}

// When quotes admit no consistent martingale measure, show where each quote
// would have to lie: its own price interval in the option-free market.
json quote_hint(const rh::Model<Rational>& m) {
    json hint = json::array();
    auto mask = rh::compute_support(m.tree);
    for (const auto& o : m.options) {
        auto iv = rh::price_interval(m.tree, mask, rh::Claim<Rational>{o.payoff}, {}, {1, false});
        hint.push_back({{"option", o.name}, {"quote", value(o.quote)}, {"lower", value(iv.lower)}, {"upper", value(iv.upper)}});
    }
    return hint;
}

int error_code(const std::exception& e) {
    if (dynamic_cast<const rh::InputError*>(&e)) return 1;
    if (dynamic_cast<const rh::DomainDenial*>(&e)) return 2;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return 1;
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    Settings s;
    s.threads = std::max(1u, std::thread::hardware_concurrency());

    CLI::App app{"Robust superhedging and arbitrage analysis on finite scenario trees"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--model", s.model_path, "Model document (JSON)");
    app.add_option("--claim", s.claim, "Claim name from the model's claims map");
    app.add_option("--process", s.process, "Process name from the model's processes map");
    app.add_option("--bound", s.bound, "Bound for prove, e.g. 0 or 3/2");
    app.add_option("--method", s.method, "Pricing method")->check(CLI::IsMember({"dp", "lp", "both"}));
    auto* exact_opt = app.add_flag("--exact", s.exact_flag, "Exact rational arithmetic (default)");
    app.add_flag("--float", s.float_flag, "Floating-point arithmetic")->excludes(exact_opt);
    app.add_option("--tol", s.tol, "Zero tolerance in float mode")->check(CLI::PositiveNumber);
    app.add_flag("--json", s.json_out, "Emit the full run report as JSON");
    app.add_option("--dump-lp", s.dump_lp, "Append every LP solved to FILE");
    app.add_option("--threads", s.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
    app.add_option("--seed", s.seed, "Seed for randomized self-checks");

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"validate", "Load and validate a model"},
        {"na", "Per-node and global no-arbitrage report"},
        {"mm", "Martingale measures: --dominate NAME|uniform or --enumerate"},
        {"price", "Superhedging price of a claim"},
        {"hedge", "Optimal superhedging strategy as JSON"},
        {"interval", "No-arbitrage price interval of a claim"},
        {"replicate", "Replicability of a claim"},
        {"complete", "Market completeness"},
        {"decompose", "Optional decomposition of an adapted process"},
        {"prove", "Prove or refute E_Q[claim] <= bound"},
    };
    for (const auto& [name, desc] : commands) {
        auto* sub = app.add_subcommand(name, desc);
        sub->callback([&s, n = name] { s.command = n; });
        if (name == "mm") {
            sub->add_option("--dominate", s.dominate, "Measure name, or 'uniform' for the reference selector");
            sub->add_flag("--enumerate", s.enumerate, "List all vertices of the martingale polytope");
        }
    }
    CLI11_PARSE(app, argc, argv);

    bool use_float = false;
    if (const char* env = std::getenv("ROBUSTHEDGE_MODE")) {
        const std::string mode = env;
        if (mode == "float") use_float = true;
        else if (mode != "exact") {
            std::cerr << "error: ROBUSTHEDGE_MODE must be 'exact' or 'float'\n";
            return 1;
        }
    }
    if (s.float_flag) use_float = true;
    if (s.exact_flag) use_float = false;

    std::ofstream dump;
    if (!s.dump_lp.empty()) {
        dump.open(s.dump_lp, std::ios::app);
        if (!dump) {
            std::cerr << "error: cannot open '" << s.dump_lp << "' for writing\n";
            return 1;
        }
        rh::lp::set_dump_sink(&dump);
    }

    const auto start = std::chrono::steady_clock::now();
    json report{{"command", s.command}};
    Outcome out;
    std::optional<rh::Model<Rational>> loaded;
    try {
        if (s.model_path.empty()) throw rh::InputError("--model is required");
        const std::string bytes = read_file(s.model_path);
        report["model_digest"] = "sha256:" + sha256_hex(bytes);
        loaded = rh::load_model(bytes);
        const auto& model = *loaded;
        bool ran_float = false;
        if (use_float) {
            try {
                out = dispatch(model.convert<double>(rh::Arith<double>{s.tol}), s, model);
                ran_float = true;
            } catch (const rh::NumericalBreakdown& e) {
                std::cerr << "warning: " << e.what() << "; retrying in exact mode\n";
            }
        }
        if (!ran_float) out = dispatch(model, s, model);
        report["mode"] = ran_float ? json{{"arithmetic", "float"}, {"tol", s.tol}} : json{{"arithmetic", "exact"}};
        report["result"] = out.result;
    } catch (const std::exception& e) {
        out.code = error_code(e);
        out.text.clear();
        report["error"] = {{"kind", out.code == 2 ? "denial" : out.code == 1 ? "input" : "internal"},
                           {"message", e.what()}};
        std::cerr << "error: " << e.what() << "\n";
        if (dynamic_cast<const rh::ArbitrageDetected*>(&e) && loaded && !loaded->options.empty()) {
            try {
                report["error"]["quote_intervals"] = quote_hint(*loaded);
                for (const auto& h : report["error"]["quote_intervals"])
                    std::cerr << "hint: option " << h["option"].get<std::string>() << " quoted at "
                              << h["quote"].dump() << "; option-free price range [" << h["lower"].dump() << ", "
                              << h["upper"].dump() << "]\n";
            } catch (const rh::Error&) {
                // The option-free market itself has an arbitrage; nothing more to say.
            }
        }
    }
    report["exit_code"] = out.code;
    report["wall_time_ms"] =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    if (s.json_out) std::cout << report.dump(2) << "\n";
    else std::cout << out.text;
    return out.code;
}
