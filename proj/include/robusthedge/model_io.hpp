#pragma once

#include "robusthedge/model.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>

namespace robusthedge {

namespace detail {

/// SAX handler building a DOM in which every floating-point literal is kept
/// as its source text, so decimals can be converted to rationals exactly.
class ExactNumberSax {
public:
    using json = nlohmann::json;

    bool null() { return put(json(nullptr)); }
    bool boolean(bool b) { return put(json(b)); }
    bool number_integer(json::number_integer_t v) { return put(json(v)); }
    bool number_unsigned(json::number_unsigned_t v) { return put(json(v)); }
    bool number_float(json::number_float_t, const json::string_t& lexeme) { return put(json(lexeme)); }
    bool string(json::string_t& s) { return put(json(s)); }
    bool binary(json::binary_t&) { return false; }
    bool start_object(std::size_t) {
        json* slot = place(json::object());
        stack_.push_back(slot);
        return true;
    }
    bool key(json::string_t& k) {
        pending_key_ = k;
        return true;
    }
    bool end_object() {
        stack_.pop_back();
        return true;
    }
    bool start_array(std::size_t) {
        json* slot = place(json::array());
        stack_.push_back(slot);
        return true;
    }
    bool end_array() {
        stack_.pop_back();
        return true;
    }
    bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& ex) {
        error_ = "byte " + std::to_string(pos) + ": " + ex.what();
        return false;
    }

    json& result() { return root_; }
    const std::string& error() const { return error_; }

private:
    json* place(json v) {
        if (stack_.empty()) {
            root_ = std::move(v);
            return &root_;
        }
        json& top = *stack_.back();
        if (top.is_array()) {
            top.push_back(std::move(v));
            return &top.back();
        }
        top[pending_key_] = std::move(v);
        return &top[pending_key_];
    }
    bool put(json v) {
        place(std::move(v));
        return true;
    }

    json root_;
    std::vector<json*> stack_;
    std::string pending_key_;
    std::string error_;
};

inline std::string id_text(const nlohmann::json& j, const std::string& where) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number_integer()) return std::to_string(j.get<long long>());
    throw MalformedDocument(where + ": node ids must be strings or integers");
}

inline Rational rational_value(const nlohmann::json& j, const std::string& where) {
    try {
        if (j.is_number_integer()) return Rational(j.get<long long>());
        if (j.is_string()) return parse_rational(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw MalformedDocument(where + ": " + e.what());
    }
    throw MalformedDocument(where + ": expected a number or a \"p/q\" string");
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw MalformedDocument(where + ": missing key '" + key + "'");
    return obj.at(key);
}

inline std::vector<Rational> leaf_function(const ScenarioTree<Rational>& tree, const nlohmann::json& obj,
                                           const std::string& where) {
    if (!obj.is_object()) throw MalformedDocument(where + ": expected an object keyed by leaf id");
    std::vector<Rational> v(tree.num_leaves());
    std::vector<bool> seen(tree.num_leaves(), false);
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        auto n = tree.find(it.key());
        if (!n || !tree.node(*n).is_leaf())
            throw DanglingChildReference(where + ": '" + it.key() + "' is not a leaf");
        auto l = tree.leaf_index(*n);
        v[l] = rational_value(it.value(), where + "['" + it.key() + "']");
        seen[l] = true;
    }
    for (std::size_t l = 0; l < seen.size(); ++l)
        if (!seen[l]) throw MalformedDocument(where + ": no value for leaf '" + tree.node(tree.leaf_node(l)).id + "'");
    return v;
}

}  // namespace detail

/// Parses a model document. Throws InputError subclasses naming the
/// offending node, generator, or leaf.
inline Model<Rational> load_model(const std::string& text) {
    using nlohmann::json;
    detail::ExactNumberSax sax;
    if (!json::sax_parse(text, &sax)) throw MalformedDocument("invalid JSON at " + sax.error());
    const json& doc = sax.result();
    if (!doc.is_object()) throw MalformedDocument("document must be a JSON object");

    const auto& horizon_j = detail::require(doc, "horizon", "document");
    const auto& dim_j = detail::require(doc, "dimension", "document");
    if (!horizon_j.is_number_integer() || !dim_j.is_number_integer())
        throw MalformedDocument("horizon and dimension must be integers");
    const int horizon = horizon_j.get<int>();
    const long long dim = dim_j.get<long long>();
    if (dim < 1) throw DimensionMismatch("dimension must be at least 1");

    const auto& nodes_j = detail::require(doc, "nodes", "document");
    if (!nodes_j.is_array()) throw MalformedDocument("'nodes' must be an array");

    std::vector<Node<Rational>> nodes;
    std::map<std::string, std::size_t> index;
    std::vector<json> generator_docs;
    for (std::size_t i = 0; i < nodes_j.size(); ++i) {
        const auto& nj = nodes_j[i];
        const std::string where = "nodes[" + std::to_string(i) + "]";
        Node<Rational> n;
        n.id = detail::id_text(detail::require(nj, "id", where), where);
        const std::string here = "node '" + n.id + "'";
        const auto& lvl = detail::require(nj, "level", here);
        if (!lvl.is_number_integer()) throw MalformedDocument(here + ": level must be an integer");
        n.level = lvl.get<int>();
        const auto& price = detail::require(nj, "price", here);
        if (!price.is_array()) throw MalformedDocument(here + ": price must be an array");
        for (std::size_t k = 0; k < price.size(); ++k)
            n.price.push_back(detail::rational_value(price[k], here + " price[" + std::to_string(k) + "]"));
        if (n.price.size() != static_cast<std::size_t>(dim))
            throw DimensionMismatch(here + ": price has " + std::to_string(n.price.size()) + " entries, expected " +
                                    std::to_string(dim));
        if (!index.emplace(n.id, nodes.size()).second) throw MalformedDocument("duplicate node id '" + n.id + "'");
        generator_docs.push_back(nj.contains("generators") ? nj.at("generators") : json::array());
        nodes.push_back(std::move(n));
    }
    // Parents and children in document order.
    for (std::size_t i = 0; i < nodes_j.size(); ++i) {
        const auto& nj = nodes_j[i];
        if (!nj.contains("parent") || nj.at("parent").is_null()) continue;
        const std::string pid = detail::id_text(nj.at("parent"), "node '" + nodes[i].id + "'");
        auto it = index.find(pid);
        if (it == index.end())
            throw DanglingChildReference("node '" + nodes[i].id + "' names unknown parent '" + pid + "'");
        nodes[i].parent = it->second;
        nodes[it->second].children.push_back(i);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        auto& n = nodes[i];
        const auto& gens = generator_docs[i];
        const std::string here = "node '" + n.id + "'";
        if (!gens.is_array()) throw MalformedDocument(here + ": generators must be an array");
        if (n.children.empty() && !gens.empty()) throw MalformedDocument(here + ": leaves must not carry generators");
        if (!n.children.empty() && gens.empty()) throw MalformedDocument(here + ": non-leaf node needs generators");
        for (std::size_t g = 0; g < gens.size(); ++g) {
            const auto& gj = gens[g];
            if (!gj.is_object()) throw MalformedDocument(here + ": generator " + std::to_string(g) + " must be an object");
            Measure<Rational> m;
            m.weights.assign(n.children.size(), Rational(0));
            Rational sum = 0;
            for (auto it = gj.begin(); it != gj.end(); ++it) {
                auto c = index.find(it.key());
                std::size_t pos = n.children.size();
                if (c != index.end())
                    for (std::size_t k = 0; k < n.children.size(); ++k)
                        if (n.children[k] == c->second) pos = k;
                if (pos == n.children.size())
                    throw DanglingChildReference(here + " generator " + std::to_string(g) + " references '" +
                                                 it.key() + "', which is not a child of the node");
                m.weights[pos] = detail::rational_value(it.value(), here + " generator " + std::to_string(g));
                if (m.weights[pos] < 0) throw ProbabilityNotNormalized(n.id, g, "has a negative weight");
                sum += m.weights[pos];
            }
            if (sum != 1) throw ProbabilityNotNormalized(n.id, g, "sums to " + to_fraction_string(sum) + ", not 1");
            n.ambiguity.generators.push_back(std::move(m));
        }
    }

    Model<Rational> model;
    model.tree = ScenarioTree<Rational>(horizon, static_cast<std::size_t>(dim), std::move(nodes));
    const auto& tree = model.tree;

    if (doc.contains("options")) {
        const auto& opts = doc.at("options");
        if (!opts.is_array()) throw MalformedDocument("'options' must be an array");
        std::set<std::string> names;
        for (std::size_t i = 0; i < opts.size(); ++i) {
            const std::string where = "options[" + std::to_string(i) + "]";
            StaticOption<Rational> o;
            const auto& nm = detail::require(opts[i], "name", where);
            if (!nm.is_string()) throw MalformedDocument(where + ": name must be a string");
            o.name = nm.get<std::string>();
            if (!names.insert(o.name).second) throw MalformedDocument("duplicate option name '" + o.name + "'");
            o.quote = detail::rational_value(detail::require(opts[i], "quote", where), "option '" + o.name + "' quote");
            o.payoff = detail::leaf_function(tree, detail::require(opts[i], "payoff", where), "option '" + o.name + "'");
            model.options.push_back(std::move(o));
        }
    }
    if (doc.contains("claims")) {
        const auto& cl = doc.at("claims");
        if (!cl.is_object()) throw MalformedDocument("'claims' must be an object");
        for (auto it = cl.begin(); it != cl.end(); ++it)
            model.claims[it.key()] = Claim<Rational>{detail::leaf_function(tree, it.value(), "claim '" + it.key() + "'")};
    }
    if (doc.contains("measures")) {
        const auto& ms = doc.at("measures");
        if (!ms.is_object()) throw MalformedDocument("'measures' must be an object");
        for (auto it = ms.begin(); it != ms.end(); ++it) {
            PathMeasure<Rational> p{detail::leaf_function(tree, it.value(), "measure '" + it.key() + "'")};
            Rational sum = 0;
            for (const auto& w : p.weights) {
                if (w < 0) throw MalformedDocument("measure '" + it.key() + "' has a negative weight");
                sum += w;
            }
            if (sum != 1) throw MalformedDocument("measure '" + it.key() + "' does not sum to 1");
            model.measures[it.key()] = std::move(p);
        }
    }
    if (doc.contains("processes")) {
        const auto& ps = doc.at("processes");
        if (!ps.is_object()) throw MalformedDocument("'processes' must be an object");
        for (auto it = ps.begin(); it != ps.end(); ++it) {
            const std::string where = "process '" + it.key() + "'";
            if (!it.value().is_object()) throw MalformedDocument(where + ": expected an object keyed by node id");
            std::vector<std::optional<Rational>> v(tree.size());
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
                auto n = tree.find(jt.key());
                if (!n) throw DanglingChildReference(where + ": unknown node '" + jt.key() + "'");
                v[*n] = detail::rational_value(jt.value(), where + "['" + jt.key() + "']");
            }
            model.processes[it.key()] = std::move(v);
        }
    }
    return model;
}

inline Model<Rational> load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedDocument("cannot open model file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_model(ss.str());
}

/// Serializes a model with every rational written as a "p/q" string.
/// Nodes are emitted in arena (breadth-first) order, which preserves child order.
inline nlohmann::json model_to_json(const Model<Rational>& model) {
    using nlohmann::json;
    const auto& tree = model.tree;
    json doc;
    doc["horizon"] = tree.horizon();
    doc["dimension"] = tree.dimension();
    json nodes = json::array();
    for (const auto& n : tree.nodes()) {
        json nj;
        nj["id"] = n.id;
        nj["level"] = n.level;
        nj["parent"] = n.parent ? json(tree.node(*n.parent).id) : json(nullptr);
        json price = json::array();
        for (const auto& p : n.price) price.push_back(to_fraction_string(p));
        nj["price"] = price;
        json gens = json::array();
        for (const auto& g : n.ambiguity.generators) {
            json gj = json::object();
            for (std::size_t k = 0; k < n.children.size(); ++k)
                if (g.weights[k] != 0) gj[tree.node(n.children[k]).id] = to_fraction_string(g.weights[k]);
            gens.push_back(gj);
        }
        nj["generators"] = gens;
        nodes.push_back(nj);
    }
    doc["nodes"] = nodes;
    auto leaf_obj = [&](const std::vector<Rational>& v) {
        json o = json::object();
        for (std::size_t l = 0; l < v.size(); ++l) o[tree.node(tree.leaf_node(l)).id] = to_fraction_string(v[l]);
        return o;
    };
    json opts = json::array();
    for (const auto& o : model.options)
        opts.push_back({{"name", o.name}, {"quote", to_fraction_string(o.quote)}, {"payoff", leaf_obj(o.payoff)}});
    doc["options"] = opts;
    json claims = json::object();
    for (const auto& [k, c] : model.claims) claims[k] = leaf_obj(c.values);
    doc["claims"] = claims;
    if (!model.measures.empty()) {
        json ms = json::object();
        for (const auto& [k, p] : model.measures) ms[k] = leaf_obj(p.weights);
        doc["measures"] = ms;
    }
    if (!model.processes.empty()) {
        json ps = json::object();
        for (const auto& [k, p] : model.processes) {
            json pj = json::object();
            for (std::size_t n = 0; n < p.size(); ++n)
                if (p[n]) pj[tree.node(n).id] = to_fraction_string(*p[n]);
            ps[k] = pj;
        }
        doc["processes"] = ps;
    }
    return doc;
}

inline std::string save_model(const Model<Rational>& model) { return model_to_json(model).dump(2) + "\n"; }

}  // namespace robusthedge
