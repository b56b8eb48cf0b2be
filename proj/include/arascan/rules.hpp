#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arascan/bytepattern.hpp"
#include "arascan/callgraph.hpp"
#include "arascan/elf.hpp"
#include "arascan/techniques.hpp"

namespace arascan {

enum class AtomKind {
    INVOKE,
    STRING,
    FIELD,
    CLASS_REF,
    MANIFEST,
    ELF_SYMBOL,
    ELF_STRING,
    BYTE_PATTERN,
    SIGN_SCHEME,
    DYN_CALL,
};

inline bool is_code_kind(AtomKind k)
{
    return k == AtomKind::INVOKE || k == AtomKind::STRING || k == AtomKind::FIELD ||
           k == AtomKind::CLASS_REF;
}

enum class MatchMode { EXACT, SUBSTRING, REGEX };
enum class Confidence { HIGH, MEDIUM, LOW };

inline std::string to_string(AtomKind k)
{
    static const char* names[] = {"INVOKE",     "STRING",       "FIELD",
                                  "CLASS_REF",  "MANIFEST",     "ELF_SYMBOL",
                                  "ELF_STRING", "BYTE_PATTERN", "SIGN_SCHEME",
                                  "DYN_CALL"};
    return names[static_cast<int>(k)];
}

inline std::string to_string(MatchMode m)
{
    static const char* names[] = {"EXACT", "SUBSTRING", "REGEX"};
    return names[static_cast<int>(m)];
}

inline std::string to_string(Confidence c)
{
    static const char* names[] = {"HIGH", "MEDIUM", "LOW"};
    return names[static_cast<int>(c)];
}

struct ArgPredicate {
    int position = 0;
    enum class Relation { Equals, Contains } relation = Relation::Equals;
    std::string literal;
};

struct Atom {
    std::string id;
    AtomKind kind = AtomKind::STRING;
    MatchMode match_mode = MatchMode::EXACT;
    bool case_insensitive = false;
    std::string value;  // text kinds, SIGN_SCHEME scheme name, BYTE_PATTERN text

    // MANIFEST
    std::string manifest_path;
    std::string attr;
    // DYN_CALL
    std::string api_name;
    std::vector<ArgPredicate> arg_predicates;
    // BYTE_PATTERN
    std::optional<ElfArch> arch;
    std::optional<BytePattern> pattern;

    std::optional<std::regex> compiled_regex;
    std::string compile_error;  // non-empty when value/pattern failed to compile
};

/// AND/OR tree over atom ids; leaves are ids. No negation, so satisfaction is
/// monotone in the matched-atom set.
struct Expr {
    enum class Op { Leaf, And, Or };
    Op op = Op::Leaf;
    std::string atom_id;
    std::vector<Expr> args;

    static Expr leaf(std::string id)
    {
        Expr e;
        e.op = Op::Leaf;
        e.atom_id = std::move(id);
        return e;
    }

    void collect_leaves(std::set<std::string>& out) const
    {
        if (op == Op::Leaf) {
            out.insert(atom_id);
            return;
        }
        for (const auto& a : args) {
            a.collect_leaves(out);
        }
    }

    bool eval(const std::set<std::string>& true_atoms) const
    {
        switch (op) {
        case Op::Leaf:
            return true_atoms.count(atom_id) != 0;
        case Op::And:
            return std::all_of(args.begin(), args.end(),
                               [&](const Expr& a) { return a.eval(true_atoms); });
        default:
            return std::any_of(args.begin(), args.end(),
                               [&](const Expr& a) { return a.eval(true_atoms); });
        }
    }

    /// Minimal satisfying leaf sets (monotone DNF), deduplicated, supersets
    /// pruned, in canonical (lexicographic) order.
    std::vector<std::vector<std::string>> minimal_terms() const
    {
        std::vector<std::set<std::string>> terms = terms_of(*this);
        std::vector<std::set<std::string>> minimal;
        for (const auto& t : terms) {
            bool dominated = false;
            for (const auto& u : terms) {
                if (u != t && std::includes(t.begin(), t.end(), u.begin(), u.end())) {
                    dominated = true;
                    break;
                }
            }
            if (!dominated && std::find(minimal.begin(), minimal.end(), t) == minimal.end()) {
                minimal.push_back(t);
            }
        }
        std::vector<std::vector<std::string>> out;
        for (const auto& t : minimal) {
            out.emplace_back(t.begin(), t.end());
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    static std::vector<std::set<std::string>> terms_of(const Expr& e)
    {
        if (e.op == Op::Leaf) {
            return {{e.atom_id}};
        }
        if (e.op == Op::Or) {
            std::vector<std::set<std::string>> out;
            for (const auto& a : e.args) {
                for (auto& t : terms_of(a)) {
                    out.push_back(std::move(t));
                }
            }
            return out;
        }
        std::vector<std::set<std::string>> acc = {{}};
        for (const auto& a : e.args) {
            std::vector<std::set<std::string>> next;
            for (const auto& left : acc) {
                for (const auto& right : terms_of(a)) {
                    std::set<std::string> merged = left;
                    merged.insert(right.begin(), right.end());
                    next.push_back(std::move(merged));
                }
            }
            acc = std::move(next);
        }
        return acc;
    }
};

struct Fingerprint {
    std::string id;
    Technique technique = Technique::UTC;
    Expr expr;
    Scope scope = Scope::global();
    Confidence confidence = Confidence::MEDIUM;
};

struct RulePack {
    std::string version;
    std::vector<Atom> atoms;
    std::vector<Fingerprint> fingerprints;

    const Atom* find_atom(const std::string& id) const
    {
        for (const auto& a : atoms) {
            if (a.id == id) {
                return &a;
            }
        }
        return nullptr;
    }

    std::set<Technique> covered_techniques() const
    {
        std::set<Technique> out;
        for (const auto& fp : fingerprints) {
            out.insert(fp.technique);
        }
        return out;
    }
};

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string path;  // document location, e.g. "fingerprints[3].expr"
    std::string message;
};

struct RulePackError : std::runtime_error {
    enum class Kind { Schema, Reference, Scope };
    RulePackError(Kind kind, const std::string& path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message),
          kind(kind),
          path(path) {}
    Kind kind;
    std::string path;
};

namespace rules_detail {

using nlohmann::json;

inline std::string require_string(const json& j, const std::string& key,
                                  const std::string& path)
{
    if (!j.contains(key) || !j[key].is_string()) {
        throw RulePackError(RulePackError::Kind::Schema, path,
                            "missing or non-string field '" + key + "'");
    }
    return j[key].get<std::string>();
}

inline std::optional<AtomKind> parse_kind(const std::string& s)
{
    static const std::map<std::string, AtomKind> kinds = {
        {"INVOKE", AtomKind::INVOKE},           {"STRING", AtomKind::STRING},
        {"FIELD", AtomKind::FIELD},             {"CLASS_REF", AtomKind::CLASS_REF},
        {"MANIFEST", AtomKind::MANIFEST},       {"ELF_SYMBOL", AtomKind::ELF_SYMBOL},
        {"ELF_STRING", AtomKind::ELF_STRING},   {"BYTE_PATTERN", AtomKind::BYTE_PATTERN},
        {"SIGN_SCHEME", AtomKind::SIGN_SCHEME}, {"DYN_CALL", AtomKind::DYN_CALL},
    };
    auto it = kinds.find(s);
    return it == kinds.end() ? std::nullopt : std::optional<AtomKind>(it->second);
}

inline std::optional<ElfArch> parse_arch(const std::string& s)
{
    static const std::map<std::string, ElfArch> archs = {
        {"ARM32", ElfArch::ARM32},
        {"ARM64", ElfArch::ARM64},
        {"X86", ElfArch::X86},
        {"X86_64", ElfArch::X86_64},
        {"OTHER", ElfArch::OTHER},
    };
    auto it = archs.find(s);
    return it == archs.end() ? std::nullopt : std::optional<ElfArch>(it->second);
}

inline Atom parse_atom(const json& j, const std::string& path)
{
    Atom a;
    a.id = require_string(j, "id", path);
    auto kind = parse_kind(require_string(j, "kind", path));
    if (!kind) {
        throw RulePackError(RulePackError::Kind::Schema, path + ".kind",
                            "unknown atom kind");
    }
    a.kind = *kind;
    if (j.contains("match_mode")) {
        std::string m = require_string(j, "match_mode", path);
        if (m == "EXACT") a.match_mode = MatchMode::EXACT;
        else if (m == "SUBSTRING") a.match_mode = MatchMode::SUBSTRING;
        else if (m == "REGEX") a.match_mode = MatchMode::REGEX;
        else throw RulePackError(RulePackError::Kind::Schema, path + ".match_mode",
                                 "unknown match mode");
    }
    if (j.contains("case_insensitive")) {
        if (!j["case_insensitive"].is_boolean()) {
            throw RulePackError(RulePackError::Kind::Schema, path + ".case_insensitive",
                                "must be boolean");
        }
        a.case_insensitive = j["case_insensitive"].get<bool>();
    }
    if (j.contains("value")) {
        a.value = require_string(j, "value", path);
    }
    if (j.contains("manifest_path")) {
        a.manifest_path = require_string(j, "manifest_path", path);
    }
    if (j.contains("attr")) {
        a.attr = require_string(j, "attr", path);
    }
    if (j.contains("api_name")) {
        a.api_name = require_string(j, "api_name", path);
    }
    if (j.contains("arch")) {
        auto arch = parse_arch(require_string(j, "arch", path));
        if (!arch) {
            throw RulePackError(RulePackError::Kind::Schema, path + ".arch",
                                "unknown architecture");
        }
        a.arch = *arch;
    }
    if (j.contains("arg_predicates")) {
        if (!j["arg_predicates"].is_array()) {
            throw RulePackError(RulePackError::Kind::Schema, path + ".arg_predicates",
                                "must be an array");
        }
        for (const auto& pj : j["arg_predicates"]) {
            ArgPredicate p;
            if (!pj.contains("position") || !pj["position"].is_number_integer()) {
                throw RulePackError(RulePackError::Kind::Schema,
                                    path + ".arg_predicates", "missing position");
            }
            p.position = pj["position"].get<int>();
            std::string rel = require_string(pj, "relation", path + ".arg_predicates");
            if (rel == "equals") p.relation = ArgPredicate::Relation::Equals;
            else if (rel == "contains") p.relation = ArgPredicate::Relation::Contains;
            else throw RulePackError(RulePackError::Kind::Schema,
                                     path + ".arg_predicates", "unknown relation");
            p.literal = require_string(pj, "literal", path + ".arg_predicates");
            a.arg_predicates.push_back(std::move(p));
        }
    }

    if (a.kind == AtomKind::BYTE_PATTERN) {
        try {
            a.pattern = BytePattern::parse(a.value);
        } catch (const std::invalid_argument& e) {
            a.compile_error = e.what();
        }
    }
    if (a.match_mode == MatchMode::REGEX) {
        try {
            auto flags = std::regex::ECMAScript;
            if (a.case_insensitive) {
                flags |= std::regex::icase;
            }
            a.compiled_regex = std::regex(a.value, flags);
        } catch (const std::regex_error& e) {
            a.compile_error = e.what();
        }
    }
    return a;
}

inline Expr parse_expr(const json& j, const std::string& path)
{
    if (j.is_string()) {
        return Expr::leaf(j.get<std::string>());
    }
    if (!j.is_object()) {
        throw RulePackError(RulePackError::Kind::Schema, path,
                            "expr node must be an atom id or {op, args}");
    }
    std::string op = require_string(j, "op", path);
    Expr e;
    if (op == "AND") e.op = Expr::Op::And;
    else if (op == "OR") e.op = Expr::Op::Or;
    else throw RulePackError(RulePackError::Kind::Schema, path + ".op",
                             "operator must be AND or OR");
    if (!j.contains("args") || !j["args"].is_array() || j["args"].empty()) {
        throw RulePackError(RulePackError::Kind::Schema, path + ".args",
                            "missing or empty args");
    }
    int i = 0;
    for (const auto& aj : j["args"]) {
        e.args.push_back(parse_expr(aj, path + ".args[" + std::to_string(i++) + "]"));
    }
    return e;
}

inline Fingerprint parse_fingerprint(const json& j, const std::string& path)
{
    Fingerprint fp;
    fp.id = require_string(j, "id", path);
    auto tech = parse_technique(require_string(j, "technique", path));
    if (!tech) {
        throw RulePackError(RulePackError::Kind::Schema, path + ".technique",
                            "unknown technique id");
    }
    fp.technique = *tech;
    if (!j.contains("expr")) {
        throw RulePackError(RulePackError::Kind::Schema, path, "missing expr");
    }
    fp.expr = parse_expr(j["expr"], path + ".expr");
    auto scope = parse_scope(require_string(j, "scope", path));
    if (!scope) {
        throw RulePackError(RulePackError::Kind::Schema, path + ".scope",
                            "scope must be METHOD, CLASS, CG(d) or GLOBAL");
    }
    fp.scope = *scope;
    std::string conf = require_string(j, "confidence", path);
    if (conf == "HIGH") fp.confidence = Confidence::HIGH;
    else if (conf == "MEDIUM") fp.confidence = Confidence::MEDIUM;
    else if (conf == "LOW") fp.confidence = Confidence::LOW;
    else throw RulePackError(RulePackError::Kind::Schema, path + ".confidence",
                             "confidence must be HIGH, MEDIUM or LOW");
    return fp;
}

}  // namespace rules_detail

/// Structural parse only; pair with validate_rulepack for the full contract.
inline RulePack parse_rulepack(ByteView file_bytes)
{
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(file_bytes.begin(), file_bytes.end());
    } catch (const json::parse_error& e) {
        throw RulePackError(RulePackError::Kind::Schema, "", e.what());
    }
    if (!doc.is_object()) {
        throw RulePackError(RulePackError::Kind::Schema, "", "document must be an object");
    }
    RulePack pack;
    pack.version = rules_detail::require_string(doc, "version", "");
    for (const char* key : {"atoms", "fingerprints"}) {
        if (!doc.contains(key) || !doc[key].is_array()) {
            throw RulePackError(RulePackError::Kind::Schema, key,
                                "missing or non-array field");
        }
    }
    int i = 0;
    for (const auto& aj : doc["atoms"]) {
        pack.atoms.push_back(
            rules_detail::parse_atom(aj, "atoms[" + std::to_string(i++) + "]"));
    }
    i = 0;
    for (const auto& fj : doc["fingerprints"]) {
        pack.fingerprints.push_back(rules_detail::parse_fingerprint(
            fj, "fingerprints[" + std::to_string(i++) + "]"));
    }
    return pack;
}

/// Invariant audit. Errors make the pack unusable; warnings flag weak spots
/// (LOW-only techniques, uncovered techniques, empty packs).
inline std::vector<Diagnostic> validate_rulepack(const RulePack& pack)
{
    std::vector<Diagnostic> out;
    auto error = [&](const std::string& path, const std::string& msg) {
        out.push_back(Diagnostic{Diagnostic::Severity::Error, path, msg});
    };
    auto warning = [&](const std::string& path, const std::string& msg) {
        out.push_back(Diagnostic{Diagnostic::Severity::Warning, path, msg});
    };

    std::map<std::string, const Atom*> by_id;
    for (size_t i = 0; i < pack.atoms.size(); ++i) {
        const Atom& a = pack.atoms[i];
        std::string path = "atoms[" + std::to_string(i) + "]";
        if (a.id.empty()) {
            error(path, "empty atom id");
        }
        if (!by_id.emplace(a.id, &a).second) {
            error(path, "duplicate atom id '" + a.id + "'");
        }
        if (!a.compile_error.empty()) {
            error(path + ".value", a.compile_error);
        }
        bool needs_value = a.kind != AtomKind::DYN_CALL;
        if (needs_value && a.value.empty()) {
            error(path + ".value", "missing value");
        }
        if (a.kind == AtomKind::MANIFEST && (a.manifest_path.empty() || a.attr.empty())) {
            error(path, "MANIFEST atoms need manifest_path and attr");
        }
        if (a.kind != AtomKind::MANIFEST && (!a.manifest_path.empty() || !a.attr.empty())) {
            error(path, "manifest_path/attr only apply to MANIFEST atoms");
        }
        if (a.kind == AtomKind::DYN_CALL && a.api_name.empty()) {
            error(path, "DYN_CALL atoms need api_name");
        }
        if (a.kind != AtomKind::DYN_CALL &&
            (!a.api_name.empty() || !a.arg_predicates.empty())) {
            error(path, "api_name/arg_predicates only apply to DYN_CALL atoms");
        }
        if (a.kind == AtomKind::BYTE_PATTERN && !a.arch) {
            error(path, "BYTE_PATTERN atoms need arch");
        }
        if (a.kind != AtomKind::BYTE_PATTERN && a.arch) {
            error(path, "arch only applies to BYTE_PATTERN atoms");
        }
        if (a.kind == AtomKind::SIGN_SCHEME && a.value != "V1" && a.value != "V2PLUS") {
            error(path + ".value", "SIGN_SCHEME value must be V1 or V2PLUS");
        }
    }

    std::set<std::string> fp_ids;
    for (size_t i = 0; i < pack.fingerprints.size(); ++i) {
        const Fingerprint& fp = pack.fingerprints[i];
        std::string path = "fingerprints[" + std::to_string(i) + "]";
        if (!fp_ids.insert(fp.id).second) {
            error(path, "duplicate fingerprint id '" + fp.id + "'");
        }
        std::set<std::string> leaves;
        fp.expr.collect_leaves(leaves);
        for (const auto& leaf : leaves) {
            auto it = by_id.find(leaf);
            if (it == by_id.end()) {
                error(path + ".expr", "reference to unknown atom '" + leaf + "'");
            } else if (fp.scope.kind != Scope::Kind::Global &&
                       !is_code_kind(it->second->kind)) {
                error(path + ".scope",
                      "non-code atom '" + leaf + "' under " + to_string(fp.scope) +
                          " scope; only INVOKE/STRING/FIELD/CLASS_REF atoms carry "
                          "code locations");
            }
        }
    }

    if (pack.fingerprints.empty()) {
        warning("fingerprints", "no fingerprints");
    }

    std::map<Technique, bool> has_non_low;
    std::set<Technique> covered;
    for (const auto& fp : pack.fingerprints) {
        covered.insert(fp.technique);
        if (fp.confidence != Confidence::LOW) {
            has_non_low[fp.technique] = true;
        }
    }
    for (Technique t : all_techniques) {
        if (covered.count(t) && !has_non_low[t]) {
            warning("fingerprints",
                    "technique " + to_string(t) + " has only LOW-confidence fingerprints");
        }
    }
    if (!pack.fingerprints.empty()) {
        std::vector<std::string> missing;
        for (Technique t : all_techniques) {
            if (!covered.count(t)) {
                missing.push_back(to_string(t));
            }
        }
        if (!missing.empty()) {
            std::string list;
            for (const auto& m : missing) {
                list += (list.empty() ? "" : ", ") + m;
            }
            warning("fingerprints", "techniques with no fingerprint: " + list);
        }
    }
    return out;
}

/// Parse plus full validation; the first error-severity diagnostic is thrown
/// with its document location.
inline RulePack load_rulepack(ByteView file_bytes)
{
    RulePack pack = parse_rulepack(file_bytes);
    for (const auto& d : validate_rulepack(pack)) {
        if (d.severity != Diagnostic::Severity::Error) {
            continue;
        }
        auto kind = RulePackError::Kind::Schema;
        if (d.message.find("unknown atom '") != std::string::npos) {
            kind = RulePackError::Kind::Reference;
        } else if (d.message.find("non-code atom") != std::string::npos) {
            kind = RulePackError::Kind::Scope;
        }
        throw RulePackError(kind, d.path, d.message);
    }
    return pack;
}

inline nlohmann::ordered_json expr_to_json(const Expr& e)
{
    if (e.op == Expr::Op::Leaf) {
        return e.atom_id;
    }
    nlohmann::ordered_json j;
    j["op"] = e.op == Expr::Op::And ? "AND" : "OR";
    j["args"] = nlohmann::ordered_json::array();
    for (const auto& a : e.args) {
        j["args"].push_back(expr_to_json(a));
    }
    return j;
}

inline std::string serialize_rulepack(const RulePack& pack)
{
    nlohmann::ordered_json doc;
    doc["version"] = pack.version;
    doc["atoms"] = nlohmann::ordered_json::array();
    for (const auto& a : pack.atoms) {
        nlohmann::ordered_json j;
        j["id"] = a.id;
        j["kind"] = to_string(a.kind);
        if (a.kind != AtomKind::DYN_CALL) {
            j["value"] = a.value;
        }
        if (is_code_kind(a.kind) || a.kind == AtomKind::MANIFEST ||
            a.kind == AtomKind::ELF_SYMBOL || a.kind == AtomKind::ELF_STRING) {
            j["match_mode"] = to_string(a.match_mode);
            if (a.case_insensitive) {
                j["case_insensitive"] = true;
            }
        }
        if (a.kind == AtomKind::MANIFEST) {
            j["manifest_path"] = a.manifest_path;
            j["attr"] = a.attr;
        }
        if (a.kind == AtomKind::DYN_CALL) {
            j["api_name"] = a.api_name;
            j["arg_predicates"] = nlohmann::ordered_json::array();
            for (const auto& p : a.arg_predicates) {
                j["arg_predicates"].push_back(
                    {{"position", p.position},
                     {"relation",
                      p.relation == ArgPredicate::Relation::Equals ? "equals" : "contains"},
                     {"literal", p.literal}});
            }
        }
        if (a.kind == AtomKind::BYTE_PATTERN && a.arch) {
            j["arch"] = to_string(*a.arch);
        }
        doc["atoms"].push_back(std::move(j));
    }
    doc["fingerprints"] = nlohmann::ordered_json::array();
    for (const auto& fp : pack.fingerprints) {
        nlohmann::ordered_json j;
        j["id"] = fp.id;
        j["technique"] = to_string(fp.technique);
        j["expr"] = expr_to_json(fp.expr);
        j["scope"] = to_string(fp.scope);
        j["confidence"] = to_string(fp.confidence);
        doc["fingerprints"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

}  // namespace arascan
