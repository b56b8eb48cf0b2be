#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "arascan/apk.hpp"
#include "arascan/axml.hpp"
#include "arascan/callgraph.hpp"
#include "arascan/dex.hpp"
#include "arascan/elf.hpp"
#include "arascan/rules.hpp"
#include "arascan/trace.hpp"

namespace arascan {

/// Where an atom was observed. Pool sites cover string-pool hits that have no
/// code location and therefore only count at GLOBAL scope.
struct Site {
    enum class Kind { Code, Manifest, Native, Signing, Trace, Pool };
    Kind kind = Kind::Code;
    MethodRef method;            // Code
    uint32_t offset = 0;         // Code (code units)
    std::string element_path;    // Manifest
    std::string lib_path;        // Native
    size_t file_offset = 0;      // Native
    std::string note;            // Native detail (symbol/string/pattern)
    uint64_t seq = 0;            // Trace
    std::string pool_value;      // Pool

    static Site code(MethodRef m, uint32_t off)
    {
        Site s;
        s.kind = Kind::Code;
        s.method = std::move(m);
        s.offset = off;
        return s;
    }
    static Site manifest(std::string path)
    {
        Site s;
        s.kind = Kind::Manifest;
        s.element_path = std::move(path);
        return s;
    }
    static Site native(std::string lib, size_t off, std::string note)
    {
        Site s;
        s.kind = Kind::Native;
        s.lib_path = std::move(lib);
        s.file_offset = off;
        s.note = std::move(note);
        return s;
    }
    static Site signing()
    {
        Site s;
        s.kind = Kind::Signing;
        return s;
    }
    static Site trace(uint64_t seq)
    {
        Site s;
        s.kind = Kind::Trace;
        s.seq = seq;
        return s;
    }
    static Site pool(std::string value)
    {
        Site s;
        s.kind = Kind::Pool;
        s.pool_value = std::move(value);
        return s;
    }

    auto sort_key() const
    {
        return std::tuple(static_cast<int>(kind), method.canonical(), offset,
                          element_path, lib_path, file_offset, note, seq, pool_value);
    }
};

struct AtomMatch {
    std::string atom_id;
    std::vector<Site> sites;  // non-empty
};

struct FactBase {
    std::string source_id;
    ProgramFacts program;
    CallGraph cg;
    ManifestFacts manifest;
    std::vector<NativeFacts> native;
    SigningFacts signing;
    std::vector<TraceEvent> trace;
    Warnings warnings;
};

struct Detection {
    std::string fingerprint_id;
    Confidence confidence = Confidence::MEDIUM;
    ScopeWitness witness;
    std::vector<AtomMatch> evidence;  // every satisfied leaf, atom-id order
};

struct DetectionSet {
    std::map<Technique, std::vector<Detection>> by_technique;

    bool detected(Technique t) const
    {
        auto it = by_technique.find(t);
        return it != by_technique.end() && !it->second.empty();
    }

    std::set<Technique> detected_techniques() const
    {
        std::set<Technique> out;
        for (const auto& [t, dets] : by_technique) {
            if (!dets.empty()) {
                out.insert(t);
            }
        }
        return out;
    }
};

/// Pulls every extractor's output into one immutable evidence base.
/// Per-component failures degrade to warnings; only an APK with nothing to
/// scan at all (no dex, no native, no manifest) is a hard error.
inline FactBase extract_facts(const ApkArchive& archive,
                              std::vector<TraceEvent> trace = {})
{
    FactBase fb;
    fb.source_id = archive.source_id;
    fb.warnings = archive.warnings;

    size_t parsed_dex = 0;
    std::vector<DexFile> dexes;
    for (const auto& entry : list_dex(archive)) {
        if (entry.decode_failed) {
            continue;  // already warned by open_apk
        }
        try {
            dexes.push_back(parse_dex(entry.data, entry.path));
            ++parsed_dex;
        } catch (const MalformedDex& e) {
            warn(fb.warnings, "dex.malformed", entry.path + ": " + e.what());
        }
    }
    fb.program = merge_multidex(dexes);
    fb.warnings.insert(fb.warnings.end(), fb.program.warnings.begin(),
                       fb.program.warnings.end());
    fb.cg = build_cg(fb.program);

    bool have_manifest = false;
    if (const ArchiveEntry* m = archive.find("AndroidManifest.xml");
        m != nullptr && !m->decode_failed) {
        try {
            fb.manifest = decode_manifest(m->data);
            fb.warnings.insert(fb.warnings.end(), fb.manifest.warnings.begin(),
                               fb.manifest.warnings.end());
            have_manifest = true;
        } catch (const MalformedManifest& e) {
            warn(fb.warnings, "axml.malformed", e.what());
        }
    }

    for (const auto& entry : list_native_libs(archive)) {
        if (entry.decode_failed) {
            continue;
        }
        try {
            NativeFacts nf = parse_elf(entry.data, entry.path);
            fb.warnings.insert(fb.warnings.end(), nf.warnings.begin(), nf.warnings.end());
            nf.warnings.clear();
            fb.native.push_back(std::move(nf));
        } catch (const MalformedElf& e) {
            warn(fb.warnings, "elf.malformed", e.what());
        }
    }

    fb.signing = archive.signing;
    fb.trace = std::move(trace);

    if (parsed_dex == 0 && fb.native.empty() && !have_manifest) {
        throw EmptyFactBase(archive.source_id +
                            ": no dex, no native libraries, no manifest");
    }
    return fb;
}

namespace matcher_detail {

inline bool match_text(const Atom& atom, const std::string& candidate)
{
    if (atom.match_mode == MatchMode::REGEX) {
        if (!atom.compiled_regex) {
            return false;
        }
        return std::regex_search(candidate, *atom.compiled_regex);
    }
    const std::string& needle =
        atom.case_insensitive ? to_lower(atom.value) : atom.value;
    std::string hay = atom.case_insensitive ? to_lower(candidate) : candidate;
    if (atom.match_mode == MatchMode::EXACT) {
        return hay == needle;
    }
    return hay.find(needle) != std::string::npos;
}

/// Canonical integer normalization: decimal, no leading zeros. Non-integers
/// compare as raw text.
inline bool values_equal(const std::string& a, const std::string& b)
{
    auto as_int = [](const std::string& s) -> std::optional<long long> {
        if (s.empty()) {
            return std::nullopt;
        }
        size_t i = s[0] == '-' || s[0] == '+' ? 1 : 0;
        if (i == s.size()) {
            return std::nullopt;
        }
        for (size_t k = i; k < s.size(); ++k) {
            if (!isdigit(static_cast<unsigned char>(s[k]))) {
                return std::nullopt;
            }
        }
        try {
            return std::stoll(s);
        } catch (...) {
            return std::nullopt;
        }
    };
    auto ia = as_int(a);
    auto ib = as_int(b);
    if (ia && ib) {
        return *ia == *ib;
    }
    return a == b;
}

inline void sort_sites(std::vector<Site>& sites)
{
    std::sort(sites.begin(), sites.end(),
              [](const Site& a, const Site& b) { return a.sort_key() < b.sort_key(); });
}

}  // namespace matcher_detail

/// Kind-dispatched atom matching. `global_sites` widens STRING/CLASS_REF
/// matching to the dex string pool; scoped fingerprints must not see pool
/// hits because those have no code location.
inline std::optional<AtomMatch> match_atom(const FactBase& fb, const Atom& atom,
                                           bool global_sites = true)
{
    using matcher_detail::match_text;
    std::vector<Site> sites;

    switch (atom.kind) {
    case AtomKind::INVOKE:
        for (const auto& body : fb.program.bodies) {
            for (const auto& [callee, off] : body.invokes) {
                if (match_text(atom, callee.canonical())) {
                    sites.push_back(Site::code(body.owner, off));
                }
            }
        }
        break;
    case AtomKind::STRING:
        for (const auto& body : fb.program.bodies) {
            for (const auto& [value, off] : body.const_strings) {
                if (match_text(atom, value)) {
                    sites.push_back(Site::code(body.owner, off));
                }
            }
        }
        if (global_sites) {
            for (const auto& value : fb.program.global_strings) {
                if (match_text(atom, value)) {
                    sites.push_back(Site::pool(value));
                }
            }
        }
        break;
    case AtomKind::FIELD:
        for (const auto& body : fb.program.bodies) {
            for (const auto& [field, off] : body.field_refs) {
                if (match_text(atom, field.canonical())) {
                    sites.push_back(Site::code(body.owner, off));
                }
            }
        }
        break;
    case AtomKind::CLASS_REF:
        for (const auto& body : fb.program.bodies) {
            for (const auto& [callee, off] : body.invokes) {
                if (match_text(atom, callee.class_desc)) {
                    sites.push_back(Site::code(body.owner, off));
                }
            }
            for (const auto& [field, off] : body.field_refs) {
                if (match_text(atom, field.class_desc)) {
                    sites.push_back(Site::code(body.owner, off));
                }
            }
        }
        if (global_sites) {
            for (const auto& value : fb.program.global_strings) {
                if (value.size() > 1 && value[0] == 'L' && match_text(atom, value)) {
                    sites.push_back(Site::pool(value));
                }
            }
        }
        break;
    case AtomKind::MANIFEST:
        for (const auto& a : fb.manifest.attributes) {
            if (a.element_path == atom.manifest_path && a.attr_name == atom.attr &&
                match_text(atom, a.value)) {
                sites.push_back(Site::manifest(a.element_path));
            }
        }
        break;
    case AtomKind::ELF_SYMBOL:
        for (const auto& nf : fb.native) {
            for (const auto& sym : nf.symbols) {
                if (match_text(atom, sym.name)) {
                    sites.push_back(Site::native(
                        nf.lib_path, 0,
                        "symbol " + sym.name +
                            (sym.binding == SymBinding::Imported ? " (imported)"
                                                                 : " (defined)")));
                }
            }
        }
        break;
    case AtomKind::ELF_STRING:
        for (const auto& nf : fb.native) {
            for (const auto& str : nf.strings) {
                if (match_text(atom, str.value)) {
                    sites.push_back(Site::native(nf.lib_path, str.file_offset, "string"));
                }
            }
        }
        break;
    case AtomKind::BYTE_PATTERN:
        if (atom.pattern) {
            for (const auto& nf : fb.native) {
                if (atom.arch && nf.arch != *atom.arch) {
                    continue;  // arch-tagged patterns never scan foreign code
                }
                auto it = nf.scanned_patterns.find(atom.pattern->text);
                if (it == nf.scanned_patterns.end()) {
                    it = nf.scanned_patterns
                             .emplace(atom.pattern->text, scan_bytes(nf.raw, *atom.pattern))
                             .first;
                }
                for (size_t off : it->second) {
                    sites.push_back(Site::native(nf.lib_path, off, "pattern"));
                }
            }
        }
        break;
    case AtomKind::SIGN_SCHEME: {
        SigningScheme scheme =
            atom.value == "V1" ? SigningScheme::V1 : SigningScheme::V2PLUS;
        if (fb.signing.schemes.count(scheme)) {
            sites.push_back(Site::signing());
        }
        break;
    }
    case AtomKind::DYN_CALL:
        for (const auto& ev : fb.trace) {
            if (ev.api != atom.api_name) {
                continue;
            }
            bool ok = true;
            for (const auto& p : atom.arg_predicates) {
                if (p.position < 0 || static_cast<size_t>(p.position) >= ev.args.size()) {
                    ok = false;
                    break;
                }
                const std::string& arg = ev.args[p.position];
                if (p.relation == ArgPredicate::Relation::Equals
                        ? !matcher_detail::values_equal(arg, p.literal)
                        : arg.find(p.literal) == std::string::npos) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                sites.push_back(Site::trace(ev.seq));
            }
        }
        break;
    }

    if (sites.empty()) {
        return std::nullopt;
    }
    matcher_detail::sort_sites(sites);
    return AtomMatch{atom.id, std::move(sites)};
}

/// Satisfied when the boolean tree holds over matched leaves AND some minimal
/// satisfying leaf-set has a co-occurrence witness at the scope. Evidence
/// lists every satisfied leaf.
inline std::optional<std::pair<ScopeWitness, std::vector<AtomMatch>>> eval_fingerprint(
    const Fingerprint& fp,
    const std::map<std::string, std::optional<AtomMatch>>& atom_matches,
    const CallGraph& cg, std::optional<Scope> scope_override = std::nullopt)
{
    Scope scope = scope_override.value_or(fp.scope);

    std::set<std::string> satisfied;
    for (const auto& [id, m] : atom_matches) {
        if (m) {
            satisfied.insert(id);
        }
    }
    if (!fp.expr.eval(satisfied)) {
        return std::nullopt;
    }

    std::vector<AtomMatch> evidence;
    for (const auto& id : satisfied) {
        evidence.push_back(*atom_matches.at(id));
    }

    if (scope.kind == Scope::Kind::Global) {
        return std::make_pair(ScopeWitness{scope, {}}, std::move(evidence));
    }

    for (const auto& term : fp.expr.minimal_terms()) {
        bool term_satisfied = true;
        std::vector<std::pair<std::string, std::vector<CodeSite>>> atom_sites;
        for (const auto& id : term) {
            if (!satisfied.count(id)) {
                term_satisfied = false;
                break;
            }
            std::vector<CodeSite> code_sites;
            for (const auto& site : atom_matches.at(id)->sites) {
                if (site.kind == Site::Kind::Code) {
                    code_sites.push_back(CodeSite{site.method, site.offset});
                }
            }
            if (code_sites.empty()) {
                term_satisfied = false;
                break;
            }
            atom_sites.emplace_back(id, std::move(code_sites));
        }
        if (!term_satisfied) {
            continue;
        }
        if (auto witness = within_scope(cg, atom_sites, scope)) {
            return std::make_pair(std::move(*witness), std::move(evidence));
        }
    }
    return std::nullopt;
}

struct ScanOptions {
    std::optional<Scope> force_scope;  // replaces every fingerprint's scope
    std::optional<int> cg_distance;    // overrides d of CG(d) scopes
};

/// Evaluates the whole pack against one fact base. Atom matches are memoized
/// per (atom, pool-visibility) pair and shared across fingerprints.
inline DetectionSet scan(const FactBase& fb, const RulePack& pack,
                         const ScanOptions& opts = {})
{
    DetectionSet ds;
    for (Technique t : all_techniques) {
        ds.by_technique[t];  // every technique present, empty = not detected
    }

    auto effective_scope = [&](const Fingerprint& fp) {
        Scope s = opts.force_scope.value_or(fp.scope);
        if (s.kind == Scope::Kind::Cg && opts.cg_distance) {
            s.distance = *opts.cg_distance;
        }
        return s;
    };

    std::map<std::pair<std::string, bool>, std::optional<AtomMatch>> memo;
    auto match = [&](const std::string& atom_id,
                     bool global_sites) -> const std::optional<AtomMatch>& {
        auto key = std::make_pair(atom_id, global_sites);
        auto it = memo.find(key);
        if (it == memo.end()) {
            const Atom* atom = pack.find_atom(atom_id);
            it = memo.emplace(key, atom ? match_atom(fb, *atom, global_sites)
                                        : std::nullopt)
                     .first;
        }
        return it->second;
    };

    std::vector<const Fingerprint*> ordered;
    for (const auto& fp : pack.fingerprints) {
        ordered.push_back(&fp);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const Fingerprint* a, const Fingerprint* b) {
                  return std::tuple(static_cast<int>(a->technique), a->id) <
                         std::tuple(static_cast<int>(b->technique), b->id);
              });

    for (const Fingerprint* fp : ordered) {
        Scope scope = effective_scope(*fp);
        bool global_sites = scope.kind == Scope::Kind::Global;
        std::set<std::string> leaves;
        fp->expr.collect_leaves(leaves);
        std::map<std::string, std::optional<AtomMatch>> matches;
        for (const auto& id : leaves) {
            matches[id] = match(id, global_sites);
        }
        if (auto hit = eval_fingerprint(*fp, matches, fb.cg, scope)) {
            ds.by_technique[fp->technique].push_back(Detection{
                fp->id, fp->confidence, std::move(hit->first), std::move(hit->second)});
        }
    }
    return ds;
}

}  // namespace arascan
