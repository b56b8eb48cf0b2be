#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "arascan/dex.hpp"

namespace arascan {

struct Scope {
    enum class Kind { Method, Class, Cg, Global };
    Kind kind = Kind::Method;
    int distance = 1;  // CG only, >= 1

    static Scope method() { return Scope{Kind::Method, 1}; }
    static Scope cls() { return Scope{Kind::Class, 1}; }
    static Scope cg(int d) { return Scope{Kind::Cg, d}; }
    static Scope global() { return Scope{Kind::Global, 1}; }

    bool operator==(const Scope&) const = default;
};

inline std::string to_string(const Scope& s)
{
    switch (s.kind) {
    case Scope::Kind::Method: return "METHOD";
    case Scope::Kind::Class: return "CLASS";
    case Scope::Kind::Cg: return "CG(" + std::to_string(s.distance) + ")";
    default: return "GLOBAL";
    }
}

inline std::optional<Scope> parse_scope(const std::string& text)
{
    if (text == "METHOD") return Scope::method();
    if (text == "CLASS") return Scope::cls();
    if (text == "GLOBAL") return Scope::global();
    if (text.rfind("CG(", 0) == 0 && text.back() == ')') {
        try {
            int d = std::stoi(text.substr(3, text.size() - 4));
            if (d >= 1) {
                return Scope::cg(d);
            }
        } catch (...) {
        }
    }
    return std::nullopt;
}

struct CodeSite {
    MethodRef owner;
    uint32_t offset = 0;

    auto operator<=>(const CodeSite&) const = default;
};

struct ScopeWitness {
    Scope scope;
    // one chosen site per atom, in atom-id order
    std::vector<std::pair<std::string, CodeSite>> sites;
};

/// Directed method-call graph. Co-occurrence distances treat the graph as
/// undirected and methods of one class as adjacent, so a METHOD witness
/// implies a CLASS witness implies a CG(d) witness for every d >= 1.
class CallGraph {
public:
    static CallGraph build(const ProgramFacts& facts)
    {
        CallGraph cg;
        for (const auto& body : facts.bodies) {
            cg.node_id(body.owner);
        }
        for (const auto& m : facts.defined_methods) {
            cg.node_id(m);
        }
        for (const auto& body : facts.bodies) {
            int from = cg.node_id(body.owner);
            for (const auto& [callee, off] : body.invokes) {
                int to = cg.node_id(callee);
                cg.edges_.insert({from, to});
            }
        }
        for (auto [from, to] : cg.edges_) {
            cg.adj_[from].push_back(to);
            cg.adj_[to].push_back(from);
        }
        for (size_t i = 0; i < cg.nodes_.size(); ++i) {
            cg.class_groups_[cg.nodes_[i].class_desc].push_back(static_cast<int>(i));
        }
        return cg;
    }

    size_t node_count() const { return nodes_.size(); }
    size_t edge_count() const { return edges_.size(); }

    bool has_edge(const MethodRef& caller, const MethodRef& callee) const
    {
        auto a = find(caller);
        auto b = find(callee);
        return a && b && edges_.count({*a, *b}) != 0;
    }

    std::vector<std::pair<MethodRef, MethodRef>> edge_list() const
    {
        std::vector<std::pair<MethodRef, MethodRef>> out;
        for (auto [from, to] : edges_) {
            out.emplace_back(nodes_[from], nodes_[to]);
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// "caller TAB callee" per line, sorted; debug export format.
    std::string export_edges() const
    {
        std::string out;
        for (const auto& [from, to] : edge_list()) {
            out += from.canonical() + "\t" + to.canonical() + "\n";
        }
        return out;
    }

    /// Undirected distance with same-class adjacency; -1 when unreachable.
    int distance(const MethodRef& a, const MethodRef& b) const
    {
        auto ia = find(a);
        auto ib = find(b);
        if (!ia || !ib) {
            return -1;
        }
        if (*ia == *ib) {
            return 0;
        }
        const auto& dist = bfs_from(*ia);
        return dist[*ib];
    }

private:
    int node_id(const MethodRef& m)
    {
        auto it = index_.find(m);
        if (it != index_.end()) {
            return it->second;
        }
        int id = static_cast<int>(nodes_.size());
        nodes_.push_back(m);
        index_[m] = id;
        return id;
    }

    std::optional<int> find(const MethodRef& m) const
    {
        auto it = index_.find(m);
        if (it == index_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    const std::vector<int>& bfs_from(int src) const
    {
        auto it = bfs_cache_.find(src);
        if (it != bfs_cache_.end()) {
            return it->second;
        }
        std::vector<int> dist(nodes_.size(), -1);
        std::set<std::string> expanded_groups;
        std::deque<int> queue;
        dist[src] = 0;
        queue.push_back(src);
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            auto visit = [&](int v) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            };
            if (auto a = adj_.find(u); a != adj_.end()) {
                for (int v : a->second) {
                    visit(v);
                }
            }
            const std::string& cls = nodes_[u].class_desc;
            if (expanded_groups.insert(cls).second) {
                for (int v : class_groups_.at(cls)) {
                    visit(v);
                }
            }
        }
        return bfs_cache_.emplace(src, std::move(dist)).first->second;
    }

    std::vector<MethodRef> nodes_;
    std::map<MethodRef, int> index_;
    std::set<std::pair<int, int>> edges_;
    std::map<int, std::vector<int>> adj_;
    std::map<std::string, std::vector<int>> class_groups_;
    mutable std::map<int, std::vector<int>> bfs_cache_;
};

inline CallGraph build_cg(const ProgramFacts& facts) { return CallGraph::build(facts); }

/// Witness that one site of every atom co-occurs within the scope. Sites are
/// searched in sorted order, so the returned witness is the lexicographically
/// smallest qualifying tuple.
inline std::optional<ScopeWitness> within_scope(
    const CallGraph& cg,
    const std::vector<std::pair<std::string, std::vector<CodeSite>>>& atom_sites,
    const Scope& scope)
{
    std::vector<std::pair<std::string, std::vector<CodeSite>>> atoms = atom_sites;
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [id, sites] : atoms) {
        std::sort(sites.begin(), sites.end());
    }

    if (scope.kind == Scope::Kind::Global) {
        ScopeWitness w{scope, {}};
        for (const auto& [id, sites] : atoms) {
            if (!sites.empty()) {
                w.sites.emplace_back(id, sites.front());
            }
        }
        return w;
    }

    for (const auto& [id, sites] : atoms) {
        if (sites.empty()) {
            return std::nullopt;
        }
    }

    if (scope.kind == Scope::Kind::Method || scope.kind == Scope::Kind::Class) {
        auto key = [&](const CodeSite& s) {
            return scope.kind == Scope::Kind::Method ? s.owner.canonical()
                                                     : s.owner.class_desc;
        };
        std::set<std::string> candidates;
        for (const auto& site : atoms.front().second) {
            candidates.insert(key(site));
        }
        for (const auto& [id, sites] : atoms) {
            std::set<std::string> here;
            for (const auto& site : sites) {
                here.insert(key(site));
            }
            std::set<std::string> kept;
            std::set_intersection(candidates.begin(), candidates.end(), here.begin(),
                                  here.end(), std::inserter(kept, kept.begin()));
            candidates = std::move(kept);
            if (candidates.empty()) {
                return std::nullopt;
            }
        }
        const std::string& chosen = *candidates.begin();
        ScopeWitness w{scope, {}};
        for (const auto& [id, sites] : atoms) {
            for (const auto& site : sites) {
                if (key(site) == chosen) {
                    w.sites.emplace_back(id, site);
                    break;
                }
            }
        }
        return w;
    }

    // CG(d): depth-first selection of one site per atom with pairwise
    // distance checks against everything already chosen.
    std::vector<CodeSite> chosen(atoms.size());
    std::optional<ScopeWitness> result;
    auto search = [&](auto&& self, size_t i) -> bool {
        if (i == atoms.size()) {
            ScopeWitness w{scope, {}};
            for (size_t k = 0; k < atoms.size(); ++k) {
                w.sites.emplace_back(atoms[k].first, chosen[k]);
            }
            result = std::move(w);
            return true;
        }
        for (const auto& site : atoms[i].second) {
            bool ok = true;
            for (size_t k = 0; k < i; ++k) {
                int d = cg.distance(chosen[k].owner, site.owner);
                if (d < 0 || d > scope.distance) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                chosen[i] = site;
                if (self(self, i + 1)) {
                    return true;
                }
            }
        }
        return false;
    };
    search(search, 0);
    return result;
}

}  // namespace arascan
