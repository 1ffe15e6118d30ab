#include "maltsev/conditions.hpp"

#include <algorithm>
#include <chrono>
#include <map>

#include "maltsev/transformers.hpp"

namespace maltsev {

namespace {

constexpr int kVarX = 0;
constexpr int kVarZ = 2;
constexpr int kVarW = 3;

int link_var_index(LinkVar v) { return v == LinkVar::X ? kVarX : kVarZ; }

}  // namespace

ConditionSpec normalize_spec(ConditionSpec spec) {
    if (spec.n < 2) throw Error("condition chain length must be >= 2");
    if (static_cast<int>(spec.l.size()) != spec.n - 1 ||
        static_cast<int>(spec.r.size()) != spec.n - 1 ||
        static_cast<int>(spec.idem.size()) != spec.n - 1)
        throw Error("condition spec: l, r, idem must each cover indices 1..n-1");
    ConditionSpec out;
    out.n = spec.n;
    out.name = spec.name;
    for (int h = 1; h <= spec.n - 1; ++h) {
        if (spec.link_l(h) == spec.link_r(h)) {
            // redundant index: the term can be elided
            --out.n;
            continue;
        }
        out.l.push_back(spec.link_l(h));
        out.r.push_back(spec.link_r(h));
        out.idem.push_back(spec.idem[h - 1]);
    }
    return out;
}

const std::vector<std::string>& family_names() {
    static const std::vector<std::string> names = {
        "jonsson",       "alvin",
        "directed",      "mixed-minimal",
        "pixley",        "hm-permutable",
        "gumm",          "dd-alvin",
        "switch",        "jswitch",
        "directed-gumm", "two-headed-directed-gumm",
        "directed-alvin-heads",
    };
    return names;
}

std::optional<Family> family_from_name(const std::string& name) {
    const auto& names = family_names();
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<Family>(i);
    return std::nullopt;
}

std::string family_name(Family f) { return family_names()[static_cast<size_t>(f)]; }

int family_min_n(Family f) {
    switch (f) {
        case Family::TwoHeadedDirectedGumm:
        case Family::DirectedAlvinHeads: return 4;
        default: return 2;
    }
}

ConditionSpec family_spec(Family f, int n) {
    if (n < family_min_n(f))
        throw Error("family '" + family_name(f) + "' needs n >= " +
                    std::to_string(family_min_n(f)));
    ConditionSpec spec;
    spec.n = n;
    spec.name = family_name(f);
    spec.l.resize(n - 1);
    spec.r.resize(n - 1);
    spec.idem.assign(n - 1, 1);
    auto set_link = [&](int h, LinkVar lv, LinkVar rv) {
        spec.l[h - 1] = lv;
        spec.r[h - 1] = rv;
    };
    auto jonsson_links = [&] {
        for (int h = 1; h <= n - 1; ++h)
            set_link(h, h % 2 == 1 ? LinkVar::X : LinkVar::Z,
                     h % 2 == 1 ? LinkVar::Z : LinkVar::X);
    };
    auto alvin_links = [&] {
        for (int h = 1; h <= n - 1; ++h)
            set_link(h, h % 2 == 0 ? LinkVar::X : LinkVar::Z,
                     h % 2 == 0 ? LinkVar::Z : LinkVar::X);
    };
    switch (f) {
        case Family::Jonsson: jonsson_links(); break;
        case Family::Alvin: alvin_links(); break;
        case Family::Directed:
            for (int h = 1; h <= n - 1; ++h) set_link(h, LinkVar::X, LinkVar::Z);
            break;
        case Family::Pixley:
        case Family::HmPermutable:
            for (int h = 1; h <= n - 1; ++h) set_link(h, LinkVar::Z, LinkVar::X);
            if (f == Family::HmPermutable) spec.idem.assign(n - 1, 0);
            break;
        case Family::Gumm:
            alvin_links();
            spec.idem[0] = 0;
            break;
        case Family::DdAlvin:
            alvin_links();
            spec.idem[0] = 0;
            spec.idem[n - 2] = 0;
            break;
        case Family::Switch:
            alvin_links();
            for (int h = 1; h <= n - 1; ++h) spec.idem[h - 1] = (h % 2 == 0);
            break;
        case Family::JSwitch:
            jonsson_links();
            for (int h = 1; h <= n - 1; ++h) spec.idem[h - 1] = (h % 2 == 1);
            break;
        case Family::DirectedGumm:
            for (int h = 1; h <= n - 2; ++h) set_link(h, LinkVar::X, LinkVar::Z);
            set_link(n - 1, LinkVar::Z, LinkVar::X);
            spec.idem[n - 2] = 0;
            break;
        case Family::TwoHeadedDirectedGumm:
        case Family::DirectedAlvinHeads:
            set_link(1, LinkVar::Z, LinkVar::X);
            for (int h = 2; h <= n - 2; ++h) set_link(h, LinkVar::X, LinkVar::Z);
            set_link(n - 1, LinkVar::Z, LinkVar::X);
            if (f == Family::TwoHeadedDirectedGumm) {
                spec.idem[0] = 0;
                spec.idem[n - 2] = 0;
            }
            break;
        case Family::MixedMinimal:
            throw Error("mixed-minimal has no fixed spec; it is searched over all link choices");
    }
    return spec;
}

std::vector<std::pair<std::string, Equation>> condition_equations(
    const ConditionSpec& spec, const std::vector<Term>& terms) {
    const int n = spec.n;
    if (static_cast<int>(terms.size()) != n + 1)
        throw Error("chain has " + std::to_string(terms.size()) + " terms, condition needs " +
                    std::to_string(n + 1));
    std::vector<std::pair<std::string, Equation>> eqs;
    eqs.emplace_back("outer-first", Equation::make(Term::var(kVarX), terms[0]));
    eqs.emplace_back("outer-last", Equation::make(terms[n], Term::var(kVarZ)));
    const std::vector<int> xyx = {0, 1, 0};
    for (int h = 1; h <= n - 1; ++h)
        if (spec.idem_at(h))
            eqs.emplace_back("idem@" + std::to_string(h),
                             Equation::make(rename_variables(terms[h], xyx), Term::var(kVarX)));
    {
        std::vector<int> pat = {kVarX, link_var_index(spec.link_l(1)), kVarZ};
        eqs.emplace_back("link@0",
                         Equation::make(Term::var(kVarX), rename_variables(terms[1], pat)));
    }
    for (int h = 1; h <= n - 2; ++h) {
        std::vector<int> patl = {kVarX, link_var_index(spec.link_r(h)), kVarZ};
        std::vector<int> patr = {kVarX, link_var_index(spec.link_l(h + 1)), kVarZ};
        eqs.emplace_back("link@" + std::to_string(h),
                         Equation::make(rename_variables(terms[h], patl),
                                        rename_variables(terms[h + 1], patr)));
    }
    {
        std::vector<int> pat = {kVarX, link_var_index(spec.link_r(n - 1)), kVarZ};
        eqs.emplace_back("link@" + std::to_string(n - 1),
                         Equation::make(rename_variables(terms[n - 1], pat), Term::var(kVarZ)));
    }
    return eqs;
}

std::vector<std::pair<std::string, Equation>> day_equations(const DaySpec& day,
                                                            const std::vector<Term>& terms) {
    const int m = day.m;
    if (static_cast<int>(terms.size()) != m + 1)
        throw Error("Day chain has " + std::to_string(terms.size()) + " terms, condition needs " +
                    std::to_string(m + 1));
    std::vector<std::pair<std::string, Equation>> eqs;
    eqs.emplace_back("D1", Equation::make(Term::var(kVarX), terms[0]));
    eqs.emplace_back("D3", Equation::make(terms[m], Term::var(kVarW)));
    const std::vector<int> xyyx = {0, 1, 1, 0};
    for (int k = 0; k <= m; ++k)
        eqs.emplace_back("D0@" + std::to_string(k),
                         Equation::make(rename_variables(terms[k], xyyx), Term::var(kVarX)));
    const std::vector<int> even_pat = {0, 0, 3, 3};  // (x,x,w,w)
    const std::vector<int> odd_pat = {0, 1, 1, 3};   // (x,y,y,w)
    for (int k = 0; k <= m - 1; ++k) {
        bool use_even = (k % 2 == 0) != day.reversed;
        const std::vector<int>& pat = use_even ? even_pat : odd_pat;
        eqs.emplace_back("D2@" + std::to_string(k),
                         Equation::make(rename_variables(terms[k], pat),
                                        rename_variables(terms[k + 1], pat)));
    }
    return eqs;
}

namespace {

// Shared precomputation for the layered searches over F(3) or F(4):
// canonical ids for the restricted tables, buckets per id.
struct KeyIndex {
    std::map<std::vector<uint8_t>, int> ids;
    // per pattern: key id per element, and buckets by id
    std::vector<std::vector<int>> elem_key;     // [pattern][element]
    std::vector<std::vector<std::vector<int>>> buckets;  // [pattern][id] -> elements

    int id_of(const std::vector<uint8_t>& key) {
        auto [it, fresh] = ids.emplace(key, static_cast<int>(ids.size()));
        return it->second;
    }

    void build(const FreeAlgebra& fa, const std::vector<std::vector<int>>& patterns,
               const std::vector<int>& key_vars, const std::vector<char>& node_ok) {
        const size_t cnt = fa.count();
        elem_key.assign(patterns.size(), std::vector<int>(cnt, -1));
        buckets.assign(patterns.size(), {});
        for (size_t p = 0; p < patterns.size(); ++p) {
            for (size_t e = 0; e < cnt; ++e) {
                int id = id_of(fa.restriction(e, patterns[p], key_vars[p]));
                elem_key[p][e] = id;
                if (static_cast<size_t>(id) >= buckets[p].size()) buckets[p].resize(id + 1);
                if (node_ok[e]) buckets[p][id].push_back(static_cast<int>(e));
            }
        }
    }
};

struct LayerState {
    std::vector<int> members;          // ascending
    std::vector<int32_t> parent;       // per element, -1 = absent, -2 = root
    std::vector<int8_t> in_link;       // link pattern used to ENTER (mixed search)
};

TermChain chain_from_layers(const FreeAlgebra& fa, const ConditionSpec& spec,
                            const std::vector<LayerState>& layers, int final_elem) {
    // walk back through parents
    const int n = spec.n;
    std::vector<int> picked(n);  // picked[h] = element at layer h, 1-based h in 1..n-1
    picked[n - 1] = final_elem;
    for (int h = n - 1; h >= 2; --h)
        picked[h - 1] = layers[h].parent[picked[h]];
    TermChain chain;
    chain.condition = spec;
    chain.terms.push_back(Term::var(kVarX));
    for (int h = 1; h <= n - 1; ++h) chain.terms.push_back(fa.term_of(picked[h]));
    chain.terms.push_back(Term::var(kVarZ));
    return chain;
}

}  // namespace

std::optional<TermChain> find_chain(const FreeAlgebra& f3, const ConditionSpec& spec) {
    if (f3.arity != 3) throw Error("find_chain needs a free algebra of arity 3");
    const size_t cnt = f3.count();
    const int n = spec.n;

    std::vector<char> node_ok(cnt, 1);  // all elements admissible; idem filtered per layer
    KeyIndex keys;
    keys.build(f3, {{0, 0, 1}, {0, 1, 1}}, {2, 2}, node_ok);
    const int kx = 0, kz = 1;

    std::vector<char> idem(cnt);
    for (size_t e = 0; e < cnt; ++e) idem[e] = f3.idempotent_xyx(e) ? 1 : 0;

    const int start_id = keys.elem_key[kx][f3.projections[0]];
    const int end_id = keys.elem_key[kx][f3.projections[2]];

    auto pattern_of = [&](LinkVar v) { return v == LinkVar::X ? kx : kz; };

    std::vector<LayerState> layers(n);
    auto admit = [&](LayerState& layer, int elem, int32_t parent) {
        if (layer.parent[elem] != -1) return;
        layer.parent[elem] = parent;
        layer.members.push_back(elem);
    };

    // layer 1
    layers[1].parent.assign(cnt, -1);
    {
        int pat = pattern_of(spec.link_l(1));
        if (static_cast<size_t>(start_id) < keys.buckets[pat].size())
            for (int e : keys.buckets[pat][start_id])
                if (!spec.idem_at(1) || idem[e]) admit(layers[1], e, -2);
    }
    for (int h = 1; h <= n - 2; ++h) {
        layers[h + 1].parent.assign(cnt, -1);
        int rpat = pattern_of(spec.link_r(h));
        int lpat = pattern_of(spec.link_l(h + 1));
        std::vector<char> expanded;
        for (int u : layers[h].members) {
            int key = keys.elem_key[rpat][u];
            if (static_cast<size_t>(key) >= keys.buckets[lpat].size()) continue;
            if (static_cast<size_t>(key) >= expanded.size()) expanded.resize(key + 1, 0);
            if (expanded[key]) continue;
            expanded[key] = 1;
            for (int v : keys.buckets[lpat][key])
                if (!spec.idem_at(h + 1) || idem[v]) admit(layers[h + 1], v, u);
        }
        if (layers[h + 1].members.empty()) return std::nullopt;
    }

    int rpat = pattern_of(spec.link_r(n - 1));
    for (int v : layers[n - 1].members)
        if (keys.elem_key[rpat][v] == end_id)
            return chain_from_layers(f3, spec, layers, v);
    return std::nullopt;
}

std::optional<TermChain> find_mixed_chain(const FreeAlgebra& f3, int n) {
    if (f3.arity != 3) throw Error("find_mixed_chain needs a free algebra of arity 3");
    const size_t cnt = f3.count();

    std::vector<char> node_ok(cnt, 1);
    KeyIndex keys;
    keys.build(f3, {{0, 0, 1}, {0, 1, 1}}, {2, 2}, node_ok);
    const int kx = 0, kz = 1;

    std::vector<char> idem(cnt);
    for (size_t e = 0; e < cnt; ++e) idem[e] = f3.idempotent_xyx(e) ? 1 : 0;

    const int start_id = keys.elem_key[kx][f3.projections[0]];
    const int end_id = keys.elem_key[kx][f3.projections[2]];

    // mixed chain: each step may use any of the four (r, l) pattern pairs
    std::vector<LayerState> layers(std::max(n, 2));
    auto admit = [&](LayerState& layer, int elem, int32_t parent, int8_t link) {
        if (layer.parent[elem] != -1) return;
        layer.parent[elem] = parent;
        layer.in_link[elem] = link;
        layer.members.push_back(elem);
    };
    for (int h = 1; h <= n - 1; ++h) {
        layers[h].parent.assign(cnt, -1);
        layers[h].in_link.assign(cnt, -1);
    }
    // entering link encodes l(h) of the entered layer: 0 = X, 1 = Z
    for (int lpat : {kx, kz}) {
        if (static_cast<size_t>(start_id) < keys.buckets[lpat].size())
            for (int e : keys.buckets[lpat][start_id])
                if (idem[e]) admit(layers[1], e, -2, static_cast<int8_t>(lpat));
    }
    for (int h = 1; h <= n - 2; ++h) {
        for (int u : layers[h].members) {
            for (int rpat : {kx, kz}) {
                int key = keys.elem_key[rpat][u];
                for (int lpat : {kx, kz}) {
                    if (static_cast<size_t>(key) >= keys.buckets[lpat].size()) continue;
                    for (int v : keys.buckets[lpat][key])
                        if (idem[v])
                            admit(layers[h + 1], v,
                                  static_cast<int32_t>((u << 1) | rpat),
                                  static_cast<int8_t>(lpat));
                }
            }
        }
        if (layers[h + 1].members.empty()) return std::nullopt;
    }

    for (int rpat : {kx, kz}) {
        for (int v : layers[n - 1].members) {
            if (keys.elem_key[rpat][v] != end_id) continue;
            // reconstruct the chain and the link functions
            ConditionSpec spec;
            spec.n = n;
            spec.name = "mixed";
            spec.l.resize(n - 1);
            spec.r.resize(n - 1);
            spec.idem.assign(n - 1, 1);
            std::vector<int> picked(n);
            picked[n - 1] = v;
            spec.r[n - 2] = (rpat == kx) ? LinkVar::X : LinkVar::Z;
            for (int h = n - 1; h >= 1; --h) {
                spec.l[h - 1] = (layers[h].in_link[picked[h]] == kx) ? LinkVar::X : LinkVar::Z;
                if (h >= 2) {
                    int32_t packed = layers[h].parent[picked[h]];
                    picked[h - 1] = packed >> 1;
                    spec.r[h - 2] = ((packed & 1) == kx) ? LinkVar::X : LinkVar::Z;
                }
            }
            TermChain chain;
            chain.condition = spec;
            chain.terms.push_back(Term::var(kVarX));
            for (int h = 1; h <= n - 1; ++h) chain.terms.push_back(f3.term_of(picked[h]));
            chain.terms.push_back(Term::var(kVarZ));
            return chain;
        }
    }
    return std::nullopt;
}

std::optional<TermChain> find_day_chain(const FreeAlgebra& f4, bool reversed, int max_m,
                                        bool* exhausted) {
    if (f4.arity != 4) throw Error("find_day_chain needs a free algebra of arity 4");
    if (exhausted) *exhausted = false;
    const size_t cnt = f4.count();

    std::vector<char> node_ok(cnt);
    for (size_t e = 0; e < cnt; ++e) node_ok[e] = f4.day_d0(e) ? 1 : 0;

    KeyIndex keys;
    keys.build(f4, {{0, 0, 1, 1}, {0, 1, 1, 2}}, {2, 3}, node_ok);
    const int keven = 0, kodd = 1;

    const int start = f4.projections[0];
    const int target = f4.projections[3];
    if (!node_ok[start] || !node_ok[target])
        throw Error("projections fail D0; corrupt free algebra");

    // position parity -> key pattern
    auto pattern_at = [&](int pos) {
        bool even_link = (pos % 2 == 0) != reversed;
        return even_link ? keven : kodd;
    };

    // BFS over (element, parity of position)
    std::vector<std::array<int32_t, 2>> parent(cnt, {-1, -1});
    std::vector<std::array<char, 2>> seen(cnt, {0, 0});

    std::vector<int> frontier = {start};
    seen[start][0] = 1;
    parent[start][0] = -2;
    int pos = 0;
    std::vector<char> expanded[2][2];  // [pattern][parity] -> key id expanded

    while (!frontier.empty() && pos < max_m) {
        int pat = pattern_at(pos);
        int par = pos % 2;
        int npar = (pos + 1) % 2;
        std::vector<int> next;
        auto& exp = expanded[pat][par];
        for (int u : frontier) {
            int key = keys.elem_key[pat][u];
            if (static_cast<size_t>(key) >= exp.size()) exp.resize(key + 1, 0);
            if (exp[key]) continue;
            exp[key] = 1;
            if (static_cast<size_t>(key) >= keys.buckets[pat].size()) continue;
            for (int v : keys.buckets[pat][key]) {
                if (seen[v][npar]) continue;
                seen[v][npar] = 1;
                parent[v][npar] = u;
                next.push_back(v);
            }
        }
        frontier = std::move(next);
        ++pos;
        if (seen[target][pos % 2] && parent[target][pos % 2] != -1) {
            // reached at position pos: chain u_0..u_pos
            int m = pos;
            std::vector<int> picked(m + 1);
            picked[m] = target;
            for (int i = m; i >= 1; --i) picked[i - 1] = parent[picked[i]][i % 2];
            TermChain chain;
            chain.condition = DaySpec{m, reversed};
            for (int i = 0; i <= m; ++i) chain.terms.push_back(f4.term_of(picked[i]));
            // normalize the two outer terms to plain variables
            chain.terms[0] = Term::var(kVarX);
            chain.terms[m] = Term::var(kVarW);
            return chain;
        }
    }
    if (exhausted && frontier.empty()) *exhausted = true;
    return std::nullopt;
}

bool is_specular_chain(const TermChain& chain, std::span<const FiniteAlgebra> algebras) {
    if (chain.is_day()) throw Error("specularity check applies to ternary chains");
    const int n = static_cast<int>(chain.terms.size()) - 1;
    const std::vector<int> zyx = {2, 1, 0};
    for (int i = 0; i <= n / 2; ++i) {
        Equation eq = Equation::make(chain.terms[i], rename_variables(chain.terms[n - i], zyx));
        if (check_equation(algebras, eq)) return false;
    }
    return true;
}

std::vector<std::string> chain_to_strings(const TermChain& chain) {
    std::vector<std::string> out;
    out.reserve(chain.terms.size());
    for (const Term& t : chain.terms) out.push_back(term_to_string(t));
    return out;
}

const LevelEntry* LevelReport::find(const std::string& preset) const {
    for (const LevelEntry& e : entries)
        if (e.preset == preset) return &e;
    return nullptr;
}

namespace {

struct Clock {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    long long limit_ms;
    explicit Clock(long long ms) : limit_ms(ms) {}
    bool expired() const {
        auto el = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
        return el > limit_ms;
    }
};

LevelEntry find_level_impl(const FreeAlgebra& f3, Family family, const Budgets& budgets,
                           const Clock& clock) {
    LevelEntry entry;
    entry.preset = family_name(family);
    for (int n = family_min_n(family); n <= budgets.max_n; ++n) {
        if (clock.expired()) {
            entry.status = "timeout";
            entry.value = n - 1;  // searched below n
            return entry;
        }
        std::optional<TermChain> chain;
        if (family == Family::MixedMinimal) chain = find_mixed_chain(f3, n);
        else chain = find_chain(f3, family_spec(family, n));
        if (chain) {
            entry.status = f3.complete ? "exact" : "upper_bound";
            entry.value = n;
            entry.method = "search";
            entry.witness = chain_to_strings(*chain);
            entry.chain = std::move(chain);
            return entry;
        }
    }
    entry.status = f3.complete ? "lower_bound" : "timeout";
    entry.value = budgets.max_n;
    return entry;
}

}  // namespace

LevelEntry find_level(std::span<const FiniteAlgebra> generators, Family family,
                      const Budgets& budgets) {
    FreeAlgebra f3 = build_free_algebra(generators, 3, budgets.f3_max_elements, budgets.threads);
    Clock clock(budgets.budget_ms);
    return find_level_impl(f3, family, budgets, clock);
}

LevelReport level_report(std::span<const FiniteAlgebra> generators,
                         std::span<const std::string> presets, const Budgets& budgets) {
    Clock clock(budgets.budget_ms);
    LevelReport report;

    bool need_ternary = false, need_day = false;
    for (const auto& p : presets) {
        if (p == "modular" || p == "reversed-modular") need_day = true;
        else need_ternary = true;
    }

    std::optional<FreeAlgebra> f3;
    if (need_ternary || need_day) {
        f3 = build_free_algebra(generators, 3, budgets.f3_max_elements, budgets.threads);
        report.f3_elements = f3->count();
    }

    std::map<std::string, LevelEntry> computed;
    auto ternary_level = [&](Family fam) -> const LevelEntry& {
        std::string key = family_name(fam);
        auto it = computed.find(key);
        if (it == computed.end())
            it = computed.emplace(key, find_level_impl(*f3, fam, budgets, clock)).first;
        return it->second;
    };

    std::optional<FreeAlgebra> f4;
    bool f4_tried = false;
    auto try_f4 = [&]() -> FreeAlgebra* {
        if (!f4_tried) {
            f4_tried = true;
            FreeAlgebra built =
                build_free_algebra(generators, 4, budgets.f4_max_elements, budgets.threads);
            report.f4_elements = built.count();
            if (built.complete) f4 = std::move(built);
        }
        return f4 ? &*f4 : nullptr;
    };

    // Upper bound for a Day-type level through chain transformations of
    // found ternary chains; every candidate is verified before use.
    auto transform_bound = [&](bool reversed) -> std::optional<std::pair<int, TermChain>> {
        std::optional<std::pair<int, TermChain>> best;
        auto consider = [&](TermChain cand) {
            if (verify_condition(cand, generators)) return;  // failed verification
            int m = cand.day().m;
            bool want = cand.day().reversed == reversed;
            if (!want) {
                // prefix the first projection: a Day chain becomes a
                // reversed chain one longer, and vice versa
                std::vector<Term> terms;
                terms.push_back(Term::var(kVarX));
                for (const Term& t : cand.terms) terms.push_back(t);
                TermChain shifted;
                shifted.condition = DaySpec{m + 1, reversed};
                shifted.terms = std::move(terms);
                if (verify_condition(shifted, generators)) return;
                cand = std::move(shifted);
                m += 1;
            }
            if (!best || m < best->first) best = {m, std::move(cand)};
        };
        const LevelEntry& jon = ternary_level(Family::Jonsson);
        if (jon.chain) consider(apply_transform(TransformRule::DayFromJonsson, *jon.chain));
        const LevelEntry& dir = ternary_level(Family::Directed);
        if (dir.chain) consider(apply_transform(TransformRule::DayFromDirected, *dir.chain));
        const LevelEntry& alv = ternary_level(Family::Alvin);
        if (alv.chain && alv.value >= 4 && alv.value % 2 == 0)
            consider(apply_transform(TransformRule::RDayFromAlvin, *alv.chain));
        const LevelEntry& thg = ternary_level(Family::TwoHeadedDirectedGumm);
        if (thg.chain) consider(apply_transform(TransformRule::RDayFromTwoHeaded, *thg.chain));
        return best;
    };

    for (const auto& preset : presets) {
        if (preset == "modular" || preset == "reversed-modular") {
            bool reversed = preset == "reversed-modular";
            LevelEntry entry;
            entry.preset = preset;
            if (FreeAlgebra* f = try_f4()) {
                bool exhausted = false;
                auto chain = find_day_chain(*f, reversed, budgets.max_m, &exhausted);
                if (chain) {
                    entry.status = "exact";
                    entry.value = chain->day().m;
                    entry.method = "search";
                    entry.witness = chain_to_strings(*chain);
                    entry.degenerate =
                        f->projections[0] == f->projections[3];
                    entry.chain = std::move(chain);
                } else {
                    entry.status = "lower_bound";
                    entry.value = budgets.max_m;
                    entry.method = "search";
                    entry.exhausted = exhausted;
                }
            } else {
                // F(4) beyond budget: fall back to verified transforms
                auto bound = transform_bound(reversed);
                if (bound) {
                    entry.status = "upper_bound";
                    entry.value = bound->first;
                    entry.method = "transform";
                    entry.witness = chain_to_strings(bound->second);
                    entry.chain = std::move(bound->second);
                } else {
                    entry.status = "timeout";
                }
            }
            report.entries.push_back(std::move(entry));
        } else {
            auto fam = family_from_name(preset);
            if (!fam) throw Error("unknown preset '" + preset + "'");
            report.entries.push_back(ternary_level(*fam));
        }
    }
    return report;
}

}  // namespace maltsev
