#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "maltsev/algebra.hpp"
#include "maltsev/free_algebra.hpp"

namespace maltsev {

enum class LinkVar : uint8_t { X, Z };

// A mixed Maltsev condition on a chain t_0..t_n (outer projections
// included in the count): per-index link functions l, r into {x, z} and
// per-index idempotency flags, following the l-r description of mixed
// conditions. Linking equations:
//   x = t_1(x, l(1), z)
//   t_h(x, r(h), z) = t_{h+1}(x, l(h+1), z)      1 <= h < n-1
//   t_{n-1}(x, r(n-1), z) = z
// plus t_h(x, y, x) = x wherever idem is set.
struct ConditionSpec {
    int n = 2;
    std::vector<LinkVar> l, r;  // entry [h-1] holds the value at index h
    std::vector<char> idem;
    std::string name;

    LinkVar link_l(int h) const { return l[h - 1]; }
    LinkVar link_r(int h) const { return r[h - 1]; }
    bool idem_at(int h) const { return idem[h - 1] != 0; }
};

// Drops every index with l(h) == r(h) (such a term is redundant and the
// chain shortens); throws when the spec is malformed.
ConditionSpec normalize_spec(ConditionSpec spec);

struct DaySpec {
    int m = 2;
    bool reversed = false;
};

struct TermChain {
    std::variant<ConditionSpec, DaySpec> condition;
    std::vector<Term> terms;  // t_0..t_n resp. u_0..u_m, projections included

    bool is_day() const { return std::holds_alternative<DaySpec>(condition); }
    const ConditionSpec& spec() const { return std::get<ConditionSpec>(condition); }
    const DaySpec& day() const { return std::get<DaySpec>(condition); }
};

enum class Family {
    Jonsson,
    Alvin,
    Directed,
    MixedMinimal,
    Pixley,
    HmPermutable,
    Gumm,
    DdAlvin,
    Switch,
    JSwitch,
    DirectedGumm,
    TwoHeadedDirectedGumm,
    DirectedAlvinHeads,
};

const std::vector<std::string>& family_names();
std::optional<Family> family_from_name(const std::string& name);
std::string family_name(Family f);
int family_min_n(Family f);

// The catalogue entry for a named family at chain length n.
ConditionSpec family_spec(Family f, int n);

// The full equation list of a condition instantiated on a chain,
// labeled for diagnostics.
std::vector<std::pair<std::string, Equation>> condition_equations(
    const ConditionSpec& spec, const std::vector<Term>& terms);
std::vector<std::pair<std::string, Equation>> day_equations(const DaySpec& day,
                                                            const std::vector<Term>& terms);

// Layered breadth-first search for a witnessing chain in F(3).
// Requires fa.complete for a definitive "none".
std::optional<TermChain> find_chain(const FreeAlgebra& f3, const ConditionSpec& spec);

// Least-n mixed chain at length n: any of the four link equations may be
// used at each step; the reconstructed spec records the links used.
std::optional<TermChain> find_mixed_chain(const FreeAlgebra& f3, int n);

// Minimal m <= max_m admitting a (reversed) Day chain in F(4).
// Returns the chain; nullopt when no chain exists up to max_m. When the
// BFS exhausts the whole reachable state space without success,
// *exhausted is set: no chain exists for any m.
std::optional<TermChain> find_day_chain(const FreeAlgebra& f4, bool reversed, int max_m,
                                        bool* exhausted = nullptr);

// Checks the specularity equations t_i(x,y,z) = t_{n-i}(z,y,x) on every
// listed algebra.
bool is_specular_chain(const TermChain& chain, std::span<const FiniteAlgebra> algebras);

struct Budgets {
    size_t f3_max_elements = 100000;
    size_t f4_max_elements = 2000000;
    int max_n = 12;
    int max_m = 16;
    long long budget_ms = 600000;
    int threads = 1;
};

struct LevelEntry {
    std::string preset;
    std::string status;  // "exact" | "lower_bound" | "upper_bound" | "timeout"
    int value = -1;
    std::vector<std::string> witness;
    std::string method;  // "search" | "transform"
    bool degenerate = false;
    // set when a complete search ruled the condition out at every length
    bool exhausted = false;
    std::optional<TermChain> chain;
};

struct LevelReport {
    std::vector<LevelEntry> entries;
    size_t f3_elements = 0;
    size_t f4_elements = 0;

    const LevelEntry* find(const std::string& preset) const;
};

// Decides the minimal level of one family by iterating n upward over a
// memoized F(3).
LevelEntry find_level(std::span<const FiniteAlgebra> generators, Family family,
                      const Budgets& budgets);

// Assembles levels for the requested presets. Recognizes the family
// names plus "modular" and "reversed-modular" (searched in F(4) when it
// fits the budget, otherwise bounded through chain transformations).
LevelReport level_report(std::span<const FiniteAlgebra> generators,
                         std::span<const std::string> presets, const Budgets& budgets);

std::vector<std::string> chain_to_strings(const TermChain& chain);

}  // namespace maltsev
