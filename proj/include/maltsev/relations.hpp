#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "maltsev/algebra.hpp"

namespace maltsev {

// Equivalence relation on 0..size-1, canonicalized so every element
// points at the least member of its block.
struct Partition {
    int size = 0;
    std::vector<int> parent;

    static Partition identity(int n);
    static Partition full(int n);
    static Partition from_blocks(int n, const std::vector<std::vector<int>>& blocks);

    int rep(int a) const { return parent[a]; }
    bool same(int a, int b) const { return parent[a] == parent[b]; }
    void merge(int a, int b);  // keeps canonical form

    // Blocks sorted by least element, each block sorted.
    std::vector<std::vector<int>> blocks() const;
    int block_count() const;

    bool operator==(const Partition& other) const { return parent == other.parent; }
    bool operator<(const Partition& other) const { return parent < other.parent; }
};

struct BinaryRelation {
    int size = 0;
    int words = 0;
    std::vector<uint64_t> bits;

    BinaryRelation() = default;
    explicit BinaryRelation(int n);
    static BinaryRelation diagonal(int n);
    static BinaryRelation full(int n);
    static BinaryRelation from_partition(const Partition& p);
    static BinaryRelation from_pairs(int n, const std::vector<std::pair<int, int>>& pairs);

    bool get(int a, int b) const {
        return (bits[size_t(a) * words + (b >> 6)] >> (b & 63)) & 1;
    }
    void set(int a, int b) { bits[size_t(a) * words + (b >> 6)] |= uint64_t(1) << (b & 63); }

    BinaryRelation meet(const BinaryRelation& other) const;
    BinaryRelation join_bits(const BinaryRelation& other) const;  // plain union
    BinaryRelation compose(const BinaryRelation& other) const;
    BinaryRelation converse() const;
    BinaryRelation transitive_closure() const;

    bool subset_of(const BinaryRelation& other) const;
    // Lexicographically least pair in this \ other.
    std::optional<std::pair<int, int>> first_pair_not_in(const BinaryRelation& other) const;

    bool is_reflexive() const;
    bool is_symmetric() const;
    bool is_transitive() const;
    bool is_admissible(const FiniteAlgebra& algebra) const;

    std::vector<std::pair<int, int>> pairs() const;  // sorted
    Partition to_partition() const;                  // requires an equivalence relation

    bool operator==(const BinaryRelation& other) const {
        return size == other.size && bits == other.bits;
    }
};

// Least congruence identifying a and b (Mal'cev closure through unary
// polynomial translations).
Partition principal_congruence(const FiniteAlgebra& algebra, Element a, Element b);

// Least congruence containing all listed pairs.
Partition congruence_generated(const FiniteAlgebra& algebra,
                               const std::vector<std::pair<int, int>>& pairs);

// Whether the partition is compatible with every operation.
bool is_congruence(const FiniteAlgebra& algebra, const Partition& p);

// Least relation containing `pairs` (plus the diagonal when `reflexive`)
// closed under all operations applied componentwise.
BinaryRelation adm_closure(const FiniteAlgebra& algebra,
                           const std::vector<std::pair<int, int>>& pairs,
                           bool reflexive);

// Restriction of a product congruence (one factor partition per
// coordinate) to a subuniverse, renumbered by the subuniverse's order.
Partition induced_congruence(std::span<const Partition> factors,
                             const ProductAlgebra& product,
                             std::span<const Element> sub);
// Same, with the subuniverse given by coordinate tuples.
Partition induced_congruence_tuples(std::span<const Partition> factors,
                                    const std::vector<std::vector<Element>>& tuples);

// Every congruence of the algebra; throws when more than `guard` arise.
std::vector<Partition> all_congruences(const FiniteAlgebra& algebra, size_t guard = 100000);

// ---------------------------------------------------------------------
// Relation expressions and inclusion identities.

struct RelExpr {
    enum class Kind {
        Var,        // named relation from the binding
        Meet,       // intersection (juxtaposition in the usual notation)
        Compose,
        Converse,
        Power,      // k-fold composition; k=0 is the diagonal
        AdmClosure, // least admissible relation containing the union
        TransClosure,
        AltChain,   // alternating chain with k factors starting from args[0]
    };

    Kind kind = Kind::Var;
    std::string var;
    int k = 0;
    std::vector<RelExpr> args;

    static RelExpr variable(std::string name);
    static RelExpr meet(RelExpr a, RelExpr b);
    static RelExpr compose(RelExpr a, RelExpr b);
    static RelExpr converse(RelExpr e);
    static RelExpr power(RelExpr e, int k);
    static RelExpr adm_closure_of(RelExpr a, RelExpr b);
    static RelExpr transitive_closure_of(RelExpr e);
    static RelExpr alt_chain(RelExpr a, RelExpr b, int k);

    bool operator==(const RelExpr& other) const;

    // Variables referenced, sorted and deduplicated.
    std::vector<std::string> variables() const;
};

// lhs <= rhs under a binding.
struct Identity {
    RelExpr lhs;
    RelExpr rhs;
};

using RelBinding = std::map<std::string, BinaryRelation>;

// algebra may be null when the expression uses no AdmClosure node.
BinaryRelation eval_rel_expr(const RelExpr& expr, const RelBinding& binding,
                             const FiniteAlgebra* algebra);

// std::nullopt when lhs <= rhs holds; otherwise the least witness pair.
std::optional<std::pair<int, int>> check_inclusion(const Identity& identity,
                                                   const RelBinding& binding,
                                                   const FiniteAlgebra* algebra);

}  // namespace maltsev
