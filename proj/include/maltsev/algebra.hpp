#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace maltsev {

using Element = int;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// One finitary operation given by its full value table.
// Table layout: row-major with the last argument varying fastest, so
// table[(..(a1*size + a2)*size + ..)*size + ak] = f(a1, .., ak).
struct Operation {
    std::string name;
    int arity = 0;
    std::vector<Element> table;
};

struct FiniteAlgebra {
    std::string name;
    int size = 0;
    std::vector<Operation> operations;

    // Optional display labels (e.g. the four-element Boolean algebra uses
    // 0, 1, 1', 2). Never serialized; purely cosmetic.
    std::vector<std::string> element_names;

    int operation_index(std::string_view op_name) const;
    const Operation& operation(std::string_view op_name) const;

    Element apply(const Operation& op, std::span<const Element> args) const;
    Element apply(int op_index, std::span<const Element> args) const;

    std::string element_label(Element e) const;
};

// Checks the structural invariants (entry ranges, table lengths, name
// uniqueness, supported arities) and returns the algebra unchanged.
// Throws Error naming the first violated invariant.
FiniteAlgebra validate_algebra(FiniteAlgebra candidate);

constexpr int kMaxArity = 4;

// Term trees. A term is a variable, a fixed element of some algebra
// (used internally, e.g. when checking equations that pin a zero
// element), or an operation applied to subterms.
struct Term {
    enum class Kind { Variable, Constant, Apply };

    Kind kind = Kind::Variable;
    int index = 0;  // variable index, or the constant's element value
    std::string op;
    std::vector<Term> args;

    static Term var(int i);
    static Term constant(Element e);
    static Term apply(std::string op_name, std::vector<Term> arguments);

    // Highest variable index used, plus one.
    int variable_span() const;

    bool operator==(const Term& other) const;
};

// Variable display names: x, y, z, w, then v4, v5, ...
std::string variable_name(int index);
std::string term_to_string(const Term& t);

// Replaces variable i by `replacements[i]`. Variables beyond the
// replacement list are kept as-is.
Term substitute(const Term& t, std::span<const Term> replacements);
// Variable-to-variable renaming, e.g. (x,y,z) -> (x,y,w).
Term rename_variables(const Term& t, std::span<const int> new_indices);

Element eval_term(const Term& t, const FiniteAlgebra& algebra,
                  std::span<const Element> assignment);

struct Equation {
    Term lhs;
    Term rhs;
    int num_variables = 0;

    static Equation make(Term lhs, Term rhs);
};

std::string equation_to_string(const Equation& eq);

struct EquationWitness {
    int algebra_index = 0;
    std::vector<Element> assignment;
};

// Exhaustively checks eq over all assignments in every listed algebra.
// Returns std::nullopt when the equation holds everywhere, otherwise the
// lexicographically least failing (algebra index, assignment).
std::optional<EquationWitness> check_equation(std::span<const FiniteAlgebra> algebras,
                                              const Equation& eq);
std::optional<EquationWitness> check_equation(const FiniteAlgebra& algebra,
                                              const Equation& eq);

struct SubuniverseResult {
    std::vector<Element> elements;    // sorted, closed under all operations
    FiniteAlgebra subalgebra;         // renumbered 0..elements.size()-1
    std::vector<Element> to_parent;   // sub index -> parent element
    std::vector<int> from_parent;     // parent element -> sub index, -1 outside
};

SubuniverseResult generate_subuniverse(const FiniteAlgebra& algebra,
                                       std::span<const Element> seeds);

// Direct product with mixed-radix element encoding; the first factor is
// the most significant digit, so tuples enumerate lexicographically.
struct ProductAlgebra {
    FiniteAlgebra algebra;
    std::vector<int> factor_sizes;

    std::vector<Element> decode(Element e) const;
    Element encode(std::span<const Element> coords) const;
};

ProductAlgebra direct_product(std::span<const FiniteAlgebra> factors);

// Reduct with renamed, reordered operations. Tables are shared bit-exactly.
FiniteAlgebra reindex_operations(
    const FiniteAlgebra& algebra,
    std::span<const std::pair<std::string, std::string>> selection);

}  // namespace maltsev
