#pragma once

#include <optional>
#include <string>

#include "maltsev/conditions.hpp"

namespace maltsev {

// Explicit term-sequence transformations. Each rule builds the output
// chain by literal substitution; the target condition is meant to be
// re-verified on concrete algebras with verify_condition.
enum class TransformRule {
    DayFromJonsson,        // Jonsson t_0..t_n        -> Day u_0..u_{2n-1}
    RDayFromAlvin,         // alvin, n even >= 4      -> reversed Day u_0..u_{2n-3}
    DayFromDirected,       // directed t_0..t_n       -> Day u_0..u_{2n-1}
    RDayFromTwoHeaded,     // two-headed, n >= 4      -> reversed Day u_0..u_{2n-3}
    DirectedFromJonsson4,  // Jonsson n = 4           -> directed n = 4
    Specularize,           // t_h -> t_h(x, t_h(x,y,z), z) at selected parities
    JonssonFromAlvinShift, // alvin t_0..t_m          -> Jonsson, indices shifted by one
};

std::optional<TransformRule> transform_rule_from_name(const std::string& name);
std::string transform_rule_name(TransformRule rule);

struct TransformOptions {
    // Specularize: which indices h get the substitution.
    enum class Parity { Odd, Even, All } parity = Parity::Odd;
    // JonssonFromAlvinShift: also append the final third projection.
    bool append_final_projection = true;
};

TermChain apply_transform(TransformRule rule, const TermChain& input,
                          const TransformOptions& options = {});

struct VerifyFailure {
    std::string equation_label;
    Equation equation;
    int algebra_index = 0;
    std::vector<Element> assignment;
};

// Expands the chain's condition into its equation list and checks each on
// every algebra; reports the first failure (equation order, then algebra
// index, then assignment).
std::optional<VerifyFailure> verify_condition(const TermChain& chain,
                                              std::span<const FiniteAlgebra> algebras);

// Same equations against an explicitly given condition (used to check a
// chain against a condition other than its tag, e.g. with idempotency
// flags stripped).
std::optional<VerifyFailure> verify_condition_as(const TermChain& chain,
                                                 const ConditionSpec& spec,
                                                 std::span<const FiniteAlgebra> algebras);

}  // namespace maltsev
