#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "maltsev/algebra.hpp"
#include "maltsev/conditions.hpp"
#include "maltsev/relations.hpp"

namespace maltsev {

// ---------------------------------------------------------------------
// Base algebras.

// k-element chain lattice {0..k-1} with meet = min, join = max.
FiniteAlgebra make_chain(int k);
// Two-element Boolean algebra: meet, join, not.
FiniteAlgebra make_bool2();
// Four-element Boolean algebra on {0, 1, 1', 2} encoded 0->0, 1->1,
// 1'->2, 2->3; meet, join, not.
FiniteAlgebra make_bool4();

FiniteAlgebra make_base(const std::string& kind);  // "chain:k" | "bool2" | "bool4"

// ---------------------------------------------------------------------
// Ternary term reducts, operations named t1..t{n-1}.

enum class ReductKind {
    Bak,      // x(y+z), xz, .., xz, z(y+x)            lattice base
    Ba,       // x(y'+z), xz, .., xz, z(y'+x)          Boolean base
    Lin,      // x,..,x, x(y+z), xz,.., z(y+x), z,..,z lattice, 0 < i < n/2
    Ain,      // Boolean variant of Lin with y'
    LinMid,   // x,..,x, majority at n/2, z,..,z       n even
    AinMid,   // x,..,x, Pixley at n/2, z,..,z         n even
    AinStar,  // Ain but with plain y at the upper end
};

std::optional<ReductKind> reduct_kind_from_name(const std::string& name);

FiniteAlgebra make_reduct(ReductKind kind, const FiniteAlgebra& base, int n, int i = 0);

// Adds the outer projections as operations t0 and tn.
FiniteAlgebra plus_wrap(const FiniteAlgebra& algebra);

// Renames the m ternary operations to t1..tm keeping tables; optionally
// adds projections t0 and t{m+1}.
FiniteAlgebra shift_pad(const FiniteAlgebra& d_algebra, bool plus);

// ---------------------------------------------------------------------
// The B(a,d) subalgebra of A1 x A2 x A3 x A4.

struct BOfAd {
    std::vector<FiniteAlgebra> factors;  // exactly 4
    std::array<Element, 3> zeros;        // designated zero of A1..A3
    Element a = 0, d = 0;
    std::vector<std::vector<Element>> elements;  // sorted tuples

    // First matching type in order I, II, III, IV; 0 = no match.
    int classify(std::span<const Element> tuple) const;
    int index_of(std::span<const Element> tuple) const;  // -1 when absent

    // Coordinatewise evaluation; result must stay inside B.
    std::vector<Element> eval(int op_index, std::span<const int> arg_indices) const;

    // Materialized operation tables on the element list; guarded by size.
    FiniteAlgebra materialize(size_t max_table_entries = size_t(1) << 24) const;
};

// Verifies the premise equations (zero absorption on A1..A3, the two outer
// projections and inner idempotency on A4), enumerates the four type
// patterns, and re-verifies closure. Throws with a witness otherwise.
BOfAd make_b_of_ad(const std::vector<FiniteAlgebra>& factors, Element a, Element d,
                   std::array<Element, 3> zeros = {0, 0, 0});

// ---------------------------------------------------------------------
// Variety presets (generator lists).

// name in {a, b, c, d, g}; generators carry names like "C^{1,4}".
std::vector<FiniteAlgebra> variety_preset(char name, int n);

// ---------------------------------------------------------------------
// Counterexample instances.

struct CounterexampleInstance {
    std::string kind;
    std::vector<FiniteAlgebra> factors;
    std::vector<std::vector<Element>> elements;       // B's tuples
    std::optional<FiniteAlgebra> algebra;             // materialized when small
    std::vector<std::pair<std::string, Partition>> bindings;  // on B's indices
    Identity identity;                                // expected to FAIL
    std::pair<int, int> expected_witness;             // element indices
    std::vector<std::pair<std::string, int>> named_elements;

    const Partition& binding(const std::string& name) const;
    RelBinding rel_binding() const;  // alpha/beta/gamma -> a/b/g relations

    // Evaluates the identity; returns the witness pair when it fails.
    std::optional<std::pair<int, int>> run() const;
    // The designated pair lies in lhs but not in rhs.
    bool expected_pair_fails() const;
};

// The n = 3 instance over C4 x C4 x C2 with a trivial fourth factor:
// alpha(beta o alpha gamma o beta) <= 5-step reversed modular chain
// fails at (c0, c3).
CounterexampleInstance witness_baker_plus();

// Generic builders following the respective proofs. The D-side identity
// lhs must contain (a_tile, d_tilde) while chi must not; verified before
// the instance is assembled.
struct DSideInput {
    FiniteAlgebra d_algebra;       // operations s_0..s_{n-2} in order
    Partition alpha, beta, gamma;  // congruences of d_algebra
    Element a_tilde = 0, d_tilde = 0;
    RelExpr chi;                   // over variables a, b, g
};

// lhs alpha(beta o alpha gamma o beta); output identity
// alpha(beta o alpha gamma o beta) <= g o ab o g o chi o g o ab o g.
CounterexampleInstance witness_thmbak(const DSideInput& input);
// r odd; output <= alternating (ag, ab) chain with r+6 factors.
CounterexampleInstance witness_thmbak_r(const DSideInput& input, int r);

// lhs alpha(beta o gamma); output <= a(g o b) o chi o a(g o b).
CounterexampleInstance witness_thmbakbis(const DSideInput& input);

// lhs alpha(beta o alpha gamma o beta); output <= a delta o chi o a epsilon.
CounterexampleInstance witness_thmba_iii(const DSideInput& input, char delta = 'b',
                                         char epsilon = 'g');
// lhs alpha(beta o gamma); swapped second components.
CounterexampleInstance witness_thmba_iv(const DSideInput& input, char delta = 'b',
                                        char epsilon = 'g');

// The simultaneous-induction witnesses:
//  'a': V_n^a fails (2n-1)-step reversed modularity (n even >= 4)
//  'b': V_n^b fails (2n-3)-step modularity (n even >= 4)
CounterexampleInstance witness_induction(char side, int n, int cap = 6);

// ---------------------------------------------------------------------
// Polin fixture.

struct PolinFixture {
    FiniteAlgebra external_algebra;  // meet, plus = flip, prime = id
    FiniteAlgebra internal_algebra;  // meet, plus = const 1, prime = flip
    std::array<Term, 3> terms;       // t1, t2, t3 with the derived joins expanded
    TermChain jswitch_chain() const;  // t0..t4 tagged jswitch(4)
};

PolinFixture polin_fixture();

}  // namespace maltsev
