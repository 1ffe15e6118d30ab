#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maltsev/algebra.hpp"

namespace maltsev {

// The k-generated free algebra of the variety generated by finitely many
// finite algebras, realized as the subalgebra of the product of the
// generators' k-th "function powers" generated by the k projections.
// An element is, for each generator algebra A, a function A^k -> A stored
// as a flat table (last variable fastest); two elements are equal iff
// their concatenated tables agree.
//
// When every generator has exactly two elements and the concatenated
// tables fit into 64 bits, elements are bit-packed and operations are
// applied lane-parallel; otherwise a generic byte representation is used.
struct FreeAlgebra {
    std::vector<FiniteAlgebra> generators;
    int arity = 0;

    std::vector<int> table_lens;  // |A_i|^arity per generator
    std::vector<int> offsets;     // prefix sums of table_lens
    int total_len = 0;

    bool packed = false;
    uint64_t packed_mask = 0;
    std::vector<uint64_t> packed_elems;
    std::vector<uint8_t> byte_elems;  // count * total_len when not packed

    struct Provenance {
        int16_t op = -1;  // -1: projection args[0]; otherwise op index
        int32_t args[4] = {0, 0, 0, 0};
    };
    std::vector<Provenance> prov;
    std::vector<int> projections;  // element index of projection j
    bool complete = true;
    size_t element_budget = 0;

    size_t count() const { return prov.size(); }

    uint8_t entry(size_t elem, int gen, size_t pos) const;
    std::vector<uint8_t> element_bytes(size_t elem) const;

    // Table of the element restricted along an argument pattern:
    // pattern[j] names the key variable feeding argument j. Returned as
    // bytes over key assignments, concatenated across generators.
    std::vector<uint8_t> restriction(size_t elem, std::span<const int> pattern,
                                     int key_vars) const;

    // t(x, y, x) = x on every generator.
    bool idempotent_xyx(size_t elem) const;
    // u(x, y, y, x) = x on every generator (Day equation D0).
    bool day_d0(size_t elem) const;

    Term term_of(size_t elem) const;

    // Pointwise application of a signature operation to elements.
    std::vector<uint8_t> apply_operation_bytes(int op_index,
                                               std::span<const size_t> arg_elems) const;
    std::optional<size_t> find_by_bytes(const std::vector<uint8_t>& value) const;
    // Interpret a term with variables as projections; nullopt when the
    // resulting function is not among the stored elements (possible only
    // for incomplete closures).
    std::optional<size_t> eval_term_element(const Term& t) const;

    // Deterministic content fingerprint of generators + arity (cache key).
    uint64_t content_hash() const;
};

// Breadth-first closure of the k projections under all operations.
// Deterministic element order. If the budget is hit the result is
// returned with complete == false.
FreeAlgebra build_free_algebra(std::span<const FiniteAlgebra> generators, int k,
                               size_t max_elements, int threads = 1);

}  // namespace maltsev
