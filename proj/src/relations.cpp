#include "maltsev/relations.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace maltsev {

Partition Partition::identity(int n) {
    Partition p;
    p.size = n;
    p.parent.resize(n);
    for (int i = 0; i < n; ++i) p.parent[i] = i;
    return p;
}

Partition Partition::full(int n) {
    Partition p;
    p.size = n;
    p.parent.assign(n, 0);
    return p;
}

Partition Partition::from_blocks(int n, const std::vector<std::vector<int>>& blocks) {
    Partition p = identity(n);
    for (const auto& block : blocks)
        for (size_t i = 1; i < block.size(); ++i) p.merge(block[0], block[i]);
    return p;
}

void Partition::merge(int a, int b) {
    int ra = parent[a], rb = parent[b];
    if (ra == rb) return;
    if (ra > rb) std::swap(ra, rb);
    for (int i = 0; i < size; ++i)
        if (parent[i] == rb) parent[i] = ra;
}

std::vector<std::vector<int>> Partition::blocks() const {
    std::map<int, std::vector<int>> by_rep;
    for (int i = 0; i < size; ++i) by_rep[parent[i]].push_back(i);
    std::vector<std::vector<int>> out;
    out.reserve(by_rep.size());
    for (auto& [rep, block] : by_rep) out.push_back(std::move(block));
    return out;
}

int Partition::block_count() const {
    std::set<int> reps(parent.begin(), parent.end());
    return static_cast<int>(reps.size());
}

BinaryRelation::BinaryRelation(int n) : size(n), words((n + 63) / 64), bits(size_t(n) * words, 0) {}

BinaryRelation BinaryRelation::diagonal(int n) {
    BinaryRelation r(n);
    for (int i = 0; i < n; ++i) r.set(i, i);
    return r;
}

BinaryRelation BinaryRelation::full(int n) {
    BinaryRelation r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r.set(i, j);
    return r;
}

BinaryRelation BinaryRelation::from_partition(const Partition& p) {
    BinaryRelation r(p.size);
    for (int i = 0; i < p.size; ++i)
        for (int j = 0; j < p.size; ++j)
            if (p.same(i, j)) r.set(i, j);
    return r;
}

BinaryRelation BinaryRelation::from_pairs(int n, const std::vector<std::pair<int, int>>& pairs) {
    BinaryRelation r(n);
    for (auto [a, b] : pairs) r.set(a, b);
    return r;
}

BinaryRelation BinaryRelation::meet(const BinaryRelation& other) const {
    BinaryRelation r(size);
    for (size_t i = 0; i < bits.size(); ++i) r.bits[i] = bits[i] & other.bits[i];
    return r;
}

BinaryRelation BinaryRelation::join_bits(const BinaryRelation& other) const {
    BinaryRelation r(size);
    for (size_t i = 0; i < bits.size(); ++i) r.bits[i] = bits[i] | other.bits[i];
    return r;
}

BinaryRelation BinaryRelation::compose(const BinaryRelation& other) const {
    // (a,c) in result iff exists b: (a,b) in this and (b,c) in other.
    BinaryRelation r(size);
    for (int a = 0; a < size; ++a) {
        const uint64_t* row = &bits[size_t(a) * words];
        uint64_t* out = &r.bits[size_t(a) * words];
        for (int b = 0; b < size; ++b) {
            if ((row[b >> 6] >> (b & 63)) & 1) {
                const uint64_t* row_b = &other.bits[size_t(b) * words];
                for (int w = 0; w < words; ++w) out[w] |= row_b[w];
            }
        }
    }
    return r;
}

BinaryRelation BinaryRelation::converse() const {
    BinaryRelation r(size);
    for (int a = 0; a < size; ++a)
        for (int b = 0; b < size; ++b)
            if (get(a, b)) r.set(b, a);
    return r;
}

BinaryRelation BinaryRelation::transitive_closure() const {
    BinaryRelation r = *this;
    // Warshall, row-parallel over words.
    for (int k = 0; k < size; ++k) {
        for (int a = 0; a < size; ++a) {
            if (r.get(a, k)) {
                uint64_t* row_a = &r.bits[size_t(a) * words];
                const uint64_t* row_k = &r.bits[size_t(k) * words];
                for (int w = 0; w < words; ++w) row_a[w] |= row_k[w];
            }
        }
    }
    return r;
}

bool BinaryRelation::subset_of(const BinaryRelation& other) const {
    for (size_t i = 0; i < bits.size(); ++i)
        if (bits[i] & ~other.bits[i]) return false;
    return true;
}

std::optional<std::pair<int, int>> BinaryRelation::first_pair_not_in(
    const BinaryRelation& other) const {
    for (int a = 0; a < size; ++a) {
        const uint64_t* ra = &bits[size_t(a) * words];
        const uint64_t* rb = &other.bits[size_t(a) * words];
        for (int w = 0; w < words; ++w) {
            uint64_t diff = ra[w] & ~rb[w];
            if (diff) {
                int b = w * 64 + __builtin_ctzll(diff);
                return std::make_pair(a, b);
            }
        }
    }
    return std::nullopt;
}

bool BinaryRelation::is_reflexive() const {
    for (int i = 0; i < size; ++i)
        if (!get(i, i)) return false;
    return true;
}

bool BinaryRelation::is_symmetric() const {
    for (int a = 0; a < size; ++a)
        for (int b = a + 1; b < size; ++b)
            if (get(a, b) != get(b, a)) return false;
    return true;
}

bool BinaryRelation::is_transitive() const {
    return compose(*this).subset_of(*this);
}

bool BinaryRelation::is_admissible(const FiniteAlgebra& algebra) const {
    auto related = pairs();
    std::vector<Element> left(kMaxArity), right(kMaxArity);
    for (const Operation& op : algebra.operations) {
        if (op.arity == 0) continue;
        std::vector<size_t> idx(op.arity, 0);
        while (true) {
            for (int p = 0; p < op.arity; ++p) {
                left[p] = related[idx[p]].first;
                right[p] = related[idx[p]].second;
            }
            Element la = algebra.apply(op, std::span<const Element>(left.data(), op.arity));
            Element ra = algebra.apply(op, std::span<const Element>(right.data(), op.arity));
            if (!get(la, ra)) return false;
            int p = op.arity - 1;
            while (p >= 0) {
                if (++idx[p] < related.size()) break;
                idx[p] = 0;
                --p;
            }
            if (p < 0) break;
        }
    }
    return true;
}

std::vector<std::pair<int, int>> BinaryRelation::pairs() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < size; ++a)
        for (int b = 0; b < size; ++b)
            if (get(a, b)) out.emplace_back(a, b);
    return out;
}

Partition BinaryRelation::to_partition() const {
    if (!is_reflexive() || !is_symmetric() || !is_transitive())
        throw Error("relation is not an equivalence");
    Partition p = Partition::identity(size);
    for (int a = 0; a < size; ++a)
        for (int b = a + 1; b < size; ++b)
            if (get(a, b)) p.merge(a, b);
    return p;
}

namespace {

constexpr int kCongruenceUniverseGuard = 4096;

// Mal'cev closure: merge the seed pairs, then keep applying every unary
// polynomial translation f(c1,..,x,..,ck) to each merged pair until the
// fixed point.
Partition malcev_closure(const FiniteAlgebra& algebra,
                         const std::vector<std::pair<int, int>>& seed_pairs) {
    if (algebra.size > kCongruenceUniverseGuard)
        throw Error("congruence generation guard exceeded: universe " +
                    std::to_string(algebra.size));
    Partition p = Partition::identity(algebra.size);
    std::deque<std::pair<int, int>> work;
    for (auto [a, b] : seed_pairs) {
        if (a < 0 || a >= algebra.size || b < 0 || b >= algebra.size)
            throw Error("pair outside universe");
        if (!p.same(a, b)) {
            p.merge(a, b);
            work.emplace_back(a, b);
        }
    }
    std::vector<Element> args(kMaxArity);
    while (!work.empty()) {
        auto [a, b] = work.front();
        work.pop_front();
        for (const Operation& op : algebra.operations) {
            if (op.arity == 0) continue;
            for (int pos = 0; pos < op.arity; ++pos) {
                int others = op.arity - 1;
                std::vector<Element> consts(others, 0);
                while (true) {
                    int ci = 0;
                    for (int p2 = 0; p2 < op.arity; ++p2)
                        if (p2 != pos) args[p2] = consts[ci++];
                    args[pos] = a;
                    Element va = algebra.apply(op, std::span<const Element>(args.data(), op.arity));
                    args[pos] = b;
                    Element vb = algebra.apply(op, std::span<const Element>(args.data(), op.arity));
                    if (!p.same(va, vb)) {
                        p.merge(va, vb);
                        work.emplace_back(va, vb);
                    }
                    int p3 = others - 1;
                    while (p3 >= 0) {
                        if (++consts[p3] < algebra.size) break;
                        consts[p3] = 0;
                        --p3;
                    }
                    if (p3 < 0) break;
                }
            }
        }
    }
    return p;
}

}  // namespace

Partition principal_congruence(const FiniteAlgebra& algebra, Element a, Element b) {
    return malcev_closure(algebra, {{a, b}});
}

Partition congruence_generated(const FiniteAlgebra& algebra,
                               const std::vector<std::pair<int, int>>& pairs) {
    return malcev_closure(algebra, pairs);
}

bool is_congruence(const FiniteAlgebra& algebra, const Partition& p) {
    // Compatible iff regenerating from the partition's pairs gives it back.
    std::vector<std::pair<int, int>> gens;
    for (int i = 0; i < p.size; ++i)
        if (p.parent[i] != i) gens.emplace_back(p.parent[i], i);
    return congruence_generated(algebra, gens) == p;
}

BinaryRelation adm_closure(const FiniteAlgebra& algebra,
                           const std::vector<std::pair<int, int>>& pairs,
                           bool reflexive) {
    const int n = algebra.size;
    BinaryRelation rel(n);
    std::vector<std::pair<int, int>> members;
    auto add = [&](int a, int b) {
        if (!rel.get(a, b)) {
            rel.set(a, b);
            members.emplace_back(a, b);
        }
    };
    if (reflexive)
        for (int i = 0; i < n; ++i) add(i, i);
    for (auto [a, b] : pairs) {
        if (a < 0 || a >= n || b < 0 || b >= n) throw Error("pair outside universe");
        add(a, b);
    }

    // Incremental closure over tuples of pairs; a relation closed under all
    // operations componentwise is exactly a subuniverse of the square.
    size_t settled = 0;
    std::vector<Element> left(kMaxArity), right(kMaxArity);
    while (settled < members.size()) {
        size_t old = settled;
        size_t count = members.size();
        settled = count;
        if (count > size_t(n) * n) throw Error("admissible closure overflow");
        for (const Operation& op : algebra.operations) {
            if (op.arity == 0) continue;
            for (int j = 0; j < op.arity; ++j) {
                std::vector<std::pair<size_t, size_t>> range(op.arity);
                bool empty = false;
                for (int p = 0; p < op.arity; ++p) {
                    if (p < j) range[p] = {0, old};
                    else if (p == j) range[p] = {old, count};
                    else range[p] = {0, count};
                    if (range[p].first >= range[p].second) empty = true;
                }
                if (empty) continue;
                std::vector<size_t> idx(op.arity);
                for (int p = 0; p < op.arity; ++p) idx[p] = range[p].first;
                while (true) {
                    for (int p = 0; p < op.arity; ++p) {
                        left[p] = members[idx[p]].first;
                        right[p] = members[idx[p]].second;
                    }
                    Element la = algebra.apply(op, std::span<const Element>(left.data(), op.arity));
                    Element ra = algebra.apply(op, std::span<const Element>(right.data(), op.arity));
                    add(la, ra);
                    int p = op.arity - 1;
                    while (p >= 0) {
                        if (++idx[p] < range[p].second) break;
                        idx[p] = range[p].first;
                        --p;
                    }
                    if (p < 0) break;
                }
            }
        }
    }
    return rel;
}

Partition induced_congruence(std::span<const Partition> factors,
                             const ProductAlgebra& product,
                             std::span<const Element> sub) {
    std::vector<std::vector<Element>> tuples;
    tuples.reserve(sub.size());
    for (Element e : sub) tuples.push_back(product.decode(e));
    return induced_congruence_tuples(factors, tuples);
}

Partition induced_congruence_tuples(std::span<const Partition> factors,
                                    const std::vector<std::vector<Element>>& tuples) {
    const int m = static_cast<int>(tuples.size());
    Partition p = Partition::identity(m);
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            bool related = true;
            for (size_t f = 0; f < factors.size() && related; ++f)
                related = factors[f].same(tuples[i][f], tuples[j][f]);
            if (related) p.merge(i, j);
        }
    }
    return p;
}

std::vector<Partition> all_congruences(const FiniteAlgebra& algebra, size_t guard) {
    const int n = algebra.size;
    std::set<Partition> known;
    std::deque<Partition> work;
    auto push = [&](Partition p) {
        if (known.insert(p).second) {
            work.push_back(std::move(p));
            if (known.size() > guard) throw Error("congruence count guard exceeded");
        }
    };
    push(Partition::identity(n));
    std::vector<Partition> principals;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            Partition p = principal_congruence(algebra, a, b);
            principals.push_back(p);
            push(std::move(p));
        }
    // close under join; the join of congruences is the transitive closure
    // of the union, computed here by merging blocks
    while (!work.empty()) {
        Partition cur = work.front();
        work.pop_front();
        for (const Partition& q : principals) {
            Partition j = cur;
            for (int i = 0; i < n; ++i)
                if (q.parent[i] != i) j.merge(q.parent[i], i);
            push(std::move(j));
        }
    }
    return {known.begin(), known.end()};
}

RelExpr RelExpr::variable(std::string name) {
    RelExpr e;
    e.kind = Kind::Var;
    e.var = std::move(name);
    return e;
}

RelExpr RelExpr::meet(RelExpr a, RelExpr b) {
    RelExpr e;
    e.kind = Kind::Meet;
    e.args = {std::move(a), std::move(b)};
    return e;
}

RelExpr RelExpr::compose(RelExpr a, RelExpr b) {
    RelExpr e;
    e.kind = Kind::Compose;
    e.args = {std::move(a), std::move(b)};
    return e;
}

RelExpr RelExpr::converse(RelExpr inner) {
    RelExpr e;
    e.kind = Kind::Converse;
    e.args = {std::move(inner)};
    return e;
}

RelExpr RelExpr::power(RelExpr inner, int k) {
    RelExpr e;
    e.kind = Kind::Power;
    e.k = k;
    e.args = {std::move(inner)};
    return e;
}

RelExpr RelExpr::adm_closure_of(RelExpr a, RelExpr b) {
    RelExpr e;
    e.kind = Kind::AdmClosure;
    e.args = {std::move(a), std::move(b)};
    return e;
}

RelExpr RelExpr::transitive_closure_of(RelExpr inner) {
    RelExpr e;
    e.kind = Kind::TransClosure;
    e.args = {std::move(inner)};
    return e;
}

RelExpr RelExpr::alt_chain(RelExpr a, RelExpr b, int k) {
    RelExpr e;
    e.kind = Kind::AltChain;
    e.k = k;
    e.args = {std::move(a), std::move(b)};
    return e;
}

bool RelExpr::operator==(const RelExpr& other) const {
    return kind == other.kind && var == other.var && k == other.k && args == other.args;
}

std::vector<std::string> RelExpr::variables() const {
    std::set<std::string> names;
    std::vector<const RelExpr*> stack = {this};
    while (!stack.empty()) {
        const RelExpr* e = stack.back();
        stack.pop_back();
        if (e->kind == Kind::Var) names.insert(e->var);
        for (const RelExpr& a : e->args) stack.push_back(&a);
    }
    return {names.begin(), names.end()};
}

BinaryRelation eval_rel_expr(const RelExpr& expr, const RelBinding& binding,
                             const FiniteAlgebra* algebra) {
    switch (expr.kind) {
        case RelExpr::Kind::Var: {
            auto it = binding.find(expr.var);
            if (it == binding.end()) throw Error("unbound relation variable '" + expr.var + "'");
            return it->second;
        }
        case RelExpr::Kind::Meet: {
            BinaryRelation a = eval_rel_expr(expr.args[0], binding, algebra);
            BinaryRelation b = eval_rel_expr(expr.args[1], binding, algebra);
            if (a.size != b.size) throw Error("relation size mismatch in meet");
            return a.meet(b);
        }
        case RelExpr::Kind::Compose: {
            BinaryRelation a = eval_rel_expr(expr.args[0], binding, algebra);
            BinaryRelation b = eval_rel_expr(expr.args[1], binding, algebra);
            if (a.size != b.size) throw Error("relation size mismatch in compose");
            return a.compose(b);
        }
        case RelExpr::Kind::Converse:
            return eval_rel_expr(expr.args[0], binding, algebra).converse();
        case RelExpr::Kind::Power: {
            BinaryRelation e = eval_rel_expr(expr.args[0], binding, algebra);
            if (expr.k == 0) return BinaryRelation::diagonal(e.size);
            BinaryRelation acc = e;
            for (int i = 1; i < expr.k; ++i) acc = acc.compose(e);
            return acc;
        }
        case RelExpr::Kind::AdmClosure: {
            if (!algebra) throw Error("admissible closure needs the ambient algebra");
            BinaryRelation a = eval_rel_expr(expr.args[0], binding, algebra);
            BinaryRelation b = eval_rel_expr(expr.args[1], binding, algebra);
            BinaryRelation u = a.join_bits(b);
            return adm_closure(*algebra, u.pairs(), false);
        }
        case RelExpr::Kind::TransClosure:
            return eval_rel_expr(expr.args[0], binding, algebra).transitive_closure();
        case RelExpr::Kind::AltChain: {
            BinaryRelation a = eval_rel_expr(expr.args[0], binding, algebra);
            BinaryRelation b = eval_rel_expr(expr.args[1], binding, algebra);
            if (a.size != b.size) throw Error("relation size mismatch in alt");
            if (expr.k == 0) return BinaryRelation::diagonal(a.size);
            BinaryRelation acc = a;
            for (int i = 1; i < expr.k; ++i) acc = acc.compose(i % 2 == 1 ? b : a);
            return acc;
        }
    }
    throw Error("malformed relation expression");
}

std::optional<std::pair<int, int>> check_inclusion(const Identity& identity,
                                                   const RelBinding& binding,
                                                   const FiniteAlgebra* algebra) {
    BinaryRelation lhs = eval_rel_expr(identity.lhs, binding, algebra);
    BinaryRelation rhs = eval_rel_expr(identity.rhs, binding, algebra);
    if (lhs.size != rhs.size) throw Error("relation size mismatch between identity sides");
    return lhs.first_pair_not_in(rhs);
}

}  // namespace maltsev
