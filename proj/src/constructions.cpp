#include "maltsev/constructions.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace maltsev {

namespace {

Operation table_from_formula(const std::string& name, const FiniteAlgebra& base,
                             const Term& formula) {
    Operation op;
    op.name = name;
    op.arity = 3;
    const int s = base.size;
    op.table.resize(size_t(s) * s * s);
    std::vector<Element> args(3);
    size_t flat = 0;
    for (int x = 0; x < s; ++x)
        for (int y = 0; y < s; ++y)
            for (int z = 0; z < s; ++z) {
                args = {x, y, z};
                op.table[flat++] = eval_term(formula, base, args);
            }
    return op;
}

Term T_meet(Term a, Term b) { return Term::apply("meet", {std::move(a), std::move(b)}); }
Term T_join(Term a, Term b) { return Term::apply("join", {std::move(a), std::move(b)}); }
Term T_not(Term a) { return Term::apply("not", {std::move(a)}); }
Term X() { return Term::var(0); }
Term Y() { return Term::var(1); }
Term Z() { return Term::var(2); }

Operation projection_op(const std::string& name, int size, int coord) {
    Operation op;
    op.name = name;
    op.arity = 3;
    op.table.resize(size_t(size) * size * size);
    size_t flat = 0;
    for (int x = 0; x < size; ++x)
        for (int y = 0; y < size; ++y)
            for (int z = 0; z < size; ++z) {
                int v[3] = {x, y, z};
                op.table[flat++] = v[coord];
            }
    return op;
}

}  // namespace

FiniteAlgebra make_chain(int k) {
    if (k < 1) throw Error("chain needs k >= 1");
    FiniteAlgebra a;
    a.name = "C" + std::to_string(k);
    a.size = k;
    Operation meet{"meet", 2, {}}, join{"join", 2, {}};
    for (int x = 0; x < k; ++x)
        for (int y = 0; y < k; ++y) {
            meet.table.push_back(std::min(x, y));
            join.table.push_back(std::max(x, y));
        }
    a.operations = {std::move(meet), std::move(join)};
    return a;
}

FiniteAlgebra make_bool2() {
    FiniteAlgebra a;
    a.name = "2";
    a.size = 2;
    a.operations = {
        Operation{"meet", 2, {0, 0, 0, 1}},
        Operation{"join", 2, {0, 1, 1, 1}},
        Operation{"not", 1, {1, 0}},
    };
    return a;
}

FiniteAlgebra make_bool4() {
    // elements as bit pairs: 0 -> 00, 1 -> 01, 1' -> 10, 2 -> 11
    FiniteAlgebra a;
    a.name = "4";
    a.size = 4;
    a.element_names = {"0", "1", "1'", "2"};
    Operation meet{"meet", 2, {}}, join{"join", 2, {}}, cmpl{"not", 1, {}};
    for (int x = 0; x < 4; ++x) {
        for (int y = 0; y < 4; ++y) {
            meet.table.push_back(x & y);
            join.table.push_back(x | y);
        }
        cmpl.table.push_back(~x & 3);
    }
    a.operations = {std::move(meet), std::move(join), std::move(cmpl)};
    return a;
}

FiniteAlgebra make_base(const std::string& kind) {
    if (kind == "bool2") return make_bool2();
    if (kind == "bool4") return make_bool4();
    if (kind.rfind("chain:", 0) == 0) return make_chain(std::stoi(kind.substr(6)));
    throw Error("unknown base kind '" + kind + "' (chain:k | bool2 | bool4)");
}

std::optional<ReductKind> reduct_kind_from_name(const std::string& name) {
    if (name == "bak") return ReductKind::Bak;
    if (name == "ba") return ReductKind::Ba;
    if (name == "lin") return ReductKind::Lin;
    if (name == "ain") return ReductKind::Ain;
    if (name == "lin-mid") return ReductKind::LinMid;
    if (name == "ain-mid") return ReductKind::AinMid;
    if (name == "ain-star") return ReductKind::AinStar;
    return std::nullopt;
}

FiniteAlgebra make_reduct(ReductKind kind, const FiniteAlgebra& base, int n, int i) {
    const bool boolean =
        kind == ReductKind::Ba || kind == ReductKind::Ain || kind == ReductKind::AinMid ||
        kind == ReductKind::AinStar;
    if (boolean && base.operation_index("not") < 0)
        throw Error("Boolean reduct needs a complement operation on the base");
    if (base.operation_index("meet") < 0 || base.operation_index("join") < 0)
        throw Error("reduct base needs meet and join");

    // the second argument as it enters the lattice terms
    Term y_low = boolean ? T_not(Y()) : Y();

    Term lower = T_meet(X(), T_join(y_low, Z()));   // x(y+z) resp. x(y'+z)
    Term middle = T_meet(X(), Z());                 // xz
    Term upper = T_meet(Z(), T_join(y_low, X()));   // z(y+x) resp. z(y'+x)
    if (kind == ReductKind::AinStar) upper = T_meet(Z(), T_join(Y(), X()));

    FiniteAlgebra out;
    out.size = base.size;
    out.element_names = base.element_names;

    auto op_name = [](int h) { return "t" + std::to_string(h); };

    switch (kind) {
        case ReductKind::Bak:
        case ReductKind::Ba: {
            if (n < 3) throw Error("bak/ba reducts need n >= 3");
            out.name = base.name + "^r";
            for (int h = 1; h <= n - 1; ++h) {
                const Term& f = (h == 1) ? lower : (h == n - 1 ? upper : middle);
                out.operations.push_back(table_from_formula(op_name(h), base, f));
            }
            return out;
        }
        case ReductKind::Lin:
        case ReductKind::Ain:
        case ReductKind::AinStar: {
            if (n < 2 || i <= 0 || 2 * i >= n)
                throw Error("index out of range: need 0 < i < n/2");
            out.name = base.name + "^{" + std::to_string(i) + "," + std::to_string(n) + "}";
            for (int h = 1; h <= n - 1; ++h) {
                Term f;
                if (h < i) f = X();
                else if (h == i) f = lower;
                else if (h < n - i) f = middle;
                else if (h == n - i) f = upper;
                else f = Z();
                out.operations.push_back(table_from_formula(op_name(h), base, f));
            }
            return out;
        }
        case ReductKind::LinMid:
        case ReductKind::AinMid: {
            if (n < 2 || n % 2 != 0) throw Error("mid reducts need even n");
            const int mid = n / 2;
            out.name = base.name + "^{" + std::to_string(mid) + "," + std::to_string(n) + "}";
            Term maj = T_join(T_join(T_meet(X(), y_low), T_meet(X(), Z())), T_meet(y_low, Z()));
            for (int h = 1; h <= n - 1; ++h) {
                Term f = (h < mid) ? X() : (h == mid ? maj : Z());
                out.operations.push_back(table_from_formula(op_name(h), base, f));
            }
            return out;
        }
    }
    throw Error("unknown reduct kind");
}

FiniteAlgebra plus_wrap(const FiniteAlgebra& algebra) {
    for (const Operation& op : algebra.operations)
        if (op.arity != 3) throw Error("plus_wrap needs ternary operations only");
    const int m = static_cast<int>(algebra.operations.size());
    FiniteAlgebra out;
    out.name = algebra.name + "+";
    out.size = algebra.size;
    out.element_names = algebra.element_names;
    out.operations.push_back(projection_op("t0", algebra.size, 0));
    for (int h = 0; h < m; ++h) {
        Operation op = algebra.operations[h];
        op.name = "t" + std::to_string(h + 1);
        out.operations.push_back(std::move(op));
    }
    out.operations.push_back(projection_op("t" + std::to_string(m + 1), algebra.size, 2));
    return out;
}

FiniteAlgebra shift_pad(const FiniteAlgebra& d_algebra, bool plus) {
    for (const Operation& op : d_algebra.operations)
        if (op.arity != 3) throw Error("shift_pad needs ternary operations only");
    const int m = static_cast<int>(d_algebra.operations.size());
    if (m == 0) throw Error("shift_pad: no operations");
    FiniteAlgebra out;
    out.name = d_algebra.name + ">>1";
    out.size = d_algebra.size;
    out.element_names = d_algebra.element_names;
    if (plus) out.operations.push_back(projection_op("t0", d_algebra.size, 0));
    for (int h = 0; h < m; ++h) {
        Operation op = d_algebra.operations[h];
        op.name = "t" + std::to_string(h + 1);
        out.operations.push_back(std::move(op));
    }
    if (plus)
        out.operations.push_back(projection_op("t" + std::to_string(m + 1), d_algebra.size, 2));
    return out;
}

// ---------------------------------------------------------------------

namespace {

uint64_t tuple_key(std::span<const Element> tuple, std::span<const int> sizes) {
    uint64_t k = 0;
    for (size_t i = 0; i < tuple.size(); ++i) k = k * sizes[i] + tuple[i];
    return k;
}

}  // namespace

int BOfAd::classify(std::span<const Element> t) const {
    if (t[1] == zeros[1] && t[3] == a) return 1;
    if (t[0] == zeros[0] && t[1] == zeros[1]) return 2;
    if (t[0] == zeros[0] && t[3] == d) return 3;
    if (t[2] == zeros[2]) return 4;
    return 0;
}

int BOfAd::index_of(std::span<const Element> tuple) const {
    std::vector<Element> key(tuple.begin(), tuple.end());
    auto it = std::lower_bound(elements.begin(), elements.end(), key);
    if (it == elements.end() || *it != key) return -1;
    return static_cast<int>(it - elements.begin());
}

std::vector<Element> BOfAd::eval(int op_index, std::span<const int> arg_indices) const {
    std::vector<Element> out(4);
    std::vector<Element> args(3);
    for (int f = 0; f < 4; ++f) {
        for (int p = 0; p < 3; ++p) args[p] = elements[arg_indices[p]][f];
        out[f] = factors[f].apply(factors[f].operations[op_index], args);
    }
    return out;
}

FiniteAlgebra BOfAd::materialize(size_t max_table_entries) const {
    const size_t m = elements.size();
    const size_t ops = factors[0].operations.size();
    if (m * m * m * ops > max_table_entries)
        throw Error("B(a,d) too large to materialize: " + std::to_string(m) + " elements");
    FiniteAlgebra out;
    out.name = "B(a,d)";
    out.size = static_cast<int>(m);
    std::vector<int> sizes;
    for (const auto& f : factors) sizes.push_back(f.size);
    std::unordered_map<uint64_t, int> index;
    for (size_t i = 0; i < m; ++i) index[tuple_key(elements[i], sizes)] = static_cast<int>(i);
    for (size_t oi = 0; oi < ops; ++oi) {
        Operation op;
        op.name = factors[0].operations[oi].name;
        op.arity = 3;
        op.table.resize(m * m * m);
        size_t flat = 0;
        std::vector<int> args(3);
        for (size_t x = 0; x < m; ++x)
            for (size_t y = 0; y < m; ++y)
                for (size_t z = 0; z < m; ++z) {
                    args = {static_cast<int>(x), static_cast<int>(y), static_cast<int>(z)};
                    std::vector<Element> v = eval(static_cast<int>(oi), args);
                    auto it = index.find(tuple_key(v, sizes));
                    if (it == index.end())
                        throw Error("closure violated while materializing B(a,d)");
                    op.table[flat++] = it->second;
                }
        out.operations.push_back(std::move(op));
    }
    return out;
}

BOfAd make_b_of_ad(const std::vector<FiniteAlgebra>& factors, Element a, Element d,
                   std::array<Element, 3> zeros) {
    if (factors.size() != 4) throw Error("B(a,d) needs exactly four factor algebras");
    const FiniteAlgebra& a4 = factors[3];
    const size_t nops = factors[0].operations.size();
    for (const FiniteAlgebra& f : factors) {
        if (f.operations.size() != nops) throw Error("B(a,d): signature mismatch");
        for (size_t i = 0; i < nops; ++i) {
            if (f.operations[i].arity != 3) throw Error("B(a,d): operations must be ternary");
            if (f.operations[i].name != factors[0].operations[i].name)
                throw Error("B(a,d): signature mismatch");
        }
    }
    const int n = static_cast<int>(nops) + 1;
    if (n < 3) throw Error("B(a,d) needs n >= 3 (at least two operations)");
    if (a < 0 || a >= a4.size || d < 0 || d >= a4.size)
        throw Error("B(a,d): a or d outside the fourth factor");
    for (int j = 0; j < 3; ++j)
        if (zeros[j] < 0 || zeros[j] >= factors[j].size)
            throw Error("B(a,d): zero element outside factor " + std::to_string(j + 1));

    // premise equations on A1..A3
    std::vector<Element> args(3);
    for (int j = 0; j < 3; ++j) {
        const FiniteAlgebra& f = factors[j];
        const Element zero = zeros[j];
        for (int h = 1; h <= n - 2; ++h) {
            const Operation& op = f.operations[h - 1];
            for (int y = 0; y < f.size; ++y)
                for (int z = 0; z < f.size; ++z) {
                    args = {zero, y, z};
                    if (f.apply(op, args) != zero)
                        throw Error("B(a,d) premise fails: t" + std::to_string(h) + "(0,y,z) != 0 on factor " +
                                    std::to_string(j + 1) + " at y=" + std::to_string(y) +
                                    ", z=" + std::to_string(z));
                }
        }
        for (int h = 2; h <= n - 1; ++h) {
            const Operation& op = f.operations[h - 1];
            for (int x = 0; x < f.size; ++x)
                for (int y = 0; y < f.size; ++y) {
                    args = {x, y, zero};
                    if (f.apply(op, args) != zero)
                        throw Error("B(a,d) premise fails: t" + std::to_string(h) + "(x,y,0) != 0 on factor " +
                                    std::to_string(j + 1) + " at x=" + std::to_string(x) +
                                    ", y=" + std::to_string(y));
                }
        }
    }
    // premise equations on A4
    for (int x = 0; x < a4.size; ++x)
        for (int y = 0; y < a4.size; ++y)
            for (int z = 0; z < a4.size; ++z) {
                args = {x, y, z};
                if (a4.apply(a4.operations[0], args) != x)
                    throw Error("B(a,d) premise fails: t1 is not the first projection on A4");
                if (a4.apply(a4.operations[nops - 1], args) != z)
                    throw Error("B(a,d) premise fails: t" + std::to_string(n - 1) +
                                " is not the third projection on A4");
            }
    for (int h = 2; h <= n - 2; ++h)
        for (int x = 0; x < a4.size; ++x)
            for (int y = 0; y < a4.size; ++y) {
                args = {x, y, x};
                if (a4.apply(a4.operations[h - 1], args) != x)
                    throw Error("B(a,d) premise fails: t" + std::to_string(h) +
                                "(x,y,x) != x on A4 at x=" + std::to_string(x) +
                                ", y=" + std::to_string(y));
            }

    BOfAd b;
    b.factors = factors;
    b.zeros = zeros;
    b.a = a;
    b.d = d;

    std::set<std::vector<Element>> members;
    const int s1 = factors[0].size, s2 = factors[1].size, s3 = factors[2].size,
              s4 = factors[3].size;
    for (int x1 = 0; x1 < s1; ++x1)
        for (int x3 = 0; x3 < s3; ++x3) members.insert({x1, zeros[1], x3, a});  // I
    for (int x3 = 0; x3 < s3; ++x3)
        for (int x4 = 0; x4 < s4; ++x4) members.insert({zeros[0], zeros[1], x3, x4});  // II
    for (int x2 = 0; x2 < s2; ++x2)
        for (int x3 = 0; x3 < s3; ++x3) members.insert({zeros[0], x2, x3, d});  // III
    for (int x1 = 0; x1 < s1; ++x1)
        for (int x2 = 0; x2 < s2; ++x2)
            for (int x4 = 0; x4 < s4; ++x4) members.insert({x1, x2, zeros[2], x4});  // IV
    b.elements.assign(members.begin(), members.end());

    // Closure re-verification. For a fixed pair (x, z) in B^2 the middle
    // argument may range over the whole product (the type analysis never
    // uses membership of y), so the coordinates decouple: collect the
    // per-coordinate result sets and test every combination of the
    // type-relevant abstractions. If that stronger check ever fails, fall
    // back to scanning y in B before declaring a violation.
    const size_t m = b.elements.size();
    for (size_t oi = 0; oi < nops; ++oi) {
        for (size_t xi = 0; xi < m; ++xi) {
            for (size_t zi = 0; zi < m; ++zi) {
                const auto& xt = b.elements[xi];
                const auto& zt = b.elements[zi];
                // per-coordinate achievable abstractions
                bool zero_yes[3] = {false, false, false}, zero_no[3] = {false, false, false};
                bool has_a = false, has_d = false, has_other = false;
                for (int f = 0; f < 4; ++f) {
                    const FiniteAlgebra& fac = factors[f];
                    const Operation& op = fac.operations[oi];
                    for (int y = 0; y < fac.size; ++y) {
                        args = {xt[f], y, zt[f]};
                        Element v = fac.apply(op, args);
                        if (f < 3) {
                            if (v == zeros[f]) zero_yes[f] = true;
                            else zero_no[f] = true;
                        } else {
                            if (v == a) has_a = true;
                            if (v == d) has_d = true;
                            if (v != a && v != d) has_other = true;
                        }
                    }
                }
                // enumerate abstract combinations and look for one that
                // escapes all four type patterns
                bool bad = false;
                for (int c1 = 0; c1 < 2 && !bad; ++c1) {
                    if ((c1 ? zero_yes[0] : zero_no[0]) == false) continue;
                    bool z1 = c1;
                    for (int c2 = 0; c2 < 2 && !bad; ++c2) {
                        if ((c2 ? zero_yes[1] : zero_no[1]) == false) continue;
                        bool z2 = c2;
                        for (int c3 = 0; c3 < 2 && !bad; ++c3) {
                            if ((c3 ? zero_yes[2] : zero_no[2]) == false) continue;
                            bool z3 = c3;
                            for (int c4 = 0; c4 < 3 && !bad; ++c4) {
                                bool is_a, is_d;
                                if (c4 == 0) {
                                    if (!has_a) continue;
                                    is_a = true;
                                    is_d = (a == d);
                                } else if (c4 == 1) {
                                    if (!has_d || a == d) continue;
                                    is_a = false;
                                    is_d = true;
                                } else {
                                    if (!has_other) continue;
                                    is_a = is_d = false;
                                }
                                bool in_b = (z2 && is_a) || (z1 && z2) || (z1 && is_d) || z3;
                                if (!in_b) bad = true;
                            }
                        }
                    }
                }
                if (bad) {
                    // exact check with y restricted to B
                    for (size_t yi = 0; yi < m; ++yi) {
                        std::vector<Element> v(4);
                        for (int f = 0; f < 4; ++f) {
                            args = {xt[f], b.elements[yi][f], zt[f]};
                            v[f] = factors[f].apply(factors[f].operations[oi], args);
                        }
                        if (b.classify(v) == 0)
                            throw Error("B(a,d) closure failure at operation " +
                                        factors[0].operations[oi].name);
                    }
                }
            }
        }
    }
    return b;
}

// ---------------------------------------------------------------------

std::vector<FiniteAlgebra> variety_preset(char name, int n) {
    if (n < 2) throw Error("variety preset needs n >= 2");
    if (name == 'd' && n < 4) throw Error("preset d needs n >= 4");
    const int ell = (n % 2 == 0) ? n / 2 : (n - 1) / 2;
    FiniteAlgebra chain2 = make_chain(2);
    FiniteAlgebra bool2 = make_bool2();

    auto gen = [&](bool boolean, int i) {
        const FiniteAlgebra& base = boolean ? bool2 : chain2;
        FiniteAlgebra out;
        if (n % 2 == 0 && i == ell)
            out = make_reduct(boolean ? ReductKind::AinMid : ReductKind::LinMid, base, n);
        else
            out = make_reduct(boolean ? ReductKind::Ain : ReductKind::Lin, base, n, i);
        out.name = std::string(boolean ? "2" : "C") + "^{" + std::to_string(i) + "," +
                   std::to_string(n) + "}";
        return out;
    };

    std::vector<FiniteAlgebra> gens;
    for (int i = 1; i <= ell; ++i) {
        bool boolean;
        switch (name) {
            case 'a': boolean = (i % 2 == 0); break;
            case 'b': boolean = (i % 2 == 1); break;
            case 'c': boolean = false; break;
            case 'd': boolean = (i == 1); break;
            case 'g': boolean = true; break;
            default: throw Error("unknown variety preset; use a, b, c, d or g");
        }
        gens.push_back(gen(boolean, i));
    }
    return gens;
}

// ---------------------------------------------------------------------

namespace {

RelExpr V(const char* name) { return RelExpr::variable(name); }

RelExpr seq(std::vector<RelExpr> parts) {
    RelExpr acc = parts[0];
    for (size_t i = 1; i < parts.size(); ++i) acc = RelExpr::compose(acc, parts[i]);
    return acc;
}

RelExpr meet2(RelExpr a, RelExpr b) { return RelExpr::meet(std::move(a), std::move(b)); }

// alpha(beta o alpha gamma o beta)
RelExpr lhs_modular() {
    return meet2(V("a"), seq({V("b"), meet2(V("a"), V("g")), V("b")}));
}
// alpha(beta o gamma)
RelExpr lhs_distributive() { return meet2(V("a"), RelExpr::compose(V("b"), V("g"))); }

RelExpr ab() { return meet2(V("a"), V("b")); }
RelExpr ag() { return meet2(V("a"), V("g")); }

struct FactorCongruences {
    std::vector<Partition> alpha, beta, gamma;  // one per factor
};

void check_d_side(const DSideInput& input, const RelExpr& lhs, const char* kind) {
    RelBinding bind;
    bind["a"] = BinaryRelation::from_partition(input.alpha);
    bind["b"] = BinaryRelation::from_partition(input.beta);
    bind["g"] = BinaryRelation::from_partition(input.gamma);
    BinaryRelation l = eval_rel_expr(lhs, bind, &input.d_algebra);
    if (!l.get(input.a_tilde, input.d_tilde))
        throw Error(std::string(kind) +
                    ": vacuous instance, (a~,d~) is not in the left side on D");
    BinaryRelation c = eval_rel_expr(input.chi, bind, &input.d_algebra);
    if (c.get(input.a_tilde, input.d_tilde))
        throw Error(std::string(kind) +
                    ": vacuous instance, (a~,d~) already lies in chi on D");
    if (!is_congruence(input.d_algebra, input.alpha) ||
        !is_congruence(input.d_algebra, input.beta) ||
        !is_congruence(input.d_algebra, input.gamma))
        throw Error(std::string(kind) + ": the D-side bindings must be congruences");
}

// beta-path witnesses b~ (and c~) on the D side, lexicographically least
std::pair<Element, Element> bc_witness_modular(const DSideInput& in) {
    BinaryRelation beta = BinaryRelation::from_partition(in.beta);
    BinaryRelation ag = BinaryRelation::from_partition(in.alpha)
                            .meet(BinaryRelation::from_partition(in.gamma));
    for (Element b = 0; b < in.d_algebra.size; ++b) {
        if (!beta.get(in.a_tilde, b)) continue;
        for (Element c = 0; c < in.d_algebra.size; ++c)
            if (ag.get(b, c) && beta.get(c, in.d_tilde)) return {b, c};
    }
    throw Error("no beta/alpha-gamma path from a~ to d~ on D");
}

Element b_witness_distributive(const DSideInput& in) {
    BinaryRelation beta = BinaryRelation::from_partition(in.beta);
    BinaryRelation gamma = BinaryRelation::from_partition(in.gamma);
    for (Element b = 0; b < in.d_algebra.size; ++b)
        if (beta.get(in.a_tilde, b) && gamma.get(b, in.d_tilde)) return b;
    throw Error("no beta o gamma path from a~ to d~ on D");
}

CounterexampleInstance assemble(const std::string& kind, std::vector<FiniteAlgebra> factors,
                                Element a, Element d, const FactorCongruences& cong,
                                const std::vector<std::pair<std::string, std::vector<Element>>>& named,
                                Identity identity,
                                const std::string& wit_from, const std::string& wit_to) {
    BOfAd b = make_b_of_ad(factors, a, d);
    CounterexampleInstance inst;
    inst.kind = kind;
    inst.factors = std::move(factors);
    inst.elements = b.elements;
    inst.identity = std::move(identity);

    std::span<const Partition> pa(cong.alpha), pb(cong.beta), pg(cong.gamma);
    inst.bindings.emplace_back("alpha", induced_congruence_tuples(pa, inst.elements));
    inst.bindings.emplace_back("beta", induced_congruence_tuples(pb, inst.elements));
    inst.bindings.emplace_back("gamma", induced_congruence_tuples(pg, inst.elements));

    int from = -1, to = -1;
    for (const auto& [nm, tuple] : named) {
        int idx = b.index_of(tuple);
        if (idx < 0) throw Error(kind + ": designated element " + nm + " not in B");
        inst.named_elements.emplace_back(nm, idx);
        if (nm == wit_from) from = idx;
        if (nm == wit_to) to = idx;
    }
    inst.expected_witness = {from, to};

    const size_t m = inst.elements.size();
    const size_t ops = inst.factors[0].operations.size();
    if (m * m * m * ops <= (size_t(1) << 24)) inst.algebra = b.materialize();
    return inst;
}

}  // namespace

const Partition& CounterexampleInstance::binding(const std::string& name) const {
    for (const auto& [nm, p] : bindings)
        if (nm == name) return p;
    throw Error("no binding named '" + name + "'");
}

RelBinding CounterexampleInstance::rel_binding() const {
    RelBinding bind;
    bind["a"] = BinaryRelation::from_partition(binding("alpha"));
    bind["b"] = BinaryRelation::from_partition(binding("beta"));
    bind["g"] = BinaryRelation::from_partition(binding("gamma"));
    return bind;
}

std::optional<std::pair<int, int>> CounterexampleInstance::run() const {
    const FiniteAlgebra* alg = algebra ? &*algebra : nullptr;
    return check_inclusion(identity, rel_binding(), alg);
}

bool CounterexampleInstance::expected_pair_fails() const {
    const FiniteAlgebra* alg = algebra ? &*algebra : nullptr;
    RelBinding bind = rel_binding();
    BinaryRelation l = eval_rel_expr(identity.lhs, bind, alg);
    BinaryRelation r = eval_rel_expr(identity.rhs, bind, alg);
    auto [from, to] = expected_witness;
    return l.get(from, to) && !r.get(from, to);
}

CounterexampleInstance witness_baker_plus() {
    const int n = 3;
    FiniteAlgebra a12 = make_reduct(ReductKind::Bak, make_chain(4), n);
    FiniteAlgebra a3 = make_reduct(ReductKind::Bak, make_chain(2), n);
    FiniteAlgebra a4;
    a4.name = "triv";
    a4.size = 1;
    a4.operations = {Operation{"t1", 3, {0}}, Operation{"t2", 3, {0}}};

    FactorCongruences cong;
    Partition beta_star = Partition::from_blocks(4, {{0, 1}, {2, 3}});
    Partition gamma_star = Partition::from_blocks(4, {{0}, {1, 2}, {3}});
    cong.alpha = {Partition::full(4), Partition::full(4), Partition::identity(2),
                  Partition::full(1)};
    cong.beta = {beta_star, beta_star, Partition::full(2), Partition::full(1)};
    cong.gamma = {gamma_star, gamma_star, Partition::identity(2), Partition::full(1)};

    Identity ident;
    ident.lhs = lhs_modular();
    ident.rhs = RelExpr::alt_chain(ag(), ab(), 5);

    return assemble("baker-plus", {a12, a12, a3, a4}, 0, 0, cong,
                    {{"c0", {3, 0, 1, 0}},
                     {"c1", {2, 1, 0, 0}},
                     {"c2", {1, 2, 0, 0}},
                     {"c3", {0, 3, 1, 0}}},
                    std::move(ident), "c0", "c3");
}

namespace {

CounterexampleInstance witness_thmbak_impl(const DSideInput& input, Identity identity,
                                           const std::string& kind) {
    check_d_side(input, lhs_modular(), kind.c_str());
    auto [b_elem, c_elem] = bc_witness_modular(input);

    const int n = static_cast<int>(input.d_algebra.operations.size()) + 1;
    FiniteAlgebra a12 = make_reduct(ReductKind::Bak, make_chain(4), n);
    FiniteAlgebra a3 = make_reduct(ReductKind::Bak, make_chain(2), n);
    FiniteAlgebra a4 = shift_pad(input.d_algebra, false);

    FactorCongruences cong;
    Partition beta_star = Partition::from_blocks(4, {{0, 1}, {2, 3}});
    Partition gamma_star = Partition::from_blocks(4, {{0}, {1, 2}, {3}});
    cong.alpha = {Partition::full(4), Partition::full(4), Partition::identity(2), input.alpha};
    cong.beta = {beta_star, beta_star, Partition::full(2), input.beta};
    cong.gamma = {gamma_star, gamma_star, Partition::identity(2), input.gamma};

    return assemble(kind, {a12, a12, a3, a4}, input.a_tilde, input.d_tilde, cong,
                    {{"c0", {3, 0, 1, input.a_tilde}},
                     {"c1", {2, 1, 0, b_elem}},
                     {"c2", {1, 2, 0, c_elem}},
                     {"c3", {0, 3, 1, input.d_tilde}}},
                    std::move(identity), "c0", "c3");
}

}  // namespace

CounterexampleInstance witness_thmbak(const DSideInput& input) {
    Identity ident;
    ident.lhs = lhs_modular();
    ident.rhs = seq({V("g"), ab(), V("g"), input.chi, V("g"), ab(), V("g")});
    return witness_thmbak_impl(input, std::move(ident), "thmbak");
}

CounterexampleInstance witness_thmbak_r(const DSideInput& input, int r) {
    if (r % 2 != 1) throw Error("thmbak needs odd r");
    DSideInput in = input;
    in.chi = RelExpr::alt_chain(ab(), ag(), r);
    Identity ident;
    ident.lhs = lhs_modular();
    ident.rhs = RelExpr::alt_chain(ag(), ab(), r + 6);
    return witness_thmbak_impl(in, std::move(ident), "thmbak-r" + std::to_string(r));
}

CounterexampleInstance witness_thmbakbis(const DSideInput& input) {
    check_d_side(input, lhs_distributive(), "thmbakbis");
    Element b_elem = b_witness_distributive(input);

    const int n = static_cast<int>(input.d_algebra.operations.size()) + 1;
    FiniteAlgebra a12 = make_reduct(ReductKind::Bak, make_chain(3), n);
    FiniteAlgebra a3 = make_reduct(ReductKind::Bak, make_chain(2), n);
    FiniteAlgebra a4 = shift_pad(input.d_algebra, false);

    FactorCongruences cong;
    Partition beta_star = Partition::from_blocks(3, {{0}, {1, 2}});
    Partition gamma_star = Partition::from_blocks(3, {{0, 1}, {2}});
    cong.alpha = {Partition::full(3), Partition::full(3), Partition::identity(2), input.alpha};
    cong.beta = {beta_star, gamma_star, Partition::full(2), input.beta};
    cong.gamma = {gamma_star, beta_star, Partition::full(2), input.gamma};

    RelExpr agb = meet2(V("a"), RelExpr::compose(V("g"), V("b")));
    Identity ident;
    ident.lhs = lhs_distributive();
    ident.rhs = seq({agb, input.chi, agb});

    return assemble("thmbakbis", {a12, a12, a3, a4}, input.a_tilde, input.d_tilde, cong,
                    {{"c0", {2, 0, 1, input.a_tilde}},
                     {"c1", {1, 1, 0, b_elem}},
                     {"c2", {0, 2, 1, input.d_tilde}}},
                    std::move(ident), "c0", "c2");
}

namespace {

RelExpr a_delta(char delta) {
    if (delta != 'b' && delta != 'g') throw Error("delta/epsilon must be 'b' or 'g'");
    return meet2(V("a"), V(delta == 'b' ? "b" : "g"));
}

}  // namespace

CounterexampleInstance witness_thmba_iii(const DSideInput& input, char delta, char epsilon) {
    check_d_side(input, lhs_modular(), "thmba-iii");
    auto [b_elem, c_elem] = bc_witness_modular(input);

    const int n = static_cast<int>(input.d_algebra.operations.size()) + 1;
    FiniteAlgebra a12 = make_reduct(ReductKind::Ba, make_bool4(), n);
    FiniteAlgebra a3 = make_reduct(ReductKind::Ba, make_bool2(), n);
    FiniteAlgebra a4 = shift_pad(input.d_algebra, false);

    FactorCongruences cong;
    Partition beta_star = Partition::from_blocks(4, {{1, 3}, {0, 2}});   // {1,2},{0,1'}
    Partition gamma_star = Partition::from_blocks(4, {{0, 1}, {2, 3}});  // {0,1},{1',2}
    cong.alpha = {Partition::full(4), Partition::full(4), Partition::identity(2), input.alpha};
    cong.beta = {beta_star, beta_star, Partition::full(2), input.beta};
    cong.gamma = {gamma_star, gamma_star, Partition::full(2), input.gamma};

    Identity ident;
    ident.lhs = lhs_modular();
    ident.rhs = seq({a_delta(delta), input.chi, a_delta(epsilon)});

    return assemble("thmba-iii", {a12, a12, a3, a4}, input.a_tilde, input.d_tilde, cong,
                    {{"c0", {2, 0, 1, input.a_tilde}},
                     {"c1", {1, 0, 0, b_elem}},
                     {"c2", {0, 1, 0, c_elem}},
                     {"c3", {0, 2, 1, input.d_tilde}}},
                    std::move(ident), "c0", "c3");
}

CounterexampleInstance witness_thmba_iv(const DSideInput& input, char delta, char epsilon) {
    check_d_side(input, lhs_distributive(), "thmba-iv");
    Element b_elem = b_witness_distributive(input);

    const int n = static_cast<int>(input.d_algebra.operations.size()) + 1;
    FiniteAlgebra a12 = make_reduct(ReductKind::Ba, make_bool4(), n);
    FiniteAlgebra a3 = make_reduct(ReductKind::Ba, make_bool2(), n);
    FiniteAlgebra a4 = shift_pad(input.d_algebra, false);

    FactorCongruences cong;
    Partition beta_star = Partition::from_blocks(4, {{1, 3}, {0, 2}});
    Partition gamma_star = Partition::from_blocks(4, {{0, 1}, {2, 3}});
    cong.alpha = {Partition::full(4), Partition::full(4), Partition::identity(2), input.alpha};
    cong.beta = {beta_star, gamma_star, Partition::full(2), input.beta};
    cong.gamma = {gamma_star, beta_star, Partition::full(2), input.gamma};

    Identity ident;
    ident.lhs = lhs_distributive();
    ident.rhs = seq({a_delta(delta), input.chi, a_delta(epsilon)});

    return assemble("thmba-iv", {a12, a12, a3, a4}, input.a_tilde, input.d_tilde, cong,
                    {{"c0", {2, 0, 1, input.a_tilde}},
                     {"c1", {1, 1, 0, b_elem}},
                     {"c2", {0, 2, 1, input.d_tilde}}},
                    std::move(ident), "c0", "c2");
}

CounterexampleInstance witness_induction(char side, int n, int cap) {
    if (side != 'a' && side != 'b') throw Error("induction side must be 'a' or 'b'");
    if (n < 4 || n % 2 != 0) throw Error("induction needs even n >= 4");
    if (n > cap) throw Error("induction capped at n = " + std::to_string(cap));

    DSideInput in;
    if (side == 'a') {
        if (n == 4) {
            // base: the two-element Pixley algebra with outer projections,
            // failing 1-step modularity
            in.d_algebra = plus_wrap(make_reduct(ReductKind::AinMid, make_bool2(), 2));
            in.alpha = Partition::full(2);
            in.beta = Partition::identity(2);
            in.gamma = Partition::full(2);
            in.a_tilde = 0;
            in.d_tilde = 1;
        } else {
            CounterexampleInstance prev = witness_induction('b', n - 2, cap);
            if (!prev.algebra)
                throw Error("induction: intermediate B too large to materialize");
            in.d_algebra = plus_wrap(*prev.algebra);
            in.alpha = prev.binding("alpha");
            in.beta = prev.binding("beta");
            in.gamma = prev.binding("gamma");
            in.a_tilde = prev.expected_witness.first;
            in.d_tilde = prev.expected_witness.second;
        }
        CounterexampleInstance inst = witness_thmbak_r(in, 2 * n - 7);
        inst.kind = "induction-a-" + std::to_string(n);
        return inst;
    }

    if (n == 4) {
        // base: the majority reduct of the four-element chain with outer
        // projections, failing 3-step reversed modularity
        in.d_algebra = plus_wrap(make_reduct(ReductKind::LinMid, make_chain(4), 2));
        in.alpha = Partition::full(4);
        in.beta = Partition::from_blocks(4, {{0, 1}, {2, 3}});
        in.gamma = Partition::from_blocks(4, {{0}, {1, 2}, {3}});
        in.a_tilde = 0;
        in.d_tilde = 3;
    } else {
        CounterexampleInstance prev = witness_induction('a', n - 2, cap);
        if (!prev.algebra)
            throw Error("induction: intermediate B too large to materialize");
        in.d_algebra = plus_wrap(*prev.algebra);
        in.alpha = prev.binding("alpha");
        in.beta = prev.binding("beta");
        in.gamma = prev.binding("gamma");
        in.a_tilde = prev.expected_witness.first;
        in.d_tilde = prev.expected_witness.second;
    }
    in.chi = RelExpr::alt_chain(ag(), ab(), 2 * n - 5);
    CounterexampleInstance inst = witness_thmba_iii(in, 'b', 'b');
    inst.kind = "induction-b-" + std::to_string(n);
    // collapse a beta o chi o beta presentation into the plain chain
    inst.identity.rhs = RelExpr::alt_chain(ab(), ag(), 2 * n - 3);
    return inst;
}

// ---------------------------------------------------------------------

PolinFixture polin_fixture() {
    PolinFixture fx;
    fx.external_algebra.name = "A_e";
    fx.external_algebra.size = 2;
    fx.external_algebra.operations = {
        Operation{"meet", 2, {0, 0, 0, 1}},
        Operation{"plus", 1, {1, 0}},   // sigma
        Operation{"prime", 1, {0, 1}},  // identity
    };
    fx.internal_algebra.name = "A_i";
    fx.internal_algebra.size = 2;
    fx.internal_algebra.operations = {
        Operation{"meet", 2, {0, 0, 0, 1}},
        Operation{"plus", 1, {1, 1}},   // constant 1
        Operation{"prime", 1, {1, 0}},  // sigma
    };

    auto plus_e = [](Term u, Term v) {
        return Term::apply("plus", {T_meet(Term::apply("plus", {std::move(u)}),
                                           Term::apply("plus", {std::move(v)}))});
    };
    auto plus_i = [](Term u, Term v) {
        return Term::apply("prime", {T_meet(Term::apply("prime", {std::move(u)}),
                                            Term::apply("prime", {std::move(v)}))});
    };
    Term yp = Term::apply("prime", {Y()});
    fx.terms[0] = T_meet(X(), plus_e(Y(), Z()));
    fx.terms[1] = plus_i(plus_i(T_meet(X(), Z()), T_meet(X(), yp)), T_meet(Z(), yp));
    fx.terms[2] = T_meet(Z(), plus_e(Y(), X()));
    return fx;
}

TermChain PolinFixture::jswitch_chain() const {
    TermChain chain;
    chain.condition = family_spec(Family::JSwitch, 4);
    chain.terms = {Term::var(0), terms[0], terms[1], terms[2], Term::var(2)};
    return chain;
}

}  // namespace maltsev
