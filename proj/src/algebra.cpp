#include "maltsev/algebra.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace maltsev {

int FiniteAlgebra::operation_index(std::string_view op_name) const {
    for (size_t i = 0; i < operations.size(); ++i)
        if (operations[i].name == op_name) return static_cast<int>(i);
    return -1;
}

const Operation& FiniteAlgebra::operation(std::string_view op_name) const {
    int idx = operation_index(op_name);
    if (idx < 0) throw Error("unknown operation '" + std::string(op_name) + "' in algebra '" + name + "'");
    return operations[idx];
}

Element FiniteAlgebra::apply(const Operation& op, std::span<const Element> args) const {
    if (static_cast<int>(args.size()) != op.arity)
        throw Error("arity mismatch applying '" + op.name + "': got " + std::to_string(args.size()) +
                    " arguments, need " + std::to_string(op.arity));
    size_t idx = 0;
    for (Element a : args) idx = idx * size + a;
    return op.table[idx];
}

Element FiniteAlgebra::apply(int op_index, std::span<const Element> args) const {
    return apply(operations[op_index], args);
}

std::string FiniteAlgebra::element_label(Element e) const {
    if (e >= 0 && e < static_cast<int>(element_names.size())) return element_names[e];
    return std::to_string(e);
}

FiniteAlgebra validate_algebra(FiniteAlgebra candidate) {
    if (candidate.size <= 0)
        throw Error("algebra size must be positive, got " + std::to_string(candidate.size));
    std::set<std::string> seen;
    for (const Operation& op : candidate.operations) {
        if (!seen.insert(op.name).second)
            throw Error("duplicate operation name '" + op.name + "'");
        if (op.arity < 0 || op.arity > kMaxArity)
            throw Error("operation '" + op.name + "': arity " + std::to_string(op.arity) +
                        " unsupported (0.." + std::to_string(kMaxArity) + ")");
        size_t expected = 1;
        for (int i = 0; i < op.arity; ++i) expected *= candidate.size;
        if (op.table.size() != expected)
            throw Error("operation '" + op.name + "': table length " + std::to_string(op.table.size()) +
                        " does not match size^arity = " + std::to_string(expected));
        for (Element e : op.table)
            if (e < 0 || e >= candidate.size)
                throw Error("operation '" + op.name + "': entry out of range: " + std::to_string(e));
    }
    return candidate;
}

Term Term::var(int i) {
    Term t;
    t.kind = Kind::Variable;
    t.index = i;
    return t;
}

Term Term::constant(Element e) {
    Term t;
    t.kind = Kind::Constant;
    t.index = e;
    return t;
}

Term Term::apply(std::string op_name, std::vector<Term> arguments) {
    Term t;
    t.kind = Kind::Apply;
    t.op = std::move(op_name);
    t.args = std::move(arguments);
    return t;
}

int Term::variable_span() const {
    switch (kind) {
        case Kind::Variable: return index + 1;
        case Kind::Constant: return 0;
        case Kind::Apply: {
            int m = 0;
            for (const Term& a : args) m = std::max(m, a.variable_span());
            return m;
        }
    }
    return 0;
}

bool Term::operator==(const Term& other) const {
    if (kind != other.kind) return false;
    switch (kind) {
        case Kind::Variable:
        case Kind::Constant: return index == other.index;
        case Kind::Apply: return op == other.op && args == other.args;
    }
    return false;
}

std::string variable_name(int index) {
    static const char* names[] = {"x", "y", "z", "w"};
    if (index >= 0 && index < 4) return names[index];
    return "v" + std::to_string(index);
}

std::string term_to_string(const Term& t) {
    switch (t.kind) {
        case Term::Kind::Variable: return variable_name(t.index);
        case Term::Kind::Constant: return "#" + std::to_string(t.index);
        case Term::Kind::Apply: {
            std::string s = t.op;
            s += '(';
            for (size_t i = 0; i < t.args.size(); ++i) {
                if (i) s += ",";
                s += term_to_string(t.args[i]);
            }
            s += ')';
            return s;
        }
    }
    return "?";
}

Term substitute(const Term& t, std::span<const Term> replacements) {
    switch (t.kind) {
        case Term::Kind::Variable:
            if (t.index < static_cast<int>(replacements.size())) return replacements[t.index];
            return t;
        case Term::Kind::Constant: return t;
        case Term::Kind::Apply: {
            std::vector<Term> args;
            args.reserve(t.args.size());
            for (const Term& a : t.args) args.push_back(substitute(a, replacements));
            return Term::apply(t.op, std::move(args));
        }
    }
    return t;
}

Term rename_variables(const Term& t, std::span<const int> new_indices) {
    std::vector<Term> repl;
    repl.reserve(new_indices.size());
    for (int i : new_indices) repl.push_back(Term::var(i));
    return substitute(t, repl);
}

Element eval_term(const Term& t, const FiniteAlgebra& algebra,
                  std::span<const Element> assignment) {
    switch (t.kind) {
        case Term::Kind::Variable:
            if (t.index >= static_cast<int>(assignment.size()))
                throw Error("assignment does not cover variable " + variable_name(t.index));
            return assignment[t.index];
        case Term::Kind::Constant:
            if (t.index < 0 || t.index >= algebra.size)
                throw Error("constant " + std::to_string(t.index) + " outside universe of '" + algebra.name + "'");
            return t.index;
        case Term::Kind::Apply: {
            const Operation& op = algebra.operation(t.op);
            if (static_cast<int>(t.args.size()) != op.arity)
                throw Error("arity mismatch: '" + t.op + "' applied to " + std::to_string(t.args.size()) +
                            " arguments, declared arity " + std::to_string(op.arity));
            std::vector<Element> vals(t.args.size());
            for (size_t i = 0; i < t.args.size(); ++i)
                vals[i] = eval_term(t.args[i], algebra, assignment);
            return algebra.apply(op, vals);
        }
    }
    throw Error("malformed term");
}

Equation Equation::make(Term lhs, Term rhs) {
    Equation eq;
    eq.num_variables = std::max(lhs.variable_span(), rhs.variable_span());
    eq.lhs = std::move(lhs);
    eq.rhs = std::move(rhs);
    return eq;
}

std::string equation_to_string(const Equation& eq) {
    return term_to_string(eq.lhs) + " = " + term_to_string(eq.rhs);
}

std::optional<EquationWitness> check_equation(std::span<const FiniteAlgebra> algebras,
                                              const Equation& eq) {
    for (size_t ai = 0; ai < algebras.size(); ++ai) {
        const FiniteAlgebra& alg = algebras[ai];
        const int n = eq.num_variables;
        std::vector<Element> assignment(n, 0);
        while (true) {
            if (eval_term(eq.lhs, alg, assignment) != eval_term(eq.rhs, alg, assignment))
                return EquationWitness{static_cast<int>(ai), assignment};
            int pos = n - 1;
            while (pos >= 0 && assignment[pos] == alg.size - 1) assignment[pos--] = 0;
            if (pos < 0) break;
            ++assignment[pos];
        }
    }
    return std::nullopt;
}

std::optional<EquationWitness> check_equation(const FiniteAlgebra& algebra, const Equation& eq) {
    return check_equation(std::span<const FiniteAlgebra>(&algebra, 1), eq);
}

SubuniverseResult generate_subuniverse(const FiniteAlgebra& algebra,
                                       std::span<const Element> seeds) {
    if (seeds.empty()) throw Error("empty seed set");
    for (Element s : seeds)
        if (s < 0 || s >= algebra.size)
            throw Error("seed " + std::to_string(s) + " outside universe");

    std::vector<char> in_set(algebra.size, 0);
    std::vector<Element> members;
    for (Element s : seeds)
        if (!in_set[s]) {
            in_set[s] = 1;
            members.push_back(s);
        }

    // Closure passes: each pass evaluates every tuple with at least one
    // coordinate drawn from the frontier (elements added last pass).
    size_t settled = 0;
    std::vector<Element> args(kMaxArity);
    while (settled < members.size()) {
        size_t old = settled;
        size_t count = members.size();
        settled = count;
        for (const Operation& op : algebra.operations) {
            if (op.arity == 0) {
                Element v = op.table[0];
                if (!in_set[v]) {
                    in_set[v] = 1;
                    members.push_back(v);
                }
                continue;
            }
            // position j is the first coordinate taken from the frontier
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
                    for (int p = 0; p < op.arity; ++p) args[p] = members[idx[p]];
                    Element v = algebra.apply(op, std::span<const Element>(args.data(), op.arity));
                    if (!in_set[v]) {
                        in_set[v] = 1;
                        members.push_back(v);
                    }
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

    SubuniverseResult result;
    result.elements = members;
    std::sort(result.elements.begin(), result.elements.end());
    result.to_parent = result.elements;
    result.from_parent.assign(algebra.size, -1);
    for (size_t i = 0; i < result.elements.size(); ++i)
        result.from_parent[result.elements[i]] = static_cast<int>(i);

    FiniteAlgebra sub;
    sub.name = algebra.name + "|sub";
    sub.size = static_cast<int>(result.elements.size());
    for (const Operation& op : algebra.operations) {
        Operation sop;
        sop.name = op.name;
        sop.arity = op.arity;
        size_t len = 1;
        for (int i = 0; i < op.arity; ++i) len *= sub.size;
        sop.table.resize(len);
        std::vector<Element> tuple(op.arity, 0);
        for (size_t flat = 0; flat < len; ++flat) {
            size_t rem = flat;
            for (int p = op.arity - 1; p >= 0; --p) {
                tuple[p] = result.elements[rem % sub.size];
                rem /= sub.size;
            }
            Element v = algebra.apply(op, std::span<const Element>(tuple.data(), op.arity));
            sop.table[flat] = result.from_parent[v];
        }
        sub.operations.push_back(std::move(sop));
    }
    result.subalgebra = std::move(sub);
    return result;
}

std::vector<Element> ProductAlgebra::decode(Element e) const {
    std::vector<Element> coords(factor_sizes.size());
    for (int i = static_cast<int>(factor_sizes.size()) - 1; i >= 0; --i) {
        coords[i] = e % factor_sizes[i];
        e /= factor_sizes[i];
    }
    return coords;
}

Element ProductAlgebra::encode(std::span<const Element> coords) const {
    Element e = 0;
    for (size_t i = 0; i < factor_sizes.size(); ++i) e = e * factor_sizes[i] + coords[i];
    return e;
}

ProductAlgebra direct_product(std::span<const FiniteAlgebra> factors) {
    if (factors.empty()) throw Error("direct product of zero factors");
    const FiniteAlgebra& first = factors[0];
    for (const FiniteAlgebra& f : factors) {
        if (f.operations.size() != first.operations.size())
            throw Error("signature mismatch: operation counts differ");
        for (size_t i = 0; i < f.operations.size(); ++i)
            if (f.operations[i].name != first.operations[i].name ||
                f.operations[i].arity != first.operations[i].arity)
                throw Error("signature mismatch at operation '" + first.operations[i].name + "'");
    }

    ProductAlgebra prod;
    long long total = 1;
    for (const FiniteAlgebra& f : factors) {
        total *= f.size;
        prod.factor_sizes.push_back(f.size);
        if (total > (1 << 22)) throw Error("product universe too large");
    }

    FiniteAlgebra alg;
    alg.size = static_cast<int>(total);
    alg.name = "product";
    for (size_t oi = 0; oi < first.operations.size(); ++oi) {
        Operation op;
        op.name = first.operations[oi].name;
        op.arity = first.operations[oi].arity;
        size_t len = 1;
        for (int i = 0; i < op.arity; ++i) len *= alg.size;
        if (len > (1ull << 27)) throw Error("product operation table too large");
        op.table.resize(len);
        std::vector<std::vector<Element>> coords(op.arity);
        std::vector<Element> tuple(op.arity);
        std::vector<Element> res(factors.size());
        std::vector<Element> argv(op.arity);
        for (size_t flat = 0; flat < len; ++flat) {
            size_t rem = flat;
            for (int p = op.arity - 1; p >= 0; --p) {
                tuple[p] = static_cast<Element>(rem % alg.size);
                rem /= alg.size;
            }
            for (int p = 0; p < op.arity; ++p) coords[p] = prod.decode(tuple[p]);
            for (size_t fi = 0; fi < factors.size(); ++fi) {
                for (int p = 0; p < op.arity; ++p) argv[p] = coords[p][fi];
                res[fi] = factors[fi].apply(factors[fi].operations[oi],
                                            std::span<const Element>(argv.data(), op.arity));
            }
            op.table[flat] = prod.encode(res);
        }
        alg.operations.push_back(std::move(op));
    }
    prod.algebra = std::move(alg);
    return prod;
}

FiniteAlgebra reindex_operations(
    const FiniteAlgebra& algebra,
    std::span<const std::pair<std::string, std::string>> selection) {
    FiniteAlgebra out;
    out.name = algebra.name;
    out.size = algebra.size;
    out.element_names = algebra.element_names;
    std::set<std::string> new_names;
    for (const auto& [old_name, new_name] : selection) {
        int idx = algebra.operation_index(old_name);
        if (idx < 0) throw Error("reindex: missing operation '" + old_name + "'");
        if (!new_names.insert(new_name).second)
            throw Error("reindex: duplicate new name '" + new_name + "'");
        Operation op = algebra.operations[idx];
        op.name = new_name;
        out.operations.push_back(std::move(op));
    }
    return out;
}

}  // namespace maltsev
