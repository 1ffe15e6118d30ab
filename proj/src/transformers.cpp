#include "maltsev/transformers.hpp"

#include <algorithm>

namespace maltsev {

namespace {

const std::vector<std::pair<TransformRule, std::string>>& rule_names() {
    static const std::vector<std::pair<TransformRule, std::string>> names = {
        {TransformRule::DayFromJonsson, "day_from_jonsson"},
        {TransformRule::RDayFromAlvin, "rday_from_alvin"},
        {TransformRule::DayFromDirected, "day_from_directed"},
        {TransformRule::RDayFromTwoHeaded, "rday_from_twoheaded"},
        {TransformRule::DirectedFromJonsson4, "directed_from_jonsson4"},
        {TransformRule::Specularize, "specularize"},
        {TransformRule::JonssonFromAlvinShift, "jonsson_from_alvin_shift"},
    };
    return names;
}

// substitutions used throughout: the input chains are ternary in (x,y,z),
// outputs are quaternary in (x,y,z,w)
Term sub_xyw(const Term& t) { return rename_variables(t, std::vector<int>{0, 1, 3}); }
Term sub_xzw(const Term& t) { return rename_variables(t, std::vector<int>{0, 2, 3}); }
Term sub_xyz(const Term& t) { return t; }
Term sub_yzw(const Term& t) { return rename_variables(t, std::vector<int>{1, 2, 3}); }

void require_links(const TermChain& chain, Family family, const char* rule) {
    if (chain.is_day()) throw Error(std::string(rule) + ": input must be a ternary chain");
    const ConditionSpec& spec = chain.spec();
    ConditionSpec want = family_spec(family, spec.n);
    if (spec.l != want.l || spec.r != want.r)
        throw Error(std::string(rule) + ": input chain links are not " + family_name(family));
}

}  // namespace

std::optional<TransformRule> transform_rule_from_name(const std::string& name) {
    for (const auto& [rule, rname] : rule_names())
        if (rname == name) return rule;
    return std::nullopt;
}

std::string transform_rule_name(TransformRule rule) {
    for (const auto& [r, rname] : rule_names())
        if (r == rule) return rname;
    return "?";
}

TermChain apply_transform(TransformRule rule, const TermChain& input,
                          const TransformOptions& options) {
    switch (rule) {
        case TransformRule::DayFromJonsson: {
            require_links(input, Family::Jonsson, "day_from_jonsson");
            const int n = input.spec().n;
            TermChain out;
            out.condition = DaySpec{2 * n - 1, false};
            out.terms.push_back(Term::var(0));
            for (int i = 1; i <= n - 1; ++i) {
                const Term& t = input.terms[i];
                if (i % 2 == 1) {
                    out.terms.push_back(sub_xyw(t));
                    out.terms.push_back(sub_xzw(t));
                } else {
                    out.terms.push_back(sub_xzw(t));
                    out.terms.push_back(sub_xyw(t));
                }
            }
            out.terms.push_back(Term::var(3));
            return out;
        }
        case TransformRule::DayFromDirected: {
            require_links(input, Family::Directed, "day_from_directed");
            const int n = input.spec().n;
            TermChain out;
            out.condition = DaySpec{2 * n - 1, false};
            out.terms.push_back(Term::var(0));
            for (int i = 1; i <= n - 1; ++i) {
                const Term& t = input.terms[i];
                out.terms.push_back(sub_xyw(t));
                out.terms.push_back(sub_xzw(t));
            }
            out.terms.push_back(Term::var(3));
            return out;
        }
        case TransformRule::RDayFromAlvin: {
            require_links(input, Family::Alvin, "rday_from_alvin");
            const int n = input.spec().n;
            if (n < 4 || n % 2 != 0)
                throw Error("rday_from_alvin needs an even chain length n >= 4");
            const auto& t = input.terms;
            TermChain out;
            out.condition = DaySpec{2 * n - 3, true};
            out.terms.resize(2 * n - 2);
            out.terms[0] = Term::var(0);
            out.terms[2 * n - 3] = Term::var(3);
            out.terms[1] = sub_xyz(t[1]);
            out.terms[2 * n - 4] = sub_yzw(t[n - 1]);
            for (int k = 2; k <= 2 * n - 5; ++k) {
                switch (k % 4) {
                    case 1: out.terms[k] = sub_xyw(t[(k + 1) / 2]); break;
                    case 2: out.terms[k] = sub_xyw(t[(k + 2) / 2]); break;
                    case 3: out.terms[k] = sub_xzw(t[(k + 1) / 2]); break;
                    case 0: out.terms[k] = sub_xzw(t[(k + 2) / 2]); break;
                }
            }
            return out;
        }
        case TransformRule::RDayFromTwoHeaded: {
            // accepts two-headed directed Gumm links; chains carrying the
            // stronger alvin-heads tag qualify as well
            if (input.is_day()) throw Error("rday_from_twoheaded: input must be a ternary chain");
            const ConditionSpec& spec = input.spec();
            const int n = spec.n;
            if (n < 4) throw Error("rday_from_twoheaded needs n >= 4");
            ConditionSpec want = family_spec(Family::TwoHeadedDirectedGumm, n);
            if (spec.l != want.l || spec.r != want.r)
                throw Error("rday_from_twoheaded: input chain links are not two-headed directed Gumm");
            const auto& t = input.terms;
            TermChain out;
            out.condition = DaySpec{2 * n - 3, true};
            out.terms.push_back(Term::var(0));
            out.terms.push_back(sub_xyz(t[1]));
            for (int i = 2; i <= n - 2; ++i) {
                out.terms.push_back(sub_xyw(t[i]));
                out.terms.push_back(sub_xzw(t[i]));
            }
            out.terms.push_back(sub_yzw(t[n - 1]));
            out.terms.push_back(Term::var(3));
            return out;
        }
        case TransformRule::DirectedFromJonsson4: {
            require_links(input, Family::Jonsson, "directed_from_jonsson4");
            if (input.spec().n != 4) throw Error("directed_from_jonsson4 needs chain length 4");
            const auto& t = input.terms;
            auto comp = [&](const Term& outer, Term a, Term b, Term c) {
                std::vector<Term> repl = {std::move(a), std::move(b), std::move(c)};
                return substitute(outer, repl);
            };
            auto at = [&](int i, int a, int b, int c) {
                std::vector<Term> repl = {Term::var(a), Term::var(b), Term::var(c)};
                return substitute(t[i], repl);
            };
            TermChain out;
            out.condition = family_spec(Family::Directed, 4);
            out.terms.push_back(Term::var(0));
            out.terms.push_back(comp(t[1], at(1, 0, 1, 2), at(3, 0, 0, 1), at(3, 0, 0, 2)));
            out.terms.push_back(comp(t[2], at(2, 0, 2, 2), at(2, 0, 1, 2), at(2, 0, 0, 2)));
            out.terms.push_back(comp(t[3], at(1, 0, 2, 2), at(1, 1, 2, 2), at(3, 0, 1, 2)));
            out.terms.push_back(Term::var(2));
            return out;
        }
        case TransformRule::Specularize: {
            if (input.is_day()) throw Error("specularize: input must be a ternary chain");
            const ConditionSpec& spec = input.spec();
            const int n = spec.n;
            TermChain out;
            out.terms = input.terms;
            for (int h = 1; h <= n - 1; ++h) {
                bool hit = options.parity == TransformOptions::Parity::All ||
                           (options.parity == TransformOptions::Parity::Odd ? h % 2 == 1
                                                                            : h % 2 == 0);
                if (!hit) continue;
                std::vector<Term> repl = {Term::var(0), input.terms[h], Term::var(2)};
                out.terms[h] = substitute(input.terms[h], repl);
            }
            // the announced target condition; callers verify it on their
            // algebras, nothing is claimed silently
            Family target = options.parity == TransformOptions::Parity::All
                                ? Family::Directed
                                : (options.parity == TransformOptions::Parity::Odd
                                       ? Family::Jonsson
                                       : Family::Alvin);
            out.condition = family_spec(target, n);
            return out;
        }
        case TransformRule::JonssonFromAlvinShift: {
            require_links(input, Family::Alvin, "jonsson_from_alvin_shift");
            const int m = input.spec().n;
            TermChain out;
            out.terms.push_back(Term::var(0));
            for (const Term& t : input.terms) out.terms.push_back(t);
            int n = m + 1;
            if (options.append_final_projection) {
                out.terms.push_back(Term::var(2));
                n = m + 2;
            }
            out.condition = family_spec(Family::Jonsson, n);
            return out;
        }
    }
    throw Error("unknown transform rule");
}

std::optional<VerifyFailure> verify_condition_as(const TermChain& chain,
                                                 const ConditionSpec& spec,
                                                 std::span<const FiniteAlgebra> algebras) {
    auto eqs = condition_equations(spec, chain.terms);
    for (const auto& [label, eq] : eqs) {
        if (auto w = check_equation(algebras, eq)) {
            return VerifyFailure{label, eq, w->algebra_index, w->assignment};
        }
    }
    return std::nullopt;
}

std::optional<VerifyFailure> verify_condition(const TermChain& chain,
                                              std::span<const FiniteAlgebra> algebras) {
    std::vector<std::pair<std::string, Equation>> eqs;
    if (chain.is_day()) eqs = day_equations(chain.day(), chain.terms);
    else eqs = condition_equations(chain.spec(), chain.terms);
    for (const auto& [label, eq] : eqs) {
        if (auto w = check_equation(algebras, eq)) {
            return VerifyFailure{label, eq, w->algebra_index, w->assignment};
        }
    }
    return std::nullopt;
}

}  // namespace maltsev
