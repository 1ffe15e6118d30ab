#include "maltsev/free_algebra.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <thread>
#include <unordered_set>

namespace maltsev {

namespace {

uint64_t fnv1a(const void* data, size_t len, uint64_t seed = 1469598103934665603ull) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

uint8_t FreeAlgebra::entry(size_t elem, int gen, size_t pos) const {
    if (packed) {
        uint64_t v = packed_elems[elem];
        return (v >> (offsets[gen] + pos)) & 1;
    }
    return byte_elems[elem * total_len + offsets[gen] + pos];
}

std::vector<uint8_t> FreeAlgebra::element_bytes(size_t elem) const {
    std::vector<uint8_t> out(total_len);
    if (packed) {
        uint64_t v = packed_elems[elem];
        for (int i = 0; i < total_len; ++i) out[i] = (v >> i) & 1;
    } else {
        std::memcpy(out.data(), &byte_elems[elem * total_len], total_len);
    }
    return out;
}

std::vector<uint8_t> FreeAlgebra::restriction(size_t elem, std::span<const int> pattern,
                                              int key_vars) const {
    std::vector<uint8_t> out;
    std::vector<int> key(key_vars, 0);
    std::vector<int> full(arity, 0);
    for (size_t g = 0; g < generators.size(); ++g) {
        const int s = generators[g].size;
        std::fill(key.begin(), key.end(), 0);
        while (true) {
            size_t pos = 0;
            for (int j = 0; j < arity; ++j) {
                full[j] = key[pattern[j]];
                pos = pos * s + full[j];
            }
            out.push_back(entry(elem, static_cast<int>(g), pos));
            int p = key_vars - 1;
            while (p >= 0) {
                if (++key[p] < s) break;
                key[p] = 0;
                --p;
            }
            if (p < 0) break;
        }
    }
    return out;
}

bool FreeAlgebra::idempotent_xyx(size_t elem) const {
    for (size_t g = 0; g < generators.size(); ++g) {
        const int s = generators[g].size;
        for (int a = 0; a < s; ++a)
            for (int b = 0; b < s; ++b) {
                size_t pos = (size_t(a) * s + b) * s + a;
                if (entry(elem, static_cast<int>(g), pos) != a) return false;
            }
    }
    return true;
}

bool FreeAlgebra::day_d0(size_t elem) const {
    for (size_t g = 0; g < generators.size(); ++g) {
        const int s = generators[g].size;
        for (int a = 0; a < s; ++a)
            for (int b = 0; b < s; ++b) {
                size_t pos = ((size_t(a) * s + b) * s + b) * s + a;
                if (entry(elem, static_cast<int>(g), pos) != a) return false;
            }
    }
    return true;
}

Term FreeAlgebra::term_of(size_t elem) const {
    const Provenance& p = prov[elem];
    if (p.op < 0) return Term::var(p.args[0]);
    const Operation& op = generators[0].operations[p.op];
    std::vector<Term> args;
    args.reserve(op.arity);
    for (int i = 0; i < op.arity; ++i) args.push_back(term_of(p.args[i]));
    return Term::apply(op.name, std::move(args));
}

std::vector<uint8_t> FreeAlgebra::apply_operation_bytes(int op_index,
                                                        std::span<const size_t> arg_elems) const {
    std::vector<uint8_t> out(total_len);
    const int r = generators[0].operations[op_index].arity;
    if (static_cast<int>(arg_elems.size()) != r) throw Error("free element application: arity mismatch");
    for (size_t g = 0; g < generators.size(); ++g) {
        const Operation& op = generators[g].operations[op_index];
        const int s = generators[g].size;
        for (int pos = 0; pos < table_lens[g]; ++pos) {
            size_t ti = 0;
            for (int p = 0; p < r; ++p) ti = ti * s + entry(arg_elems[p], static_cast<int>(g), pos);
            out[offsets[g] + pos] = static_cast<uint8_t>(op.table[ti]);
        }
    }
    return out;
}

std::optional<size_t> FreeAlgebra::find_by_bytes(const std::vector<uint8_t>& value) const {
    for (size_t i = 0; i < count(); ++i) {
        bool eq = true;
        for (int p = 0; p < total_len && eq; ++p) {
            int g = 0;
            while (g + 1 < static_cast<int>(offsets.size()) && offsets[g + 1] <= p) ++g;
            eq = entry(i, g, p - offsets[g]) == value[p];
        }
        if (eq) return i;
    }
    return std::nullopt;
}

std::optional<size_t> FreeAlgebra::eval_term_element(const Term& t) const {
    switch (t.kind) {
        case Term::Kind::Variable:
            if (t.index >= arity) throw Error("term variable beyond free algebra arity");
            return projections[t.index];
        case Term::Kind::Constant:
            throw Error("constants not supported in free algebra terms");
        case Term::Kind::Apply: {
            int oi = generators[0].operation_index(t.op);
            if (oi < 0) throw Error("unknown operation '" + t.op + "' in free algebra term");
            std::vector<size_t> args;
            args.reserve(t.args.size());
            for (const Term& a : t.args) {
                auto sub = eval_term_element(a);
                if (!sub) return std::nullopt;
                args.push_back(*sub);
            }
            return find_by_bytes(apply_operation_bytes(oi, args));
        }
    }
    return std::nullopt;
}

uint64_t FreeAlgebra::content_hash() const {
    uint64_t h = fnv1a(&arity, sizeof(arity));
    for (const FiniteAlgebra& g : generators) {
        h = fnv1a(&g.size, sizeof(g.size), h);
        for (const Operation& op : g.operations) {
            h = fnv1a(op.name.data(), op.name.size(), h);
            h = fnv1a(&op.arity, sizeof(op.arity), h);
            h = fnv1a(op.table.data(), op.table.size() * sizeof(Element), h);
        }
    }
    return h;
}

namespace {

// Bit-packed closure: every generator has two elements, total table bits
// fit one machine word. Operation application is lane-parallel: for each
// input bit-combination of the arguments, a precomputed selector mask
// says on which lanes the operation yields 1.
struct PackedCloser {
    FreeAlgebra& fa;
    uint64_t mask = 0;
    // selectors[op][combo] where combo indexes the 2^arity argument bit
    // patterns; selector bit set => result 1 on that lane
    std::vector<std::vector<uint64_t>> selectors;
    std::vector<int> arities;

    explicit PackedCloser(FreeAlgebra& f) : fa(f) {
        mask = fa.packed_mask;
        const auto& ops = fa.generators[0].operations;
        selectors.resize(ops.size());
        arities.resize(ops.size());
        for (size_t oi = 0; oi < ops.size(); ++oi) {
            int r = ops[oi].arity;
            arities[oi] = r;
            selectors[oi].assign(size_t(1) << r, 0);
            for (size_t g = 0; g < fa.generators.size(); ++g) {
                const Operation& op = fa.generators[g].operations[oi];
                uint64_t seg = ((fa.table_lens[g] == 64)
                                    ? ~uint64_t(0)
                                    : ((uint64_t(1) << fa.table_lens[g]) - 1))
                               << fa.offsets[g];
                for (int combo = 0; combo < (1 << r); ++combo) {
                    // combo bit j = value of argument j
                    size_t idx = 0;
                    for (int j = 0; j < r; ++j) idx = idx * 2 + ((combo >> j) & 1);
                    if (op.table[idx]) selectors[oi][combo] |= seg;
                }
            }
        }
    }

    uint64_t apply1(size_t oi, uint64_t u) const {
        const auto& sel = selectors[oi];
        return ((~u & sel[0]) | (u & sel[1])) & mask;
    }
    uint64_t apply2(size_t oi, uint64_t u, uint64_t v) const {
        const auto& sel = selectors[oi];
        uint64_t nu = ~u & mask, nv = ~v & mask;
        return (nu & nv & sel[0]) | (u & nv & sel[1]) | (nu & v & sel[2]) | (u & v & sel[3]);
    }
    // ternary: precompute the (u, v)-section, then each w costs 4 ops
    struct Section {
        uint64_t m0, m1;
    };
    Section section3(size_t oi, uint64_t u, uint64_t v) const {
        const auto& sel = selectors[oi];
        uint64_t nu = ~u & mask, nv = ~v & mask;
        uint64_t a = nu & nv, b = u & nv, c = nu & v, d = u & v;
        Section s;
        s.m0 = (a & sel[0]) | (b & sel[1]) | (c & sel[2]) | (d & sel[3]);
        s.m1 = (a & sel[4]) | (b & sel[5]) | (c & sel[6]) | (d & sel[7]);
        return s;
    }
    uint64_t apply3(const Section& s, uint64_t w) const {
        return (s.m1 & w) | (s.m0 & ~w);
    }
};

}  // namespace

FreeAlgebra build_free_algebra(std::span<const FiniteAlgebra> generators, int k,
                               size_t max_elements, int threads) {
    if (generators.empty()) throw Error("free algebra needs at least one generator");
    if (k < 1) throw Error("free algebra arity must be >= 1");

    const FiniteAlgebra& first = generators[0];
    for (const FiniteAlgebra& g : generators) {
        if (g.operations.size() != first.operations.size())
            throw Error("free algebra: signature mismatch");
        for (size_t i = 0; i < g.operations.size(); ++i)
            if (g.operations[i].name != first.operations[i].name ||
                g.operations[i].arity != first.operations[i].arity)
                throw Error("free algebra: signature mismatch at '" + first.operations[i].name + "'");
    }

    for (const Operation& op : first.operations)
        if (op.arity == 0) throw Error("free algebra: nullary operations unsupported");

    FreeAlgebra fa;
    fa.generators.assign(generators.begin(), generators.end());
    fa.arity = k;
    fa.element_budget = max_elements;
    int total = 0;
    bool two_valued = true;
    int max_op_arity = 0;
    for (const FiniteAlgebra& g : generators) {
        int len = 1;
        for (int i = 0; i < k; ++i) len *= g.size;
        fa.table_lens.push_back(len);
        fa.offsets.push_back(total);
        total += len;
        if (g.size != 2) two_valued = false;
        for (const Operation& op : g.operations) max_op_arity = std::max(max_op_arity, op.arity);
    }
    fa.total_len = total;
    fa.packed = two_valued && total <= 64 && max_op_arity <= 3;
    if (fa.packed)
        fa.packed_mask = (total == 64) ? ~uint64_t(0) : ((uint64_t(1) << total) - 1);

    if (fa.packed) {
        // --- packed path ---
        std::vector<uint64_t>& elems = fa.packed_elems;
        const bool use_bitmap = total <= 26;
        std::vector<uint8_t> bitmap;
        std::unordered_set<uint64_t> seen;
        if (use_bitmap) bitmap.assign(size_t(1) << total, 0);
        auto known = [&](uint64_t v) -> bool {
            return use_bitmap ? bitmap[v] != 0 : seen.count(v) != 0;
        };
        auto insert = [&](uint64_t v) {
            if (use_bitmap) bitmap[v] = 1;
            else seen.insert(v);
        };

        // projections
        for (int j = 0; j < k; ++j) {
            uint64_t v = 0;
            for (size_t g = 0; g < generators.size(); ++g) {
                for (int pos = 0; pos < fa.table_lens[g]; ++pos) {
                    // assignment bits: last variable fastest
                    int aj = (pos >> (k - 1 - j)) & 1;
                    if (aj) v |= uint64_t(1) << (fa.offsets[g] + pos);
                }
            }
            if (!known(v)) {
                insert(v);
                elems.push_back(v);
                FreeAlgebra::Provenance p;
                p.op = -1;
                p.args[0] = j;
                fa.prov.push_back(p);
            }
            fa.projections.push_back(
                static_cast<int>(std::find(elems.begin(), elems.end(), v) - elems.begin()));
        }

        PackedCloser closer(fa);
        const size_t num_ops = first.operations.size();

        size_t settled = 0;
        while (settled < elems.size()) {
            if (elems.size() > max_elements) {
                fa.complete = false;
                break;
            }
            size_t old = settled;
            size_t cnt = elems.size();
            settled = cnt;

            for (size_t oi = 0; oi < num_ops; ++oi) {
                int r = closer.arities[oi];
                if (r == 0) continue;
                auto emit = [&](uint64_t v, int16_t op, int32_t a0, int32_t a1, int32_t a2) {
                    if (!known(v)) {
                        insert(v);
                        elems.push_back(v);
                        FreeAlgebra::Provenance p;
                        p.op = op;
                        p.args[0] = a0;
                        p.args[1] = a1;
                        p.args[2] = a2;
                        fa.prov.push_back(p);
                    }
                };
                if (r == 1) {
                    for (size_t i = old; i < cnt; ++i)
                        emit(closer.apply1(oi, elems[i]), static_cast<int16_t>(oi),
                             static_cast<int32_t>(i), 0, 0);
                } else if (r == 2) {
                    for (size_t i = 0; i < cnt; ++i) {
                        size_t j0 = (i >= old) ? 0 : old;
                        for (size_t j = j0; j < cnt; ++j)
                            emit(closer.apply2(oi, elems[i], elems[j]), static_cast<int16_t>(oi),
                                 static_cast<int32_t>(i), static_cast<int32_t>(j), 0);
                    }
                } else {
                    // ternary: iterate (i, j) sections, inner loop over w.
                    // Threads split the i range; appends are merged in
                    // order afterwards so the element order is the same
                    // as the single-threaded sweep.
                    struct Found {
                        uint64_t v;
                        int32_t i, j, l;
                    };
                    auto sweep = [&](size_t ibegin, size_t iend, std::vector<Found>& out) {
                        for (size_t i = ibegin; i < iend; ++i) {
                            for (size_t j = 0; j < cnt; ++j) {
                                size_t l0 = (i >= old || j >= old) ? 0 : old;
                                if (l0 >= cnt) continue;
                                auto sec = closer.section3(oi, elems[i], elems[j]);
                                // quick reject: all reachable values from
                                // this section already known (bitmap path
                                // only benefits when few new)
                                for (size_t l = l0; l < cnt; ++l) {
                                    uint64_t v = closer.apply3(sec, elems[l]);
                                    if (!known(v))
                                        out.push_back({v, static_cast<int32_t>(i),
                                                       static_cast<int32_t>(j),
                                                       static_cast<int32_t>(l)});
                                }
                            }
                        }
                    };
                    int nt = std::max(1, threads);
                    if (nt == 1 || cnt < 512) {
                        std::vector<Found> out;
                        sweep(0, cnt, out);
                        for (const Found& f : out)
                            emit(f.v, static_cast<int16_t>(oi), f.i, f.j, f.l);
                    } else {
                        std::vector<std::vector<Found>> outs(nt);
                        std::vector<std::thread> ts;
                        size_t chunk = (cnt + nt - 1) / nt;
                        for (int t = 0; t < nt; ++t) {
                            size_t b = t * chunk, e = std::min(cnt, b + chunk);
                            if (b >= e) break;
                            ts.emplace_back(sweep, b, e, std::ref(outs[t]));
                        }
                        for (auto& t : ts) t.join();
                        for (auto& out : outs)
                            for (const Found& f : out)
                                emit(f.v, static_cast<int16_t>(oi), f.i, f.j, f.l);
                    }
                }
                if (elems.size() > max_elements) break;
            }
            if (elems.size() > max_elements) {
                fa.complete = false;
                break;
            }
        }
        return fa;
    }

    // --- generic byte path ---
    std::map<std::vector<uint8_t>, int> index;
    std::vector<std::vector<uint8_t>> elems;

    auto add = [&](std::vector<uint8_t> v, FreeAlgebra::Provenance p) -> int {
        auto [it, fresh] = index.emplace(std::move(v), static_cast<int>(elems.size()));
        if (fresh) {
            elems.push_back(it->first);
            fa.prov.push_back(p);
        }
        return it->second;
    };

    // projections
    for (int j = 0; j < k; ++j) {
        std::vector<uint8_t> v(total);
        for (size_t g = 0; g < generators.size(); ++g) {
            const int s = generators[g].size;
            std::vector<int> a(k, 0);
            for (int pos = 0; pos < fa.table_lens[g]; ++pos) {
                int rem = pos;
                for (int q = k - 1; q >= 0; --q) {
                    a[q] = rem % s;
                    rem /= s;
                }
                v[fa.offsets[g] + pos] = static_cast<uint8_t>(a[j]);
            }
        }
        FreeAlgebra::Provenance p;
        p.op = -1;
        p.args[0] = j;
        fa.projections.push_back(add(std::move(v), p));
    }

    const size_t num_ops = first.operations.size();
    size_t settled = 0;
    std::vector<const uint8_t*> argp(kMaxArity);
    while (settled < elems.size()) {
        if (elems.size() > max_elements) {
            fa.complete = false;
            break;
        }
        size_t old = settled;
        size_t cnt = elems.size();
        settled = cnt;
        for (size_t oi = 0; oi < num_ops; ++oi) {
            const int r = first.operations[oi].arity;
            if (r == 0) continue;
            for (int jpos = 0; jpos < r; ++jpos) {
                std::vector<std::pair<size_t, size_t>> range(r);
                bool empty = false;
                for (int p = 0; p < r; ++p) {
                    if (p < jpos) range[p] = {0, old};
                    else if (p == jpos) range[p] = {old, cnt};
                    else range[p] = {0, cnt};
                    if (range[p].first >= range[p].second) empty = true;
                }
                if (empty) continue;
                std::vector<size_t> idx(r);
                for (int p = 0; p < r; ++p) idx[p] = range[p].first;
                std::vector<uint8_t> result(total);
                while (true) {
                    for (int p = 0; p < r; ++p) argp[p] = elems[idx[p]].data();
                    for (size_t g = 0; g < generators.size(); ++g) {
                        const Operation& op = generators[g].operations[oi];
                        const int s = generators[g].size;
                        const int off = fa.offsets[g];
                        for (int pos = 0; pos < fa.table_lens[g]; ++pos) {
                            size_t ti = 0;
                            for (int p = 0; p < r; ++p) ti = ti * s + argp[p][off + pos];
                            result[off + pos] = static_cast<uint8_t>(op.table[ti]);
                        }
                    }
                    FreeAlgebra::Provenance pr;
                    pr.op = static_cast<int16_t>(oi);
                    for (int p = 0; p < r; ++p) pr.args[p] = static_cast<int32_t>(idx[p]);
                    add(result, pr);
                    int p = r - 1;
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

    fa.byte_elems.resize(elems.size() * total);
    for (size_t i = 0; i < elems.size(); ++i)
        std::memcpy(&fa.byte_elems[i * total], elems[i].data(), total);
    return fa;
}

}  // namespace maltsev
