#include "solvgeo/lamplighter.hpp"

#include <algorithm>
#include <climits>
#include <cstdlib>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace solvgeo {

namespace {

void check_modulus(int m) {
    if (m < 2 || m > 255) throw std::invalid_argument("modulus must be between 2 and 255");
}

void canonicalize(LampElement& g) {
    std::size_t first = 0, last = g.colors.size();
    while (first < last && g.colors[first] == 0) ++first;
    while (last > first && g.colors[last - 1] == 0) --last;
    if (first == last) {
        g.colors.clear();
        g.lo = 0;
        return;
    }
    g.lo += static_cast<int>(first);
    g.colors.erase(g.colors.begin() + static_cast<std::ptrdiff_t>(last), g.colors.end());
    g.colors.erase(g.colors.begin(), g.colors.begin() + static_cast<std::ptrdiff_t>(first));
}

bool is_identity(const LampElement& g) { return g.colors.empty() && g.cursor == 0; }

// Flat byte key of the canonical form, for hashing in the search maps.
std::string pack(const LampElement& g) {
    std::string s;
    s.reserve(g.colors.size() + 2);
    s.push_back(static_cast<char>(g.cursor + 100));
    s.push_back(static_cast<char>(g.lo + 100));
    for (int c : g.colors) s.push_back(static_cast<char>(c + 1));
    return s;
}

}  // namespace

bool operator==(const LampElement& a, const LampElement& b) {
    return a.m == b.m && a.cursor == b.cursor && a.lo == b.lo && a.colors == b.colors;
}

bool operator!=(const LampElement& a, const LampElement& b) { return !(a == b); }

LampElement lamp_identity(int m) {
    check_modulus(m);
    return LampElement{m, 0, {}, 0};
}

LampElement lamp_a(int m) {
    check_modulus(m);
    return LampElement{m, 0, {1}, 0};
}

LampElement lamp_t(int m) {
    check_modulus(m);
    return LampElement{m, 0, {}, 1};
}

LampElement lamp_multiply(const LampElement& g, const LampElement& h) {
    if (g.m != h.m) throw std::invalid_argument("modulus mismatch");
    LampElement out;
    out.m = g.m;
    out.cursor = g.cursor + h.cursor;
    if (g.colors.empty() && h.colors.empty()) return out;

    // h's lights shift by g's cursor under the wreath product law.
    int hlo = h.lo + g.cursor;
    int lo = g.colors.empty() ? hlo : (h.colors.empty() ? g.lo : std::min(g.lo, hlo));
    int g_hi = g.lo + static_cast<int>(g.colors.size());
    int h_hi = hlo + static_cast<int>(h.colors.size());
    int hi = g.colors.empty() ? h_hi : (h.colors.empty() ? g_hi : std::max(g_hi, h_hi));

    out.lo = lo;
    out.colors.assign(static_cast<std::size_t>(hi - lo), 0);
    for (std::size_t i = 0; i < g.colors.size(); ++i)
        out.colors[static_cast<std::size_t>(g.lo - lo) + i] = g.colors[i];
    for (std::size_t i = 0; i < h.colors.size(); ++i) {
        auto j = static_cast<std::size_t>(hlo - lo) + i;
        out.colors[j] = (out.colors[j] + h.colors[i]) % out.m;
    }
    canonicalize(out);
    return out;
}

LampElement lamp_inverse(const LampElement& g) {
    LampElement out;
    out.m = g.m;
    out.cursor = -g.cursor;
    out.lo = g.lo - g.cursor;
    out.colors.resize(g.colors.size());
    for (std::size_t i = 0; i < g.colors.size(); ++i)
        out.colors[i] = (g.m - g.colors[i]) % g.m;
    canonicalize(out);
    return out;
}

LampElement lamp_power(const LampElement& g, int n) {
    LampElement base = n < 0 ? lamp_inverse(g) : g;
    int k = std::abs(n);
    LampElement out = lamp_identity(g.m);
    for (int i = 0; i < k; ++i) out = lamp_multiply(out, base);
    return out;
}

LampElement far_lamp(int m, int n) {
    check_modulus(m);
    return LampElement{m, n, {1}, 0};
}

LampElement lamp_run(int m, int n) {
    check_modulus(m);
    if (n <= 0) return lamp_identity(m);
    return LampElement{m, 1, std::vector<int>(static_cast<std::size_t>(n), 1), n};
}

GenSet wreath_gens(int m) { return GenSet{"wreath", {lamp_a(m), lamp_t(m)}}; }

GenSet automaton_gens(int m) {
    LampElement ta = lamp_multiply(lamp_t(m), lamp_a(m));
    return GenSet{"automaton", {lamp_t(m), ta}};
}

namespace {

struct GenTraits {
    int m = 2;
    int max_shift = 0;   // largest cursor move of a single letter
    int max_edits = 0;   // most lamps a single letter edits
    bool separated = true;   // no letter both moves and edits
    bool unit_edits = true;  // every edit changes one lamp by one step
};

std::vector<LampElement> symmetric_closure(const GenSet& s) {
    std::vector<LampElement> gens;
    std::vector<std::string> keys;
    for (const auto& g : s.generators) {
        for (const LampElement& c : {g, lamp_inverse(g)}) {
            if (is_identity(c)) throw std::invalid_argument("identity generator");
            std::string key = pack(c);
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                keys.push_back(std::move(key));
                gens.push_back(c);
            }
        }
    }
    if (gens.empty()) throw std::invalid_argument("empty generating set");
    return gens;
}

GenTraits analyze(const std::vector<LampElement>& gens) {
    GenTraits tr;
    tr.m = gens.front().m;
    for (const auto& g : gens) {
        int edits = static_cast<int>(g.colors.size()) -
                    static_cast<int>(std::count(g.colors.begin(), g.colors.end(), 0));
        tr.max_shift = std::max(tr.max_shift, std::abs(g.cursor));
        tr.max_edits = std::max(tr.max_edits, edits);
        if (edits > 0 && g.cursor != 0) tr.separated = false;
        if (edits > 1) tr.unit_edits = false;
        if (edits == 1)
            for (int c : g.colors)
                if (c != 0 && c != 1 && c != tr.m - 1) tr.unit_edits = false;
    }
    return tr;
}

int lower_bound_impl(const GenTraits& tr, const LampElement& g) {
    constexpr int kUnreachable = INT_MAX / 4;
    int walk;
    if (g.colors.empty()) {
        walk = std::abs(g.cursor);
    } else {
        int lo = g.lo, hi = g.lo + static_cast<int>(g.colors.size()) - 1;
        int left_first = std::abs(lo) + (hi - lo) + std::abs(hi - g.cursor);
        int right_first = std::abs(hi) + (hi - lo) + std::abs(g.cursor - lo);
        walk = std::min(left_first, right_first);
    }
    int presses = 0;
    for (int c : g.colors)
        if (c != 0) presses += tr.unit_edits ? std::min(c, tr.m - c) : 1;

    int walk_letters =
        walk == 0 ? 0 : (tr.max_shift > 0 ? (walk + tr.max_shift - 1) / tr.max_shift : kUnreachable);
    int edit_letters =
        presses == 0 ? 0
                     : (tr.max_edits > 0 ? (presses + tr.max_edits - 1) / tr.max_edits : kUnreachable);
    return tr.separated ? walk_letters + edit_letters : std::max(walk_letters, edit_letters);
}

}  // namespace

int lamp_lower_bound(const GenSet& s, const LampElement& g) {
    return lower_bound_impl(analyze(symmetric_closure(s)), g);
}

std::optional<int> word_length(const GenSet& s, const LampElement& g, int radius_cap) {
    if (radius_cap < 0) throw std::invalid_argument("radius cap must be nonnegative");
    check_modulus(g.m);
    if (is_identity(g)) return 0;

    std::vector<LampElement> gens = symmetric_closure(s);
    GenTraits tr = analyze(gens);
    if (lower_bound_impl(tr, g) > radius_cap) return std::nullopt;

    // Bidirectional layered search: side 0 grows the ball around the
    // identity, side 1 around g; both expand by right multiplication, so a
    // common element v gives a word of length |v| + d(v, g).
    std::unordered_map<std::string, int> dist[2];
    std::vector<LampElement> frontier[2];
    dist[0].emplace(pack(lamp_identity(g.m)), 0);
    frontier[0].push_back(lamp_identity(g.m));
    dist[1].emplace(pack(g), 0);
    frontier[1].push_back(g);
    int depth[2] = {0, 0};
    int best = INT_MAX;

    while (!frontier[0].empty() && !frontier[1].empty()) {
        // dist[side] holds every node within depth[side] of its root, and
        // the second side to discover a node records the meeting, so best is
        // final once it is within the sum of the completed depths; past that
        // sum every word is at least one letter longer.
        if (best <= depth[0] + depth[1]) return best;
        if (depth[0] + depth[1] + 1 > radius_cap) return std::nullopt;

        int side = frontier[0].size() <= frontier[1].size() ? 0 : 1;
        std::vector<LampElement> next;
        for (const auto& u : frontier[side]) {
            for (const auto& gen : gens) {
                LampElement v = lamp_multiply(u, gen);
                std::string key = pack(v);
                if (dist[side].contains(key)) continue;
                int dv = depth[side] + 1;
                auto other = dist[1 - side].find(key);
                if (other != dist[1 - side].end()) best = std::min(best, dv + other->second);
                dist[side].emplace(std::move(key), dv);
                // Nodes that cannot lie on a word within the cap are kept as
                // meeting points but never expanded.
                int rest = side == 0 ? lower_bound_impl(tr, lamp_multiply(lamp_inverse(v), g))
                                     : lower_bound_impl(tr, v);
                if (dv + rest <= radius_cap) next.push_back(std::move(v));
            }
        }
        frontier[side] = std::move(next);
        ++depth[side];
    }
    return best <= radius_cap ? std::optional<int>(best) : std::nullopt;
}

std::vector<std::pair<LampElement, int>> full_ball(const GenSet& s, int radius) {
    if (radius < 0) throw std::invalid_argument("radius must be nonnegative");
    std::vector<LampElement> gens = symmetric_closure(s);
    int m = gens.front().m;
    std::vector<std::pair<LampElement, int>> out;
    std::unordered_map<std::string, int> dist;
    std::vector<LampElement> frontier{lamp_identity(m)};
    dist.emplace(pack(frontier.front()), 0);
    out.emplace_back(frontier.front(), 0);
    for (int d = 1; d <= radius && !frontier.empty(); ++d) {
        std::vector<LampElement> next;
        for (const auto& u : frontier) {
            for (const auto& gen : gens) {
                LampElement v = lamp_multiply(u, gen);
                std::string key = pack(v);
                if (!dist.emplace(std::move(key), d).second) continue;
                out.emplace_back(v, d);
                next.push_back(std::move(v));
            }
        }
        frontier = std::move(next);
    }
    return out;
}

std::optional<int> word_length_exhaustive(const GenSet& s, const LampElement& g, int radius_cap) {
    if (radius_cap < 0) throw std::invalid_argument("radius cap must be nonnegative");
    if (is_identity(g)) return 0;
    std::vector<LampElement> gens = symmetric_closure(s);
    std::string target = pack(g);
    std::unordered_map<std::string, int> dist;
    std::vector<LampElement> frontier{lamp_identity(g.m)};
    dist.emplace(pack(frontier.front()), 0);
    for (int d = 1; d <= radius_cap && !frontier.empty(); ++d) {
        std::vector<LampElement> next;
        for (const auto& u : frontier) {
            for (const auto& gen : gens) {
                LampElement v = lamp_multiply(u, gen);
                std::string key = pack(v);
                if (dist.contains(key)) continue;
                if (key == target) return d;
                dist.emplace(std::move(key), d);
                next.push_back(std::move(v));
            }
        }
        frontier = std::move(next);
    }
    return std::nullopt;
}

namespace {

void check_witness(const LampElement& target, const std::vector<LampElement>& letters) {
    LampElement w = lamp_identity(target.m);
    for (const auto& letter : letters) w = lamp_multiply(w, letter);
    if (w != target) throw std::logic_error("witness word does not reach its target");
}

std::vector<LampElement> repeat(const LampElement& g, int n) {
    return std::vector<LampElement>(static_cast<std::size_t>(n), g);
}

void append(std::vector<LampElement>& word, const std::vector<LampElement>& tail) {
    word.insert(word.end(), tail.begin(), tail.end());
}

}  // namespace

std::vector<TableRow> word_metric_table(int m, int n_max) {
    check_modulus(m);
    if (n_max < 0) throw std::invalid_argument("n_max must be nonnegative");
    GenSet sw = wreath_gens(m), sa = automaton_gens(m);
    LampElement a = lamp_a(m), t = lamp_t(m), ti = lamp_inverse(t);
    LampElement ta = lamp_multiply(t, a);

    std::vector<TableRow> rows;
    rows.push_back(TableRow{0, 0, 0, 0, 0});
    for (int n = 1; n <= n_max; ++n) {
        LampElement far = far_lamp(m, n), run = lamp_run(m, n);

        // Explicit witness words give the upper bounds; the searches below,
        // capped at the witness lengths, prove no shorter word exists.
        std::vector<LampElement> w_far_w = repeat(t, n);
        w_far_w.push_back(a);
        append(w_far_w, repeat(ti, n));
        check_witness(far, w_far_w);

        std::vector<LampElement> w_far_a = repeat(t, n - 1);
        w_far_a.push_back(ta);
        append(w_far_a, repeat(ti, n));
        check_witness(far, w_far_a);

        std::vector<LampElement> w_run_w;
        for (int i = 0; i < n; ++i) {
            w_run_w.push_back(t);
            w_run_w.push_back(a);
        }
        check_witness(run, w_run_w);
        check_witness(run, repeat(ta, n));

        TableRow r;
        r.n = n;
        r.dw_far = word_length(sw, far, 2 * n + 1);
        r.da_far = word_length(sa, far, 2 * n);
        r.dw_run = word_length(sw, run, 2 * n);
        r.da_run = word_length(sa, run, n);
        rows.push_back(r);
    }
    return rows;
}

LampCertificate non_similarity_certificate(int m, int n_max) {
    check_modulus(m);
    if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
    GenSet sw = wreath_gens(m), sa = automaton_gens(m);

    LampCertificate cert;
    cert.m = m;
    cert.n_max = n_max;

    std::vector<SampleRow> rows;
    for (int n = 1; n <= n_max; ++n) {
        LampElement far = far_lamp(m, n);
        int dw = word_length(sw, far, 2 * n + 1).value();
        int da = word_length(sa, far, 2 * n).value();
        rows.push_back({static_cast<double>(da), static_cast<double>(dw),
                        static_cast<double>(da)});
        if (n == n_max) cert.far_ratio = static_cast<double>(dw) / static_cast<double>(da);
    }
    // The run family is sampled out to twice n_max so that both families
    // reach comparable separations; its ratio is still reported at n_max.
    for (int n = 1; n <= 2 * n_max; ++n) {
        LampElement run = lamp_run(m, n);
        int dw = word_length(sw, run, 2 * n).value();
        int da = word_length(sa, run, n).value();
        rows.push_back({static_cast<double>(da), static_cast<double>(dw),
                        static_cast<double>(da)});
        if (n == n_max) cert.run_ratio = static_cast<double>(dw) / static_cast<double>(da);
    }
    cert.gap = cert.run_ratio - cert.far_ratio;

    CompareOptions opts;
    opts.n_buckets = std::max(2, n_max);
    opts.min_long_samples = std::max(2, n_max / 2);
    cert.comparison = compare_rows(std::move(rows), 2.0 * n_max, opts);
    return cert;
}

}  // namespace solvgeo
