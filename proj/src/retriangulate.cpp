#include "xdv/retriangulate.hpp"

#include "xdv/errors.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace xdv {

namespace {

Corner cycle_at(const Triangulation& t, int edge, int k) {
    const auto& cyc = t.edges()[edge].cycle;
    const int v = static_cast<int>(cyc.size());
    return cyc[((k % v) + v) % v];
}

void glue(std::vector<Tetrahedron>& tets, int a, int fa, int b, const Perm& p) {
    tets[a].neighbor[fa] = b;
    tets[a].gluing[fa] = p;
    tets[b].neighbor[p[fa]] = a;
    tets[b].gluing[p[fa]] = p.inverse();
}

Perm from_images(const std::array<int, 4>& img) { return Perm(img[0], img[1], img[2], img[3]); }

} // namespace

int crossing_index(const Triangulation& t, int tet, int face, int le) {
    const int e = t.edge_of(tet, le);
    const auto& cyc = t.edges()[e].cycle;
    const int v = static_cast<int>(cyc.size());
    for (int i = 0; i < v; ++i) {
        const Corner& c = cyc[i];
        const Corner& d = cyc[(i + 1) % v];
        if (c.tet == tet && c.v[2] == face && c.edge() == le) return i;
        if (d.tet == tet && d.v[3] == face && d.edge() == le) return i;
    }
    throw ValidationError("face does not meet the edge");
}

PillowSite effective_site(const Triangulation& t, const PillowSite& site) {
    PillowSite s = site;
    if (s.folded()) return s;
    const Corner ci = cycle_at(t, s.edge, s.i), ci1 = cycle_at(t, s.edge, s.i + 1);
    const Corner cj = cycle_at(t, s.edge, s.j), cj1 = cycle_at(t, s.edge, s.j + 1);
    std::set<std::pair<int, int>> slots{{ci1.tet, ci1.v[3]}, {ci.tet, ci.v[2]}, {cj.tet, cj.v[2]}, {cj1.tet, cj1.v[3]}};
    if (slots.size() < 4) s.j = s.i;
    return s;
}

PillowResult insert_pillow(const Triangulation& t, const PillowSite& site) {
    t.require_closed("pillow insertion");
    if (site.edge < 0 || site.edge >= static_cast<int>(t.edges().size())) throw ValidationError("pillow site edge out of range");
    const int v = t.edges()[site.edge].valence;
    if (site.i < 0 || site.i >= v || site.j < 0 || site.j >= v) throw ValidationError("pillow site crossing out of range");
    const PillowSite s = effective_site(t, site);
    const Corner ci = cycle_at(t, s.edge, s.i), ci1 = cycle_at(t, s.edge, s.i + 1);
    const Corner cj = cycle_at(t, s.edge, s.j), cj1 = cycle_at(t, s.edge, s.j + 1);

    std::vector<Tetrahedron> tets = t.tets();
    const int P = t.size(), Q = t.size() + 1;
    tets.emplace_back();
    tets.emplace_back();
    tets[P].index = P;
    tets[Q].index = Q;
    // Faces of P and Q against the first face's two sides.
    glue(tets, Q, 3, ci.tet, from_images({ci.v[0], ci.v[1], ci.v[3], ci.v[2]}));
    if (s.folded()) {
        glue(tets, Q, 2, ci1.tet, from_images({ci1.v[0], ci1.v[1], ci1.v[3], ci1.v[2]}));
        glue(tets, P, 2, P, Perm(0, 1, 3, 2));
    } else {
        glue(tets, P, 2, ci1.tet, from_images({ci1.v[0], ci1.v[1], ci1.v[3], ci1.v[2]}));
        glue(tets, P, 3, cj.tet, from_images({cj.v[0], cj.v[1], cj.v[3], cj.v[2]}));
        glue(tets, Q, 2, cj1.tet, from_images({cj1.v[0], cj1.v[1], cj1.v[3], cj1.v[2]}));
    }
    glue(tets, P, 0, Q, Perm(0, 1, 3, 2));
    glue(tets, P, 1, Q, Perm(0, 1, 3, 2));

    PillowResult r{Triangulation(t.name() + "+pillow", std::move(tets)), {}};
    const Triangulation& n = r.triangulation;
    SplitRecord& rec = r.record;
    rec.old_tets = t.size();
    rec.split_edge = s.edge;
    rec.folded = s.folded();
    rec.tet_a = P;
    rec.tet_b = Q;
    rec.up = n.edge_of(P, local_edge(0, 1));
    rec.down = n.edge_of(Q, local_edge(0, 1));
    rec.diagonal = n.edge_of(P, local_edge(2, 3));
    for (const auto& ec : t.edges()) {
        if (ec.id == s.edge) rec.edge_map.push_back({rec.up, rec.down});
        else rec.edge_map.push_back({n.edge_of(ec.cycle[0].tet, ec.cycle[0].edge())});
    }
    for (const auto& fc : t.faces()) {
        std::vector<int> ids;
        for (auto [tet, face] : fc.slots) ids.push_back(n.face_of(tet, face));
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        rec.face_map.push_back(ids);
    }
    return r;
}

std::vector<cplx> pillow_shapes(const Triangulation& t, const PillowSite& site, const std::vector<cplx>& z) {
    if (effective_site(t, site).folded()) throw DomainError("a folded pillow has a valence-one edge and no nondegenerate shape");
    const int v = t.edges()[site.edge].valence;
    cplx up = 1;
    for (int k = site.i + 1; k <= site.j + (site.j < site.i + 1 ? v : 0); ++k) {
        const Corner c = cycle_at(t, site.edge, k);
        up *= slot_value(z[c.tet], shape_slot(c.edge()));
    }
    std::vector<cplx> out = z;
    out.push_back(1.0 / up);
    out.push_back(up);
    return out;
}

std::vector<EdgeSelection> children(const EdgeSelection& sel, const SplitRecord& rec, Ball& after) {
    const Triangulation& t = after.triangulation();
    std::vector<int> base;
    for (int e : sel.e0)
        for (int n : rec.edge_map.at(e)) base.push_back(n);
    std::vector<EdgeSelection> out;
    for (bool with_f : {false, true}) {
        auto ids = base;
        if (with_f) ids.push_back(rec.diagonal);
        EdgeSelection c(ids);
        if (!locally_valid(c, t)) continue;
        if (bad_loop_screen(c, after)) continue;
        out.push_back(c);
    }
    if (out.empty()) throw DomainError("no child of " + sel.str() + " survives the screen; the screening depth is too small");
    return out;
}

std::vector<EdgeSelection> children(const EdgeSelection& sel, const SplitRecord& rec, const Triangulation& after, int depth) {
    Ball b(after);
    b.expand(depth);
    return children(sel, rec, b);
}

EdgeSelection parent(const EdgeSelection& sel, const SplitRecord& rec) {
    std::vector<int> ids;
    for (size_t e = 0; e < rec.edge_map.size(); ++e) {
        bool all = true;
        for (int n : rec.edge_map[e]) all = all && sel.in_e0(n);
        if (all) ids.push_back(static_cast<int>(e));
    }
    return EdgeSelection(ids);
}

namespace {

/// Canonical name of a lifted face together with one of its edges.
struct FaceFlag {
    int lift, face, edge;
    auto operator<=>(const FaceFlag&) const = default;
};

FaceFlag canonical(Ball& ball, int lift, int face, int edge) {
    const auto& t = ball.triangulation();
    const int tet = ball.lift(lift).tet;
    const Perm& g = t.tet(tet).gluing[face];
    const int other = ball.neighbor(lift, face);
    auto [a, b] = edge_ends(edge);
    FaceFlag x{lift, face, edge}, y{other, g[face], local_edge(std::min(g[a], g[b]), std::max(g[a], g[b]))};
    return std::min(x, y);
}

/// Faces met walking once around a lifted edge, starting from the crossing through `face`.
std::vector<FaceFlag> around(Ball& ball, int lift, int face, int le) {
    const auto& t = ball.triangulation();
    auto [a, b] = edge_ends(le);
    const int w = 6 - a - b - face;
    Corner c{ball.lift(lift).tet, {a, b, face, w}};
    if (!is_even(c.v)) c.v = {b, a, face, w};
    const int v = t.edges()[t.edge_of(c.tet, le)].valence;
    std::vector<FaceFlag> out;
    int L = lift;
    for (int m = 1; m < v; ++m) {
        L = ball.neighbor(L, c.v[2]);
        c = t.next_corner(c);
        out.push_back({L, c.v[2], c.edge()});
    }
    return out;
}

} // namespace

Strip find_strip(Ball& ball, const std::vector<std::pair<int, int>>& starts, const EndPredicate& is_end,
                 const EdgePredicate& edge_ok, int max_states) {
    const auto& t = ball.triangulation();
    struct State {
        int lift, face, in_edge;  // in_edge -1 at a start face
        int prev;
        int out_edge;  // edge used to leave the previous face
    };
    std::vector<State> states;
    std::set<FaceFlag> seen_in;
    std::set<std::pair<int, int>> seen_start;
    std::deque<int> queue;
    for (auto [l, f] : starts) {
        const FaceFlag k = canonical(ball, l, f, 0);
        if (!seen_start.insert({k.lift, k.face}).second) continue;
        states.push_back({l, f, -1, -1, -1});
        queue.push_back(static_cast<int>(states.size()) - 1);
    }
    int goal = -1;
    while (!queue.empty() && goal < 0) {
        if (static_cast<int>(states.size()) > max_states) break;
        const int si = queue.front();
        queue.pop_front();
        const State s = states[si];
        const int tet = ball.lift(s.lift).tet;
        for (int le = 0; le < 6 && goal < 0; ++le) {
            auto [a, b] = edge_ends(le);
            if (a == s.face || b == s.face || le == s.in_edge) continue;
            if (!edge_ok(t.edge_of(tet, le))) continue;
            for (const FaceFlag& n : around(ball, s.lift, s.face, le)) {
                const FaceFlag key = canonical(ball, n.lift, n.face, n.edge);
                if (!seen_in.insert(key).second) continue;
                states.push_back({n.lift, n.face, n.edge, si, le});
                const int ni = static_cast<int>(states.size()) - 1;
                if (is_end(n.lift, n.face, n.edge)) {
                    goal = ni;
                    break;
                }
                queue.push_back(ni);
            }
        }
    }
    if (goal < 0) throw DomainError("no strip found");
    std::vector<int> path;
    for (int k = goal; k >= 0; k = states[k].prev) path.push_back(k);
    std::reverse(path.begin(), path.end());
    Strip strip;
    std::map<int, int> face_visits, edge_visits;
    for (size_t k = 0; k < path.size(); ++k) {
        const State& s = states[path[k]];
        const int tet = ball.lift(s.lift).tet;
        strip.faces.push_back({tet, s.face, s.lift, face_visits[t.face_of(tet, s.face)]++});
        if (k > 0) {
            const State& p = states[path[k - 1]];
            const int ptet = ball.lift(p.lift).tet;
            const int ec = t.edge_of(ptet, s.out_edge);
            strip.links.push_back({ec, s.out_edge, s.in_edge, edge_visits[ec]++});
        }
    }
    return strip;
}

namespace {

/// New internal face of the pillow, as a strip face with its edge along the old next link.
struct Continuation {
    StripFace face;
    int out_edge;  // local edge in the first new tet
};

/// Which end of the split edge the outgoing link of the second site face uses, from the
/// corners of the crossing it was met at.
Continuation next_face(const Triangulation& before, const PillowSite& site, const SplitRecord& rec,
                       const StripFace& second, int second_out) {
    const Corner cj = cycle_at(before, site.edge, site.j);
    const Corner cj1 = cycle_at(before, site.edge, site.j + 1);
    int a, b;
    if (cj.tet == second.tet && cj.v[2] == second.face) a = cj.v[0], b = cj.v[1];
    else a = cj1.v[0], b = cj1.v[1];
    auto [p, q] = edge_ends(second_out);
    (void)b;
    const bool uses_a = p == a || q == a;
    Continuation c;
    c.face = {rec.tet_a, uses_a ? 1 : 0, -1, 0};
    c.out_edge = uses_a ? local_edge(0, 2) : local_edge(1, 2);
    return c;
}

std::vector<EdgeSelection> all_children(const std::vector<EdgeSelection>& sels, const SplitRecord& rec, Ball& ball) {
    std::vector<EdgeSelection> out;
    for (const auto& s : sels)
        for (auto& c : children(s, rec, ball)) out.push_back(c);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Child of `sel` to follow: the diagonal in E+ when that survives.
EdgeSelection follow(const EdgeSelection& sel, const SplitRecord& rec, const std::vector<EdgeSelection>& pool) {
    std::vector<int> base;
    for (int e : sel.e0)
        for (int n : rec.edge_map.at(e)) base.push_back(n);
    EdgeSelection plain(base);
    if (std::find(pool.begin(), pool.end(), plain) != pool.end()) return plain;
    base.push_back(rec.diagonal);
    return EdgeSelection(base);
}

} // namespace

RepairResult insert_pillows_along_strip(const Triangulation& t, const std::vector<EdgeSelection>& descendants,
                                        int followed, const Strip& strip, const RepairConfig& cfg) {
    if (strip.size() < 2) throw ValidationError("a strip needs two faces");
    RepairResult r{t, descendants, 0, 0, {}};
    EdgeSelection cur = descendants.at(followed);
    // Remaining strip: the current face, its outgoing local edge, then the old faces ahead.
    StripFace head = strip.faces[0];
    int head_out = strip.links[0].out_edge;
    size_t next = 1;
    while (next < strip.faces.size()) {
        const Triangulation& T = r.triangulation;
        const StripFace& target = strip.faces[next];
        const int in_edge = strip.links[next - 1].in_edge;
        const int ec = T.edge_of(head.tet, head_out);
        bool direct = T.edge_of(target.tet, in_edge) == ec;
        if (direct) {
            // Both faces must sit on the same edge class through the recorded incidences.
            try {
                crossing_index(T, target.tet, target.face, in_edge);
            } catch (const ValidationError&) {
                direct = false;
            }
        }
        if (!direct) {
            if (++r.detours > cfg.max_detours) throw Error("detour limit exceeded at strip face " + std::to_string(next));
            // Detour from the current face to the target face across E0 edges, then resume.
            Ball ball(T, head.tet);
            const int want = T.face_of(target.tet, target.face);
            Strip d = find_strip(
                ball, {{0, head.face}},
                [&](int l, int f, int) { return T.face_of(ball.lift(l).tet, f) == want; },
                [&](int e) { return cur.in_e0(e); });
            Strip spliced = d;
            if (next < strip.links.size()) {
                // Carry the target's outgoing edge onto the slot the detour arrived through.
                StripFace& last = spliced.faces.back();
                int out = strip.links[next].out_edge;
                if (last.tet != target.tet || last.face != target.face) {
                    const Perm& g = T.tet(target.tet).gluing[target.face];
                    auto [a, b] = edge_ends(out);
                    out = local_edge(std::min(g[a], g[b]), std::max(g[a], g[b]));
                }
                StripLink link = strip.links[next];
                link.out_edge = out;
                spliced.links.push_back(link);
                for (size_t k = next + 1; k < strip.faces.size(); ++k) {
                    spliced.faces.push_back(strip.faces[k]);
                    if (k < strip.links.size()) spliced.links.push_back(strip.links[k]);
                }
            }
            const int idx = static_cast<int>(std::find(r.descendants.begin(), r.descendants.end(), cur) - r.descendants.begin());
            RepairConfig left{cfg.depth, cfg.max_pillows - r.pillows, cfg.max_detours - r.detours};
            auto rest = insert_pillows_along_strip(T, r.descendants, idx, spliced, left);
            rest.pillows += r.pillows;
            rest.detours += r.detours;
            rest.records.insert(rest.records.begin(), r.records.begin(), r.records.end());
            return rest;
        }
        if (r.pillows >= cfg.max_pillows) throw Error("pillow budget exhausted");
        PillowSite site{ec, crossing_index(T, head.tet, head.face, head_out), crossing_index(T, target.tet, target.face, in_edge)};
        const int target_out = next < strip.links.size() ? strip.links[next].out_edge : -1;
        auto ins = insert_pillow(T, site);
        Ball ball(ins.triangulation);
        ball.expand(cfg.depth);
        auto pool = all_children(r.descendants, ins.record, ball);
        auto kids = children(cur, ins.record, ball);
        cur = follow(cur, ins.record, kids);
        Continuation c{};
        if (target_out >= 0) c = next_face(T, site, ins.record, target, target_out);
        r.records.push_back(ins.record);
        r.triangulation = std::move(ins.triangulation);
        r.descendants = std::move(pool);
        ++r.pillows;
        if (target_out < 0) break;
        head = c.face;
        head_out = c.out_edge;
        ++next;
    }
    return r;
}

namespace {

std::vector<std::pair<int, int>> faces_of_type(Ball& ball, const Classification& c, FaceType ft,
                                               const std::function<bool(int)>& lift_ok) {
    std::vector<std::pair<int, int>> out;
    for (int l = 0; l < ball.size(); ++l) {
        if (!ball.alive(l) || !lift_ok(l)) continue;
        for (int f = 0; f < 4; ++f)
            if (c.faces[ball.lift(l).tet][f] == ft) out.push_back({l, f});
    }
    return out;
}

/// A strip joining two inside components of the cover, for a selection whose condition 1 fails.
Strip component_strip(const Triangulation& t, const EdgeSelection& sel, int depth) {
    const auto c = classify(sel, t);
    const auto comp = inside_components(c, t);
    int root = 0;
    while (comp[root] < 0) ++root;
    Ball ball(t, root);
    ball.expand(depth);
    auto edge_ok = [&](int e) { return sel.in_e0(e); };
    if (*std::max_element(comp.begin(), comp.end()) > 0) {
        auto starts = faces_of_type(ball, c, FaceType::F21, [&](int l) { return comp[ball.lift(l).tet] == 0; });
        return find_strip(
            ball, starts,
            [&](int l, int f, int) { return c.faces[ball.lift(l).tet][f] == FaceType::F21 && comp[ball.lift(l).tet] > 0; },
            edge_ok);
    }
    // Connected quotient: join the root lift to a translate the inside search cannot reach.
    const int budget = 5000;
    const auto missed = uncertified_translates(ball, c, budget);
    if (!missed.empty()) {
        const auto home = inside_reach(ball, c, 0, budget);
        const auto other = inside_reach(ball, c, missed[0], budget);
        auto starts = faces_of_type(ball, c, FaceType::F21, [&](int l) { return l < static_cast<int>(home.size()) && home[l]; });
        return find_strip(
            ball, starts,
            [&](int l, int f, int) {
                return c.faces[ball.lift(l).tet][f] == FaceType::F21 && l < static_cast<int>(other.size()) && other[l];
            },
            edge_ok);
    }
    throw DomainError("no separated inside component found within the search budget");
}

/// A strip from a type-21 face across type-3 faces to one whose far vertex is a starved cusp.
Strip cusp_strip(const Triangulation& t, const EdgeSelection& sel, const std::vector<int>& starved, int depth) {
    const auto c = classify(sel, t);
    Ball ball(t);
    ball.expand(depth);
    auto starts = faces_of_type(ball, c, FaceType::F21, [](int) { return true; });
    return find_strip(
        ball, starts,
        [&](int l, int f, int in) {
            const int tet = ball.lift(l).tet;
            if (c.faces[tet][f] != FaceType::F3) return false;
            auto [a, b] = edge_ends(in);
            const int apex = 6 - a - b - f;
            return std::find(starved.begin(), starved.end(), t.cusp_of(tet, apex)) != starved.end();
        },
        [&](int e) { return sel.in_e0(e); });
}

} // namespace

RepairResult make_omnipresent(const Triangulation& t, const EdgeSelection& sel, const RepairConfig& cfg) {
    RepairResult r{t, {sel}, 0, 0, {}};
    for (;;) {
        int bad = -1;
        OmnipresenceReport rep;
        for (size_t k = 0; k < r.descendants.size(); ++k) {
            rep = omnipresence(r.descendants[k], r.triangulation, cfg.depth);
            if (!rep.cond3) throw DomainError("selection " + r.descendants[k].str() + " has no type-111 triangle");
            if (!rep.omnipresent()) {
                bad = static_cast<int>(k);
                break;
            }
        }
        if (bad < 0) return r;
        if (r.pillows >= cfg.max_pillows) throw Error("pillow budget exhausted with " + rep.str());
        const auto& s = r.descendants[bad];
        Strip strip = rep.cond1 != Cond1::Proved ? component_strip(r.triangulation, s, cfg.depth)
                                                 : cusp_strip(r.triangulation, s, rep.starved_cusps, cfg.depth);
        RepairConfig left = cfg;
        left.max_pillows = cfg.max_pillows - r.pillows;
        auto step = insert_pillows_along_strip(r.triangulation, r.descendants, bad, strip, left);
        r.triangulation = std::move(step.triangulation);
        r.descendants = std::move(step.descendants);
        r.pillows += step.pillows;
        r.detours += step.detours;
        r.records.insert(r.records.end(), step.records.begin(), step.records.end());
    }
}

AllRepairResult make_all_omnipresent(const Triangulation& t, const RepairConfig& cfg) {
    AllRepairResult out{t, {}, 0};
    for (;;) {
        out.selections = enumerate_selections(out.triangulation, cfg.depth);
        const EdgeSelection* todo = nullptr;
        for (const auto& s : out.selections) {
            const auto rep = omnipresence(s, out.triangulation, cfg.depth);
            if (rep.cond3 && !rep.omnipresent()) {
                todo = &s;
                break;
            }
        }
        if (!todo) return out;
        RepairConfig left = cfg;
        left.max_pillows = cfg.max_pillows - out.pillows;
        auto r = make_omnipresent(out.triangulation, *todo, left);
        out.pillows += r.pillows;
        out.triangulation = std::move(r.triangulation);
    }
}

} // namespace xdv
