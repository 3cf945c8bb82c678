#include "xdv/triangulation.hpp"

#include "xdv/errors.hpp"
#include "xdv/union_find.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace xdv {

Perm Perm::inverse() const {
    Perm r;
    for (int i = 0; i < 4; ++i) r.img[img[i]] = std::uint8_t(i);
    return r;
}

Perm Perm::operator*(const Perm& q) const {
    Perm r;
    for (int i = 0; i < 4; ++i) r.img[i] = img[q.img[i]];
    return r;
}

int Perm::sign() const {
    int inv = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (img[i] > img[j]) ++inv;
    return inv % 2 ? -1 : 1;
}

std::string Perm::str() const {
    std::string s(4, '0');
    for (int i = 0; i < 4; ++i) s[i] = char('0' + img[i]);
    return s;
}

Perm Perm::parse(std::string_view s) {
    if (s.size() != 4) throw ParseError("permutation must have 4 digits: '" + std::string(s) + "'");
    Perm p;
    int seen = 0;
    for (int i = 0; i < 4; ++i) {
        int d = s[i] - '0';
        if (d < 0 || d > 3 || (seen >> d & 1)) throw ParseError("not a permutation of 0123: '" + std::string(s) + "'");
        seen |= 1 << d;
        p.img[i] = std::uint8_t(d);
    }
    return p;
}

int local_edge(int a, int b) {
    if (a > b) std::swap(a, b);
    static constexpr int table[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
    return table[a][b];
}

std::pair<int, int> edge_ends(int e) {
    static constexpr int ends[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    return {ends[e][0], ends[e][1]};
}

int shape_slot(int e) {
    static constexpr int slot[6] = {0, 2, 1, 1, 2, 0};
    return slot[e];
}

bool is_even(const std::array<int, 4>& v) {
    int inv = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (v[i] > v[j]) ++inv;
    return inv % 2 == 0;
}

std::array<int, 4> even_completion(int a, int b) {
    std::array<int, 4> v{a, b, 0, 0};
    int k = 2;
    for (int x = 0; x < 4; ++x)
        if (x != a && x != b) v[k++] = x;
    if (!is_even(v)) std::swap(v[2], v[3]);
    return v;
}

Triangulation::Triangulation(std::string name, std::vector<Tetrahedron> tets)
    : name_(std::move(name)), tets_(std::move(tets)) {
    for (int i = 0; i < size(); ++i) tets_[i].index = i;
    validate();
    compute_classes();
}

void Triangulation::validate() const {
    const int n = size();
    for (int t = 0; t < n; ++t) {
        for (int f = 0; f < 4; ++f) {
            const int u = tets_[t].neighbor[f];
            if (u < 0) continue;
            if (u >= n)
                throw ValidationError("tet " + std::to_string(t) + " face " + std::to_string(f) + ": neighbor out of range");
            const Perm& p = tets_[t].gluing[f];
            if (p.sign() != -1)
                throw ValidationError("tet " + std::to_string(t) + " face " + std::to_string(f) +
                                      ": gluing " + p.str() + " is even (orientation)");
            const int g = p[f];
            if (tets_[u].neighbor[g] != t || !(tets_[u].gluing[g] == p.inverse()))
                throw ValidationError("tet " + std::to_string(t) + " face " + std::to_string(f) +
                                      ": gluing is not involutive");
            if (u == t && g == f) {
                bool identity = true;
                for (int v = 0; v < 4; ++v)
                    if (v != f && p[v] != v) identity = false;
                if (identity)
                    throw ValidationError("tet " + std::to_string(t) + " face " + std::to_string(f) +
                                          ": face glued to itself by the identity");
            }
        }
    }
}

Corner Triangulation::next_corner(const Corner& c) const {
    const Tetrahedron& T = tets_[c.tet];
    const int f = c.v[2];
    const Perm& p = T.gluing[f];
    return Corner{T.neighbor[f], {p[c.v[0]], p[c.v[1]], p[c.v[3]], p[c.v[2]]}};
}

Corner Triangulation::prev_corner(const Corner& c) const {
    const Tetrahedron& T = tets_[c.tet];
    const int f = c.v[3];
    const Perm& p = T.gluing[f];
    return Corner{T.neighbor[f], {p[c.v[0]], p[c.v[1]], p[c.v[3]], p[c.v[2]]}};
}

void Triangulation::compute_classes() {
    const int n = size();
    closed_ = true;
    for (const auto& T : tets_)
        for (int f = 0; f < 4; ++f)
            if (T.neighbor[f] < 0) closed_ = false;

    edge_of_.assign(n, {-1, -1, -1, -1, -1, -1});
    edges_.clear();
    for (int t = 0; t < n; ++t) {
        for (int e = 0; e < 6; ++e) {
            if (edge_of_[t][e] >= 0) continue;
            auto [a, b] = edge_ends(e);
            Corner start{t, even_completion(a, b)};
            EdgeClass ec;
            ec.id = static_cast<int>(edges_.size());
            std::vector<Corner> fwd{start};
            Corner c = start;
            bool hit_boundary = false;
            while (true) {
                if (tets_[c.tet].neighbor[c.v[2]] < 0) {
                    hit_boundary = true;
                    break;
                }
                c = next_corner(c);
                if (c == start) break;
                fwd.push_back(c);
                if (fwd.size() > 6u * n + 1) throw ValidationError("edge walk does not close");
            }
            if (hit_boundary) {
                std::vector<Corner> back;
                c = start;
                while (tets_[c.tet].neighbor[c.v[3]] >= 0) {
                    c = prev_corner(c);
                    back.push_back(c);
                    if (back.size() > 6u * n + 1) throw ValidationError("edge walk does not close");
                }
                std::reverse(back.begin(), back.end());
                back.insert(back.end(), fwd.begin(), fwd.end());
                fwd = std::move(back);
                ec.boundary = true;
            }
            for (const Corner& k : fwd) {
                int& slot = edge_of_[k.tet][k.edge()];
                if (slot == ec.id) throw ValidationError("an edge is glued to itself with reversed orientation");
                if (slot >= 0) throw ValidationError("edge slot claimed twice");
                slot = ec.id;
            }
            ec.cycle = std::move(fwd);
            ec.valence = static_cast<int>(ec.cycle.size());
            edges_.push_back(std::move(ec));
        }
    }

    UnionFind uf(4 * n);
    for (int t = 0; t < n; ++t)
        for (int f = 0; f < 4; ++f) {
            const int u = tets_[t].neighbor[f];
            if (u < 0) continue;
            for (int v = 0; v < 4; ++v)
                if (v != f) uf.unite(4 * t + v, 4 * u + tets_[t].gluing[f][v]);
        }
    cusp_of_.assign(n, {-1, -1, -1, -1});
    cusps_.clear();
    std::map<int, int> root_to_id;
    for (int s = 0; s < 4 * n; ++s) {
        const int r = uf.find(s);
        auto it = root_to_id.find(r);
        if (it == root_to_id.end()) {
            it = root_to_id.emplace(r, static_cast<int>(cusps_.size())).first;
            cusps_.push_back(CuspClass{it->second, {}});
        }
        cusps_[it->second].members.emplace_back(s / 4, s % 4);
        cusp_of_[s / 4][s % 4] = it->second;
    }

    face_of_.assign(n, {-1, -1, -1, -1});
    faces_.clear();
    for (int t = 0; t < n; ++t)
        for (int f = 0; f < 4; ++f) {
            if (face_of_[t][f] >= 0) continue;
            FaceClass fc;
            fc.id = static_cast<int>(faces_.size());
            fc.slots.emplace_back(t, f);
            face_of_[t][f] = fc.id;
            const int u = tets_[t].neighbor[f];
            if (u >= 0) {
                const int g = tets_[t].gluing[f][f];
                if (!(u == t && g == f)) {
                    fc.slots.emplace_back(u, g);
                    face_of_[u][g] = fc.id;
                }
            }
            faces_.push_back(std::move(fc));
        }
}

void Triangulation::require_closed(const char* what) const {
    if (!closed_) throw ValidationError(std::string(what) + ": triangulation has unglued faces");
}

int Triangulation::link_euler_characteristic(int cusp) const {
    // Link vertex ids: (tet, cusp vertex, other vertex) -> 16*t + 4*v + w.
    const int n = size();
    UnionFind uf(16 * n);
    int half_edges = 0;
    for (auto [t, v] : cusps_[cusp].members)
        for (int f = 0; f < 4; ++f) {
            if (f == v) continue;
            const int u = tets_[t].neighbor[f];
            half_edges += u >= 0 ? 1 : 2;
            if (u < 0) continue;
            const Perm& p = tets_[t].gluing[f];
            for (int w = 0; w < 4; ++w)
                if (w != v && w != f) uf.unite(16 * t + 4 * v + w, 16 * u + 4 * p[v] + p[w]);
        }
    std::set<int> roots;
    for (auto [t, v] : cusps_[cusp].members)
        for (int w = 0; w < 4; ++w)
            if (w != v) roots.insert(uf.find(16 * t + 4 * v + w));
    const int F = static_cast<int>(cusps_[cusp].members.size());
    return static_cast<int>(roots.size()) - half_edges / 2 + F;
}

bool Triangulation::is_cusped_manifold() const {
    if (!closed_ || static_cast<int>(edges_.size()) != size()) return false;
    for (int c = 0; c < static_cast<int>(cusps_.size()); ++c)
        if (link_euler_characteristic(c) != 0) return false;
    return true;
}

namespace {

std::string trim(std::string_view s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

int parse_int(const std::string& tok, int line) {
    try {
        size_t used = 0;
        int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("expected integer, got '" + tok + "'", line, 1);
    }
}

} // namespace

Triangulation load_triangulation(std::string_view text, std::string name) {
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    int count = -1;
    std::vector<Tetrahedron> tets;
    std::vector<bool> seen;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (count < 0) {
            if (kw != "tets") throw ParseError("expected header 'tets N'", lineno, 1);
            std::string n;
            if (!(ls >> n)) throw ParseError("missing tetrahedron count", lineno, 6);
            count = parse_int(n, lineno);
            if (count < 0) throw ParseError("negative tetrahedron count", lineno, 6);
            std::string extra;
            if (ls >> extra) throw ParseError("trailing text after header", lineno, 1);
            tets.assign(count, Tetrahedron{});
            seen.assign(count, false);
            continue;
        }
        if (kw != "tet") throw ParseError("expected 'tet <i> : ...'", lineno, 1);
        // Normalize the separators so ':' and '|' parse as tokens.
        std::string rest;
        std::getline(ls, rest);
        std::string spaced;
        for (char ch : rest) {
            if (ch == ':' || ch == '|') {
                spaced += ' ';
                spaced += ch;
                spaced += ' ';
            } else {
                spaced += ch;
            }
        }
        std::istringstream ts(spaced);
        std::vector<std::string> tok;
        for (std::string s; ts >> s;) tok.push_back(s);
        if (tok.size() != 11 || tok[1] != ":" || tok[6] != "|")
            throw ParseError("malformed tetrahedron line", lineno, 1);
        const int i = parse_int(tok[0], lineno);
        if (i < 0 || i >= count) throw ParseError("tetrahedron index out of range", lineno, 5);
        if (seen[i]) throw ParseError("tetrahedron " + std::to_string(i) + " listed twice", lineno, 5);
        seen[i] = true;
        Tetrahedron& T = tets[i];
        for (int f = 0; f < 4; ++f) {
            T.neighbor[f] = parse_int(tok[2 + f], lineno);
            const std::string& p = tok[7 + f];
            if (T.neighbor[f] < 0) {
                if (T.neighbor[f] != -1 || p != "----")
                    throw ParseError("unglued face must read '-1' with permutation '----'", lineno, 1);
                T.gluing[f] = Perm{};
            } else {
                if (p == "----") throw ParseError("glued face needs a permutation", lineno, 1);
                T.gluing[f] = Perm::parse(p);
            }
        }
    }
    if (count < 0) throw ParseError("empty triangulation file");
    for (int i = 0; i < count; ++i)
        if (!seen[i]) throw ParseError("tetrahedron " + std::to_string(i) + " missing");
    return Triangulation(std::move(name), std::move(tets));
}

std::string save_triangulation(const Triangulation& t) {
    std::ostringstream out;
    if (!t.name().empty()) out << "# " << t.name() << "\n";
    out << "tets " << t.size() << "\n";
    for (const auto& T : t.tets()) {
        out << "tet " << T.index << " :";
        for (int f = 0; f < 4; ++f) out << ' ' << T.neighbor[f];
        out << " |";
        for (int f = 0; f < 4; ++f) out << ' ' << (T.neighbor[f] < 0 ? std::string("----") : T.gluing[f].str());
        out << "\n";
    }
    return out.str();
}

Triangulation figure_eight() {
    static constexpr const char* text =
        "tets 2\n"
        "tet 0 : 1 1 1 1 | 0132 1230 2310 2103\n"
        "tet 1 : 0 0 0 0 | 0132 3201 3012 2103\n";
    return load_triangulation(text, "fig8");
}

namespace {

/// New tetrahedra described by abstract vertex names, glued by matching names.
struct Rebuild {
    /// A face slot of a removed tetrahedron taken over by a face of new tet `new_tet`.
    /// The face is the one whose three names appear in `name_to_old`.
    struct Replacement {
        int new_tet;
        int old_tet;
        int old_face;
        std::map<int, int> name_to_old;
    };

    std::vector<std::array<int, 4>> names;
    std::vector<std::pair<int, int>> internal;
    std::vector<Replacement> repl;

    int label(int k, int name) const {
        for (int i = 0; i < 4; ++i)
            if (names[k][i] == name) return i;
        return -1;
    }

    int new_face(const Replacement& r) const {
        for (int i = 0; i < 4; ++i)
            if (!r.name_to_old.count(names[r.new_tet][i])) return i;
        throw ValidationError("rebuild: replacement covers four names");
    }

    /// New labels of tet r.new_tet -> labels of the old tetrahedron.
    Perm old_map(const Replacement& r) const {
        Perm p;
        const int nf = new_face(r);
        for (int i = 0; i < 4; ++i) p.img[i] = std::uint8_t(i == nf ? r.old_face : r.name_to_old.at(names[r.new_tet][i]));
        return p;
    }

    Triangulation apply(const Triangulation& T, const std::set<int>& removed) {
        for (int k = 0; k < static_cast<int>(names.size()); ++k) {
            bool first = true;
            for (const auto& r : repl) {
                if (r.new_tet != k) continue;
                if (first && old_map(r).sign() == -1) std::swap(names[k][2], names[k][3]);
                first = false;
                if (old_map(r).sign() == -1) throw ValidationError("rebuild: inconsistent orientation");
            }
        }
        std::vector<int> renumber(T.size(), -1);
        int next = 0;
        for (int t = 0; t < T.size(); ++t)
            if (!removed.count(t)) renumber[t] = next++;
        const int base = next;
        std::vector<Tetrahedron> out(base + names.size());
        for (int t = 0; t < T.size(); ++t) {
            if (removed.count(t)) continue;
            Tetrahedron nt = T.tet(t);
            for (int f = 0; f < 4; ++f)
                if (nt.neighbor[f] >= 0 && !removed.count(nt.neighbor[f])) nt.neighbor[f] = renumber[nt.neighbor[f]];
            out[renumber[t]] = nt;
        }
        std::map<std::pair<int, int>, const Replacement*> by_slot;
        for (const auto& r : repl) by_slot[{r.old_tet, r.old_face}] = &r;
        for (const auto& r : repl) {
            const Perm tau = old_map(r);
            const int nf = new_face(r);
            const Tetrahedron& O = T.tet(r.old_tet);
            const int nb = O.neighbor[r.old_face];
            Tetrahedron& N = out[base + r.new_tet];
            if (nb < 0) {
                N.neighbor[nf] = -1;
                continue;
            }
            const Perm G = O.gluing[r.old_face];
            const int g = G[r.old_face];
            if (!removed.count(nb)) {
                const Perm P = G * tau;
                N.neighbor[nf] = renumber[nb];
                N.gluing[nf] = P;
                out[renumber[nb]].neighbor[g] = base + r.new_tet;
                out[renumber[nb]].gluing[g] = P.inverse();
            } else {
                auto it = by_slot.find({nb, g});
                if (it == by_slot.end()) throw ValidationError("rebuild: partner slot not replaced");
                const Replacement& r2 = *it->second;
                N.neighbor[nf] = base + r2.new_tet;
                N.gluing[nf] = old_map(r2).inverse() * G * tau;
            }
        }
        for (auto [k1, k2] : internal) {
            int f1 = -1, f2 = -1;
            for (int i = 0; i < 4; ++i) {
                if (label(k2, names[k1][i]) < 0) f1 = i;
                if (label(k1, names[k2][i]) < 0) f2 = i;
            }
            Perm P;
            for (int i = 0; i < 4; ++i) P.img[i] = std::uint8_t(i == f1 ? f2 : label(k2, names[k1][i]));
            out[base + k1].neighbor[f1] = base + k2;
            out[base + k1].gluing[f1] = P;
            out[base + k2].neighbor[f2] = base + k1;
            out[base + k2].gluing[f2] = P.inverse();
        }
        return Triangulation(T.name(), std::move(out));
    }
};

} // namespace

Triangulation two_three_move(const Triangulation& t, int tet, int face) {
    if (tet < 0 || tet >= t.size() || face < 0 || face > 3) throw DomainError("2-3 move: no such face");
    const Tetrahedron& A = t.tet(tet);
    const int b = A.neighbor[face];
    if (b < 0) throw DomainError("2-3 move: boundary face");
    if (b == tet) throw DomainError("2-3 move: face joins a tetrahedron to itself");
    const Perm G = A.gluing[face];
    std::array<int, 3> X{};
    int k = 0;
    for (int v = 0; v < 4; ++v)
        if (v != face) X[k++] = v;
    constexpr int N = 10, S = 11;  // apex of A, apex of B; equator names 0,1,2
    Rebuild rb;
    for (int m = 0; m < 3; ++m) {
        const int m1 = (m + 1) % 3, opp = (m + 2) % 3;
        rb.names.push_back({N, S, m, m1});
        rb.repl.push_back({m, tet, X[opp], {{N, face}, {m, X[m]}, {m1, X[m1]}}});
        rb.repl.push_back({m, b, G[X[opp]], {{S, G[face]}, {m, G[X[m]]}, {m1, G[X[m1]]}}});
    }
    rb.internal = {{0, 1}, {1, 2}, {2, 0}};
    return rb.apply(t, {tet, b});
}

Triangulation three_two_move(const Triangulation& t, int edge) {
    if (edge < 0 || edge >= static_cast<int>(t.edges().size())) throw DomainError("3-2 move: no such edge");
    const EdgeClass& ec = t.edges()[edge];
    if (ec.boundary || ec.valence != 3) throw DomainError("3-2 move: edge must be interior of valence 3");
    std::set<int> ts;
    for (const auto& c : ec.cycle) ts.insert(c.tet);
    if (ts.size() != 3) throw DomainError("3-2 move: edge must meet three distinct tetrahedra");
    constexpr int N = 10, S = 11;  // edge ends v0, v1; equator names 0,1,2
    Rebuild rb;
    rb.names = {{N, 0, 1, 2}, {S, 0, 1, 2}};
    for (int k = 0; k < 3; ++k) {
        const Corner& c = ec.cycle[k];
        const int k1 = (k + 1) % 3;
        rb.repl.push_back({0, c.tet, c.v[1], {{N, c.v[0]}, {k, c.v[2]}, {k1, c.v[3]}}});
        rb.repl.push_back({1, c.tet, c.v[0], {{S, c.v[1]}, {k, c.v[2]}, {k1, c.v[3]}}});
    }
    rb.internal = {{0, 1}};
    return rb.apply(t, ts);
}

bool isomorphic(const Triangulation& a, const Triangulation& b) {
    if (a.size() != b.size()) return false;
    const int n = a.size();
    if (n == 0) return true;
    for (int t0 = 0; t0 < n; ++t0) {
        std::array<int, 4> base{0, 1, 2, 3};
        do {
            Perm p0(base[0], base[1], base[2], base[3]);
            std::vector<int> map(n, -1);
            std::vector<Perm> rel(n);
            std::vector<bool> used(n, false);
            map[0] = t0;
            rel[0] = p0;
            used[t0] = true;
            std::vector<int> queue{0};
            bool ok = true;
            for (size_t qi = 0; qi < queue.size() && ok; ++qi) {
                const int x = queue[qi];
                const int y = map[x];
                for (int f = 0; f < 4 && ok; ++f) {
                    const int xn = a.tet(x).neighbor[f];
                    const int yf = rel[x][f];
                    const int yn = b.tet(y).neighbor[yf];
                    if ((xn < 0) != (yn < 0)) {
                        ok = false;
                        break;
                    }
                    if (xn < 0) continue;
                    const Perm expect = b.tet(y).gluing[yf] * rel[x] * a.tet(x).gluing[f].inverse();
                    if (map[xn] < 0) {
                        if (used[yn]) {
                            ok = false;
                            break;
                        }
                        map[xn] = yn;
                        rel[xn] = expect;
                        used[yn] = true;
                        queue.push_back(xn);
                    } else if (map[xn] != yn || !(rel[xn] == expect)) {
                        ok = false;
                    }
                }
            }
            if (ok && static_cast<int>(queue.size()) == n) return true;
        } while (std::next_permutation(base.begin(), base.end()));
    }
    return false;
}

namespace {

/// Rank and invariant factors of an integer matrix (rows = relators).
void smith(std::vector<std::vector<long long>> m, int cols, int& rank_out, std::vector<long long>& factors) {
    const int rows = static_cast<int>(m.size());
    int r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        while (true) {
            // find smallest nonzero in submatrix [r..][c..]
            int pi = -1, pj = -1;
            long long best = 0;
            for (int i = r; i < rows; ++i)
                for (int j = c; j < cols; ++j)
                    if (m[i][j] != 0 && (best == 0 || std::llabs(m[i][j]) < best)) {
                        best = std::llabs(m[i][j]);
                        pi = i;
                        pj = j;
                    }
            if (pi < 0) {
                rank_out = r;
                return;
            }
            std::swap(m[r], m[pi]);
            for (auto& row : m) std::swap(row[c], row[pj]);
            bool clean = true;
            for (int i = r + 1; i < rows; ++i) {
                long long q = m[i][c] / m[r][c];
                for (int j = c; j < cols; ++j) m[i][j] -= q * m[r][j];
                if (m[i][c] != 0) clean = false;
            }
            for (int j = c + 1; j < cols; ++j) {
                long long q = m[r][j] / m[r][c];
                for (int i = r; i < rows; ++i) m[i][j] -= q * m[i][c];
                if (m[r][j] != 0) clean = false;
            }
            if (!clean) continue;
            // divisibility of the rest
            bool divides = true;
            for (int i = r + 1; i < rows && divides; ++i)
                for (int j = c + 1; j < cols; ++j)
                    if (m[i][j] % m[r][c] != 0) {
                        for (int jj = c; jj < cols; ++jj) m[r][jj] += m[i][jj];
                        divides = false;
                        break;
                    }
            if (!divides) continue;
            factors.push_back(std::llabs(m[r][c]));
            ++r;
            break;
        }
    }
    rank_out = r;
}

} // namespace

Homology first_homology(const Triangulation& t) {
    t.require_closed("first_homology");
    const int n = t.size();
    // Spanning tree of the dual graph.
    std::vector<bool> tree_face(t.faces().size(), false);
    std::vector<bool> seen(n, false);
    std::vector<int> queue{0};
    seen[0] = true;
    for (size_t i = 0; i < queue.size(); ++i) {
        const int x = queue[i];
        for (int f = 0; f < 4; ++f) {
            const int y = t.tet(x).neighbor[f];
            if (y >= 0 && !seen[y]) {
                seen[y] = true;
                tree_face[t.face_of(x, f)] = true;
                queue.push_back(y);
            }
        }
    }
    std::vector<int> gen_of(t.faces().size(), -1);
    int gens = 0;
    for (const auto& fc : t.faces())
        if (!tree_face[fc.id]) gen_of[fc.id] = gens++;
    std::vector<std::vector<long long>> rel;
    for (const auto& ec : t.edges()) {
        std::vector<long long> row(gens, 0);
        for (const Corner& c : ec.cycle) {
            const int fid = t.face_of(c.tet, c.v[2]);
            if (gen_of[fid] < 0) continue;
            const auto& slots = t.faces()[fid].slots;
            const int s = (slots.front() == std::make_pair(c.tet, c.v[2])) ? 1 : -1;
            row[gen_of[fid]] += s;
        }
        rel.push_back(row);
    }
    int r = 0;
    std::vector<long long> f;
    smith(rel, gens, r, f);
    Homology h;
    h.rank = gens - r;
    for (long long x : f)
        if (x > 1) h.torsion.push_back(x);
    return h;
}

bool dual_loops_span_homology(const Triangulation& t, const std::vector<char>& tets,
                              const std::vector<std::array<char, 4>>& crossable) {
    t.require_closed("dual_loops_span_homology");
    const int nf = static_cast<int>(t.faces().size());
    auto crossing = [&](int tet, int f) {
        const int fid = t.face_of(tet, f);
        return std::make_pair(fid, t.faces()[fid].slots.front() == std::make_pair(tet, f) ? 1LL : -1LL);
    };
    // Relators of H1 on face generators: the dual spanning tree and the edge cycles.
    std::vector<std::vector<long long>> rows;
    {
        std::vector<char> seen(t.size(), 0);
        std::vector<int> queue{0};
        seen[0] = 1;
        for (size_t i = 0; i < queue.size(); ++i)
            for (int f = 0; f < 4; ++f) {
                const int y = t.tet(queue[i]).neighbor[f];
                if (seen[y]) continue;
                seen[y] = 1;
                std::vector<long long> row(nf, 0);
                row[t.face_of(queue[i], f)] = 1;
                rows.push_back(row);
                queue.push_back(y);
            }
    }
    for (const auto& ec : t.edges()) {
        std::vector<long long> row(nf, 0);
        for (const Corner& c : ec.cycle) {
            auto [fid, s] = crossing(c.tet, c.v[2]);
            row[fid] += s;
        }
        rows.push_back(row);
    }
    // Cycles of the subgraph: potentials along its own spanning tree.
    int base = -1;
    for (int i = 0; i < t.size() && base < 0; ++i)
        if (tets[i]) base = i;
    if (base < 0) throw DomainError("dual_loops_span_homology needs a nonempty set");
    std::vector<std::vector<long long>> pot(t.size());
    std::vector<std::array<char, 4>> tree(t.size(), {0, 0, 0, 0});
    pot[base].assign(nf, 0);
    std::vector<int> queue{base};
    for (size_t i = 0; i < queue.size(); ++i) {
        const int x = queue[i];
        for (int f = 0; f < 4; ++f) {
            if (!crossable[x][f]) continue;
            const int y = t.tet(x).neighbor[f];
            if (!tets[y] || !pot[y].empty()) continue;
            pot[y] = pot[x];
            auto [fid, s] = crossing(x, f);
            pot[y][fid] += s;
            tree[x][f] = 1;
            tree[y][t.tet(x).gluing[f][f]] = 1;
            queue.push_back(y);
        }
    }
    for (int x : queue)
        for (int f = 0; f < 4; ++f) {
            if (!crossable[x][f] || tree[x][f]) continue;
            const int y = t.tet(x).neighbor[f];
            std::vector<long long> row = pot[x];
            auto [fid, s] = crossing(x, f);
            row[fid] += s;
            for (int k = 0; k < nf; ++k) row[k] -= pot[y][k];
            rows.push_back(row);
        }
    int r = 0;
    std::vector<long long> factors;
    smith(rows, nf, r, factors);
    if (r < nf) return false;
    for (long long x : factors)
        if (x != 1) return false;
    return true;
}

} // namespace xdv
