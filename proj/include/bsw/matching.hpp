#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "bsw/error.hpp"

namespace bsw {

// Pairwise distance matrix for one pool of beats. The diagonal is +infinity
// so an item can never be paired with itself.
struct AffinityMatrix {
    std::size_t n = 0;
    std::vector<double> d;  // row-major n*n

    AffinityMatrix() = default;
    explicit AffinityMatrix(std::size_t size)
        : n(size), d(size * size, 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            d[i * n + i] = std::numeric_limits<double>::infinity();
    }

    double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }

    void set(std::size_t i, std::size_t j, double value) {
        d[i * n + j] = value;
        d[j * n + i] = value;
    }
};

// A valid matching: pairs and unmatched together partition 0..n-1.
struct MatchingResult {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::size_t> unmatched;
};

namespace detail {

struct MatchEdge {
    int i = 0;
    int j = 0;
    double w = 0.0;
};

// Maximum-weight matching on a general graph: Edmonds' blossom method with
// primal-dual updates, ported from the classic O(n^3) reference
// implementation (Galil's survey / Gabow's thesis lineage). Vertices are
// 0..nv-1; blossoms take ids nv..2nv-1. "Endpoints" address edge ends:
// endpoint 2k is edge k seen from its i side, 2k+1 from its j side.
class BlossomMatcher {
public:
    BlossomMatcher(int nv, std::vector<MatchEdge> edges)
        : nv_(nv), edges_(std::move(edges)) {}

    // mate[v] = partner vertex, or -1 if v stays single
    std::vector<int> solve() {
        const int ne = static_cast<int>(edges_.size());
        if (nv_ == 0 || ne == 0) return std::vector<int>(nv_, -1);

        double maxweight = 0.0;
        for (const auto& e : edges_) maxweight = std::max(maxweight, e.w);

        endpoint_.resize(2 * ne);
        for (int p = 0; p < 2 * ne; ++p)
            endpoint_[p] = (p % 2 == 0) ? edges_[p / 2].i : edges_[p / 2].j;
        neighbend_.assign(nv_, {});
        for (int k = 0; k < ne; ++k) {
            neighbend_[edges_[k].i].push_back(2 * k + 1);
            neighbend_[edges_[k].j].push_back(2 * k);
        }

        mate_.assign(nv_, -1);
        label_.assign(2 * nv_, 0);
        labelend_.assign(2 * nv_, -1);
        inblossom_.resize(nv_);
        std::iota(inblossom_.begin(), inblossom_.end(), 0);
        blossomparent_.assign(2 * nv_, -1);
        blossomchilds_.assign(2 * nv_, {});
        blossombase_.resize(2 * nv_);
        std::iota(blossombase_.begin(), blossombase_.begin() + nv_, 0);
        std::fill(blossombase_.begin() + nv_, blossombase_.end(), -1);
        blossomendps_.assign(2 * nv_, {});
        bestedge_.assign(2 * nv_, -1);
        blossombestedges_.assign(2 * nv_, {});
        has_best_list_.assign(2 * nv_, 0);
        unusedblossoms_.clear();
        for (int b = nv_; b < 2 * nv_; ++b) unusedblossoms_.push_back(b);
        dualvar_.assign(2 * nv_, 0.0);
        std::fill(dualvar_.begin(), dualvar_.begin() + nv_, maxweight);
        allowedge_.assign(ne, false);
        queue_.clear();

        // each stage augments the matching by one edge or proves optimality
        for (int stage = 0; stage < nv_; ++stage) {
            std::fill(label_.begin(), label_.end(), 0);
            std::fill(bestedge_.begin(), bestedge_.end(), -1);
            for (int b = nv_; b < 2 * nv_; ++b) {
                blossombestedges_[b].clear();
                has_best_list_[b] = 0;
            }
            std::fill(allowedge_.begin(), allowedge_.end(), false);
            queue_.clear();

            for (int v = 0; v < nv_; ++v)
                if (mate_[v] == -1 && label_[inblossom_[v]] == 0)
                    assign_label(v, 1, -1);

            bool augmented = false;
            while (true) {
                // grow the alternating forest until it either augments or
                // runs out of tight edges
                while (!queue_.empty() && !augmented) {
                    const int v = queue_.back();
                    queue_.pop_back();
                    for (const int p : neighbend_[v]) {
                        const int k = p / 2;
                        const int w = endpoint_[p];
                        if (inblossom_[v] == inblossom_[w]) continue;
                        double kslack = 0.0;
                        if (!allowedge_[k]) {
                            kslack = slack(k);
                            if (kslack <= 0.0) allowedge_[k] = true;
                        }
                        if (allowedge_[k]) {
                            if (label_[inblossom_[w]] == 0) {
                                assign_label(w, 2, p ^ 1);
                            } else if (label_[inblossom_[w]] == 1) {
                                const int base = scan_blossom(v, w);
                                if (base >= 0) {
                                    add_blossom(base, k);
                                } else {
                                    augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if (label_[w] == 0) {
                                // w sits in a T-blossom but was not itself
                                // reached yet; remember how, for expansion
                                label_[w] = 2;
                                labelend_[w] = p ^ 1;
                            }
                        } else if (label_[inblossom_[w]] == 1) {
                            const int b = inblossom_[v];
                            if (bestedge_[b] == -1 || kslack < slack(bestedge_[b]))
                                bestedge_[b] = k;
                        } else if (label_[w] == 0) {
                            if (bestedge_[w] == -1 || kslack < slack(bestedge_[w]))
                                bestedge_[w] = k;
                        }
                    }
                }
                if (augmented) break;

                // no augmenting path under the current duals: find the
                // smallest dual adjustment that creates a tight edge,
                // frees a vertex dual, or empties a T-blossom dual
                int deltatype = 1;
                double delta =
                    *std::min_element(dualvar_.begin(), dualvar_.begin() + nv_);
                int deltaedge = -1;
                int deltablossom = -1;
                for (int v = 0; v < nv_; ++v) {
                    if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                        const double dd = slack(bestedge_[v]);
                        if (dd < delta) {
                            delta = dd;
                            deltatype = 2;
                            deltaedge = bestedge_[v];
                        }
                    }
                }
                for (int b = 0; b < 2 * nv_; ++b) {
                    if (blossomparent_[b] == -1 && label_[b] == 1 &&
                        bestedge_[b] != -1) {
                        const double dd = slack(bestedge_[b]) / 2.0;
                        if (dd < delta) {
                            delta = dd;
                            deltatype = 3;
                            deltaedge = bestedge_[b];
                        }
                    }
                }
                for (int b = nv_; b < 2 * nv_; ++b) {
                    if (blossombase_[b] >= 0 && blossomparent_[b] == -1 &&
                        label_[b] == 2 && dualvar_[b] < delta) {
                        delta = dualvar_[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }

                for (int v = 0; v < nv_; ++v) {
                    if (label_[inblossom_[v]] == 1)
                        dualvar_[v] -= delta;
                    else if (label_[inblossom_[v]] == 2)
                        dualvar_[v] += delta;
                }
                for (int b = nv_; b < 2 * nv_; ++b) {
                    if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
                        if (label_[b] == 1)
                            dualvar_[b] += delta;
                        else if (label_[b] == 2)
                            dualvar_[b] -= delta;
                    }
                }

                if (deltatype == 1) break;  // optimum reached
                if (deltatype == 2) {
                    allowedge_[deltaedge] = true;
                    int i = edges_[deltaedge].i;
                    if (label_[inblossom_[i]] == 0) i = edges_[deltaedge].j;
                    queue_.push_back(i);
                } else if (deltatype == 3) {
                    allowedge_[deltaedge] = true;
                    queue_.push_back(edges_[deltaedge].i);
                } else {
                    expand_blossom(deltablossom, false);
                }
            }
            if (!augmented) break;

            // discharge S-blossoms whose dual hit zero
            for (int b = nv_; b < 2 * nv_; ++b) {
                if (blossomparent_[b] == -1 && blossombase_[b] >= 0 &&
                    label_[b] == 1 && dualvar_[b] == 0.0)
                    expand_blossom(b, true);
            }
        }

        std::vector<int> mate(nv_, -1);
        for (int v = 0; v < nv_; ++v)
            if (mate_[v] >= 0) mate[v] = endpoint_[mate_[v]];
        return mate;
    }

private:
    // duals are premultiplied by two, so this is 2x the true slack
    double slack(int k) const {
        return dualvar_[edges_[k].i] + dualvar_[edges_[k].j] - 2.0 * edges_[k].w;
    }

    void collect_leaves(int b, std::vector<int>& out) const {
        if (b < nv_) {
            out.push_back(b);
            return;
        }
        for (const int child : blossomchilds_[b]) collect_leaves(child, out);
    }

    std::vector<int> blossom_leaves(int b) const {
        std::vector<int> out;
        collect_leaves(b, out);
        return out;
    }

    // python-style wrapped indexing; the traversals below walk the child
    // ring with indices that run negative
    int ch_at(int b, int j) const {
        const auto& ch = blossomchilds_[b];
        const int m = static_cast<int>(ch.size());
        int idx = j % m;
        if (idx < 0) idx += m;
        return ch[idx];
    }

    int ep_at(int b, int j) const {
        const auto& ep = blossomendps_[b];
        const int m = static_cast<int>(ep.size());
        int idx = j % m;
        if (idx < 0) idx += m;
        return ep[idx];
    }

    // label the top-level blossom of w; t = 1 for S, 2 for T. A fresh
    // T-label immediately propagates an S-label to the mate of its base.
    void assign_label(int w, int t, int p) {
        const int b = inblossom_[w];
        label_[w] = label_[b] = t;
        labelend_[w] = labelend_[b] = p;
        bestedge_[w] = bestedge_[b] = -1;
        if (t == 1) {
            for (const int leaf : blossom_leaves(b)) queue_.push_back(leaf);
        } else {
            const int base = blossombase_[b];
            assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
        }
    }

    // trace back from both ends of a tight S-S edge; returns the base of
    // the new blossom, or -1 if the paths reach two different roots (an
    // augmenting path)
    int scan_blossom(int v, int w) {
        std::vector<int> path;
        int base = -1;
        while (v != -1 || w != -1) {
            int b = inblossom_[v];
            if (label_[b] & 4) {
                base = blossombase_[b];
                break;
            }
            path.push_back(b);
            label_[b] = 5;  // breadcrumb
            if (labelend_[b] == -1) {
                v = -1;  // hit a root
            } else {
                v = endpoint_[labelend_[b]];
                b = inblossom_[v];
                v = endpoint_[labelend_[b]];  // step through the T-blossom
            }
            if (w != -1) std::swap(v, w);
        }
        for (const int b : path) label_[b] = 1;
        return base;
    }

    // wrap the odd cycle through edge k (joining two S-blossoms) into a new
    // S-blossom rooted at base
    void add_blossom(int base, int k) {
        int v = edges_[k].i;
        int w = edges_[k].j;
        const int bb = inblossom_[base];
        int bv = inblossom_[v];
        int bw = inblossom_[w];
        const int b = unusedblossoms_.back();
        unusedblossoms_.pop_back();
        blossombase_[b] = base;
        blossomparent_[b] = -1;
        blossomparent_[bb] = b;
        auto& path = blossomchilds_[b];
        auto& endps = blossomendps_[b];
        path.clear();
        endps.clear();
        while (bv != bb) {
            blossomparent_[bv] = b;
            path.push_back(bv);
            endps.push_back(labelend_[bv]);
            v = endpoint_[labelend_[bv]];
            bv = inblossom_[v];
        }
        path.push_back(bb);
        std::reverse(path.begin(), path.end());
        std::reverse(endps.begin(), endps.end());
        endps.push_back(2 * k);
        while (bw != bb) {
            blossomparent_[bw] = b;
            path.push_back(bw);
            endps.push_back(labelend_[bw] ^ 1);
            w = endpoint_[labelend_[bw]];
            bw = inblossom_[w];
        }
        label_[b] = 1;
        labelend_[b] = labelend_[bb];
        dualvar_[b] = 0.0;
        for (const int leaf : blossom_leaves(b)) {
            if (label_[inblossom_[leaf]] == 2)
                queue_.push_back(leaf);  // former T-vertex turns S
            inblossom_[leaf] = b;
        }
        // merge the children's least-slack edge lists
        std::vector<int> bestedgeto(2 * nv_, -1);
        for (const int child : path) {
            std::vector<std::vector<int>> nblists;
            if (!has_best_list_[child]) {
                for (const int leaf : blossom_leaves(child)) {
                    std::vector<int> lst;
                    lst.reserve(neighbend_[leaf].size());
                    for (const int p : neighbend_[leaf]) lst.push_back(p / 2);
                    nblists.push_back(std::move(lst));
                }
            } else {
                nblists.push_back(blossombestedges_[child]);
            }
            for (const auto& nblist : nblists) {
                for (const int ek : nblist) {
                    int i = edges_[ek].i;
                    int j = edges_[ek].j;
                    if (inblossom_[j] == b) std::swap(i, j);
                    const int bj = inblossom_[j];
                    if (bj != b && label_[bj] == 1 &&
                        (bestedgeto[bj] == -1 ||
                         slack(ek) < slack(bestedgeto[bj])))
                        bestedgeto[bj] = ek;
                }
            }
            blossombestedges_[child].clear();
            has_best_list_[child] = 0;
            bestedge_[child] = -1;
        }
        auto& bbe = blossombestedges_[b];
        bbe.clear();
        for (const int ek : bestedgeto)
            if (ek != -1) bbe.push_back(ek);
        has_best_list_[b] = 1;
        bestedge_[b] = -1;
        for (const int ek : bbe)
            if (bestedge_[b] == -1 || slack(ek) < slack(bestedge_[b]))
                bestedge_[b] = ek;
    }

    // dissolve blossom b back into its children; when endstage is false the
    // blossom is a T-blossom whose dual hit zero mid-stage and its children
    // must be relabeled along the alternating path through it
    void expand_blossom(int b, bool endstage) {
        const std::vector<int> childs = blossomchilds_[b];
        for (const int s : childs) {
            blossomparent_[s] = -1;
            if (s < nv_) {
                inblossom_[s] = s;
            } else if (endstage && dualvar_[s] == 0.0) {
                expand_blossom(s, endstage);
            } else {
                for (const int leaf : blossom_leaves(s)) inblossom_[leaf] = s;
            }
        }
        if (!endstage && label_[b] == 2) {
            const int entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
            const auto& ch = blossomchilds_[b];
            const int len = static_cast<int>(ch.size());
            int j = static_cast<int>(
                std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
            int jstep;
            int endptrick;
            if (j & 1) {
                j -= len;
                jstep = 1;
                endptrick = 0;
            } else {
                jstep = -1;
                endptrick = 1;
            }
            // walk from the entry child to the base, alternating T and S
            // labels along the way
            int p = labelend_[b];
            while (j != 0) {
                label_[endpoint_[p ^ 1]] = 0;
                label_[endpoint_[ep_at(b, j - endptrick) ^ endptrick ^ 1]] = 0;
                assign_label(endpoint_[p ^ 1], 2, p);
                allowedge_[ep_at(b, j - endptrick) / 2] = true;
                j += jstep;
                p = ep_at(b, j - endptrick) ^ endptrick;
                allowedge_[p / 2] = true;
                j += jstep;
            }
            // the base keeps label T but no S propagation to its mate
            int bv = ch_at(b, j);
            label_[endpoint_[p ^ 1]] = 2;
            label_[bv] = 2;
            labelend_[endpoint_[p ^ 1]] = p;
            labelend_[bv] = p;
            bestedge_[bv] = -1;
            // remaining children: relabel those already reached from
            // outside, clear the rest
            j += jstep;
            while (ch_at(b, j) != entrychild) {
                bv = ch_at(b, j);
                if (label_[bv] == 1) {
                    j += jstep;
                    continue;
                }
                int reached = -1;
                for (const int leaf : blossom_leaves(bv)) {
                    if (label_[leaf] != 0) {
                        reached = leaf;
                        break;
                    }
                }
                if (reached != -1) {
                    label_[reached] = 0;
                    label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
                    assign_label(reached, 2, labelend_[reached]);
                }
                j += jstep;
            }
        }
        label_[b] = -1;
        labelend_[b] = -1;
        blossomchilds_[b].clear();
        blossomendps_[b].clear();
        blossombase_[b] = -1;
        blossombestedges_[b].clear();
        has_best_list_[b] = 0;
        bestedge_[b] = -1;
        unusedblossoms_.push_back(b);
    }

    // swap matched/unmatched along the path from vertex v down to the base
    // of blossom b, then rotate the child ring so v becomes the base
    void augment_blossom(int b, int v) {
        int t = v;
        while (blossomparent_[t] != b) t = blossomparent_[t];
        if (t >= nv_) augment_blossom(t, v);
        auto& ch = blossomchilds_[b];
        const int len = static_cast<int>(ch.size());
        const int i =
            static_cast<int>(std::find(ch.begin(), ch.end(), t) - ch.begin());
        int j = i;
        int jstep;
        int endptrick;
        if (i & 1) {
            j -= len;
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        while (j != 0) {
            j += jstep;
            t = ch_at(b, j);
            const int p = ep_at(b, j - endptrick) ^ endptrick;
            if (t >= nv_) augment_blossom(t, endpoint_[p]);
            j += jstep;
            t = ch_at(b, j);
            if (t >= nv_) augment_blossom(t, endpoint_[p ^ 1]);
            mate_[endpoint_[p]] = p ^ 1;
            mate_[endpoint_[p ^ 1]] = p;
        }
        std::rotate(ch.begin(), ch.begin() + i, ch.end());
        std::rotate(blossomendps_[b].begin(), blossomendps_[b].begin() + i,
                    blossomendps_[b].end());
        blossombase_[b] = blossombase_[ch[0]];
    }

    // flip matched/unmatched edges along the augmenting path through edge k
    void augment_matching(int k) {
        for (int side = 0; side < 2; ++side) {
            int s = (side == 0) ? edges_[k].i : edges_[k].j;
            int p = (side == 0) ? 2 * k + 1 : 2 * k;
            while (true) {
                const int bs = inblossom_[s];
                if (bs >= nv_) augment_blossom(bs, s);
                mate_[s] = p;
                if (labelend_[bs] == -1) break;  // reached a root
                const int t = endpoint_[labelend_[bs]];
                const int bt = inblossom_[t];
                s = endpoint_[labelend_[bt]];
                const int jv = endpoint_[labelend_[bt] ^ 1];
                if (bt >= nv_) augment_blossom(bt, jv);
                mate_[jv] = labelend_[bt];
                p = labelend_[bt] ^ 1;
            }
        }
    }

    int nv_ = 0;
    std::vector<MatchEdge> edges_;
    std::vector<int> endpoint_;
    std::vector<std::vector<int>> neighbend_;
    std::vector<int> mate_;
    std::vector<int> label_;
    std::vector<int> labelend_;
    std::vector<int> inblossom_;
    std::vector<int> blossomparent_;
    std::vector<std::vector<int>> blossomchilds_;
    std::vector<int> blossombase_;
    std::vector<std::vector<int>> blossomendps_;
    std::vector<int> bestedge_;
    std::vector<std::vector<int>> blossombestedges_;
    std::vector<char> has_best_list_;
    std::vector<int> unusedblossoms_;
    std::vector<double> dualvar_;
    std::vector<bool> allowedge_;
    std::vector<int> queue_;
};

}  // namespace detail

// Pairs up items so that the total of 1/d over matched pairs is maximal
// (closest pairs first, globally). Zero distances get weight 1/1e-9. Odd n
// leaves one item unmatched; infinite distances give weight-0 edges, which
// the matcher may still use (they never beat a finite alternative).
inline MatchingResult max_weight_matching(const AffinityMatrix& dist) {
    if (dist.n < 2)
        fail(ErrorCode::EmptyInput,
             "matching needs at least 2 items, got " + std::to_string(dist.n));
    if (dist.d.size() != dist.n * dist.n)
        fail(ErrorCode::LengthMismatch, "affinity matrix storage is not n*n");
    constexpr double kZeroDistance = 1e-9;
    std::vector<detail::MatchEdge> edges;
    edges.reserve(dist.n * (dist.n - 1) / 2);
    for (std::size_t i = 0; i < dist.n; ++i) {
        for (std::size_t j = i + 1; j < dist.n; ++j) {
            const double d = dist.at(i, j);
            if (std::isnan(d) || d < 0.0)
                fail(ErrorCode::NonFiniteInput,
                     "affinity distances must be nonnegative");
            const double w = (d == 0.0) ? 1.0 / kZeroDistance
                             : std::isinf(d) ? 0.0
                                             : 1.0 / d;
            edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
        }
    }
    const std::vector<int> mate =
        detail::BlossomMatcher(static_cast<int>(dist.n), std::move(edges)).solve();
    MatchingResult out;
    for (std::size_t v = 0; v < dist.n; ++v) {
        if (mate[v] < 0)
            out.unmatched.push_back(v);
        else if (static_cast<std::size_t>(mate[v]) > v)
            out.pairs.push_back({v, static_cast<std::size_t>(mate[v])});
    }
    return out;
}

}  // namespace bsw
