#include "pairswap/blossom.hpp"

#include <algorithm>
#include <stdexcept>

// Primal-dual weighted blossom algorithm following Galil's exposition
// ("Efficient algorithms for finding maximum matching in graphs", 1986).
// Vertices are 0..V-1, non-trivial blossoms V..2V-1. Edge endpoints are
// encoded as p = 2k (first endpoint of edge k) and 2k+1 (second); p ^ 1 is
// the opposite endpoint. Integer weights are doubled internally so every
// dual update stays integral.

namespace pairswap::graph {

namespace {

using Index = std::ptrdiff_t;

class BlossomSolver {
public:
    BlossomSolver(std::size_t vertex_count, const std::vector<WeightedEdge>& edges)
        : nv_(static_cast<Index>(vertex_count)), ne_(static_cast<Index>(edges.size())) {
        std::int64_t max_weight = 0;
        edge_u_.resize(ne_);
        edge_v_.resize(ne_);
        edge_w_.resize(ne_);
        for (Index k = 0; k < ne_; ++k) {
            const auto& e = edges[static_cast<std::size_t>(k)];
            if (e.u >= vertex_count || e.v >= vertex_count) throw std::out_of_range("edge endpoint out of range");
            if (e.u == e.v) throw std::invalid_argument("self loops are not allowed");
            if (e.weight < 0) throw std::invalid_argument("edge weights must be non-negative");
            edge_u_[k] = static_cast<Index>(e.u);
            edge_v_[k] = static_cast<Index>(e.v);
            edge_w_[k] = 2 * e.weight;
            max_weight = std::max(max_weight, edge_w_[k]);
        }
        endpoint_.resize(2 * ne_);
        for (Index p = 0; p < 2 * ne_; ++p) endpoint_[p] = (p % 2 == 0) ? edge_u_[p / 2] : edge_v_[p / 2];
        neighbend_.assign(nv_, {});
        for (Index k = 0; k < ne_; ++k) {
            neighbend_[edge_u_[k]].push_back(2 * k + 1);
            neighbend_[edge_v_[k]].push_back(2 * k);
        }
        mate_.assign(nv_, -1);
        label_.assign(2 * nv_, 0);
        labelend_.assign(2 * nv_, -1);
        inblossom_.resize(nv_);
        for (Index v = 0; v < nv_; ++v) inblossom_[v] = v;
        blossomparent_.assign(2 * nv_, -1);
        blossomchilds_.assign(2 * nv_, {});
        blossombase_.assign(2 * nv_, -1);
        for (Index v = 0; v < nv_; ++v) blossombase_[v] = v;
        blossomendps_.assign(2 * nv_, {});
        bestedge_.assign(2 * nv_, -1);
        blossombestedges_.assign(2 * nv_, {});
        has_bestedges_.assign(2 * nv_, false);
        for (Index b = nv_; b < 2 * nv_; ++b) unused_.push_back(b);
        dualvar_.assign(2 * nv_, 0);
        for (Index v = 0; v < nv_; ++v) dualvar_[v] = max_weight;
        allowedge_.assign(ne_, false);
    }

    std::vector<Index> solve() {
        if (ne_ == 0) return std::vector<Index>(nv_, -1);
        for (Index stage = 0; stage < nv_; ++stage) {
            std::fill(label_.begin(), label_.end(), 0);
            std::fill(bestedge_.begin(), bestedge_.end(), -1);
            for (Index b = nv_; b < 2 * nv_; ++b) {
                blossombestedges_[b].clear();
                has_bestedges_[b] = false;
            }
            std::fill(allowedge_.begin(), allowedge_.end(), false);
            queue_.clear();
            for (Index v = 0; v < nv_; ++v) {
                if (mate_[v] == -1 && label_[inblossom_[v]] == 0) assign_label(v, 1, -1);
            }
            bool augmented = false;
            while (true) {
                while (!queue_.empty() && !augmented) {
                    const Index v = queue_.back();
                    queue_.pop_back();
                    for (Index p : neighbend_[v]) {
                        const Index k = p / 2;
                        const Index w = endpoint_[p];
                        if (inblossom_[v] == inblossom_[w]) continue;
                        std::int64_t kslack = 0;
                        if (!allowedge_[k]) {
                            kslack = slack(k);
                            if (kslack <= 0) allowedge_[k] = true;
                        }
                        if (allowedge_[k]) {
                            if (label_[inblossom_[w]] == 0) {
                                assign_label(w, 2, p ^ 1);
                            } else if (label_[inblossom_[w]] == 1) {
                                const Index base = scan_blossom(v, w);
                                if (base >= 0) {
                                    add_blossom(base, k);
                                } else {
                                    augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if (label_[w] == 0) {
                                label_[w] = 2;
                                labelend_[w] = p ^ 1;
                            }
                        } else if (label_[inblossom_[w]] == 1) {
                            const Index b = inblossom_[v];
                            if (bestedge_[b] == -1 || kslack < slack(bestedge_[b])) bestedge_[b] = k;
                        } else if (label_[w] == 0) {
                            if (bestedge_[w] == -1 || kslack < slack(bestedge_[w])) bestedge_[w] = k;
                        }
                    }
                }
                if (augmented) break;

                int deltatype = 1;
                std::int64_t delta = *std::min_element(dualvar_.begin(), dualvar_.begin() + nv_);
                Index deltaedge = -1;
                Index deltablossom = -1;
                for (Index v = 0; v < nv_; ++v) {
                    if (label_[inblossom_[v]] == 0 && bestedge_[v] != -1) {
                        const std::int64_t d = slack(bestedge_[v]);
                        if (d < delta) {
                            delta = d;
                            deltatype = 2;
                            deltaedge = bestedge_[v];
                        }
                    }
                }
                for (Index b = 0; b < 2 * nv_; ++b) {
                    if (blossomparent_[b] == -1 && label_[b] == 1 && bestedge_[b] != -1) {
                        const std::int64_t d = slack(bestedge_[b]) / 2;
                        if (d < delta) {
                            delta = d;
                            deltatype = 3;
                            deltaedge = bestedge_[b];
                        }
                    }
                }
                for (Index b = nv_; b < 2 * nv_; ++b) {
                    if (blossombase_[b] >= 0 && blossomparent_[b] == -1 && label_[b] == 2 && dualvar_[b] < delta) {
                        delta = dualvar_[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                for (Index v = 0; v < nv_; ++v) {
                    if (label_[inblossom_[v]] == 1) {
                        dualvar_[v] -= delta;
                    } else if (label_[inblossom_[v]] == 2) {
                        dualvar_[v] += delta;
                    }
                }
                for (Index b = nv_; b < 2 * nv_; ++b) {
                    if (blossombase_[b] >= 0 && blossomparent_[b] == -1) {
                        if (label_[b] == 1) {
                            dualvar_[b] += delta;
                        } else if (label_[b] == 2) {
                            dualvar_[b] -= delta;
                        }
                    }
                }
                if (deltatype == 1) {
                    break;
                } else if (deltatype == 2) {
                    allowedge_[deltaedge] = true;
                    Index i = edge_u_[deltaedge];
                    if (label_[inblossom_[i]] == 0) i = edge_v_[deltaedge];
                    queue_.push_back(i);
                } else if (deltatype == 3) {
                    allowedge_[deltaedge] = true;
                    queue_.push_back(edge_u_[deltaedge]);
                } else {
                    expand_blossom(deltablossom, false);
                }
            }
            if (!augmented) break;
            for (Index b = nv_; b < 2 * nv_; ++b) {
                if (blossomparent_[b] == -1 && blossombase_[b] >= 0 && label_[b] == 1 && dualvar_[b] == 0) {
                    expand_blossom(b, true);
                }
            }
        }
        std::vector<Index> result(nv_, -1);
        for (Index v = 0; v < nv_; ++v) {
            if (mate_[v] >= 0) result[v] = endpoint_[mate_[v]];
        }
        return result;
    }

private:
    static Index wrap(Index j, std::size_t len) {
        const Index n = static_cast<Index>(len);
        return ((j % n) + n) % n;
    }

    std::int64_t slack(Index k) const { return dualvar_[edge_u_[k]] + dualvar_[edge_v_[k]] - 2 * edge_w_[k]; }

    void blossom_leaves(Index b, std::vector<Index>& out) const {
        if (b < nv_) {
            out.push_back(b);
            return;
        }
        for (Index t : blossomchilds_[b]) blossom_leaves(t, out);
    }

    std::vector<Index> leaves(Index b) const {
        std::vector<Index> out;
        blossom_leaves(b, out);
        return out;
    }

    void assign_label(Index w, int t, Index p) {
        const Index b = inblossom_[w];
        label_[w] = label_[b] = t;
        labelend_[w] = labelend_[b] = p;
        bestedge_[w] = bestedge_[b] = -1;
        if (t == 1) {
            blossom_leaves(b, queue_);
        } else if (t == 2) {
            const Index base = blossombase_[b];
            assign_label(endpoint_[mate_[base]], 1, mate_[base] ^ 1);
        }
    }

    Index scan_blossom(Index v, Index w) {
        std::vector<Index> path;
        Index base = -1;
        while (v != -1 || w != -1) {
            Index b = inblossom_[v];
            if (label_[b] & 4) {
                base = blossombase_[b];
                break;
            }
            path.push_back(b);
            label_[b] = 5;
            if (labelend_[b] == -1) {
                v = -1;
            } else {
                v = endpoint_[labelend_[b]];
                b = inblossom_[v];
                v = endpoint_[labelend_[b]];
            }
            if (w != -1) std::swap(v, w);
        }
        for (Index b : path) label_[b] = 1;
        return base;
    }

    void add_blossom(Index base, Index k) {
        Index v = edge_u_[k];
        Index w = edge_v_[k];
        const Index bb = inblossom_[base];
        Index bv = inblossom_[v];
        Index bw = inblossom_[w];
        const Index b = unused_.back();
        unused_.pop_back();
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
        dualvar_[b] = 0;
        for (Index leaf : leaves(b)) {
            if (label_[inblossom_[leaf]] == 2) queue_.push_back(leaf);
            inblossom_[leaf] = b;
        }
        std::vector<Index> bestedgeto(2 * nv_, -1);
        for (Index sub : path) {
            std::vector<std::vector<Index>> nblists;
            if (!has_bestedges_[sub]) {
                for (Index leaf : leaves(sub)) {
                    std::vector<Index> list;
                    for (Index p : neighbend_[leaf]) list.push_back(p / 2);
                    nblists.push_back(std::move(list));
                }
            } else {
                nblists.push_back(blossombestedges_[sub]);
            }
            for (const auto& nblist : nblists) {
                for (Index e : nblist) {
                    Index i = edge_u_[e];
                    Index j = edge_v_[e];
                    if (inblossom_[j] == b) std::swap(i, j);
                    const Index bj = inblossom_[j];
                    if (bj != b && label_[bj] == 1 && (bestedgeto[bj] == -1 || slack(e) < slack(bestedgeto[bj]))) {
                        bestedgeto[bj] = e;
                    }
                }
            }
            blossombestedges_[sub].clear();
            has_bestedges_[sub] = false;
            bestedge_[sub] = -1;
        }
        blossombestedges_[b].clear();
        for (Index e : bestedgeto) {
            if (e != -1) blossombestedges_[b].push_back(e);
        }
        has_bestedges_[b] = true;
        bestedge_[b] = -1;
        for (Index e : blossombestedges_[b]) {
            if (bestedge_[b] == -1 || slack(e) < slack(bestedge_[b])) bestedge_[b] = e;
        }
    }

    void expand_blossom(Index b, bool endstage) {
        const std::vector<Index> childs = blossomchilds_[b];
        for (Index s : childs) {
            blossomparent_[s] = -1;
            if (s < nv_) {
                inblossom_[s] = s;
            } else if (endstage && dualvar_[s] == 0) {
                expand_blossom(s, endstage);
            } else {
                for (Index leaf : leaves(s)) inblossom_[leaf] = s;
            }
        }
        if (!endstage && label_[b] == 2) {
            const auto& ch = blossomchilds_[b];
            const auto& ep = blossomendps_[b];
            const Index entrychild = inblossom_[endpoint_[labelend_[b] ^ 1]];
            Index j = static_cast<Index>(std::find(ch.begin(), ch.end(), entrychild) - ch.begin());
            Index jstep;
            Index endptrick;
            if (j & 1) {
                j -= static_cast<Index>(ch.size());
                jstep = 1;
                endptrick = 0;
            } else {
                jstep = -1;
                endptrick = 1;
            }
            Index p = labelend_[b];
            while (j != 0) {
                label_[endpoint_[p ^ 1]] = 0;
                label_[endpoint_[ep[wrap(j - endptrick, ep.size())] ^ endptrick ^ 1]] = 0;
                assign_label(endpoint_[p ^ 1], 2, p);
                allowedge_[ep[wrap(j - endptrick, ep.size())] / 2] = true;
                j += jstep;
                p = ep[wrap(j - endptrick, ep.size())] ^ endptrick;
                allowedge_[p / 2] = true;
                j += jstep;
            }
            Index bv = ch[wrap(j, ch.size())];
            label_[endpoint_[p ^ 1]] = label_[bv] = 2;
            labelend_[endpoint_[p ^ 1]] = labelend_[bv] = p;
            bestedge_[bv] = -1;
            j += jstep;
            while (ch[wrap(j, ch.size())] != entrychild) {
                bv = ch[wrap(j, ch.size())];
                if (label_[bv] == 1) {
                    j += jstep;
                    continue;
                }
                Index found = -1;
                for (Index leaf : leaves(bv)) {
                    if (label_[leaf] != 0) {
                        found = leaf;
                        break;
                    }
                }
                if (found != -1) {
                    label_[found] = 0;
                    label_[endpoint_[mate_[blossombase_[bv]]]] = 0;
                    assign_label(found, 2, labelend_[found]);
                }
                j += jstep;
            }
        }
        label_[b] = labelend_[b] = -1;
        blossomchilds_[b].clear();
        blossomendps_[b].clear();
        blossombase_[b] = -1;
        blossombestedges_[b].clear();
        has_bestedges_[b] = false;
        bestedge_[b] = -1;
        unused_.push_back(b);
    }

    void augment_blossom(Index b, Index v) {
        Index t = v;
        while (blossomparent_[t] != b) t = blossomparent_[t];
        if (t >= nv_) augment_blossom(t, v);
        auto& ch = blossomchilds_[b];
        auto& ep = blossomendps_[b];
        const Index i = static_cast<Index>(std::find(ch.begin(), ch.end(), t) - ch.begin());
        Index j = i;
        Index jstep;
        Index endptrick;
        if (i & 1) {
            j -= static_cast<Index>(ch.size());
            jstep = 1;
            endptrick = 0;
        } else {
            jstep = -1;
            endptrick = 1;
        }
        while (j != 0) {
            j += jstep;
            t = ch[wrap(j, ch.size())];
            const Index p = ep[wrap(j - endptrick, ep.size())] ^ endptrick;
            if (t >= nv_) augment_blossom(t, endpoint_[p]);
            j += jstep;
            t = ch[wrap(j, ch.size())];
            if (t >= nv_) augment_blossom(t, endpoint_[p ^ 1]);
            mate_[endpoint_[p]] = p ^ 1;
            mate_[endpoint_[p ^ 1]] = p;
        }
        std::rotate(ch.begin(), ch.begin() + i, ch.end());
        std::rotate(ep.begin(), ep.begin() + i, ep.end());
        blossombase_[b] = blossombase_[ch[0]];
    }

    void augment_matching(Index k) {
        const Index ends[2][2] = {{edge_u_[k], 2 * k + 1}, {edge_v_[k], 2 * k}};
        for (const auto& start : ends) {
            Index s = start[0];
            Index p = start[1];
            while (true) {
                const Index bs = inblossom_[s];
                if (bs >= nv_) augment_blossom(bs, s);
                mate_[s] = p;
                if (labelend_[bs] == -1) break;
                const Index t = endpoint_[labelend_[bs]];
                const Index bt = inblossom_[t];
                s = endpoint_[labelend_[bt]];
                const Index j = endpoint_[labelend_[bt] ^ 1];
                if (bt >= nv_) augment_blossom(bt, j);
                mate_[j] = labelend_[bt];
                p = labelend_[bt] ^ 1;
            }
        }
    }

    Index nv_;
    Index ne_;
    std::vector<Index> edge_u_, edge_v_;
    std::vector<std::int64_t> edge_w_;
    std::vector<Index> endpoint_;
    std::vector<std::vector<Index>> neighbend_;
    std::vector<Index> mate_;
    std::vector<int> label_;
    std::vector<Index> labelend_;
    std::vector<Index> inblossom_;
    std::vector<Index> blossomparent_;
    std::vector<std::vector<Index>> blossomchilds_;
    std::vector<Index> blossombase_;
    std::vector<std::vector<Index>> blossomendps_;
    std::vector<Index> bestedge_;
    std::vector<std::vector<Index>> blossombestedges_;
    std::vector<bool> has_bestedges_;
    std::vector<Index> unused_;
    std::vector<std::int64_t> dualvar_;
    std::vector<bool> allowedge_;
    std::vector<Index> queue_;
};

}  // namespace

std::vector<std::ptrdiff_t> max_weight_matching(std::size_t vertex_count, const std::vector<WeightedEdge>& edges) {
    return BlossomSolver(vertex_count, edges).solve();
}

}  // namespace pairswap::graph
