#pragma once

// KD-tree over a flat row-major point array, dimensions up to 8.
// Supports k-nearest-neighbour and radius queries; all estimators and
// graph builders route their neighbour searches through this. Queries
// keep their scratch on the caller side, so a built tree is safe to
// query from many threads at once.

#include <algorithm>
#include <cstring>
#include <limits>
#include <vector>

#include "germlab/common.hpp"

namespace germlab {

class KdTree {
public:
    KdTree() = default;

    KdTree(const double* data, int n, int dim) { build(data, n, dim); }

    void build(const double* data, int n, int dim) {
        require(dim >= 1 && dim <= 8, ErrorCode::InputError, "KdTree: dim must be in [1,8]");
        data_ = data;
        n_ = n;
        dim_ = dim;
        idx_.resize(n);
        for (int i = 0; i < n; ++i) idx_[i] = i;
        nodes_.clear();
        nodes_.reserve(n > 0 ? 2 * n / kLeafSize + 4 : 1);
        if (n > 0) build_node(0, n);
    }

    int size() const { return n_; }
    int dim() const { return dim_; }

    struct Hit {
        double d2;
        int idx;
        bool operator<(const Hit& o) const { return d2 < o.d2 || (d2 == o.d2 && idx < o.idx); }
    };

    // k nearest neighbours of q, excluding point index `skip` (used for
    // the query point itself). Result sorted by distance.
    void knn(std::span<const double> q, int k, std::vector<Hit>& out, int skip = -1) const {
        out.clear();
        if (n_ == 0 || k <= 0 || nodes_.empty()) return;
        KnnCtx ctx{out, std::numeric_limits<double>::infinity(), k, skip};
        search_knn(0, q, ctx);
        std::sort(out.begin(), out.end());
    }

    // All points with squared distance <= r2.
    void radius(std::span<const double> q, double r2, std::vector<int>& out) const {
        out.clear();
        if (n_ == 0) return;
        search_radius(0, q, r2, out);
    }

    Hit nearest(std::span<const double> q, int skip = -1) const {
        std::vector<Hit> hits;
        knn(q, 1, hits, skip);
        if (hits.empty()) return {std::numeric_limits<double>::infinity(), -1};
        return hits[0];
    }

private:
    static constexpr int kLeafSize = 16;

    struct Node {
        double split_val = 0.0;
        int split_dim = -1;  // -1 for leaf
        int left = -1, right = -1;
        int begin = 0, end = 0;  // leaf range in idx_
    };

    struct KnnCtx {
        std::vector<Hit>& heap;
        double worst;
        int k;
        int skip;
    };

    int build_node(int begin, int end) {
        const int node_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        if (end - begin <= kLeafSize) {
            nodes_[node_id].begin = begin;
            nodes_[node_id].end = end;
            return node_id;
        }
        // split on the widest dimension at the median
        double lo[8], hi[8];
        for (int d = 0; d < dim_; ++d) {
            lo[d] = std::numeric_limits<double>::infinity();
            hi[d] = -std::numeric_limits<double>::infinity();
        }
        for (int i = begin; i < end; ++i) {
            const double* p = data_ + static_cast<size_t>(idx_[i]) * dim_;
            for (int d = 0; d < dim_; ++d) {
                lo[d] = std::min(lo[d], p[d]);
                hi[d] = std::max(hi[d], p[d]);
            }
        }
        int sd = 0;
        for (int d = 1; d < dim_; ++d)
            if (hi[d] - lo[d] > hi[sd] - lo[sd]) sd = d;
        if (hi[sd] - lo[sd] <= 0.0) {  // all points identical: make a leaf
            nodes_[node_id].begin = begin;
            nodes_[node_id].end = end;
            return node_id;
        }
        const int mid = begin + (end - begin) / 2;
        std::nth_element(idx_.begin() + begin, idx_.begin() + mid, idx_.begin() + end,
                         [&](int a, int b) {
                             const double va = data_[static_cast<size_t>(a) * dim_ + sd];
                             const double vb = data_[static_cast<size_t>(b) * dim_ + sd];
                             return va < vb || (va == vb && a < b);
                         });
        nodes_[node_id].split_dim = sd;
        nodes_[node_id].split_val = data_[static_cast<size_t>(idx_[mid]) * dim_ + sd];
        const int l = build_node(begin, mid);
        const int r = build_node(mid, end);
        nodes_[node_id].left = l;
        nodes_[node_id].right = r;
        return node_id;
    }

    double point_d2(int i, std::span<const double> q) const {
        const double* p = data_ + static_cast<size_t>(i) * dim_;
        double s = 0.0;
        for (int d = 0; d < dim_; ++d) {
            const double diff = p[d] - q[d];
            s += diff * diff;
        }
        return s;
    }

    static void heap_push(KnnCtx& ctx, Hit h) {
        if (static_cast<int>(ctx.heap.size()) < ctx.k) {
            ctx.heap.push_back(h);
            std::push_heap(ctx.heap.begin(), ctx.heap.end());
        } else if (h < ctx.heap.front()) {
            std::pop_heap(ctx.heap.begin(), ctx.heap.end());
            ctx.heap.back() = h;
            std::push_heap(ctx.heap.begin(), ctx.heap.end());
        }
        if (static_cast<int>(ctx.heap.size()) == ctx.k) ctx.worst = ctx.heap.front().d2;
    }

    void search_knn(int node_id, std::span<const double> q, KnnCtx& ctx) const {
        const Node& nd = nodes_[node_id];
        if (nd.split_dim < 0) {
            for (int i = nd.begin; i < nd.end; ++i) {
                const int pi = idx_[i];
                if (pi == ctx.skip) continue;
                heap_push(ctx, {point_d2(pi, q), pi});
            }
            return;
        }
        const double delta = q[nd.split_dim] - nd.split_val;
        const int near = delta < 0.0 ? nd.left : nd.right;
        const int far = delta < 0.0 ? nd.right : nd.left;
        search_knn(near, q, ctx);
        if (delta * delta <= ctx.worst) search_knn(far, q, ctx);
    }

    void search_radius(int node_id, std::span<const double> q, double r2,
                       std::vector<int>& out) const {
        const Node& nd = nodes_[node_id];
        if (nd.split_dim < 0) {
            for (int i = nd.begin; i < nd.end; ++i) {
                const int pi = idx_[i];
                if (point_d2(pi, q) <= r2) out.push_back(pi);
            }
            return;
        }
        const double delta = q[nd.split_dim] - nd.split_val;
        const int near = delta < 0.0 ? nd.left : nd.right;
        const int far = delta < 0.0 ? nd.right : nd.left;
        search_radius(near, q, r2, out);
        if (delta * delta <= r2) search_radius(far, q, r2, out);
    }

    const double* data_ = nullptr;
    int n_ = 0;
    int dim_ = 0;
    std::vector<int> idx_;
    std::vector<Node> nodes_;
};

// Median nearest-neighbour distance of a cloud; the basic spacing scale
// used for graph radii, conflict bands and tube widths.
inline double median_nn_distance(const double* data, int n, int dim) {
    require(n >= 2, ErrorCode::InputError, "median_nn_distance: need >= 2 points");
    KdTree tree(data, n, dim);
    std::vector<double> d(n);
    std::vector<KdTree::Hit> hits;
    for (int i = 0; i < n; ++i) {
        tree.knn({data + static_cast<size_t>(i) * dim, static_cast<size_t>(dim)}, 1, hits, i);
        d[i] = hits.empty() ? 0.0 : std::sqrt(hits[0].d2);
    }
    std::nth_element(d.begin(), d.begin() + n / 2, d.end());
    return d[n / 2];
}

}  // namespace germlab
