#pragma once

#include <numeric>
#include <vector>

namespace xdv {

/// Disjoint sets over dense integer ids, path halving plus union by size.
class UnionFind {
public:
    explicit UnionFind(int n = 0) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int add() {
        parent_.push_back(static_cast<int>(parent_.size()));
        size_.push_back(1);
        return parent_.back();
    }

    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Returns true when the two sets were distinct.
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

    bool same(int a, int b) { return find(a) == find(b); }
    int size() const { return static_cast<int>(parent_.size()); }

private:
    std::vector<int> parent_;
    std::vector<int> size_;
};

} // namespace xdv
