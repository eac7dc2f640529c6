#include "mlab/partition.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mlab/errors.hpp"

namespace mlab {

Partition::Partition(std::vector<int> block_of) : block_of_(std::move(block_of)) {
    require(!block_of_.empty(), "partition: needs at least one outcome");
    const int n = size();
    // canonical relabel: first occurrence order equals smallest-member order
    std::vector<int> remap;
    std::vector<int> seen; // old label -> new label + 1, 0 = unseen
    int max_label = *std::max_element(block_of_.begin(), block_of_.end());
    int min_label = *std::min_element(block_of_.begin(), block_of_.end());
    require(min_label >= 0, "partition: negative block label");
    seen.assign(static_cast<size_t>(max_label) + 1, 0);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        int& slot = seen[block_of_[i]];
        if (slot == 0) slot = ++next;
        block_of_[i] = slot - 1;
    }
    block_count_ = next;
    blocks_.assign(block_count_, {});
    for (int i = 0; i < n; ++i) blocks_[block_of_[i]].push_back(i);
}

Partition Partition::trivial(int n) {
    require(n > 0, "partition: needs at least one outcome");
    return Partition(std::vector<int>(n, 0));
}

Partition Partition::singletons(int n) {
    require(n > 0, "partition: needs at least one outcome");
    std::vector<int> lab(n);
    std::iota(lab.begin(), lab.end(), 0);
    return Partition(std::move(lab));
}

bool Partition::refines(const Partition& coarser) const {
    if (coarser.size() != size()) return false;
    for (const auto& blk : blocks_) {
        const int target = coarser.block_of(blk.front());
        for (int i : blk)
            if (coarser.block_of(i) != target) return false;
    }
    return true;
}

namespace {

// small union-find, path halving + union by size
struct Dsu {
    std::vector<int> parent, sz;
    explicit Dsu(int n) : parent(n), sz(n, 1) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (sz[a] < sz[b]) std::swap(a, b);
        parent[b] = a;
        sz[a] += sz[b];
    }
};

} // namespace

Partition sigma_intersect(const Partition& p, const Partition& q) {
    require(p.size() == q.size(), "sigma_intersect: size mismatch");
    Dsu dsu(p.size());
    for (const auto& blk : p.blocks())
        for (size_t i = 1; i < blk.size(); ++i) dsu.unite(blk[0], blk[i]);
    for (const auto& blk : q.blocks())
        for (size_t i = 1; i < blk.size(); ++i) dsu.unite(blk[0], blk[i]);
    std::vector<int> lab(p.size());
    for (int i = 0; i < p.size(); ++i) lab[i] = dsu.find(i);
    return Partition(std::move(lab));
}

Filtration::Filtration(std::vector<Partition> steps) : steps_(std::move(steps)) {
    require(!steps_.empty(), "filtration: needs at least step 0");
    const int n = steps_.front().size();
    for (size_t k = 0; k < steps_.size(); ++k) {
        require(steps_[k].size() == n, "filtration: step size mismatch");
        if (k > 0)
            require(steps_[k].refines(steps_[k - 1]),
                    "filtration: step does not refine its predecessor");
    }
}

const Partition& Filtration::at(int k) const {
    require(k >= 0 && k <= horizon(), "filtration: step index out of range");
    return steps_[k];
}

} // namespace mlab
