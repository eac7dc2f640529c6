#ifndef MLAB_PARTITION_HPP
#define MLAB_PARTITION_HPP

#include <vector>

namespace mlab {

// A partition of {0..n-1} stands in for the sigma-algebra it generates.
// Canonical form: block labels are assigned in order of each block's
// smallest member, so equal sigma-algebras compare equal as partitions.
class Partition {
public:
    Partition() = default;

    // Takes arbitrary labels (one per outcome), relabels canonically.
    explicit Partition(std::vector<int> block_of);

    static Partition trivial(int n);
    static Partition singletons(int n);

    int size() const { return static_cast<int>(block_of_.size()); }
    int block_count() const { return block_count_; }
    int block_of(int i) const { return block_of_[i]; }
    const std::vector<int>& labels() const { return block_of_; }

    // blocks()[b] lists the members of block b in increasing order
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }

    // true if every block of *this is contained in one block of coarser
    bool refines(const Partition& coarser) const;

    bool operator==(const Partition& o) const { return block_of_ == o.block_of_; }
    bool operator!=(const Partition& o) const { return !(*this == o); }

private:
    std::vector<int> block_of_;
    std::vector<std::vector<int>> blocks_;
    int block_count_ = 0;
};

// Finest partition that is coarser than both p and q; generates the
// intersection of the two sigma-algebras. Computed as the connected
// components of the relation "shares a p-block or a q-block".
Partition sigma_intersect(const Partition& p, const Partition& q);

// A filtration is a refining chain of partitions, index 0..horizon.
// Refinement is validated eagerly at construction; downstream code relies
// on it without re-checking.
class Filtration {
public:
    Filtration() = default;
    explicit Filtration(std::vector<Partition> steps);

    int horizon() const { return static_cast<int>(steps_.size()) - 1; }
    int size() const { return steps_.empty() ? 0 : steps_.front().size(); }
    const Partition& at(int k) const;

private:
    std::vector<Partition> steps_;
};

} // namespace mlab

#endif
