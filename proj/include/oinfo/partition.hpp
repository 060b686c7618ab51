#pragma once

#include "oinfo/linalg.hpp"

#include <cstddef>
#include <vector>

namespace oinfo {

/// Split of a flat D-dimensional sample into N variables (blocks of columns).
class VariablePartition {
public:
    VariablePartition() = default;
    explicit VariablePartition(std::vector<std::size_t> dims);

    static VariablePartition uniform(std::size_t n_vars, std::size_t dim);

    std::size_t n_vars() const { return dims_.size(); }
    std::size_t total_dim() const { return offsets_.empty() ? 0 : offsets_.back(); }
    std::size_t dim(std::size_t i) const { return dims_.at(i); }
    std::size_t offset(std::size_t i) const { return offsets_.at(i); }
    const std::vector<std::size_t>& dims() const { return dims_; }
    const std::vector<std::size_t>& offsets() const { return offsets_; }

    /// Flat coordinate indices of variable i.
    IndexList indices(std::size_t i) const;
    /// Flat coordinate indices of the listed variables, in the given order.
    IndexList indices(const std::vector<std::size_t>& vars) const;

    /// Partition of the listed variables only.
    VariablePartition select(const std::vector<std::size_t>& vars) const;
    VariablePartition concat(const VariablePartition& other) const;

    bool operator==(const VariablePartition&) const = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<std::size_t> offsets_;  // size n_vars + 1
};

}  // namespace oinfo
