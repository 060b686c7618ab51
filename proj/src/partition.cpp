#include "oinfo/partition.hpp"

#include "oinfo/errors.hpp"

#include <string>

namespace oinfo {

VariablePartition::VariablePartition(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    offsets_.reserve(dims_.size() + 1);
    offsets_.push_back(0);
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (dims_[i] == 0) throw ConfigError("variable " + std::to_string(i) + " has dimension 0");
        offsets_.push_back(offsets_.back() + dims_[i]);
    }
}

VariablePartition VariablePartition::uniform(std::size_t n_vars, std::size_t dim) {
    return VariablePartition(std::vector<std::size_t>(n_vars, dim));
}

IndexList VariablePartition::indices(std::size_t i) const {
    if (i >= n_vars()) throw ConfigError("variable index " + std::to_string(i) + " out of range");
    IndexList out;
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) out.push_back(static_cast<Eigen::Index>(k));
    return out;
}

IndexList VariablePartition::indices(const std::vector<std::size_t>& vars) const {
    IndexList out;
    for (auto v : vars) {
        const auto block = indices(v);
        out.insert(out.end(), block.begin(), block.end());
    }
    return out;
}

VariablePartition VariablePartition::select(const std::vector<std::size_t>& vars) const {
    std::vector<std::size_t> d;
    for (auto v : vars) d.push_back(dim(v));
    return VariablePartition(std::move(d));
}

VariablePartition VariablePartition::concat(const VariablePartition& other) const {
    std::vector<std::size_t> d = dims_;
    d.insert(d.end(), other.dims_.begin(), other.dims_.end());
    return VariablePartition(std::move(d));
}

}  // namespace oinfo
