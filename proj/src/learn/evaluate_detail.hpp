#pragma once

#include "harnode/learn.hpp"

namespace harnode::learn::detail {

/// Trains on split.train and scores split.test using only `columns` of
/// `data`. `full_order`, when given, is sort_columns over all of `data`.
EvalReport evaluate_columns(const pipeline::FeatureDataset& data, std::span<const std::size_t> columns,
                            const SplitIndices& split, Normalization mode, const ForestConfig& forest,
                            const ColumnOrder* full_order);

}  // namespace harnode::learn::detail
