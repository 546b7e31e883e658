#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <bit>
#include <cmath>
#include <numeric>

#include "evaluate_detail.hpp"
#include "harnode/error.hpp"
#include "harnode/gait.hpp"

namespace harnode::learn {

std::uint64_t subset_seed(std::uint64_t global_seed, std::uint32_t mask) { return sim::hash_combine(global_seed, mask); }

namespace {

std::vector<std::size_t> mask_columns(const pipeline::FeatureDataset& data, std::uint32_t mask) {
    std::vector<std::size_t> cols;
    for (std::size_t s = 0; s < data.sensor_count(); ++s) {
        if (!(mask & (1u << s))) continue;
        const auto first = data.sensors()[s].first_column;
        for (std::size_t j = 0; j < pipeline::kFeaturesPerSensor; ++j) cols.push_back(first + j);
    }
    cols.push_back(data.footedness_column());
    return cols;
}

std::vector<std::string> mask_names(const pipeline::FeatureDataset& data, std::uint32_t mask) {
    std::vector<std::string> names;
    for (std::size_t s = 0; s < data.sensor_count(); ++s) {
        if (mask & (1u << s)) names.push_back(data.sensors()[s].name);
    }
    return names;
}

void check_mask(const pipeline::FeatureDataset& data, std::uint32_t mask) {
    if (mask == 0) throw InvalidArgument("empty sensor subset");
    if (data.sensor_count() < 32 && (mask >> data.sensor_count()) != 0) {
        throw InvalidArgument("subset names a sensor the dataset does not have");
    }
}

EvalReport evaluate_mask(const pipeline::FeatureDataset& data, std::uint32_t mask, const SearchOptions& options,
                         const ColumnOrder* full_order) {
    check_mask(data, mask);
    if (data.rows() < 10) throw InsufficientData("need at least 10 rows for a split");
    const auto seed = subset_seed(options.seed, mask);
    const auto split = random_split(data.rows(), options.eval.train_ratio, seed);
    auto forest = options.eval.forest;
    forest.seed = sim::hash_combine(seed, options.eval.forest.seed);
    const auto columns = mask_columns(data, mask);
    auto report = detail::evaluate_columns(data, columns, split, options.eval.normalization, forest, full_order);
    report.seed = seed;
    report.mask = mask;
    report.split_kind = "random_" + std::to_string(static_cast<int>(std::lround(options.eval.train_ratio * 100))) +
                        "_" + std::to_string(static_cast<int>(std::lround((1 - options.eval.train_ratio) * 100)));
    return report;
}

}  // namespace

EvalReport evaluate_subset(const pipeline::FeatureDataset& data, std::uint32_t mask, const SearchOptions& options) {
    return evaluate_mask(data, mask, options, nullptr);
}

SubsetSearchResult subset_search(const pipeline::FeatureDataset& data, const SearchOptions& options) {
    const auto k = data.sensor_count();
    if (k == 0) throw InvalidArgument("dataset has no sensors");
    if (k > options.max_sensors || k > 31) {
        throw InvalidArgument("subset search over " + std::to_string(k) + " sensors exceeds the limit of " +
                              std::to_string(std::min<std::size_t>(options.max_sensors, 31)));
    }
    std::vector<std::uint32_t> masks;
    if (options.masks) {
        masks = *options.masks;
        std::sort(masks.begin(), masks.end());
        masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
    } else {
        masks.resize((std::size_t{1} << k) - 1);
        std::iota(masks.begin(), masks.end(), 1u);
    }

    const auto full_order = sort_columns(view_of(data));
    SubsetSearchResult result;
    for (const auto& s : data.sensors()) result.sensor_names.push_back(s.name);
    result.subsets.resize(masks.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mutex;
    std::size_t done = 0;
    std::exception_ptr failure;
    auto work = [&] {
        for (std::size_t i = next++; i < masks.size(); i = next++) {
            try {
                result.subsets[i] = {masks[i], mask_names(data, masks[i]),
                                     evaluate_mask(data, masks[i], options, &full_order)};
            } catch (...) {
                std::lock_guard lock(progress_mutex);
                if (!failure) failure = std::current_exception();
                next = masks.size();
                return;
            }
            std::lock_guard lock(progress_mutex);
            ++done;
            if (options.progress) options.progress(done, masks.size());
        }
    };
    std::size_t threads = options.threads > 0 ? options.threads : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, masks.size());
    if (threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    result.best_per_cardinality.resize(k);
    std::vector<bool> seen(k, false);
    for (const auto& s : result.subsets) {
        const auto n = static_cast<std::size_t>(std::popcount(s.mask)) - 1;
        if (!seen[n] || s.report.accuracy > result.best_per_cardinality[n].report.accuracy) {
            result.best_per_cardinality[n] = s;
            seen[n] = true;
        }
    }
    if (options.masks) {
        std::vector<SubsetResult> kept;
        for (std::size_t n = 0; n < k; ++n) {
            if (seen[n]) kept.push_back(result.best_per_cardinality[n]);
        }
        result.best_per_cardinality = std::move(kept);
    }
    return result;
}

std::uint32_t mask_of(const pipeline::FeatureDataset& data, std::span<const std::string> sensors) {
    std::uint32_t mask = 0;
    for (const auto& name : sensors) {
        const auto idx = data.sensor_index(name);
        if (!idx) throw InvalidArgument("unknown sensor '" + name + "'");
        mask |= 1u << *idx;
    }
    return mask;
}

std::vector<NamedSubset> default_locations_of_interest() {
    return {
        {{"right_foot", "right_thigh", "right_shin", "waist"}},
        {{"right_foot", "right_thigh", "right_wrist"}},
        {{"right_foot", "right_thigh"}},
        {{"right_foot", "right_wrist", "head"}},
        {{"right_foot"}},
    };
}

std::vector<LocationRow> report_locations_of_interest(const pipeline::FeatureDataset& data,
                                                      const SubsetSearchResult* cache,
                                                      std::span<const NamedSubset> subsets,
                                                      const SearchOptions& options) {
    std::vector<LocationRow> rows;
    for (const auto& named : subsets) {
        const auto mask = mask_of(data, named.sensors);
        LocationRow row{named.sensors, mask, {}};
        const SubsetResult* hit = nullptr;
        if (cache) {
            auto it = std::lower_bound(cache->subsets.begin(), cache->subsets.end(), mask,
                                       [](const SubsetResult& s, std::uint32_t m) { return s.mask < m; });
            if (it != cache->subsets.end() && it->mask == mask) hit = &*it;
        }
        row.report = hit ? hit->report : evaluate_subset(data, mask, options);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace harnode::learn
