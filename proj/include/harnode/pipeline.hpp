#pragma once

// Recorded sessions to a labelled window-by-feature matrix: per-node streams
// are resampled onto a shared uniform grid, cut into fixed-length windows,
// summarised by eight statistics per sensor axis, and concatenated with a
// footedness column.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "harnode/body.hpp"
#include "harnode/schedule.hpp"
#include "harnode/server.hpp"

namespace harnode::pipeline {

inline constexpr std::size_t kAxes = 9;
inline constexpr std::size_t kStatsPerAxis = 8;
inline constexpr std::size_t kFeaturesPerSensor = kAxes * kStatsPerAxis;  // 72
inline constexpr std::size_t kWindowLength = 25;
inline constexpr std::size_t kDefaultStride = 6;
inline constexpr std::int64_t kDefaultGridIntervalUs = 6000;

inline constexpr std::array<const char*, kAxes> kAxisNames = {"ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz"};
inline constexpr std::array<const char*, kStatsPerAxis> kStatNames = {"mean",  "std",    "min",  "max",
                                                                      "range", "median", "skew", "kurtosis"};

struct NodeRecording {
    std::uint8_t node_id = 0;
    BodyPosition position;
    std::vector<server::RecordRow> rows;
};

struct SessionData {
    server::Session session;
    std::vector<NodeRecording> nodes;  // ordered by (position index, node id)
};

/// Reads a session directory (manifest plus per-node CSVs). Nodes absent
/// from the manifest's position map are skipped. Throws InputError.
SessionData load_session(const std::filesystem::path& session_dir);

struct Grid {
    std::int64_t start_us = 0;
    std::int64_t interval_us = kDefaultGridIntervalUs;
    std::size_t count = 0;

    std::int64_t time_at(std::size_t i) const { return start_us + static_cast<std::int64_t>(i) * interval_us; }
};

/// Time-sorted rows with repeated timestamps removed (first occurrence kept).
std::vector<server::RecordRow> sort_and_dedupe(std::vector<server::RecordRow> rows);

/// Grid from the latest node start to the earliest node end. Throws
/// InsufficientData when a node has fewer than two rows or nothing overlaps.
Grid common_grid(std::span<const NodeRecording> nodes, std::int64_t interval_us = kDefaultGridIntervalUs);

struct AlignedStream {
    std::uint8_t node_id = 0;
    BodyPosition position;
    std::int64_t grid_start_us = 0;
    std::int64_t grid_interval_us = kDefaultGridIntervalUs;
    std::array<std::vector<double>, kAxes> channels;

    std::size_t length() const { return channels[0].size(); }
};

/// Linear interpolation of time-sorted rows at the grid points; every grid
/// point must lie within [first row, last row]. Throws InsufficientData on
/// fewer than two rows and InvalidArgument when the grid leaves the span.
AlignedStream interpolate_to_grid(const NodeRecording& node, const Grid& grid);

/// Single channel form used by the stream version.
std::vector<double> interpolate_channel(std::span<const std::int64_t> t_us, std::span<const double> values,
                                        const Grid& grid);

/// floor((n - length) / stride) + 1 for n >= length, else 0.
std::size_t window_count(std::size_t n, std::size_t length = kWindowLength, std::size_t stride = kDefaultStride);

/// Label of every grid point; unlabelled points are empty.
std::vector<std::optional<Activity>> label_grid(const Grid& grid, std::span<const sim::LabelInterval> intervals);

struct WindowLabels {
    std::vector<std::size_t> starts;  // grid index of each kept window
    std::vector<Activity> labels;
    std::size_t dropped = 0;          // windows touching an unlabelled point
};

/// Windows anchored at grid index 0 and every stride after. Majority label;
/// a tie goes to towards_stairs.
WindowLabels label_windows(std::span<const std::optional<Activity>> point_labels,
                           std::size_t length = kWindowLength, std::size_t stride = kDefaultStride);

/// mean, std (N-1), min, max, range, median, skew g1, excess kurtosis g2.
/// Requires n >= 2 finite values; throws InvalidArgument otherwise.
std::array<double, kStatsPerAxis> window_statistics(std::span<const double> x);

/// 72 values for one sensor window, axis-major then statistic.
void extract_features(const AlignedStream& stream, std::size_t start, std::size_t length, double* out);

struct SensorColumns {
    std::string name;  // location name, or full position when a location repeats
    BodyPosition position;
    std::size_t first_column = 0;
};

class FeatureDataset {
public:
    FeatureDataset() = default;
    FeatureDataset(std::vector<SensorColumns> sensors);

    std::size_t rows() const { return labels_.size(); }
    std::size_t cols() const { return cols_; }
    std::size_t sensor_count() const { return sensors_.size(); }
    std::size_t footedness_column() const { return cols_ - 1; }
    const std::vector<SensorColumns>& sensors() const { return sensors_; }
    std::optional<std::size_t> sensor_index(std::string_view name) const;
    std::vector<std::string> column_names() const;

    const double* row(std::size_t r) const { return matrix_.data() + r * cols_; }
    double* row(std::size_t r) { return matrix_.data() + r * cols_; }
    double at(std::size_t r, std::size_t c) const { return matrix_[r * cols_ + c]; }
    const std::vector<double>& matrix() const { return matrix_; }
    const std::vector<int>& labels() const { return labels_; }
    const std::vector<std::uint32_t>& subject_ids() const { return subjects_; }
    const std::vector<std::int64_t>& window_start_us() const { return starts_; }

    void append_row(std::span<const double> values, int label, std::uint32_t subject, std::int64_t start_us);
    void append(const FeatureDataset& other);

    FeatureDataset select_rows(std::span<const std::size_t> rows) const;
    /// Keeps the given sensors' column ranges, in the given order, plus footedness.
    FeatureDataset select_sensors(std::span<const std::size_t> sensors) const;
    FeatureDataset select_mask(std::uint32_t mask) const;

    std::array<std::size_t, 2> class_counts() const;

private:
    std::vector<SensorColumns> sensors_;
    std::size_t cols_ = 1;
    std::vector<double> matrix_;
    std::vector<int> labels_;
    std::vector<std::uint32_t> subjects_;
    std::vector<std::int64_t> starts_;
};

struct PipelineConfig {
    std::int64_t grid_interval_us = kDefaultGridIntervalUs;
    std::size_t window_length = kWindowLength;
    std::size_t stride = kDefaultStride;
};

struct PipelineStats {
    std::size_t sessions = 0;
    std::size_t windows_total = 0;
    std::size_t windows_dropped = 0;
    std::size_t grid_points = 0;
};

/// Features for one session; labels are the intervals overlapping it.
FeatureDataset session_features(const SessionData& session, std::span<const sim::LabelInterval> labels,
                                const PipelineConfig& config, PipelineStats* stats = nullptr);

/// All sessions concatenated; they must share one sensor layout.
FeatureDataset build_dataset(std::span<const std::filesystem::path> session_dirs,
                             std::span<const sim::LabelInterval> labels, const PipelineConfig& config,
                             PipelineStats* stats = nullptr);

struct Normalizer {
    std::vector<double> mean;
    std::vector<double> scale;  // 1 for zero-variance columns

    /// Column means and population standard deviations over fit_rows, summed
    /// in row order.
    static Normalizer fit(const FeatureDataset& data, std::span<const std::size_t> fit_rows);
    void apply(FeatureDataset& data) const;
};

FeatureDataset normalize(const FeatureDataset& data, std::span<const std::size_t> fit_rows);

/// Undersamples the larger class without replacement to the smaller one's
/// count; surviving rows keep their original order. Throws SingleClass.
FeatureDataset balance(const FeatureDataset& data, std::uint64_t seed);

/// The rows balance() keeps when restricted to `rows` (ascending).
std::vector<std::size_t> balance_rows(std::span<const int> labels, std::span<const std::size_t> rows,
                                      std::uint64_t seed);

/// CSV (header of column names plus label, subject_id, window_start_us) and
/// a sidecar <csv>.manifest.json holding the sensor column index and extra.
void write_dataset(const FeatureDataset& data, const std::filesystem::path& csv, const nlohmann::json& extra = {});
FeatureDataset read_dataset(const std::filesystem::path& csv);

}  // namespace harnode::pipeline
