#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "harnode/error.hpp"
#include "harnode/pipeline.hpp"

namespace harnode::pipeline {

using nlohmann::json;

FeatureDataset::FeatureDataset(std::vector<SensorColumns> sensors) : sensors_(std::move(sensors)) {
    for (std::size_t i = 0; i < sensors_.size(); ++i) sensors_[i].first_column = i * kFeaturesPerSensor;
    cols_ = sensors_.size() * kFeaturesPerSensor + 1;
}

std::optional<std::size_t> FeatureDataset::sensor_index(std::string_view name) const {
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
        if (sensors_[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<std::string> FeatureDataset::column_names() const {
    std::vector<std::string> names;
    names.reserve(cols_);
    for (const auto& s : sensors_) {
        for (const auto* axis : kAxisNames) {
            for (const auto* stat : kStatNames) names.push_back(s.name + "." + axis + "." + stat);
        }
    }
    names.emplace_back("footedness");
    return names;
}

void FeatureDataset::append_row(std::span<const double> values, int label, std::uint32_t subject,
                                std::int64_t start_us) {
    if (values.size() != cols_) throw InvalidArgument("row width mismatch");
    if (label != 0 && label != 1) throw InvalidArgument("label must be 0 or 1");
    matrix_.insert(matrix_.end(), values.begin(), values.end());
    labels_.push_back(label);
    subjects_.push_back(subject);
    starts_.push_back(start_us);
}

void FeatureDataset::append(const FeatureDataset& other) {
    if (other.cols_ != cols_) throw InputError("datasets have different widths");
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
        if (sensors_[i].name != other.sensors_[i].name) throw InputError("datasets have different sensor layouts");
    }
    matrix_.insert(matrix_.end(), other.matrix_.begin(), other.matrix_.end());
    labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
    subjects_.insert(subjects_.end(), other.subjects_.begin(), other.subjects_.end());
    starts_.insert(starts_.end(), other.starts_.begin(), other.starts_.end());
}

FeatureDataset FeatureDataset::select_rows(std::span<const std::size_t> rows) const {
    FeatureDataset out;
    out.sensors_ = sensors_;
    out.cols_ = cols_;
    out.matrix_.reserve(rows.size() * cols_);
    for (auto r : rows) {
        if (r >= labels_.size()) throw InvalidArgument("row index out of range");
        out.matrix_.insert(out.matrix_.end(), row(r), row(r) + cols_);
        out.labels_.push_back(labels_[r]);
        out.subjects_.push_back(subjects_[r]);
        out.starts_.push_back(starts_[r]);
    }
    return out;
}

FeatureDataset FeatureDataset::select_sensors(std::span<const std::size_t> sensors) const {
    std::vector<SensorColumns> chosen;
    for (auto s : sensors) {
        if (s >= sensors_.size()) throw InvalidArgument("sensor index out of range");
        chosen.push_back(sensors_[s]);
    }
    FeatureDataset out(chosen);
    out.labels_ = labels_;
    out.subjects_ = subjects_;
    out.starts_ = starts_;
    out.matrix_.resize(rows() * out.cols_);
    for (std::size_t r = 0; r < rows(); ++r) {
        const double* src = row(r);
        double* dst = out.row(r);
        for (std::size_t k = 0; k < sensors.size(); ++k) {
            std::copy_n(src + sensors_[sensors[k]].first_column, kFeaturesPerSensor, dst + k * kFeaturesPerSensor);
        }
        dst[out.cols_ - 1] = src[cols_ - 1];
    }
    return out;
}

FeatureDataset FeatureDataset::select_mask(std::uint32_t mask) const {
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
        if (mask & (1u << i)) chosen.push_back(i);
    }
    if (chosen.empty()) throw InvalidArgument("empty sensor subset");
    return select_sensors(chosen);
}

std::array<std::size_t, 2> FeatureDataset::class_counts() const {
    std::array<std::size_t, 2> c{0, 0};
    for (int l : labels_) ++c[static_cast<std::size_t>(l)];
    return c;
}

namespace {

std::vector<SensorColumns> sensor_layout(const std::vector<AlignedStream>& streams) {
    std::map<Location, int> seen;
    for (const auto& s : streams) ++seen[s.position.location];
    std::vector<SensorColumns> out;
    for (const auto& s : streams) {
        const bool unique = seen[s.position.location] == 1;
        out.push_back({unique ? std::string(location_name(s.position.location)) : s.position.to_string(), s.position, 0});
    }
    return out;
}

}  // namespace

FeatureDataset session_features(const SessionData& session, std::span<const sim::LabelInterval> labels,
                                const PipelineConfig& config, PipelineStats* stats) {
    const auto grid = common_grid(session.nodes, config.grid_interval_us);
    std::vector<AlignedStream> streams;
    streams.reserve(session.nodes.size());
    for (const auto& node : session.nodes) streams.push_back(interpolate_to_grid(node, grid));

    const auto grid_end = grid.time_at(grid.count - 1);
    std::vector<sim::LabelInterval> relevant;
    for (const auto& l : labels) {
        if (l.end_us > grid.start_us && l.start_us <= grid_end) relevant.push_back(l);
    }
    const auto point_labels = label_grid(grid, relevant);
    const auto windows = label_windows(point_labels, config.window_length, config.stride);

    FeatureDataset data(sensor_layout(streams));
    const double footedness =
        session.session.subject && session.session.subject->footedness == Footedness::Left ? 0.0 : 1.0;
    const auto subject = session.session.subject ? session.session.subject->subject_id : session.session.session_id;
    std::vector<double> row(data.cols());
    for (std::size_t w = 0; w < windows.starts.size(); ++w) {
        for (std::size_t s = 0; s < streams.size(); ++s) {
            extract_features(streams[s], windows.starts[w], config.window_length, row.data() + s * kFeaturesPerSensor);
        }
        row.back() = footedness;
        data.append_row(row, windows.labels[w] == Activity::TowardsStairs ? 1 : 0, subject,
                        grid.time_at(windows.starts[w]));
    }
    if (stats) {
        ++stats->sessions;
        stats->windows_total += windows.starts.size() + windows.dropped;
        stats->windows_dropped += windows.dropped;
        stats->grid_points += grid.count;
    }
    return data;
}

FeatureDataset build_dataset(std::span<const std::filesystem::path> session_dirs,
                             std::span<const sim::LabelInterval> labels, const PipelineConfig& config,
                             PipelineStats* stats) {
    if (session_dirs.empty()) throw InputError("no sessions given");
    std::optional<FeatureDataset> all;
    for (const auto& dir : session_dirs) {
        auto part = session_features(load_session(dir), labels, config, stats);
        spdlog::info("{}: {} windows", dir.string(), part.rows());
        if (!all) {
            all = std::move(part);
        } else {
            all->append(part);
        }
    }
    return std::move(*all);
}

Normalizer Normalizer::fit(const FeatureDataset& data, std::span<const std::size_t> fit_rows) {
    if (fit_rows.empty()) throw InvalidArgument("normalizer needs at least one row");
    const auto cols = data.cols();
    Normalizer n;
    n.mean.assign(cols, 0.0);
    n.scale.assign(cols, 0.0);
    for (auto r : fit_rows) {
        const double* x = data.row(r);
        for (std::size_t c = 0; c < cols; ++c) n.mean[c] += x[c];
    }
    const double count = static_cast<double>(fit_rows.size());
    for (auto& m : n.mean) m /= count;
    for (auto r : fit_rows) {
        const double* x = data.row(r);
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = x[c] - n.mean[c];
            n.scale[c] += d * d;
        }
    }
    for (auto& s : n.scale) {
        s = std::sqrt(s / count);
        if (s == 0) s = 1;
    }
    return n;
}

void Normalizer::apply(FeatureDataset& data) const {
    if (mean.size() != data.cols()) throw InvalidArgument("normalizer width mismatch");
    for (std::size_t r = 0; r < data.rows(); ++r) {
        double* x = data.row(r);
        for (std::size_t c = 0; c < mean.size(); ++c) x[c] = (x[c] - mean[c]) / scale[c];
    }
}

FeatureDataset normalize(const FeatureDataset& data, std::span<const std::size_t> fit_rows) {
    auto out = data;
    Normalizer::fit(data, fit_rows).apply(out);
    return out;
}

std::vector<std::size_t> balance_rows(std::span<const int> labels, std::span<const std::size_t> rows,
                                      std::uint64_t seed) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (auto r : rows) {
        if (r >= labels.size()) throw InvalidArgument("row index out of range");
        by_class[static_cast<std::size_t>(labels[r])].push_back(r);
    }
    if (by_class[0].empty() || by_class[1].empty()) throw SingleClass("balance needs both classes");
    const std::size_t majority = by_class[0].size() >= by_class[1].size() ? 0 : 1;
    auto& major = by_class[majority];
    auto kept = by_class[1 - majority];
    std::mt19937_64 rng(seed);
    std::shuffle(major.begin(), major.end(), rng);
    kept.insert(kept.end(), major.begin(), major.begin() + static_cast<std::ptrdiff_t>(kept.size()));
    std::sort(kept.begin(), kept.end());
    return kept;
}

FeatureDataset balance(const FeatureDataset& data, std::uint64_t seed) {
    std::vector<std::size_t> all(data.rows());
    std::iota(all.begin(), all.end(), 0);
    return data.select_rows(balance_rows(data.labels(), all, seed));
}

namespace {

void append_double(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, end);
}

template <typename T>
T parse_number(std::string_view text, const std::filesystem::path& path, std::size_t line) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InputError(path.string() + ":" + std::to_string(line) + ": bad number '" + std::string(text) + "'");
    }
    return value;
}

std::filesystem::path manifest_path(const std::filesystem::path& csv) {
    return std::filesystem::path(csv.string() + ".manifest.json");
}

}  // namespace

void write_dataset(const FeatureDataset& data, const std::filesystem::path& csv, const json& extra) {
    std::ofstream out(csv);
    if (!out) throw InputError("cannot write " + csv.string());
    std::string line;
    for (const auto& name : data.column_names()) {
        line += name;
        line += ',';
    }
    line += "label,subject_id,window_start_us\n";
    out << line;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        line.clear();
        const double* x = data.row(r);
        for (std::size_t c = 0; c < data.cols(); ++c) {
            append_double(line, x[c]);
            line += ',';
        }
        line += std::to_string(data.labels()[r]) + ',' + std::to_string(data.subject_ids()[r]) + ',' +
                std::to_string(data.window_start_us()[r]) + '\n';
        out << line;
    }

    json sensors = json::array();
    for (const auto& s : data.sensors()) {
        sensors.push_back({{"name", s.name},
                           {"position", s.position.to_string()},
                           {"first_column", s.first_column},
                           {"width", kFeaturesPerSensor}});
    }
    const auto counts = data.class_counts();
    json manifest = {{"rows", data.rows()},
                     {"columns", data.cols()},
                     {"footedness_column", data.footedness_column()},
                     {"sensors", sensors},
                     {"statistics", kStatNames},
                     {"axes", kAxisNames},
                     {"class_counts", {{"walking", counts[0]}, {"towards_stairs", counts[1]}}}};
    if (extra.is_object()) manifest["extra"] = extra;
    std::ofstream(manifest_path(csv)) << manifest.dump(2) << '\n';
}

FeatureDataset read_dataset(const std::filesystem::path& csv) {
    std::ifstream min(manifest_path(csv));
    if (!min) throw InputError("missing dataset manifest for " + csv.string());
    json manifest;
    try {
        manifest = json::parse(min);
    } catch (const json::exception& e) {
        throw InputError(e.what());
    }
    std::vector<SensorColumns> sensors;
    for (const auto& s : manifest.at("sensors")) {
        const auto pos = BodyPosition::parse(s.at("position").get<std::string>());
        if (!pos) throw InputError("bad sensor position in manifest");
        sensors.push_back({s.at("name").get<std::string>(), *pos, 0});
    }
    FeatureDataset data(sensors);

    std::ifstream in(csv);
    if (!in) throw InputError("cannot open " + csv.string());
    std::string line;
    std::getline(in, line);
    std::vector<double> row(data.cols());
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::string_view rest(line);
        auto next = [&]() {
            const auto comma = rest.find(',');
            auto field = rest.substr(0, comma);
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            return field;
        };
        for (std::size_t c = 0; c < data.cols(); ++c) row[c] = parse_number<double>(next(), csv, lineno);
        const int label = parse_number<int>(next(), csv, lineno);
        const auto subject = parse_number<std::uint32_t>(next(), csv, lineno);
        const auto start = parse_number<std::int64_t>(next(), csv, lineno);
        data.append_row(row, label, subject, start);
    }
    return data;
}

}  // namespace harnode::pipeline
