#include <bit>
#include <fstream>

#include <json.hpp>

#include "harnode/error.hpp"
#include "harnode/learn.hpp"

namespace harnode::learn {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out.precision(17);
    return out;
}

std::string join(const std::vector<std::string>& names) {
    std::string s;
    for (const auto& n : names) {
        if (!s.empty()) s += ';';
        s += n;
    }
    return s;
}

void report_columns(std::ostream& out, const EvalReport& r) {
    out << r.accuracy << ',' << r.precision[0] << ',' << r.recall[0] << ',' << r.precision[1] << ','
        << r.recall[1] << ',' << r.confusion[0][0] << ',' << r.confusion[0][1] << ',' << r.confusion[1][0] << ','
        << r.confusion[1][1] << ',' << r.seed;
}

constexpr const char* kReportHeader =
    "accuracy,precision_walking,recall_walking,precision_towards_stairs,recall_towards_stairs,"
    "tn_walking,fp_stairs,fn_walking,tp_stairs,seed";

}  // namespace

void write_subset_results_csv(const std::filesystem::path& path, const SubsetSearchResult& result) {
    auto out = open_out(path);
    out << "mask,n_sensors,sensors," << kReportHeader << '\n';
    for (const auto& s : result.subsets) {
        out << s.mask << ',' << std::popcount(s.mask) << ',' << join(s.sensors) << ',';
        report_columns(out, s.report);
        out << '\n';
    }
}

void write_best_per_cardinality_csv(const std::filesystem::path& path, const SubsetSearchResult& result) {
    auto out = open_out(path);
    out << "n_sensors,mask,sensors," << kReportHeader << '\n';
    for (const auto& s : result.best_per_cardinality) {
        out << std::popcount(s.mask) << ',' << s.mask << ',' << join(s.sensors) << ',';
        report_columns(out, s.report);
        out << '\n';
    }
}

void write_confusion_csv(const std::filesystem::path& path, const EvalReport& report) {
    auto out = open_out(path);
    out << "actual,predicted_walking,predicted_towards_stairs\n";
    out << "walking," << report.confusion[0][0] << ',' << report.confusion[0][1] << '\n';
    out << "towards_stairs," << report.confusion[1][0] << ',' << report.confusion[1][1] << '\n';
}

void write_locations_csv(const std::filesystem::path& path, std::span<const LocationRow> rows) {
    auto out = open_out(path);
    out << "sensors,mask," << kReportHeader << '\n';
    for (const auto& r : rows) {
        out << join(r.sensors) << ',' << r.mask << ',';
        report_columns(out, r.report);
        out << '\n';
    }
}

void write_plot_data(const std::filesystem::path& path, const SubsetSearchResult& result) {
    nlohmann::json best = nlohmann::json::array();
    for (const auto& s : result.best_per_cardinality) {
        best.push_back({{"n_sensors", std::popcount(s.mask)},
                        {"accuracy", s.report.accuracy},
                        {"mask", s.mask},
                        {"sensors", s.sensors}});
    }
    nlohmann::json points = nlohmann::json::array();
    for (const auto& s : result.subsets) points.push_back({std::popcount(s.mask), s.report.accuracy, s.mask});
    const nlohmann::json doc = {{"x_label", "number of sensors"},
                                {"y_label", "accuracy"},
                                {"sensors", result.sensor_names},
                                {"best_per_cardinality", best},
                                {"points_columns", {"n_sensors", "accuracy", "mask"}},
                                {"points", points}};
    auto out = open_out(path);
    out << doc.dump(1) << '\n';
}

}  // namespace harnode::learn
