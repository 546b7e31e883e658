#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "harnode/body.hpp"

namespace harnode::sim {

struct Segment {
    std::int64_t start_us = 0;  // server time, inclusive
    std::int64_t end_us = 0;    // exclusive
    Activity activity = Activity::Walking;
};

/// One participant's recording: the session spans the first segment start to
/// the last segment end.
struct SubjectSchedule {
    std::uint32_t subject_id = 0;
    Footedness footedness = Footedness::Right;
    std::vector<Segment> segments;

    std::int64_t start_us() const;
    std::int64_t end_us() const;
};

struct Schedule {
    std::vector<SubjectSchedule> subjects;

    /// Subject whose session covers t (inclusive of its start, exclusive of
    /// its end), if any.
    const SubjectSchedule* subject_at(std::int64_t t_us) const;
    /// Activity at t; Walking outside every segment.
    Activity activity_at(std::int64_t t_us) const;
    std::int64_t end_us() const;
};

/// The validation protocol: per subject a block of level walking followed
/// by stair approaches, each a short walking lead-in and a towards-stairs
/// interval.
struct StudyScript {
    std::uint32_t subjects = 10;
    std::uint32_t ascent_approaches = 10;
    std::uint32_t descent_approaches = 10;
    double level_walking_s = 120.0;
    double lead_in_min_s = 2.0;
    double lead_in_max_s = 4.0;
    double approach_min_s = 1.0;
    double approach_max_s = 2.0;
    double gap_between_subjects_s = 5.0;
    std::vector<std::uint32_t> left_footed_subjects = {4};
};

Schedule build_study_schedule(const StudyScript& script, std::int64_t start_us, std::uint64_t seed);

/// Segments must be sorted and non-overlapping within each subject; throws
/// InvalidArgument otherwise.
void validate_schedule(const Schedule& schedule);

struct LabelInterval {
    std::uint32_t subject_id = 0;
    std::int64_t start_us = 0;
    std::int64_t end_us = 0;
    Activity label = Activity::Walking;

    bool operator==(const LabelInterval&) const = default;
};

/// Ground-truth intervals in server time, one per segment, adjacent segments
/// with the same activity merged. Overlaps are rejected.
std::vector<LabelInterval> export_ground_truth(const Schedule& schedule);

/// CSV with header subject_id,start_us,end_us,label.
void write_label_csv(const std::filesystem::path& path, const std::vector<LabelInterval>& intervals);
std::vector<LabelInterval> read_label_csv(const std::filesystem::path& path);

}  // namespace harnode::sim
