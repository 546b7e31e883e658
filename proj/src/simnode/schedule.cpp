#include "harnode/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "harnode/error.hpp"
#include "harnode/gait.hpp"

namespace harnode::sim {

std::int64_t SubjectSchedule::start_us() const { return segments.empty() ? 0 : segments.front().start_us; }

std::int64_t SubjectSchedule::end_us() const { return segments.empty() ? 0 : segments.back().end_us; }

const SubjectSchedule* Schedule::subject_at(std::int64_t t_us) const {
    for (const auto& s : subjects) {
        if (!s.segments.empty() && t_us >= s.start_us() && t_us < s.end_us()) return &s;
    }
    return nullptr;
}

Activity Schedule::activity_at(std::int64_t t_us) const {
    const auto* subject = subject_at(t_us);
    if (subject == nullptr) return Activity::Walking;
    const auto& segs = subject->segments;
    auto it = std::upper_bound(segs.begin(), segs.end(), t_us,
                               [](std::int64_t t, const Segment& seg) { return t < seg.start_us; });
    if (it == segs.begin()) return Activity::Walking;
    --it;
    return t_us < it->end_us ? it->activity : Activity::Walking;
}

std::int64_t Schedule::end_us() const {
    std::int64_t end = 0;
    for (const auto& s : subjects) end = std::max(end, s.end_us());
    return end;
}

Schedule build_study_schedule(const StudyScript& script, std::int64_t start_us, std::uint64_t seed) {
    std::mt19937_64 rng(hash_combine(seed, 0x57D1ULL));
    auto seconds = [](double s) { return static_cast<std::int64_t>(std::llround(s * 1e6)); };
    std::uniform_real_distribution<double> lead(script.lead_in_min_s, script.lead_in_max_s);
    std::uniform_real_distribution<double> approach(script.approach_min_s, script.approach_max_s);

    Schedule schedule;
    std::int64_t t = start_us;
    for (std::uint32_t i = 0; i < script.subjects; ++i) {
        SubjectSchedule subject;
        subject.subject_id = i + 1;
        subject.footedness = std::find(script.left_footed_subjects.begin(), script.left_footed_subjects.end(),
                                       subject.subject_id) != script.left_footed_subjects.end()
                                 ? Footedness::Left
                                 : Footedness::Right;

        auto add = [&](std::int64_t len, Activity a) {
            subject.segments.push_back({t, t + len, a});
            t += len;
        };
        add(seconds(script.level_walking_s), Activity::Walking);
        const std::uint32_t approaches = script.ascent_approaches + script.descent_approaches;
        for (std::uint32_t k = 0; k < approaches; ++k) {
            add(seconds(lead(rng)), Activity::Walking);
            add(seconds(approach(rng)), Activity::TowardsStairs);
        }
        schedule.subjects.push_back(std::move(subject));
        t += seconds(script.gap_between_subjects_s);
    }
    return schedule;
}

void validate_schedule(const Schedule& schedule) {
    for (const auto& s : schedule.subjects) {
        for (std::size_t i = 0; i < s.segments.size(); ++i) {
            const auto& seg = s.segments[i];
            if (seg.end_us <= seg.start_us) throw InvalidArgument("empty or inverted segment");
            if (i > 0 && seg.start_us < s.segments[i - 1].end_us) {
                throw InvalidArgument("overlapping segments for subject " + std::to_string(s.subject_id));
            }
        }
    }
}

std::vector<LabelInterval> export_ground_truth(const Schedule& schedule) {
    validate_schedule(schedule);
    std::vector<LabelInterval> out;
    for (const auto& s : schedule.subjects) {
        for (const auto& seg : s.segments) {
            if (!out.empty() && out.back().subject_id == s.subject_id && out.back().label == seg.activity &&
                out.back().end_us == seg.start_us) {
                out.back().end_us = seg.end_us;
                continue;
            }
            out.push_back({s.subject_id, seg.start_us, seg.end_us, seg.activity});
        }
    }
    return out;
}

void write_label_csv(const std::filesystem::path& path, const std::vector<LabelInterval>& intervals) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    out << "subject_id,start_us,end_us,label\n";
    for (const auto& iv : intervals) {
        out << iv.subject_id << ',' << iv.start_us << ',' << iv.end_us << ',' << activity_name(iv.label) << '\n';
    }
}

std::vector<LabelInterval> read_label_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read label file " + path.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("subject_id,start_us,end_us,label", 0) != 0) {
        throw InputError("label file " + path.string() + " has an unexpected header");
    }
    std::vector<LabelInterval> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.back() == '\r') line.pop_back();
        std::stringstream ss(line);
        std::string id, start, end, label;
        std::getline(ss, id, ',');
        std::getline(ss, start, ',');
        std::getline(ss, end, ',');
        std::getline(ss, label, ',');
        const auto activity = parse_activity(label);
        if (!activity) throw InputError("unknown label '" + label + "' at line " + std::to_string(lineno));
        try {
            out.push_back({static_cast<std::uint32_t>(std::stoul(id)), std::stoll(start), std::stoll(end), *activity});
        } catch (const std::exception&) {
            throw InputError("malformed label row at line " + std::to_string(lineno));
        }
        if (out.back().end_us <= out.back().start_us) {
            throw InputError("empty interval at line " + std::to_string(lineno));
        }
    }
    return out;
}

}  // namespace harnode::sim
