#include "harnode/body.hpp"
#include "harnode/error.hpp"

namespace harnode {
namespace {

constexpr std::array<std::string_view, kLocationCount> kLocationNames = {
    "left_foot", "right_foot", "left_shin", "right_shin", "left_thigh", "right_thigh",
    "waist",     "head",       "chest",     "left_wrist", "right_wrist",
};

constexpr std::array<std::string_view, kOrientationCount> kOrientationNames = {"front", "back", "left", "right"};

}  // namespace

std::size_t BodyPosition::index() const {
    return static_cast<std::size_t>(location) * kOrientationCount + static_cast<std::size_t>(orientation);
}

BodyPosition BodyPosition::from_index(std::size_t index) {
    if (index >= kPositionCount) throw InvalidArgument("position index out of range");
    return {static_cast<Location>(index / kOrientationCount), static_cast<Orientation>(index % kOrientationCount)};
}

std::string BodyPosition::to_string() const {
    return std::string(location_name(location)) + "/" + std::string(orientation_name(orientation));
}

std::optional<BodyPosition> BodyPosition::parse(std::string_view text) {
    const auto slash = text.find('/');
    const auto loc = parse_location(text.substr(0, slash));
    if (!loc) return std::nullopt;
    if (slash == std::string_view::npos) return BodyPosition{*loc, Orientation::Front};
    const auto ori = parse_orientation(text.substr(slash + 1));
    if (!ori) return std::nullopt;
    return BodyPosition{*loc, *ori};
}

std::string_view location_name(Location loc) { return kLocationNames.at(static_cast<std::size_t>(loc)); }

std::optional<Location> parse_location(std::string_view name) {
    for (std::size_t i = 0; i < kLocationNames.size(); ++i) {
        if (kLocationNames[i] == name) return static_cast<Location>(i);
    }
    return std::nullopt;
}

std::string_view orientation_name(Orientation o) { return kOrientationNames.at(static_cast<std::size_t>(o)); }

std::optional<Orientation> parse_orientation(std::string_view name) {
    for (std::size_t i = 0; i < kOrientationNames.size(); ++i) {
        if (kOrientationNames[i] == name) return static_cast<Orientation>(i);
    }
    return std::nullopt;
}

std::array<Location, kLocationCount> all_locations() {
    std::array<Location, kLocationCount> out{};
    for (std::size_t i = 0; i < kLocationCount; ++i) out[i] = static_cast<Location>(i);
    return out;
}

std::string_view footedness_name(Footedness f) { return f == Footedness::Left ? "left" : "right"; }

std::optional<Footedness> parse_footedness(std::string_view name) {
    if (name == "left") return Footedness::Left;
    if (name == "right") return Footedness::Right;
    return std::nullopt;
}

std::string_view activity_name(Activity a) { return a == Activity::Walking ? "walking" : "towards_stairs"; }

std::optional<Activity> parse_activity(std::string_view name) {
    if (name == "walking") return Activity::Walking;
    if (name == "towards_stairs") return Activity::TowardsStairs;
    return std::nullopt;
}

}  // namespace harnode
