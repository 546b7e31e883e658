#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace harnode {

/// The eleven body sites of the validation fleet, in figure order
/// (feet 1-2, shins 3-4, thighs 5-6, waist 7, head 8, chest 9, wrists 10-11).
enum class Location : std::uint8_t {
    LeftFoot,
    RightFoot,
    LeftShin,
    RightShin,
    LeftThigh,
    RightThigh,
    Waist,
    Head,
    Chest,
    LeftWrist,
    RightWrist,
};

inline constexpr std::size_t kLocationCount = 11;

/// Side of the segment the node sits on, seen from the front.
enum class Orientation : std::uint8_t { Front, Back, Left, Right };

inline constexpr std::size_t kOrientationCount = 4;
inline constexpr std::size_t kPositionCount = kLocationCount * kOrientationCount;  // 44

struct BodyPosition {
    Location location = Location::LeftFoot;
    Orientation orientation = Orientation::Front;

    /// 0..43, location-major.
    std::size_t index() const;
    static BodyPosition from_index(std::size_t index);
    /// "right_foot/front"
    std::string to_string() const;
    static std::optional<BodyPosition> parse(std::string_view text);

    bool operator==(const BodyPosition&) const = default;
};

std::string_view location_name(Location loc);
std::optional<Location> parse_location(std::string_view name);
std::string_view orientation_name(Orientation o);
std::optional<Orientation> parse_orientation(std::string_view name);

std::array<Location, kLocationCount> all_locations();

enum class Footedness : std::uint8_t { Left, Right };

std::string_view footedness_name(Footedness f);
std::optional<Footedness> parse_footedness(std::string_view name);

enum class Activity : std::uint8_t { Walking = 0, TowardsStairs = 1 };

/// "walking" / "towards_stairs"
std::string_view activity_name(Activity a);
std::optional<Activity> parse_activity(std::string_view name);

}  // namespace harnode
