#ifndef SPTRACK_LABEL_HPP
#define SPTRACK_LABEL_HPP

#include <compare>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace sptrack {

// Track label: (time of birth, index within that birth batch).
struct Label {
    int birth_time = 0;
    int index = 0;

    auto operator<=>(const Label&) const = default;

    std::string str() const {
        return "(" + std::to_string(birth_time) + "," + std::to_string(index) + ")";
    }
};

using LabelSet = std::set<Label>;

inline bool labels_distinct(const std::vector<Label>& labels) {
    LabelSet seen;
    for (const auto& l : labels) {
        if (!seen.insert(l).second) return false;
    }
    return true;
}

}  // namespace sptrack

template <>
struct std::hash<sptrack::Label> {
    size_t operator()(const sptrack::Label& l) const noexcept {
        const uint64_t a = static_cast<uint32_t>(l.birth_time);
        const uint64_t b = static_cast<uint32_t>(l.index);
        return std::hash<uint64_t>{}((a << 32) | b);
    }
};

#endif
