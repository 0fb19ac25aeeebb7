#pragma once

#include <string>
#include <vector>

#include "atelier/common.hpp"

namespace atelier {

// Ordered, trimmed, case-insensitively distinct keywords. The unit of
// exchange between the creative stages and the visual prompt builder.
struct KeywordList {
    std::vector<std::string> items;

    bool contains_ci(std::string_view word) const {
        const std::string needle = to_lower(word);
        for (const auto& item : items)
            if (to_lower(item) == needle) return true;
        return false;
    }

    std::size_t size() const { return items.size(); }
    bool empty() const { return items.empty(); }

    void validate() const {
        if (items.empty()) throw PreconditionError("keyword list empty");
        std::vector<std::string> seen;
        for (const auto& item : items) {
            if (item.empty() || item != trim(item))
                throw PreconditionError("keyword not trimmed or empty: '" + item + "'");
            const std::string low = to_lower(item);
            for (const auto& s : seen)
                if (s == low) throw PreconditionError("duplicate keyword: '" + item + "'");
            seen.push_back(low);
        }
    }
};

}  // namespace atelier
