#pragma once

#include <string>
#include <vector>

namespace xdv {

/// E0 as a sorted list of edge-class ids; every other edge class is in E+.
struct EdgeSelection {
    std::vector<int> e0;

    EdgeSelection() = default;
    explicit EdgeSelection(std::vector<int> ids);

    bool in_e0(int edge) const;
    bool empty() const { return e0.empty(); }
    std::string str() const;  // "{0,3}"
    static EdgeSelection parse(const std::string& s);  // "{0,3}", "0,3" or ""
    bool operator==(const EdgeSelection&) const = default;
    bool operator<(const EdgeSelection& o) const { return e0 < o.e0; }
};

} // namespace xdv
