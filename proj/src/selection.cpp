#include "xdv/selection.hpp"

#include "xdv/errors.hpp"

#include <algorithm>
#include <sstream>

namespace xdv {

EdgeSelection::EdgeSelection(std::vector<int> ids) : e0(std::move(ids)) {
    std::sort(e0.begin(), e0.end());
    e0.erase(std::unique(e0.begin(), e0.end()), e0.end());
}

bool EdgeSelection::in_e0(int edge) const { return std::binary_search(e0.begin(), e0.end(), edge); }

std::string EdgeSelection::str() const {
    std::string s = "{";
    for (size_t i = 0; i < e0.size(); ++i) s += (i ? "," : "") + std::to_string(e0[i]);
    return s + "}";
}

EdgeSelection EdgeSelection::parse(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (c != '{' && c != '}' && c != ' ') s += c == ',' ? ' ' : c;
    std::istringstream in(s);
    std::vector<int> ids;
    std::string tok;
    while (in >> tok) {
        try {
            size_t used;
            ids.push_back(std::stoi(tok, &used));
            if (used != tok.size() || ids.back() < 0) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ParseError("bad edge id '" + tok + "' in selection");
        }
    }
    return EdgeSelection(ids);
}

} // namespace xdv
