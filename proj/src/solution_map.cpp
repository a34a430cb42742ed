#include "adcal/solution_map.hpp"

#include "json.hpp"

namespace adcal {

using nlohmann::json;

std::string SolutionMap::to_json_text() const {
    json j;
    j["k"] = k;
    json cells_j = json::array();
    for (const auto& c : cells) {
        json jc;
        switch (c.state) {
            case SolutionCell::State::empty:
                jc["state"] = "empty";
                break;
            case SolutionCell::State::chosen:
                jc["state"] = "chosen";
                jc["seq"] = c.seq;
                jc["u"] = c.u;
                jc["y"] = c.y;
                break;
            case SolutionCell::State::synthetic:
                jc["state"] = "synthetic";
                jc["u"] = c.u;
                jc["y"] = c.y;
                break;
        }
        cells_j.push_back(jc);
    }
    j["cells"] = cells_j;
    return j.dump();
}

SolutionMap SolutionMap::from_json_text(const std::string& text) {
    const json j = json::parse(text);
    SolutionMap m(j.at("k").get<int>());
    std::size_t i = 0;
    for (const auto& jc : j.at("cells")) {
        SolutionCell& c = m.cells.at(i++);
        const auto state = jc.at("state").get<std::string>();
        if (state == "chosen") {
            c.state = SolutionCell::State::chosen;
            c.seq = jc.at("seq").get<std::uint64_t>();
            c.u = jc.at("u").get<Vec>();
            c.y = jc.at("y").get<Vec>();
        } else if (state == "synthetic") {
            c.state = SolutionCell::State::synthetic;
            c.u = jc.at("u").get<Vec>();
            c.y = jc.at("y").get<Vec>();
        }
    }
    return m;
}

}  // namespace adcal
