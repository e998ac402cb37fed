#include "shipperf/types.hpp"

#include <algorithm>
#include <cmath>

namespace shipperf {

std::string to_string(CleaningKind k) {
    switch (k) {
        case CleaningKind::Propeller: return "Propeller";
        case CleaningKind::Hull: return "Hull";
        case CleaningKind::HullAndPropeller: return "HullAndPropeller";
    }
    return "?";
}

CleaningKind cleaning_kind_from_string(const std::string& s) {
    if (s == "Propeller") return CleaningKind::Propeller;
    if (s == "Hull") return CleaningKind::Hull;
    if (s == "HullAndPropeller") return CleaningKind::HullAndPropeller;
    throw DataError("unknown cleaning kind: '" + s + "'");
}

double LinearTable::operator()(double xq) const {
    if (x.empty()) throw ConfigError("empty lookup table");
    if (x.size() == 1 || xq <= x.front()) return y.front();
    if (xq >= x.back()) return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    double w = (xq - x[i - 1]) / (x[i] - x[i - 1]);
    return y[i - 1] + w * (y[i] - y[i - 1]);
}

double ShipConfig::wetted_surface(double mean_draft, double /*trim*/) const {
    if (wetted_surface_table.empty()) throw ConfigError("empty wetted surface table");
    // Interpolate on mean draft; entries are sorted by draft.
    const auto& tab = wetted_surface_table;
    if (mean_draft <= tab.front().mean_draft) return tab.front().area;
    if (mean_draft >= tab.back().mean_draft) return tab.back().area;
    for (std::size_t i = 1; i < tab.size(); ++i) {
        if (mean_draft <= tab[i].mean_draft) {
            double w = (mean_draft - tab[i - 1].mean_draft) /
                       (tab[i].mean_draft - tab[i - 1].mean_draft);
            return tab[i - 1].area + w * (tab[i].area - tab[i - 1].area);
        }
    }
    return tab.back().area;
}

double ShipConfig::displacement(double mean_draft) const {
    return displacement_table(mean_draft);
}

void ShipConfig::validate() const {
    if (propulsive_efficiency <= 0.0 || propulsive_efficiency > 1.0)
        throw ConfigError("propulsive_efficiency must be in (0, 1]");
    if (water_density <= 0.0) throw ConfigError("water_density must be positive");
    auto monotone = [](const std::vector<double>& v) {
        return std::is_sorted(v.begin(), v.end());
    };
    if (!monotone(displacement_table.x))
        throw ConfigError("displacement table drafts must be ascending");
    for (std::size_t i = 1; i < wetted_surface_table.size(); ++i)
        if (wetted_surface_table[i].mean_draft < wetted_surface_table[i - 1].mean_draft)
            throw ConfigError("wetted surface table drafts must be ascending");
}

void HindcastGrid::validate() const {
    auto strictly_sorted = [](const std::vector<double>& v) {
        for (std::size_t i = 1; i < v.size(); ++i)
            if (!(v[i] > v[i - 1])) return false;
        return true;
    };
    if (!strictly_sorted(times) || !strictly_sorted(lats) || !strictly_sorted(lons))
        throw DataError("hindcast grid axes must be strictly ascending");
    if (values.size() != times.size() * lats.size() * lons.size())
        throw DataError("hindcast grid value count does not match axes");
}

}  // namespace shipperf
