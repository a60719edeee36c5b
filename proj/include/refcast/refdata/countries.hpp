#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "refcast/error.hpp"

namespace refcast::refdata {

enum class Region {
    north_america,
    south_asia,
    latin_america,
    africa,
    east_asia_pacific,
    europe_central_asia,
    middle_east,
};

inline constexpr std::array<Region, 7> kAllRegions{
    Region::north_america,     Region::south_asia,          Region::latin_america, Region::africa,
    Region::east_asia_pacific, Region::europe_central_asia, Region::middle_east};

constexpr std::string_view to_string(Region r) {
    switch (r) {
        case Region::north_america: return "north_america";
        case Region::south_asia: return "south_asia";
        case Region::latin_america: return "latin_america";
        case Region::africa: return "africa";
        case Region::east_asia_pacific: return "east_asia_pacific";
        case Region::europe_central_asia: return "europe_central_asia";
        case Region::middle_east: return "middle_east";
    }
    return "?";
}

inline std::optional<Region> parse_region(std::string_view s) {
    for (Region r : kAllRegions) {
        if (s == to_string(r)) return r;
    }
    return std::nullopt;
}

struct CountryEntry {
    std::string_view code;  // ISO 3166-1 alpha-3
    Region region;
};

// Fixed country -> region lookup; sorted by code.
inline constexpr std::array kCountryTable = std::to_array<CountryEntry>({
    {"AFG", Region::south_asia},          {"AGO", Region::africa},
    {"ALB", Region::europe_central_asia}, {"ARE", Region::middle_east},
    {"ARG", Region::latin_america},       {"ARM", Region::europe_central_asia},
    {"AUS", Region::east_asia_pacific},   {"AUT", Region::europe_central_asia},
    {"AZE", Region::europe_central_asia}, {"BDI", Region::africa},
    {"BEL", Region::europe_central_asia}, {"BEN", Region::africa},
    {"BFA", Region::africa},              {"BGD", Region::south_asia},
    {"BGR", Region::europe_central_asia}, {"BHR", Region::middle_east},
    {"BIH", Region::europe_central_asia}, {"BLR", Region::europe_central_asia},
    {"BLZ", Region::latin_america},       {"BOL", Region::latin_america},
    {"BRA", Region::latin_america},       {"BTN", Region::south_asia},
    {"BWA", Region::africa},              {"CAF", Region::africa},
    {"CAN", Region::north_america},       {"CHE", Region::europe_central_asia},
    {"CHL", Region::latin_america},       {"CHN", Region::east_asia_pacific},
    {"CIV", Region::africa},              {"CMR", Region::africa},
    {"COD", Region::africa},              {"COG", Region::africa},
    {"COL", Region::latin_america},       {"CRI", Region::latin_america},
    {"CUB", Region::latin_america},       {"CYP", Region::europe_central_asia},
    {"CZE", Region::europe_central_asia}, {"DEU", Region::europe_central_asia},
    {"DNK", Region::europe_central_asia}, {"DOM", Region::latin_america},
    {"DZA", Region::middle_east},         {"ECU", Region::latin_america},
    {"EGY", Region::middle_east},         {"ERI", Region::africa},
    {"ESP", Region::europe_central_asia}, {"EST", Region::europe_central_asia},
    {"ETH", Region::africa},              {"FIN", Region::europe_central_asia},
    {"FJI", Region::east_asia_pacific},   {"FRA", Region::europe_central_asia},
    {"GAB", Region::africa},              {"GBR", Region::europe_central_asia},
    {"GEO", Region::europe_central_asia}, {"GHA", Region::africa},
    {"GIN", Region::africa},              {"GMB", Region::africa},
    {"GNQ", Region::africa},              {"GRC", Region::europe_central_asia},
    {"GTM", Region::latin_america},       {"GUY", Region::latin_america},
    {"HND", Region::latin_america},       {"HRV", Region::europe_central_asia},
    {"HTI", Region::latin_america},       {"HUN", Region::europe_central_asia},
    {"IDN", Region::east_asia_pacific},   {"IND", Region::south_asia},
    {"IRL", Region::europe_central_asia}, {"IRN", Region::middle_east},
    {"IRQ", Region::middle_east},         {"ISL", Region::europe_central_asia},
    {"ISR", Region::middle_east},         {"ITA", Region::europe_central_asia},
    {"JAM", Region::latin_america},       {"JOR", Region::middle_east},
    {"JPN", Region::east_asia_pacific},   {"KAZ", Region::europe_central_asia},
    {"KEN", Region::africa},              {"KGZ", Region::europe_central_asia},
    {"KHM", Region::east_asia_pacific},   {"KOR", Region::east_asia_pacific},
    {"KWT", Region::middle_east},         {"LAO", Region::east_asia_pacific},
    {"LBN", Region::middle_east},         {"LBR", Region::africa},
    {"LBY", Region::middle_east},         {"LKA", Region::south_asia},
    {"LSO", Region::africa},              {"LTU", Region::europe_central_asia},
    {"LVA", Region::europe_central_asia}, {"MAR", Region::middle_east},
    {"MDA", Region::europe_central_asia}, {"MDG", Region::africa},
    {"MEX", Region::latin_america},       {"MKD", Region::europe_central_asia},
    {"MLI", Region::africa},              {"MMR", Region::east_asia_pacific},
    {"MNE", Region::europe_central_asia}, {"MNG", Region::east_asia_pacific},
    {"MOZ", Region::africa},              {"MRT", Region::africa},
    {"MUS", Region::africa},              {"MWI", Region::africa},
    {"MYS", Region::east_asia_pacific},   {"NAM", Region::africa},
    {"NER", Region::africa},              {"NGA", Region::africa},
    {"NIC", Region::latin_america},       {"NLD", Region::europe_central_asia},
    {"NOR", Region::europe_central_asia}, {"NPL", Region::south_asia},
    {"NZL", Region::east_asia_pacific},   {"OMN", Region::middle_east},
    {"PAK", Region::south_asia},          {"PAN", Region::latin_america},
    {"PER", Region::latin_america},       {"PHL", Region::east_asia_pacific},
    {"PNG", Region::east_asia_pacific},   {"POL", Region::europe_central_asia},
    {"PRK", Region::east_asia_pacific},   {"PRT", Region::europe_central_asia},
    {"PRY", Region::latin_america},       {"QAT", Region::middle_east},
    {"ROU", Region::europe_central_asia}, {"RUS", Region::europe_central_asia},
    {"RWA", Region::africa},              {"SAU", Region::middle_east},
    {"SDN", Region::africa},              {"SEN", Region::africa},
    {"SLB", Region::east_asia_pacific},   {"SLE", Region::africa},
    {"SLV", Region::latin_america},       {"SOM", Region::africa},
    {"SRB", Region::europe_central_asia}, {"SSD", Region::africa},
    {"SUR", Region::latin_america},       {"SVK", Region::europe_central_asia},
    {"SVN", Region::europe_central_asia}, {"SWE", Region::europe_central_asia},
    {"SWZ", Region::africa},              {"SYR", Region::middle_east},
    {"TCD", Region::africa},              {"TGO", Region::africa},
    {"THA", Region::east_asia_pacific},   {"TJK", Region::europe_central_asia},
    {"TKM", Region::europe_central_asia}, {"TLS", Region::east_asia_pacific},
    {"TTO", Region::latin_america},       {"TUN", Region::middle_east},
    {"TUR", Region::europe_central_asia}, {"TWN", Region::east_asia_pacific},
    {"TZA", Region::africa},              {"UGA", Region::africa},
    {"UKR", Region::europe_central_asia}, {"URY", Region::latin_america},
    {"USA", Region::north_america},       {"UZB", Region::europe_central_asia},
    {"VEN", Region::latin_america},       {"VNM", Region::east_asia_pacific},
    {"YEM", Region::middle_east},         {"ZAF", Region::africa},
    {"ZMB", Region::africa},              {"ZWE", Region::africa},
});

inline std::optional<Region> region_of(std::string_view country) {
    const auto it = std::lower_bound(kCountryTable.begin(), kCountryTable.end(), country,
                                     [](const CountryEntry& e, std::string_view c) { return e.code < c; });
    if (it == kCountryTable.end() || it->code != country) return std::nullopt;
    return it->region;
}

inline bool is_known_country(std::string_view country) { return region_of(country).has_value(); }

}  // namespace refcast::refdata
