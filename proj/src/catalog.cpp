#include "mwtp/catalog.hpp"

namespace mwtp {

LocationIndex Catalog::index() const
{
    LocationIndex idx;
    for (const auto& w : weather)
        idx.weather[w.station.file_id] = {w.station.id, w.station.is_airport(), w.time_zone};
    for (const auto& r : routes)
        idx.routes[r.file_id] = r.id;
    for (const auto& s : pollution)
        idx.pollution[s.file_id] = s.id;
    return idx;
}

} // namespace mwtp
