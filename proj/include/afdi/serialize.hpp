#ifndef AFDI_SERIALIZE_HPP_
#define AFDI_SERIALIZE_HPP_

#include <string>

#include "afdi/ccg.hpp"
#include "afdi/separation.hpp"

namespace afdi {

/// JSON round-trip for CCG values:
/// {"G": rows, "c": [...], "A": rows, "b": [...],
///  "cones": [{"variant": ..., "dim": ..., params...}]}.
std::string to_json(const CCG& Z);
CCG ccg_from_json(const std::string& text);

/// {"u_star", "cost", "certified", "certificates": [...], "rays_used",
///  "seed", "timings_ms", "ray_solves", "iterations", "sigma_history"}.
std::string to_json(const SeparationResult& r);

}  // namespace afdi

#endif  // AFDI_SERIALIZE_HPP_
