#pragma once

// Convenience umbrella header: pulls in the full stratcheck library.

#include "stratcheck/claims.hpp"
#include "stratcheck/conditions.hpp"
#include "stratcheck/family.hpp"
#include "stratcheck/format.hpp"
#include "stratcheck/horn.hpp"
#include "stratcheck/kuo.hpp"
#include "stratcheck/parallel.hpp"
#include "stratcheck/pipeline.hpp"
#include "stratcheck/poly.hpp"
#include "stratcheck/report.hpp"
#include "stratcheck/report_io.hpp"
#include "stratcheck/rng.hpp"
#include "stratcheck/subspace.hpp"

namespace stratcheck {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stratcheck
