#pragma once

// Umbrella header: the full library except the CLI layer.

#include "corelog/diagnostics.hpp"
#include "corelog/model.hpp"
#include "corelog/ocel.hpp"
#include "corelog/ocel_csv.hpp"
#include "corelog/ocel_json.hpp"
#include "corelog/parsers.hpp"
#include "corelog/result.hpp"
#include "corelog/streaming.hpp"
#include "corelog/time.hpp"
#include "corelog/validate.hpp"
#include "corelog/value.hpp"
