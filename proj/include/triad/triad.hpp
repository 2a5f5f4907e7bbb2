#pragma once

#include "triad/chronos.hpp"
#include "triad/client.hpp"
#include "triad/codec.hpp"
#include "triad/dataset.hpp"
#include "triad/engine.hpp"
#include "triad/engine_config.hpp"
#include "triad/error.hpp"
#include "triad/geo.hpp"
#include "triad/geojson.hpp"
#include "triad/observation.hpp"
#include "triad/query_api.hpp"
#include "triad/quest.hpp"
#include "triad/sensing.hpp"
#include "triad/simharness.hpp"
#include "triad/simnet.hpp"
#include "triad/snapshot_log.hpp"
#include "triad/stquery.hpp"
#include "triad/tcp.hpp"
#include "triad/timefmt.hpp"
#include "triad/triad_store.hpp"
