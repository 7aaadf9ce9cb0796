#pragma once

#include "sftrack/ablation.hpp"
#include "sftrack/affine.hpp"
#include "sftrack/appearance.hpp"
#include "sftrack/association.hpp"
#include "sftrack/box.hpp"
#include "sftrack/config.hpp"
#include "sftrack/detection.hpp"
#include "sftrack/error.hpp"
#include "sftrack/features.hpp"
#include "sftrack/hungarian.hpp"
#include "sftrack/image.hpp"
#include "sftrack/io.hpp"
#include "sftrack/kalman.hpp"
#include "sftrack/keyvalue.hpp"
#include "sftrack/log.hpp"
#include "sftrack/metrics.hpp"
#include "sftrack/motion_comp.hpp"
#include "sftrack/optical_flow.hpp"
#include "sftrack/overlay.hpp"
#include "sftrack/ppm.hpp"
#include "sftrack/rng.hpp"
#include "sftrack/synthetic.hpp"
#include "sftrack/tracker.hpp"
