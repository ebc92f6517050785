#pragma once

#include "msts/dataset.hpp"
#include "msts/distance_cache.hpp"
#include "msts/dtw.hpp"
#include "msts/error.hpp"
#include "msts/infotheory.hpp"
#include "msts/knn_cv.hpp"
#include "msts/merit.hpp"
#include "msts/parallel.hpp"
#include "msts/report.hpp"
#include "msts/selection.hpp"
