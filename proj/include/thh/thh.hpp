#pragma once

#include "thh/error.hpp"
#include "thh/quad.hpp"
#include "thh/measure.hpp"
#include "thh/convex.hpp"
#include "thh/bounds.hpp"
#include "thh/karamata.hpp"
#include "thh/residual.hpp"
#include "thh/io.hpp"
