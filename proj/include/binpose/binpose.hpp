#pragma once

#include "binpose/analytic.hpp"
#include "binpose/bin_geometry.hpp"
#include "binpose/error.hpp"
#include "binpose/icp.hpp"
#include "binpose/io.hpp"
#include "binpose/kdtree.hpp"
#include "binpose/loss.hpp"
#include "binpose/metrics.hpp"
#include "binpose/pose.hpp"
#include "binpose/rng.hpp"
#include "binpose/rotation.hpp"
#include "binpose/scan.hpp"
#include "binpose/synth.hpp"
