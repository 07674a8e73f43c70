#pragma once

#include "vinestress/baselines.hpp"
#include "vinestress/bicop.hpp"
#include "vinestress/datagen.hpp"
#include "vinestress/dvine.hpp"
#include "vinestress/errors.hpp"
#include "vinestress/io.hpp"
#include "vinestress/marginals.hpp"
#include "vinestress/rng.hpp"
#include "vinestress/stress.hpp"
