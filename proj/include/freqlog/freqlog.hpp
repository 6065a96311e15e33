#pragma once

#include "freqlog/bounds.hpp"
#include "freqlog/conjecture.hpp"
#include "freqlog/elg.hpp"
#include "freqlog/errors.hpp"
#include "freqlog/ingest.hpp"
#include "freqlog/io.hpp"
#include "freqlog/model.hpp"
#include "freqlog/rng.hpp"
