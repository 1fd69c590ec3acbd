#ifndef ATD_ATD_HPP
#define ATD_ATD_HPP

#include "dataio.hpp"
#include "dataset.hpp"
#include "embed_net.hpp"
#include "error.hpp"
#include "evalharness.hpp"
#include "geometry.hpp"
#include "matrix.hpp"
#include "model_io.hpp"
#include "ordinal_targets.hpp"
#include "rng.hpp"
#include "text.hpp"
#include "trainer.hpp"

#endif
