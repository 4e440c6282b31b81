#pragma once

#include "ccsc/convolution.hpp"
#include "ccsc/error.hpp"
#include "ccsc/fft.hpp"
#include "ccsc/image.hpp"
#include "ccsc/io.hpp"
#include "ccsc/metrics.hpp"
#include "ccsc/parallel.hpp"
#include "ccsc/prox.hpp"
#include "ccsc/render.hpp"
#include "ccsc/sherman_morrison.hpp"
#include "ccsc/sim.hpp"
#include "ccsc/solver.hpp"
#include "ccsc/trainer.hpp"
