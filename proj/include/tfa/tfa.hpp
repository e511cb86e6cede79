#pragma once

#include "tfa/errors.hpp"
#include "tfa/fft.hpp"
#include "tfa/tfcore.hpp"
#include "tfa/weights.hpp"
#include "tfa/catalog.hpp"
#include "tfa/seqspace.hpp"
#include "tfa/amalgam.hpp"
#include "tfa/frames.hpp"
#include "tfa/weyl.hpp"
#include "tfa/diag.hpp"
#include "tfa/hmetric.hpp"
#include "tfa/io.hpp"
#include "tfa/cli.hpp"
