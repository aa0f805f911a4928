#pragma once

#include "oplength/certificate.hpp"
#include "oplength/constructions.hpp"
#include "oplength/errors.hpp"
#include "oplength/matcore.hpp"
#include "oplength/pipeline.hpp"
#include "oplength/random.hpp"
#include "oplength/simhom.hpp"
#include "oplength/spectral_split.hpp"
