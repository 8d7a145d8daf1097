#pragma once

#include "avt/analytics/adi.hpp"
#include "avt/analytics/amplitude.hpp"
#include "avt/analytics/spectrum.hpp"
#include "avt/analytics/words.hpp"
#include "avt/border_crop.hpp"
#include "avt/caption.hpp"
#include "avt/config.hpp"
#include "avt/csv.hpp"
#include "avt/error.hpp"
#include "avt/extract.hpp"
#include "avt/image_codec.hpp"
#include "avt/ingest.hpp"
#include "avt/media_core.hpp"
#include "avt/packer.hpp"
#include "avt/pair_extract.hpp"
#include "avt/segmenter.hpp"
#include "avt/stages.hpp"
#include "avt/store.hpp"
#include "avt/wav.hpp"
#include "avt/zip.hpp"
