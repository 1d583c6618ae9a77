#pragma once

// Umbrella header for the entity-framing pipeline toolkit.

#include "framing/backends.hpp"
#include "framing/config.hpp"
#include "framing/corpus.hpp"
#include "framing/ensemble.hpp"
#include "framing/errors.hpp"
#include "framing/evaluation.hpp"
#include "framing/instructions.hpp"
#include "framing/parsing.hpp"
#include "framing/records.hpp"
#include "framing/taxonomy.hpp"
#include "framing/text.hpp"
