// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 kgsheaf contributors

#pragma once

#include "kgsheaf/adam.hpp"
#include "kgsheaf/block_sparse.hpp"
#include "kgsheaf/checkpoint.hpp"
#include "kgsheaf/common.hpp"
#include "kgsheaf/config.hpp"
#include "kgsheaf/eval.hpp"
#include "kgsheaf/harmonic.hpp"
#include "kgsheaf/kg.hpp"
#include "kgsheaf/linalg.hpp"
#include "kgsheaf/loss.hpp"
#include "kgsheaf/model.hpp"
#include "kgsheaf/negatives.hpp"
#include "kgsheaf/pipeline.hpp"
#include "kgsheaf/queries.hpp"
#include "kgsheaf/relation.hpp"
#include "kgsheaf/sheaf.hpp"
#include "kgsheaf/toy.hpp"
#include "kgsheaf/train.hpp"
