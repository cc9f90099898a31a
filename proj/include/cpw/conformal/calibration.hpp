#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "cpw/conformal/sets.hpp"
#include "cpw/learners/predictor.hpp"
#include "cpw/types.hpp"

namespace cpw::conformal {

/// Trains a predictor on `train`. `fold` identifies the call (0 for the
/// single VB model, k for the model that leaves out fold k).
using Trainer = std::function<learners::Predictor(const Dataset& train, std::size_t fold)>;

/// Log-loss score of every example under `predictor`, batched.
std::vector<double> nc_scores(const learners::Predictor& predictor, const Dataset& examples);

/// Score of every candidate label for each of n row-major inputs; returns
/// n rows of |Y| scores.
std::vector<std::vector<double>> candidate_scores(const learners::Predictor& predictor,
                                                  const std::vector<double>& x, std::size_t n);

struct VbModel {
  learners::Predictor model;
  std::vector<double> validation_scores;
};

VbModel fit_vb(const Dataset& data, const Trainer& trainer, std::uint64_t split_seed);

struct KcvModel {
  std::vector<learners::Predictor> models;
  std::vector<std::vector<double>> fold_scores;
};

/// K models, model k trained on everything outside fold k and scored on
/// fold k. K = N gives the leave-one-out (jackknife+) ensemble.
KcvModel fit_kcv(const Dataset& data, std::size_t folds, const Trainer& trainer, std::uint64_t partition_seed);

}  // namespace cpw::conformal
