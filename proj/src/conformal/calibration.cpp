#include "cpw/conformal/calibration.hpp"

#include "cpw/error.hpp"

namespace cpw::conformal {

std::vector<double> nc_scores(const learners::Predictor& predictor, const Dataset& examples) {
  if (examples.empty()) return {};
  std::vector<double> x;
  for (const auto& ex : examples) x.insert(x.end(), ex.x.begin(), ex.x.end());
  const std::size_t classes = predictor.num_classes();
  const auto p = predictor.predict_distribution_batch(x, examples.size());
  std::vector<double> scores(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].y >= classes) throw DimensionError("label exceeds predictor arity");
    scores[i] = nc_score(std::span<const double>(p.data() + i * classes, classes), examples[i].y);
  }
  return scores;
}

std::vector<std::vector<double>> candidate_scores(const learners::Predictor& predictor,
                                                  const std::vector<double>& x, std::size_t n) {
  const std::size_t classes = predictor.num_classes();
  const auto p = predictor.predict_distribution_batch(x, n);
  std::vector<std::vector<double>> out(n, std::vector<double>(classes));
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> row(p.data() + i * classes, classes);
    for (std::size_t y = 0; y < classes; ++y) out[i][y] = nc_score(row, y);
  }
  return out;
}

VbModel fit_vb(const Dataset& data, const Trainer& trainer, std::uint64_t split_seed) {
  Split split = vb_split(data, split_seed);
  learners::Predictor model = trainer(split.train, 0);
  auto scores = nc_scores(model, split.validation);
  return {std::move(model), std::move(scores)};
}

KcvModel fit_kcv(const Dataset& data, std::size_t folds, const Trainer& trainer, std::uint64_t partition_seed) {
  const auto partition = kfold_partition(data.size(), folds, partition_seed);
  std::vector<bool> held_out(data.size());
  KcvModel out;
  for (std::size_t k = 0; k < folds; ++k) {
    std::fill(held_out.begin(), held_out.end(), false);
    Dataset holdout;
    for (std::size_t i : partition[k]) {
      held_out[i] = true;
      holdout.push_back(data[i]);
    }
    Dataset train;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!held_out[i]) train.push_back(data[i]);
    }
    out.models.push_back(trainer(train, k));
    out.fold_scores.push_back(nc_scores(out.models.back(), holdout));
  }
  return out;
}

}  // namespace cpw::conformal
