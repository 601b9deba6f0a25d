#include <fmt/format.h>

#include "diffguard/errors.hpp"
#include "learn_internal.hpp"

namespace diffguard {

namespace {
constexpr std::string_view kModelSchema = "diffguard.model.v1";
}

nlohmann::json model_to_json(const TrainedModel& model) {
  return nlohmann::json{{"schema", kModelSchema},
                        {"kind", to_string(model.kind)},
                        {"hyperparameters", model.hyperparameters},
                        {"selected_features", model.selected_features},
                        {"scaler", {{"mean", model.scaler.mean}, {"scale", model.scaler.scale}}},
                        {"train_seed", model.train_seed},
                        {"state", model.impl->state()}};
}

TrainedModel model_from_json(const nlohmann::json& j) {
  const auto schema = j.at("schema").get<std::string>();
  if (schema != kModelSchema) {
    throw InvalidInput(fmt::format("unsupported model schema '{}'", schema));
  }
  TrainedModel model;
  model.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
  model.hyperparameters = j.at("hyperparameters");
  model.selected_features = j.at("selected_features").get<std::vector<std::string>>();
  model.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
  model.scaler.scale = j.at("scaler").at("scale").get<std::vector<double>>();
  model.train_seed = j.at("train_seed").get<std::uint64_t>();
  model.impl = detail::classifier_from_state(model.kind, j.at("state"));
  return model;
}

}  // namespace diffguard

namespace diffguard::detail {

std::shared_ptr<Classifier> classifier_from_state(ClassifierKind kind, const nlohmann::json& j) {
  switch (kind) {
    case ClassifierKind::decision_tree: return DecisionTreeClassifier::from_state(j);
    case ClassifierKind::random_forest: return RandomForestClassifier::from_state(j);
    case ClassifierKind::gradient_boost: return GradientBoostClassifier::from_state(j);
    case ClassifierKind::mlp: return MlpClassifier::from_state(j);
    case ClassifierKind::naive_bayes: return NaiveBayesClassifier::from_state(j);
    case ClassifierKind::knn: return KnnClassifier::from_state(j);
    case ClassifierKind::svm: return SvmClassifier::from_state(j);
  }
  throw InvalidInput("unknown classifier kind");
}

}  // namespace diffguard::detail
