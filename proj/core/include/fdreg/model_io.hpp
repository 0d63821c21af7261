#pragma once

#include "fdreg/data.hpp"
#include "fdreg/model.hpp"

#include <string>

namespace fdreg {

// Everything needed to run a trained model on raw rows: the architecture, its
// tensors (including batchnorm running statistics), and the feature scaler
// that was fit on the training split. Models trained without standardization
// carry the identity scaler (mean 0, std 1).
struct SavedModel {
    ModelSpec spec;
    ParameterSet params;
    Scaler scaler;
};

// Serializes to a single JSON document
//   {"format": "fdreg-model-v1", "spec": {...}, "params": {...}, "scaler": {...}}
// with numbers in shortest round-trip decimal form, so identical models yield
// byte-identical files and every value reloads bit-exactly. Throws a
// NumericError when any tensor holds a non-finite value (JSON cannot carry
// those), LoadError on I/O failure.
std::string model_to_json(const SavedModel& model);
void save_model(const std::string& path, const SavedModel& model);

// Parses and validates the same layout: unknown format strings, missing or
// misshapen arrays, and malformed JSON all raise LoadError.
SavedModel model_from_json(const std::string& text);
SavedModel load_model(const std::string& path);

}  // namespace fdreg
