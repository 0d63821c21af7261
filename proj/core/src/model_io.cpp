#include "fdreg/model_io.hpp"

#include "fdreg/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

namespace fdreg {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "fdreg-model-v1";

json spec_to_json(const ModelSpec& spec) {
    json layers = json::array();
    for (const LayerSpec& layer : spec.layers) {
        json j;
        j["kind"] = layer_kind(layer);
        if (const auto* d = std::get_if<DenseSpec>(&layer)) {
            j["in_features"] = d->in_features;
            j["out_features"] = d->out_features;
        } else if (const auto* c = std::get_if<Conv1dSpec>(&layer)) {
            j["in_channels"] = c->in_channels;
            j["out_channels"] = c->out_channels;
            j["kernel_size"] = c->kernel_size;
            j["stride"] = c->stride;
            j["padding"] = c->padding;
        } else if (const auto* b = std::get_if<BatchNormSpec>(&layer)) {
            j["channels"] = b->channels;
            j["momentum"] = b->momentum;
            j["epsilon"] = b->epsilon;
        } else if (const auto* m = std::get_if<MaxPoolSpec>(&layer)) {
            j["window"] = m->window;
        } else if (const auto* dr = std::get_if<DropoutSpec>(&layer)) {
            j["rate"] = dr->rate;
        }
        // relu and flatten carry no fields beyond the kind tag
        layers.push_back(std::move(j));
    }
    return json{{"input_dim", spec.input_dim},
                {"output_dim", spec.output_dim},
                {"layers", std::move(layers)}};
}

ModelSpec spec_from_json(const json& j) {
    ModelSpec spec;
    spec.input_dim = j.at("input_dim").get<std::size_t>();
    spec.output_dim = j.at("output_dim").get<std::size_t>();
    for (const json& l : j.at("layers")) {
        std::string kind = l.at("kind").get<std::string>();
        if (kind == "dense") {
            spec.layers.push_back(DenseSpec{l.at("in_features").get<std::size_t>(),
                                            l.at("out_features").get<std::size_t>()});
        } else if (kind == "conv1d") {
            spec.layers.push_back(Conv1dSpec{
                l.at("in_channels").get<std::size_t>(), l.at("out_channels").get<std::size_t>(),
                l.at("kernel_size").get<std::size_t>(), l.at("stride").get<std::size_t>(),
                l.at("padding").get<std::size_t>()});
        } else if (kind == "batchnorm1d") {
            spec.layers.push_back(BatchNormSpec{l.at("channels").get<std::size_t>(),
                                                l.at("momentum").get<double>(),
                                                l.at("epsilon").get<double>()});
        } else if (kind == "relu") {
            spec.layers.push_back(ReluSpec{});
        } else if (kind == "maxpool1d") {
            spec.layers.push_back(MaxPoolSpec{l.at("window").get<std::size_t>()});
        } else if (kind == "dropout") {
            spec.layers.push_back(DropoutSpec{l.at("rate").get<double>()});
        } else if (kind == "flatten") {
            spec.layers.push_back(FlattenSpec{});
        } else {
            throw LoadError("model: unknown layer kind '" + kind + "'");
        }
    }
    return spec;
}

// Every persisted tensor of one layer, by suffix. Running statistics ride
// along with the learnables so eval mode survives the round trip.
template <typename LP>  // LayerParams or const LayerParams
auto layer_tensors(LP& lp) {
    std::vector<std::pair<std::string, decltype(&lp.weight)>> out;
    if (!lp.weight.data.empty()) out.emplace_back("weight", &lp.weight);
    if (!lp.bias.data.empty()) out.emplace_back("bias", &lp.bias);
    if (!lp.scale.data.empty()) out.emplace_back("scale", &lp.scale);
    if (!lp.shift.data.empty()) out.emplace_back("shift", &lp.shift);
    if (!lp.run_mean.data.empty()) out.emplace_back("run_mean", &lp.run_mean);
    if (!lp.run_var.data.empty()) out.emplace_back("run_var", &lp.run_var);
    return out;
}

void require_finite(const std::vector<double>& values, const std::string& what) {
    for (double v : values)
        if (!std::isfinite(v)) throw NumericError("model: non-finite value in " + what);
}

}  // namespace

std::string model_to_json(const SavedModel& model) {
    json params = json::object();
    for (std::size_t i = 0; i < model.params.layers.size(); ++i) {
        for (auto& [suffix, tensor] : layer_tensors(model.params.layers[i])) {
            std::string name = "layer" + std::to_string(i) + "." + suffix;
            require_finite(tensor->data, name);
            params[name] = tensor->data;
        }
    }
    require_finite(model.scaler.mean, "scaler mean");
    require_finite(model.scaler.std_dev, "scaler std");
    json doc{{"format", kFormatTag},
             {"spec", spec_to_json(model.spec)},
             {"params", std::move(params)},
             {"scaler", json{{"mean", model.scaler.mean}, {"std", model.scaler.std_dev}}}};
    return doc.dump() + "\n";
}

void save_model(const std::string& path, const SavedModel& model) {
    std::string text = model_to_json(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw LoadError("save_model: cannot open '" + path + "'");
    out << text;
    if (!out) throw LoadError("save_model: write to '" + path + "' failed");
}

SavedModel model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw LoadError(std::string("model: JSON parse failure: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kFormatTag)
            throw LoadError("model: unsupported format tag '" +
                            doc.at("format").get<std::string>() + "'");
        SavedModel model;
        model.spec = spec_from_json(doc.at("spec"));
        infer_shapes(model.spec);  // validates the layer pipeline composes

        // Materialize correctly shaped tensors, then overwrite from the file.
        Rng scratch(0);
        model.params = init_params(model.spec, scratch);
        const json& params = doc.at("params");
        for (std::size_t i = 0; i < model.params.layers.size(); ++i) {
            for (auto& [suffix, tensor] : layer_tensors(model.params.layers[i])) {
                std::string name = "layer" + std::to_string(i) + "." + suffix;
                auto values = params.at(name).get<std::vector<double>>();
                if (values.size() != tensor->data.size())
                    throw LoadError("model: '" + name + "' holds " +
                                    std::to_string(values.size()) + " values, expected " +
                                    std::to_string(tensor->data.size()));
                tensor->data = std::move(values);
            }
        }
        const json& scaler = doc.at("scaler");
        model.scaler.mean = scaler.at("mean").get<std::vector<double>>();
        model.scaler.std_dev = scaler.at("std").get<std::vector<double>>();
        if (model.scaler.mean.size() != model.spec.input_dim ||
            model.scaler.std_dev.size() != model.spec.input_dim)
            throw LoadError("model: scaler length does not match input_dim");
        return model;
    } catch (const json::exception& e) {
        throw LoadError(std::string("model: schema problem: ") + e.what());
    }
}

SavedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("load_model: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

}  // namespace fdreg
