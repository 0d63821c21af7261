#include "fdreg/model.hpp"

#include "fdreg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fdreg {

std::string layer_kind(const LayerSpec& layer) {
    struct Visitor {
        std::string operator()(const DenseSpec&) const { return "dense"; }
        std::string operator()(const Conv1dSpec&) const { return "conv1d"; }
        std::string operator()(const BatchNormSpec&) const { return "batchnorm1d"; }
        std::string operator()(const ReluSpec&) const { return "relu"; }
        std::string operator()(const MaxPoolSpec&) const { return "maxpool1d"; }
        std::string operator()(const DropoutSpec&) const { return "dropout"; }
        std::string operator()(const FlattenSpec&) const { return "flatten"; }
    };
    return std::visit(Visitor{}, layer);
}

namespace {

[[noreturn]] void shape_error(std::size_t idx, const LayerSpec& layer, const std::string& why) {
    throw std::invalid_argument("layer " + std::to_string(idx) + " (" + layer_kind(layer) +
                                "): " + why);
}

// Per-sample output shape of one layer, given its per-sample input shape.
ActShape next_shape(std::size_t idx, const LayerSpec& layer, const ActShape& in) {
    if (const auto* d = std::get_if<DenseSpec>(&layer)) {
        if (in.size() != 1)
            shape_error(idx, layer, "expects a flat activation (flatten first)");
        if (in[0] != d->in_features)
            shape_error(idx, layer, "expects " + std::to_string(d->in_features) +
                                        " features, got " + std::to_string(in[0]));
        if (d->out_features == 0) shape_error(idx, layer, "out_features must be positive");
        return {d->out_features};
    }
    if (const auto* c = std::get_if<Conv1dSpec>(&layer)) {
        ActShape cur = in;
        if (cur.size() == 1 && c->in_channels == 1) cur = {1, cur[0]};  // implicit channel
        if (cur.size() != 2)
            shape_error(idx, layer, "expects a (channels, length) activation");
        if (cur[0] != c->in_channels)
            shape_error(idx, layer, "expects " + std::to_string(c->in_channels) +
                                        " channels, got " + std::to_string(cur[0]));
        if (c->kernel_size == 0 || c->stride == 0 || c->out_channels == 0)
            shape_error(idx, layer, "kernel, stride and out_channels must be positive");
        std::size_t padded = cur[1] + 2 * c->padding;
        if (padded < c->kernel_size)
            shape_error(idx, layer, "input shorter than kernel");
        return {c->out_channels, (padded - c->kernel_size) / c->stride + 1};
    }
    if (const auto* b = std::get_if<BatchNormSpec>(&layer)) {
        std::size_t ch = in.size() == 2 ? in[0] : in.size() == 1 ? in[0] : 0;
        if (in.size() != 1 && in.size() != 2)
            shape_error(idx, layer, "expects a flat or (channels, length) activation");
        if (ch != b->channels)
            shape_error(idx, layer, "expects " + std::to_string(b->channels) +
                                        " channels, got " + std::to_string(ch));
        return in;
    }
    if (std::holds_alternative<ReluSpec>(layer)) return in;
    if (const auto* m = std::get_if<MaxPoolSpec>(&layer)) {
        if (in.size() != 2)
            shape_error(idx, layer, "expects a (channels, length) activation");
        if (m->window == 0) shape_error(idx, layer, "window must be positive");
        if (in[1] < m->window)
            shape_error(idx, layer, "input shorter than the pooling window");
        return {in[0], in[1] / m->window};
    }
    if (const auto* dr = std::get_if<DropoutSpec>(&layer)) {
        if (!(dr->rate >= 0.0 && dr->rate < 1.0))
            shape_error(idx, layer, "rate must lie in [0, 1)");
        return in;
    }
    if (std::holds_alternative<FlattenSpec>(layer)) {
        if (in.size() == 1) return in;
        if (in.size() == 2) return {in[0] * in[1]};
        shape_error(idx, layer, "expects a flat or (channels, length) activation");
    }
    throw std::logic_error("next_shape: unhandled layer kind");
}

}  // namespace

std::vector<ActShape> infer_shapes(const ModelSpec& spec) {
    if (spec.input_dim == 0 || spec.output_dim == 0)
        throw std::invalid_argument("ModelSpec: input_dim and output_dim must be positive");
    ActShape cur = {spec.input_dim};
    std::vector<ActShape> out;
    out.reserve(spec.layers.size());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        cur = next_shape(i, spec.layers[i], cur);
        out.push_back(cur);
    }
    if (cur.size() != 1 || cur[0] != spec.output_dim)
        throw std::invalid_argument("ModelSpec: final activation does not match output_dim");
    return out;
}

// ---- Parameter management ----------------------------------------------------

ParameterSet init_params(const ModelSpec& spec, Rng& rng) {
    infer_shapes(spec);  // validate composition before allocating anything
    ParameterSet ps;
    ps.layers.resize(spec.layers.size());
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        LayerParams& lp = ps.layers[i];
        if (const auto* d = std::get_if<DenseSpec>(&spec.layers[i])) {
            double bound = std::sqrt(6.0 / double(d->in_features + d->out_features));
            lp.weight = Tensor({d->out_features, d->in_features});
            for (double& v : lp.weight.data) v = rng.uniform(-bound, bound);
            lp.bias = Tensor({d->out_features});
        } else if (const auto* c = std::get_if<Conv1dSpec>(&spec.layers[i])) {
            double fan_in = double(c->in_channels * c->kernel_size);
            double fan_out = double(c->out_channels * c->kernel_size);
            double bound = std::sqrt(6.0 / (fan_in + fan_out));
            lp.weight = Tensor({c->out_channels, c->in_channels, c->kernel_size});
            for (double& v : lp.weight.data) v = rng.uniform(-bound, bound);
            lp.bias = Tensor({c->out_channels});
        } else if (const auto* b = std::get_if<BatchNormSpec>(&spec.layers[i])) {
            lp.scale = Tensor({b->channels});
            std::fill(lp.scale.data.begin(), lp.scale.data.end(), 1.0);
            lp.shift = Tensor({b->channels});
            lp.run_mean = Tensor({b->channels});
            lp.run_var = Tensor({b->channels});
            std::fill(lp.run_var.data.begin(), lp.run_var.data.end(), 1.0);
        }
    }
    return ps;
}

ParameterSet zero_like(const ParameterSet& params) {
    ParameterSet out;
    out.layers.resize(params.layers.size());
    auto zero_copy = [](const Tensor& src, Tensor& dst) {
        if (!src.data.empty()) dst = Tensor(src.shape);
    };
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        zero_copy(params.layers[i].weight, out.layers[i].weight);
        zero_copy(params.layers[i].bias, out.layers[i].bias);
        zero_copy(params.layers[i].scale, out.layers[i].scale);
        zero_copy(params.layers[i].shift, out.layers[i].shift);
        zero_copy(params.layers[i].run_mean, out.layers[i].run_mean);
        zero_copy(params.layers[i].run_var, out.layers[i].run_var);
    }
    return out;
}

std::vector<NamedTensorRef> learnable_tensors(const ModelSpec& spec, ParameterSet& params) {
    if (spec.layers.size() != params.layers.size())
        throw std::invalid_argument("learnable_tensors: spec/params layer counts differ");
    std::vector<NamedTensorRef> out;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        std::string base = "layer" + std::to_string(i) + ".";
        if (std::holds_alternative<DenseSpec>(spec.layers[i]) ||
            std::holds_alternative<Conv1dSpec>(spec.layers[i])) {
            out.push_back({base + "weight", &params.layers[i].weight});
            out.push_back({base + "bias", &params.layers[i].bias});
        } else if (std::holds_alternative<BatchNormSpec>(spec.layers[i])) {
            out.push_back({base + "scale", &params.layers[i].scale});
            out.push_back({base + "shift", &params.layers[i].shift});
        }
    }
    return out;
}

std::vector<NamedTensorRef> weight_tensors(const ModelSpec& spec, ParameterSet& params) {
    if (spec.layers.size() != params.layers.size())
        throw std::invalid_argument("weight_tensors: spec/params layer counts differ");
    std::vector<NamedTensorRef> out;
    for (std::size_t i = 0; i < spec.layers.size(); ++i)
        if (std::holds_alternative<DenseSpec>(spec.layers[i]) ||
            std::holds_alternative<Conv1dSpec>(spec.layers[i]))
            out.push_back({"layer" + std::to_string(i) + ".weight", &params.layers[i].weight});
    return out;
}

// ---- Forward -------------------------------------------------------------------

namespace {

// Views a (batch, F) activation as (batch, 1, F) when a one-channel conv
// follows; row-major data is untouched.
void view_as_single_channel(Tensor& t) {
    t.shape = {t.shape[0], 1, t.shape[1]};
}

struct BnDims {
    std::size_t B, C, L;
};

BnDims bn_dims(const Tensor& x) {
    if (x.ndim() == 3) return {x.shape[0], x.shape[1], x.shape[2]};
    if (x.ndim() == 2) return {x.shape[0], x.shape[1], 1};
    throw std::invalid_argument("batchnorm: expects a 2-D or 3-D activation");
}

Tensor dense_forward(const DenseSpec& d, const LayerParams& lp, const Tensor& x) {
    const std::size_t b = x.shape[0], in = d.in_features, out = d.out_features;
    Tensor y({b, out});
    for (std::size_t r = 0; r < b; ++r) {
        const double* xr = &x.data[r * in];
        for (std::size_t o = 0; o < out; ++o) {
            const double* wo = &lp.weight.data[o * in];
            double acc = lp.bias(o);
            for (std::size_t i = 0; i < in; ++i) acc += wo[i] * xr[i];
            y(r, o) = acc;
        }
    }
    return y;
}

Tensor conv1d_forward(const Conv1dSpec& c, const LayerParams& lp, const Tensor& x) {
    const std::size_t b = x.shape[0], ic = c.in_channels, L = x.shape[2];
    const std::size_t oc = c.out_channels, k = c.kernel_size, s = c.stride, p = c.padding;
    const std::size_t Lo = (L + 2 * p - k) / s + 1;
    Tensor y({b, oc, Lo});
    for (std::size_t r = 0; r < b; ++r) {
        for (std::size_t o = 0; o < oc; ++o) {
            double* yo = &y.data[(r * oc + o) * Lo];
            std::fill(yo, yo + Lo, lp.bias(o));
            for (std::size_t ci = 0; ci < ic; ++ci) {
                const double* xc = &x.data[(r * ic + ci) * L];
                const double* wk = &lp.weight.data[(o * ic + ci) * k];
                for (std::size_t kk = 0; kk < k; ++kk) {
                    double w = wk[kk];
                    if (s == 1) {
                        // pos = t + kk - p; clip t so pos stays inside [0, L)
                        std::size_t t_lo = p > kk ? p - kk : 0;
                        if (kk >= L + p) continue;  // no valid tap position
                        std::size_t t_hi = std::min(Lo, L + p - kk);
                        if (t_hi <= t_lo) continue;
                        const double* xs = xc + (t_lo + kk) - p;
                        for (std::size_t t = t_lo; t < t_hi; ++t)
                            yo[t] += w * xs[t - t_lo];
                    } else {
                        for (std::size_t t = 0; t < Lo; ++t) {
                            std::ptrdiff_t pos = std::ptrdiff_t(t * s + kk) - std::ptrdiff_t(p);
                            if (pos >= 0 && pos < std::ptrdiff_t(L)) yo[t] += w * xc[pos];
                        }
                    }
                }
            }
        }
    }
    return y;
}

}  // namespace

Tensor forward(const ModelSpec& spec, ParameterSet& params, const Tensor& batch,
               Mode mode, Rng* rng, ForwardCache* cache) {
    batch.require_ndim(2);
    if (batch.cols() != spec.input_dim)
        throw std::invalid_argument("forward: batch width " + std::to_string(batch.cols()) +
                                    " does not match input_dim " +
                                    std::to_string(spec.input_dim));
    if (spec.layers.size() != params.layers.size())
        throw std::invalid_argument("forward: spec/params layer counts differ");
    if (!batch.all_finite()) throw NumericError("forward: non-finite input batch");
    if (cache && mode == Mode::eval)
        throw std::invalid_argument("forward: caches exist only in train mode");
    if (mode == Mode::train && rng == nullptr)
        for (const auto& l : spec.layers)
            if (std::holds_alternative<DropoutSpec>(l))
                throw std::invalid_argument("forward: dropout in train mode needs an rng");

    if (cache) {
        cache->layers.assign(spec.layers.size(), LayerCache{});
        cache->valid = true;
    }

    Tensor cur = batch;
    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerSpec& layer = spec.layers[li];
        LayerParams& lp = params.layers[li];
        LayerCache* lc = cache ? &cache->layers[li] : nullptr;

        if (const auto* c = std::get_if<Conv1dSpec>(&layer)) {
            if (cur.ndim() == 2 && c->in_channels == 1) view_as_single_channel(cur);
            if (cur.ndim() != 3 || cur.shape[1] != c->in_channels)
                throw std::invalid_argument("forward: conv1d channel mismatch at layer " +
                                            std::to_string(li));
            if (cur.shape[2] + 2 * c->padding < c->kernel_size)
                throw std::invalid_argument("forward: conv1d input shorter than kernel");
            if (lc) lc->input = cur;
            cur = conv1d_forward(*c, lp, cur);
        } else if (const auto* d = std::get_if<DenseSpec>(&layer)) {
            if (cur.ndim() != 2 || cur.shape[1] != d->in_features)
                throw std::invalid_argument("forward: dense shape mismatch at layer " +
                                            std::to_string(li));
            if (lc) lc->input = cur;
            cur = dense_forward(*d, lp, cur);
        } else if (const auto* bn = std::get_if<BatchNormSpec>(&layer)) {
            BnDims dims = bn_dims(cur);
            if (dims.C != bn->channels)
                throw std::invalid_argument("forward: batchnorm channel mismatch at layer " +
                                            std::to_string(li));
            const std::size_t B = dims.B, C = dims.C, L = dims.L;
            const double N = double(B * L);
            Tensor y(cur.shape);
            if (mode == Mode::train) {
                Tensor mean({C}), var({C}), xhat(cur.shape);
                for (std::size_t c2 = 0; c2 < C; ++c2) {
                    double m = 0.0;
                    for (std::size_t r = 0; r < B; ++r)
                        for (std::size_t l = 0; l < L; ++l) m += cur.data[(r * C + c2) * L + l];
                    m /= N;
                    double v = 0.0;
                    for (std::size_t r = 0; r < B; ++r)
                        for (std::size_t l = 0; l < L; ++l) {
                            double diff = cur.data[(r * C + c2) * L + l] - m;
                            v += diff * diff;
                        }
                    v /= N;  // population variance over the batch
                    mean(c2) = m;
                    var(c2) = v;
                    double inv = 1.0 / std::sqrt(v + bn->epsilon);
                    for (std::size_t r = 0; r < B; ++r)
                        for (std::size_t l = 0; l < L; ++l) {
                            std::size_t idx = (r * C + c2) * L + l;
                            double xh = (cur.data[idx] - m) * inv;
                            xhat.data[idx] = xh;
                            y.data[idx] = lp.scale(c2) * xh + lp.shift(c2);
                        }
                    lp.run_mean(c2) = (1.0 - bn->momentum) * lp.run_mean(c2) + bn->momentum * m;
                    lp.run_var(c2) = (1.0 - bn->momentum) * lp.run_var(c2) + bn->momentum * v;
                }
                if (lc) {
                    lc->xhat = std::move(xhat);
                    lc->batch_mean = std::move(mean);
                    lc->batch_var = std::move(var);
                }
            } else {
                for (std::size_t c2 = 0; c2 < C; ++c2) {
                    double inv = 1.0 / std::sqrt(lp.run_var(c2) + bn->epsilon);
                    for (std::size_t r = 0; r < B; ++r)
                        for (std::size_t l = 0; l < L; ++l) {
                            std::size_t idx = (r * C + c2) * L + l;
                            y.data[idx] = lp.scale(c2) * (cur.data[idx] - lp.run_mean(c2)) * inv +
                                          lp.shift(c2);
                        }
                }
            }
            cur = std::move(y);
        } else if (std::holds_alternative<ReluSpec>(layer)) {
            if (lc) lc->input = cur;
            for (double& v : cur.data) v = v > 0.0 ? v : 0.0;
        } else if (const auto* m = std::get_if<MaxPoolSpec>(&layer)) {
            if (cur.ndim() != 3)
                throw std::invalid_argument("forward: maxpool expects a 3-D activation");
            const std::size_t B = cur.shape[0], C = cur.shape[1], L = cur.shape[2];
            const std::size_t w = m->window, Lo = L / w;
            if (Lo == 0) throw std::invalid_argument("forward: maxpool window exceeds length");
            Tensor y({B, C, Lo});
            std::vector<std::size_t> arg(B * C * Lo);
            for (std::size_t r = 0; r < B; ++r)
                for (std::size_t c2 = 0; c2 < C; ++c2) {
                    const double* xc = &cur.data[(r * C + c2) * L];
                    for (std::size_t t = 0; t < Lo; ++t) {
                        std::size_t base = t * w, best = base;
                        double bv = xc[base];
                        for (std::size_t u = 1; u < w; ++u)
                            if (xc[base + u] > bv) {  // first max wins ties
                                bv = xc[base + u];
                                best = base + u;
                            }
                        y.data[(r * C + c2) * Lo + t] = bv;
                        arg[(r * C + c2) * Lo + t] = (r * C + c2) * L + best;
                    }
                }
            if (lc) {
                lc->input = cur;  // only the shape is needed in backward
                lc->argmax = std::move(arg);
            }
            cur = std::move(y);
        } else if (const auto* dr = std::get_if<DropoutSpec>(&layer)) {
            if (mode == Mode::train) {
                double keep_scale = 1.0 / (1.0 - dr->rate);
                Tensor mask(cur.shape);
                for (std::size_t i = 0; i < cur.numel(); ++i) {
                    double u = rng->next_double();
                    mask.data[i] = u >= dr->rate ? keep_scale : 0.0;
                    cur.data[i] *= mask.data[i];
                }
                if (lc) lc->mask = std::move(mask);
            }
            // eval mode: identity (inverted dropout needs no rescale)
        } else if (std::holds_alternative<FlattenSpec>(layer)) {
            if (lc) lc->input = cur;
            if (cur.ndim() == 3) cur.shape = {cur.shape[0], cur.shape[1] * cur.shape[2]};
        }
    }

    if (cur.ndim() != 2 || cur.shape[1] != spec.output_dim)
        throw std::invalid_argument("forward: pipeline did not end at output_dim");
    return cur;
}

// ---- Backward ------------------------------------------------------------------

ParameterSet backward(const ModelSpec& spec, const ParameterSet& params,
                      ForwardCache& cache, const Tensor& upstream) {
    if (!cache.valid)
        throw std::invalid_argument("backward: stale or missing forward cache");
    if (cache.layers.size() != spec.layers.size())
        throw std::invalid_argument("backward: cache does not match the model");
    upstream.require_ndim(2);
    if (upstream.cols() != spec.output_dim)
        throw std::invalid_argument("backward: upstream width does not match output_dim");
    cache.valid = false;  // one backward per forward

    ParameterSet grads = zero_like(params);
    Tensor g = upstream;

    for (std::size_t li_plus = spec.layers.size(); li_plus > 0; --li_plus) {
        const std::size_t li = li_plus - 1;
        const LayerSpec& layer = spec.layers[li];
        const LayerParams& lp = params.layers[li];
        LayerCache& lc = cache.layers[li];
        LayerParams& lg = grads.layers[li];

        if (const auto* d = std::get_if<DenseSpec>(&layer)) {
            const Tensor& x = lc.input;
            const std::size_t b = x.shape[0], in = d->in_features, out = d->out_features;
            Tensor gin({b, in});
            for (std::size_t r = 0; r < b; ++r) {
                const double* gr = &g.data[r * out];
                const double* xr = &x.data[r * in];
                double* gir = &gin.data[r * in];
                for (std::size_t o = 0; o < out; ++o) {
                    double go = gr[o];
                    lg.bias(o) += go;
                    double* wgo = &lg.weight.data[o * in];
                    const double* wo = &lp.weight.data[o * in];
                    for (std::size_t i = 0; i < in; ++i) {
                        wgo[i] += go * xr[i];
                        gir[i] += go * wo[i];
                    }
                }
            }
            g = std::move(gin);
        } else if (const auto* c = std::get_if<Conv1dSpec>(&layer)) {
            const Tensor& x = lc.input;
            const std::size_t b = x.shape[0], ic = c->in_channels, L = x.shape[2];
            const std::size_t oc = c->out_channels, k = c->kernel_size, s = c->stride,
                              p = c->padding;
            const std::size_t Lo = (L + 2 * p - k) / s + 1;
            g.shape = {b, oc, Lo};
            Tensor gin({b, ic, L});
            for (std::size_t r = 0; r < b; ++r) {
                for (std::size_t o = 0; o < oc; ++o) {
                    const double* go = &g.data[(r * oc + o) * Lo];
                    for (std::size_t t = 0; t < Lo; ++t) lg.bias(o) += go[t];
                    for (std::size_t ci = 0; ci < ic; ++ci) {
                        const double* xc = &x.data[(r * ic + ci) * L];
                        double* gxc = &gin.data[(r * ic + ci) * L];
                        const double* wk = &lp.weight.data[(o * ic + ci) * k];
                        double* wgk = &lg.weight.data[(o * ic + ci) * k];
                        for (std::size_t kk = 0; kk < k; ++kk) {
                            if (s == 1) {
                                std::size_t t_lo = p > kk ? p - kk : 0;
                                if (kk >= L + p) continue;
                                std::size_t t_hi = std::min(Lo, L + p - kk);
                                if (t_hi <= t_lo) continue;
                                const double* xs = xc + (t_lo + kk) - p;
                                double* gxs = gxc + (t_lo + kk) - p;
                                double w = wk[kk], wg = 0.0;
                                for (std::size_t t = t_lo; t < t_hi; ++t) {
                                    wg += go[t] * xs[t - t_lo];
                                    gxs[t - t_lo] += go[t] * w;
                                }
                                wgk[kk] += wg;
                            } else {
                                for (std::size_t t = 0; t < Lo; ++t) {
                                    std::ptrdiff_t pos =
                                        std::ptrdiff_t(t * s + kk) - std::ptrdiff_t(p);
                                    if (pos >= 0 && pos < std::ptrdiff_t(L)) {
                                        wgk[kk] += go[t] * xc[pos];
                                        gxc[pos] += go[t] * wk[kk];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            g = std::move(gin);
        } else if (const auto* bn = std::get_if<BatchNormSpec>(&layer)) {
            const Tensor& xhat = lc.xhat;
            if (xhat.data.empty())
                throw std::invalid_argument("backward: batchnorm cache missing");
            BnDims dims = bn_dims(xhat);
            const std::size_t B = dims.B, C = dims.C, L = dims.L;
            const double N = double(B * L);
            g.shape = xhat.shape;
            Tensor gin(xhat.shape);
            for (std::size_t c2 = 0; c2 < C; ++c2) {
                double sum_g = 0.0, sum_gx = 0.0;
                for (std::size_t r = 0; r < B; ++r)
                    for (std::size_t l = 0; l < L; ++l) {
                        std::size_t idx = (r * C + c2) * L + l;
                        sum_g += g.data[idx];
                        sum_gx += g.data[idx] * xhat.data[idx];
                    }
                lg.shift(c2) += sum_g;
                lg.scale(c2) += sum_gx;
                double inv = 1.0 / std::sqrt(lc.batch_var(c2) + bn->epsilon);
                double sc = lp.scale(c2);
                // dx = scale * inv / N * (N * g - sum(g) - xhat * sum(g * xhat))
                for (std::size_t r = 0; r < B; ++r)
                    for (std::size_t l = 0; l < L; ++l) {
                        std::size_t idx = (r * C + c2) * L + l;
                        gin.data[idx] = sc * inv / N *
                                        (N * g.data[idx] - sum_g - xhat.data[idx] * sum_gx);
                    }
            }
            g = std::move(gin);
        } else if (std::holds_alternative<ReluSpec>(layer)) {
            const Tensor& x = lc.input;
            g.shape = x.shape;
            for (std::size_t i = 0; i < g.numel(); ++i)
                if (x.data[i] <= 0.0) g.data[i] = 0.0;
        } else if (std::holds_alternative<MaxPoolSpec>(layer)) {
            const Tensor& x = lc.input;
            Tensor gin(x.shape);
            for (std::size_t i = 0; i < lc.argmax.size(); ++i)
                gin.data[lc.argmax[i]] += g.data[i];
            g = std::move(gin);
        } else if (std::holds_alternative<DropoutSpec>(layer)) {
            if (!lc.mask.data.empty()) {
                g.shape = lc.mask.shape;
                for (std::size_t i = 0; i < g.numel(); ++i) g.data[i] *= lc.mask.data[i];
            }
        } else if (std::holds_alternative<FlattenSpec>(layer)) {
            g.shape = lc.input.shape;  // free reshape; data is row-major
        }
    }
    return grads;
}

// ---- Builders -------------------------------------------------------------------

ModelSpec build_paper_cnn(std::size_t d1, std::size_t d2) {
    if (d1 < 8)
        throw std::invalid_argument("build_paper_cnn: input length must be at least 8");
    if (d2 == 0) throw std::invalid_argument("build_paper_cnn: output dim must be positive");
    const std::size_t channels[3] = {32, 16, 8};
    ModelSpec spec;
    spec.input_dim = d1;
    spec.output_dim = d2;
    std::size_t in_ch = 1, length = d1;
    for (std::size_t blk = 0; blk < 3; ++blk) {
        std::size_t out_ch = channels[blk];
        spec.layers.push_back(Conv1dSpec{in_ch, out_ch, 5, 1, 2});
        spec.layers.push_back(BatchNormSpec{out_ch});
        spec.layers.push_back(ReluSpec{});
        spec.layers.push_back(MaxPoolSpec{2});
        in_ch = out_ch;
        length /= 2;
    }
    spec.layers.push_back(FlattenSpec{});
    spec.layers.push_back(DenseSpec{8 * length, d2});
    infer_shapes(spec);
    return spec;
}

ModelSpec build_mlp(const std::vector<std::size_t>& widths) {
    if (widths.size() < 2)
        throw std::invalid_argument("build_mlp: need at least two widths");
    ModelSpec spec;
    spec.input_dim = widths.front();
    spec.output_dim = widths.back();
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        spec.layers.push_back(DenseSpec{widths[i], widths[i + 1]});
        if (i + 2 < widths.size()) spec.layers.push_back(ReluSpec{});
    }
    infer_shapes(spec);
    return spec;
}

// ---- Penalties ------------------------------------------------------------------

double param_penalty(const ModelSpec& spec, ParameterSet& params, PenaltyKind kind,
                     double strength, ParameterSet* grad_accum) {
    if (strength < 0.0)
        throw std::invalid_argument("param_penalty: strength must be nonnegative");
    auto weights = weight_tensors(spec, params);
    std::vector<NamedTensorRef> grads;
    if (grad_accum) grads = weight_tensors(spec, *grad_accum);

    double value = 0.0;
    for (std::size_t wi = 0; wi < weights.size(); ++wi) {
        Tensor& w = *weights[wi].tensor;
        Tensor* gw = grad_accum ? grads[wi].tensor : nullptr;
        for (std::size_t i = 0; i < w.numel(); ++i) {
            double v = w.data[i];
            if (kind == PenaltyKind::L1) {
                value += strength * std::abs(v);
                if (gw) gw->data[i] += v > 0.0 ? strength : v < 0.0 ? -strength : 0.0;
            } else {
                value += strength * v * v;
                if (gw) gw->data[i] += 2.0 * strength * v;
            }
        }
    }
    return value;
}

}  // namespace fdreg
