#include "fdreg/data.hpp"

#include "fdreg/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fdreg {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    const char* b = cell.data();
    const char* e = b + cell.size();
    // Tolerate surrounding spaces, nothing else.
    while (b < e && *b == ' ') ++b;
    while (e > b && e[-1] == ' ') --e;
    double value = 0.0;
    auto res = std::from_chars(b, e, value);
    if (res.ec != std::errc{} || res.ptr != e || b == e || !std::isfinite(value))
        throw LoadError("load_csv: non-numeric cell at row " + std::to_string(row) +
                        ", column " + std::to_string(col));
    return value;
}

}  // namespace

TabularDataset load_csv(const std::string& path, std::size_t n_targets) {
    std::ifstream in(path);
    if (!in) throw LoadError("load_csv: cannot open '" + path + "'");

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    while (!lines.empty() && lines.back().find_first_not_of(" \r") == std::string::npos)
        lines.pop_back();
    if (lines.size() < 2) throw LoadError("load_csv: '" + path + "' has no data rows");

    std::vector<std::string> header = split_line(lines[0]);
    const std::size_t n_cols = header.size();
    if (n_cols <= n_targets)
        throw LoadError("load_csv: file has " + std::to_string(n_cols) +
                        " columns but " + std::to_string(n_targets) + " targets were requested");

    const std::size_t n_rows = lines.size() - 1;
    const std::size_t d1 = n_cols - n_targets;
    TabularDataset ds;
    ds.X = Tensor({n_rows, d1});
    if (n_targets > 0) ds.Y = Tensor({n_rows, n_targets});
    ds.feature_names.assign(header.begin(), header.begin() + std::ptrdiff_t(d1));
    ds.target_names.assign(header.begin() + std::ptrdiff_t(d1), header.end());

    for (std::size_t r = 0; r < n_rows; ++r) {
        // Rows are reported 1-based counting the header as row 1.
        const std::size_t file_row = r + 2;
        std::vector<std::string> cells = split_line(lines[r + 1]);
        if (cells.size() != n_cols)
            throw LoadError("load_csv: row " + std::to_string(file_row) + " has " +
                            std::to_string(cells.size()) + " columns, expected " +
                            std::to_string(n_cols));
        for (std::size_t c = 0; c < n_cols; ++c) {
            double v = parse_cell(cells[c], file_row, c + 1);
            if (c < d1)
                ds.X(r, c) = v;
            else
                ds.Y(r, c - d1) = v;
        }
    }
    return ds;
}

void write_csv(const std::string& path, const TabularDataset& ds) {
    std::ofstream out(path);
    if (!out) throw LoadError("write_csv: cannot open '" + path + "' for writing");
    const std::size_t d1 = ds.n_features(), d2 = ds.n_targets();

    for (std::size_t c = 0; c < d1; ++c) {
        if (c) out << ',';
        out << (c < ds.feature_names.size() ? ds.feature_names[c] : "x" + std::to_string(c));
    }
    for (std::size_t c = 0; c < d2; ++c) {
        if (d1 + c) out << ',';
        out << (c < ds.target_names.size() ? ds.target_names[c] : "y" + std::to_string(c));
    }
    out << '\n';

    char buf[40];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
        for (std::size_t c = 0; c < d1; ++c) {
            if (c) out << ',';
            emit(ds.X(r, c));
        }
        for (std::size_t c = 0; c < d2; ++c) {
            if (d1 + c) out << ',';
            emit(ds.Y(r, c));
        }
        out << '\n';
    }
    if (!out) throw LoadError("write_csv: write to '" + path + "' failed");
}

SplitIndices split(std::size_t N, Rng& rng) {
    if (N < 3) throw std::invalid_argument("split: need at least 3 rows");
    std::vector<std::size_t> idx(N);
    for (std::size_t i = 0; i < N; ++i) idx[i] = i;
    for (std::size_t i = N - 1; i > 0; --i) {
        std::size_t j = std::size_t(rng.next_below(i + 1));
        std::swap(idx[i], idx[j]);
    }
    const std::size_t n_val = std::max<std::size_t>(1, N / 10);
    const std::size_t n_test = std::max<std::size_t>(1, N / 10);
    const std::size_t n_train = N - n_val - n_test;
    SplitIndices s;
    s.train.assign(idx.begin(), idx.begin() + std::ptrdiff_t(n_train));
    s.val.assign(idx.begin() + std::ptrdiff_t(n_train),
                 idx.begin() + std::ptrdiff_t(n_train + n_val));
    s.test.assign(idx.begin() + std::ptrdiff_t(n_train + n_val), idx.end());
    return s;
}

Scaler standardize_fit(const Tensor& train_X) {
    train_X.require_ndim(2);
    const std::size_t n = train_X.rows(), d = train_X.cols();
    Scaler sc;
    sc.mean.resize(d);
    sc.std_dev.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
        double m = 0.0;
        for (std::size_t r = 0; r < n; ++r) m += train_X(r, c);
        m /= double(n);
        double v = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            double diff = train_X(r, c) - m;
            v += diff * diff;
        }
        v /= double(n);  // population convention
        sc.mean[c] = m;
        sc.std_dev[c] = v > 0.0 ? std::sqrt(v) : 1.0;
    }
    return sc;
}

Tensor standardize_apply(const Scaler& scaler, const Tensor& X) {
    X.require_ndim(2);
    if (X.cols() != scaler.mean.size())
        throw std::invalid_argument("standardize_apply: column count does not match the scaler");
    Tensor out(X.shape);
    for (std::size_t r = 0; r < X.rows(); ++r)
        for (std::size_t c = 0; c < X.cols(); ++c)
            out(r, c) = (X(r, c) - scaler.mean[c]) / scaler.std_dev[c];
    return out;
}

TabularDataset gen_quadratic(Rng& rng, std::size_t n, double a, double b, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gen_quadratic: negative sigma");
    if (n == 0) throw std::invalid_argument("gen_quadratic: n must be positive");
    TabularDataset ds;
    ds.X = Tensor({n, 1});
    ds.Y = Tensor({n, 1});
    ds.feature_names = {"x"};
    ds.target_names = {"y"};
    for (std::size_t i = 0; i < n; ++i) {
        double x = rng.uniform(-2.0, 2.0);
        ds.X(i, 0) = x;
        ds.Y(i, 0) = a * x * x + b * x + rng.gaussian(0.0, sigma);
    }
    return ds;
}

TabularDataset gen_synthetic_spectra(Rng& rng, std::size_t N, std::size_t d1, std::size_t d2,
                                     double noise_sigma) {
    if (d1 < 8) throw std::invalid_argument("gen_synthetic_spectra: d1 must be at least 8");
    if (d2 < 1) throw std::invalid_argument("gen_synthetic_spectra: d2 must be at least 1");
    if (N == 0) throw std::invalid_argument("gen_synthetic_spectra: N must be positive");
    if (noise_sigma < 0.0)
        throw std::invalid_argument("gen_synthetic_spectra: negative noise_sigma");

    constexpr std::size_t K = 8;  // bumps per spectrum

    // Dataset-level structure: bump dictionary and target functionals.
    double centers[K], widths[K];
    for (std::size_t k = 0; k < K; ++k) centers[k] = rng.uniform(0.0, double(d1 - 1));
    for (std::size_t k = 0; k < K; ++k)
        widths[k] = rng.uniform(double(d1) / 16.0, double(d1) / 8.0);
    std::vector<double> lin(d2 * K), quad(d2 * K);
    for (double& v : lin) v = rng.uniform(-1.0, 1.0);
    for (double& v : quad) v = rng.uniform(-0.5, 0.5);

    TabularDataset ds;
    ds.X = Tensor({N, d1});
    ds.Y = Tensor({N, d2});
    ds.feature_names.resize(d1);
    for (std::size_t c = 0; c < d1; ++c) ds.feature_names[c] = "f" + std::to_string(c);
    ds.target_names.resize(d2);
    for (std::size_t c = 0; c < d2; ++c) ds.target_names[c] = "t" + std::to_string(c);

    for (std::size_t i = 0; i < N; ++i) {
        double amps[K];
        for (std::size_t k = 0; k < K; ++k) amps[k] = rng.uniform(0.2, 1.0);
        for (std::size_t p = 0; p < d1; ++p) {
            double v = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                double z = (double(p) - centers[k]) / widths[k];
                v += amps[k] * std::exp(-0.5 * z * z);
            }
            ds.X(i, p) = v;
        }
        for (std::size_t j = 0; j < d2; ++j) {
            double y = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                y += lin[j * K + k] * amps[k] + quad[j * K + k] * amps[k] * amps[k];
            // The noise draw is consumed even at sigma = 0 so the same seed
            // yields the same spectra with clean targets.
            ds.Y(i, j) = y + rng.gaussian(0.0, noise_sigma);
        }
    }
    return ds;
}

Tensor take_rows(const Tensor& m, const std::vector<std::size_t>& idx) {
    m.require_ndim(2);
    if (idx.empty()) throw std::invalid_argument("take_rows: empty index list");
    Tensor out({idx.size(), m.cols()});
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] >= m.rows()) throw std::invalid_argument("take_rows: index out of range");
        std::copy(&m.data[idx[r] * m.cols()], &m.data[idx[r] * m.cols() + m.cols()],
                  &out.data[r * m.cols()]);
    }
    return out;
}

}  // namespace fdreg
