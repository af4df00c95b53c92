#include "afs/data.hpp"

#include "afs/bytes.hpp"
#include "afs/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace afs {

void Dataset::validate() const {
    if (features.rows() == 0) throw DataError("dataset " + name + " has no samples");
    if (labels.size() != features.rows())
        throw DataError("dataset " + name + ": " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(features.rows()) + " samples");
    if (class_count == 0) throw DataError("dataset " + name + " has no classes");
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count)
            throw DataError("dataset " + name + ": label " + std::to_string(labels[i]) +
                            " at sample " + std::to_string(i) + " outside [0, " +
                            std::to_string(class_count) + ")");
    const double* p = features.data();
    for (std::size_t i = 0; i < features.size(); ++i)
        if (!std::isfinite(p[i]))
            throw DataError("dataset " + name + ": non-finite feature value at sample " +
                            std::to_string(i / features.cols()) + ", feature " +
                            std::to_string(i % features.cols()));
    if (image_rows * image_cols != 0 && image_rows * image_cols != features.cols())
        throw DataError("dataset " + name + ": image shape " + std::to_string(image_rows) +
                        "x" + std::to_string(image_cols) + " does not match " +
                        std::to_string(features.cols()) + " features");
}

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::uint32_t be_u32(const std::vector<unsigned char>& b, std::size_t off,
                     const std::string& path) {
    if (off + 4 > b.size()) throw DataError(path + ": truncated IDX header");
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
}

void push_be_u32(std::vector<unsigned char>& b, std::uint32_t v) {
    b.push_back(static_cast<unsigned char>(v >> 24));
    b.push_back(static_cast<unsigned char>(v >> 16));
    b.push_back(static_cast<unsigned char>(v >> 8));
    b.push_back(static_cast<unsigned char>(v));
}

std::string path_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    const std::size_t dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

std::string hex_magic(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "0x%08x", v);
    return buf;
}

} // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const std::vector<unsigned char> img = read_binary_file(images_path);
    const std::uint32_t img_magic = be_u32(img, 0, images_path);
    if (img_magic != kIdxImagesMagic)
        throw DataError(images_path + ": magic " + hex_magic(img_magic) +
                        " is not an IDX u8 image file (expected " + hex_magic(kIdxImagesMagic) +
                        ")");
    const std::size_t count = be_u32(img, 4, images_path);
    const std::size_t rows = be_u32(img, 8, images_path);
    const std::size_t cols = be_u32(img, 12, images_path);
    if (count == 0 || rows == 0 || cols == 0)
        throw DataError(images_path + ": empty IDX dimensions");
    if (img.size() != 16 + count * rows * cols)
        throw DataError(images_path + ": expected " + std::to_string(16 + count * rows * cols) +
                        " bytes for " + std::to_string(count) + " images, found " +
                        std::to_string(img.size()));

    const std::vector<unsigned char> lab = read_binary_file(labels_path);
    const std::uint32_t lab_magic = be_u32(lab, 0, labels_path);
    if (lab_magic != kIdxLabelsMagic)
        throw DataError(labels_path + ": magic " + hex_magic(lab_magic) +
                        " is not an IDX u8 label file (expected " + hex_magic(kIdxLabelsMagic) +
                        ")");
    const std::size_t lab_count = be_u32(lab, 4, labels_path);
    if (lab.size() != 8 + lab_count)
        throw DataError(labels_path + ": expected " + std::to_string(8 + lab_count) +
                        " bytes for " + std::to_string(lab_count) + " labels, found " +
                        std::to_string(lab.size()));
    if (lab_count != count)
        throw DataError(labels_path + ": " + std::to_string(lab_count) + " labels for " +
                        std::to_string(count) + " images in " + images_path);

    Dataset ds;
    ds.name = path_stem(images_path);
    ds.image_rows = rows;
    ds.image_cols = cols;
    ds.features = Matrix(count, rows * cols);
    double* f = ds.features.data();
    const unsigned char* px = img.data() + 16;
    for (std::size_t i = 0; i < count * rows * cols; ++i)
        f[i] = static_cast<double>(px[i]) / 255.0;
    ds.labels.resize(count);
    int max_label = 0;
    for (std::size_t i = 0; i < count; ++i) {
        ds.labels[i] = static_cast<int>(lab[8 + i]);
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.class_count = static_cast<std::size_t>(max_label) + 1;
    ds.validate();
    return ds;
}

void save_idx(const Dataset& dataset, const std::string& images_path,
              const std::string& labels_path) {
    dataset.validate();
    const std::size_t rows = dataset.image_rows ? dataset.image_rows : 1;
    const std::size_t cols = dataset.image_rows ? dataset.image_cols : dataset.feature_count();
    if (rows * cols != dataset.feature_count())
        throw DataError("save_idx: image shape " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " does not match " +
                        std::to_string(dataset.feature_count()) + " features");

    std::vector<unsigned char> img;
    img.reserve(16 + dataset.sample_count() * rows * cols);
    push_be_u32(img, kIdxImagesMagic);
    push_be_u32(img, static_cast<std::uint32_t>(dataset.sample_count()));
    push_be_u32(img, static_cast<std::uint32_t>(rows));
    push_be_u32(img, static_cast<std::uint32_t>(cols));
    const double* f = dataset.features.data();
    for (std::size_t i = 0; i < dataset.features.size(); ++i) {
        const double clamped = std::clamp(f[i], 0.0, 1.0);
        img.push_back(static_cast<unsigned char>(std::lround(clamped * 255.0)));
    }
    write_binary_file_atomic(images_path, img);

    std::vector<unsigned char> lab;
    lab.reserve(8 + dataset.sample_count());
    push_be_u32(lab, kIdxLabelsMagic);
    push_be_u32(lab, static_cast<std::uint32_t>(dataset.sample_count()));
    for (int label : dataset.labels) lab.push_back(static_cast<unsigned char>(label));
    write_binary_file_atomic(labels_path, lab);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t begin = 0;
    while (true) {
        const std::size_t comma = line.find(',', begin);
        if (comma == std::string::npos) {
            cells.push_back(trim(line.substr(begin)));
            return cells;
        }
        cells.push_back(trim(line.substr(begin, comma - begin)));
        begin = comma + 1;
    }
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t line_no,
                  const std::string& column) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw DataError(path + ":" + std::to_string(line_no) + ": column '" + column + "': '" +
                        cell + "' is not numeric");
    return value;
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
    const std::vector<unsigned char> raw = read_binary_file(path);
    std::vector<std::string> lines;
    {
        std::string cur;
        for (unsigned char c : raw) {
            if (c == '\n') {
                lines.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(static_cast<char>(c));
            }
        }
        if (!cur.empty()) lines.push_back(cur);
    }
    if (lines.empty()) throw DataError(path + ": empty file");

    const std::vector<std::string> header = split_csv_line(lines[0]);
    std::size_t label_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == label_column) label_idx = j;
    if (label_idx == header.size())
        throw DataError(path + ": no column named '" + label_column + "' in header");
    const std::size_t d = header.size() - 1;
    if (d == 0) throw DataError(path + ": no feature columns besides the label");

    std::vector<std::vector<double>> rows;
    std::vector<double> raw_labels;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        const std::size_t line_no = li + 1;
        const std::vector<std::string> cells = split_csv_line(lines[li]);
        if (cells.size() != header.size())
            throw DataError(path + ":" + std::to_string(line_no) + ": row has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(d);
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const double v = parse_cell(cells[j], path, line_no, header[j]);
            if (j == label_idx)
                raw_labels.push_back(v);
            else
                row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": no data rows");

    Dataset ds;
    ds.name = path_stem(path);
    ds.features = Matrix(rows.size(), d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = rows[i][j];

    // Re-index labels to 0..c-1 by order of first appearance.
    std::vector<double> seen;
    ds.labels.reserve(raw_labels.size());
    for (double v : raw_labels) {
        std::size_t idx = seen.size();
        for (std::size_t k = 0; k < seen.size(); ++k)
            if (seen[k] == v) idx = k;
        if (idx == seen.size()) seen.push_back(v);
        ds.labels.push_back(static_cast<int>(idx));
    }
    ds.class_count = seen.size();
    ds.validate();
    return ds;
}

Dataset synthesize_awgn(const Dataset& dataset, double snr_db, std::uint64_t seed,
                        NoiseInfo* info) {
    dataset.validate();
    Dataset out = dataset;
    out.name = dataset.name + "-awgn";

    const double* x = dataset.features.data();
    const std::size_t n = dataset.features.size();
    double signal_power = 0.0;
    for (std::size_t i = 0; i < n; ++i) signal_power += x[i] * x[i];
    signal_power /= static_cast<double>(n);

    const double variance =
        std::isinf(snr_db) ? 0.0 : signal_power / std::pow(10.0, snr_db / 10.0);
    if (info) {
        info->target_snr_db = snr_db;
        info->seed = seed;
        info->achieved_snr_db = std::numeric_limits<double>::infinity();
    }
    if (variance == 0.0) return out;

    const double stddev = std::sqrt(variance);
    Rng rng(seed);
    double* o = out.features.data();
    double noise_power = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double noise = rng.normal() * stddev;
        noise_power += noise * noise;
        o[i] = std::clamp(x[i] + noise, 0.0, 1.0);
    }
    noise_power /= static_cast<double>(n);
    if (info) info->achieved_snr_db = 10.0 * std::log10(signal_power / noise_power);
    return out;
}

Dataset synthesize_motion_blur(const Dataset& dataset, std::size_t kernel_length,
                               double angle_deg) {
    dataset.validate();
    if (kernel_length == 0) throw ConfigError("motion blur: kernel length must be positive");
    if (dataset.image_rows == 0 || dataset.image_rows * dataset.image_cols != dataset.feature_count())
        throw DataError("motion blur: dataset " + dataset.name + " is not image-shaped");

    // Taps along the motion line, centered; duplicates from rounding merge
    // their weight so the kernel always sums to 1.
    struct Tap { long dr, dc; double w; };
    std::vector<Tap> taps;
    const double theta = angle_deg * std::numbers::pi / 180.0;
    const double w = 1.0 / static_cast<double>(kernel_length);
    for (std::size_t i = 0; i < kernel_length; ++i) {
        const double t = static_cast<double>(i) - (static_cast<double>(kernel_length) - 1.0) / 2.0;
        const long dc = std::lround(t * std::cos(theta));
        const long dr = std::lround(-t * std::sin(theta));
        bool merged = false;
        for (Tap& tap : taps)
            if (tap.dr == dr && tap.dc == dc) {
                tap.w += w;
                merged = true;
            }
        if (!merged) taps.push_back({dr, dc, w});
    }

    Dataset out = dataset;
    out.name = dataset.name + "-mb";
    const long rows = static_cast<long>(dataset.image_rows);
    const long cols = static_cast<long>(dataset.image_cols);
    const std::int64_t m = static_cast<std::int64_t>(dataset.sample_count());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < m; ++i) {
        const double* src = dataset.features.row(static_cast<std::size_t>(i));
        double* dst = out.features.row(static_cast<std::size_t>(i));
        for (long r = 0; r < rows; ++r) {
            for (long c = 0; c < cols; ++c) {
                double acc = 0.0;
                for (const Tap& tap : taps) {
                    const long rr = r + tap.dr;
                    const long cc = c + tap.dc;
                    if (rr >= 0 && rr < rows && cc >= 0 && cc < cols)
                        acc += tap.w * src[rr * cols + cc];
                }
                dst[r * cols + c] = acc;
            }
        }
    }
    return out;
}

Dataset synthesize_rc_awgn(const Dataset& dataset, double contrast_factor, double snr_db,
                           std::uint64_t seed, NoiseInfo* info) {
    dataset.validate();
    if (!(contrast_factor > 0.0 && contrast_factor <= 1.0))
        throw ConfigError("reduced contrast: factor must be in (0, 1]");
    Dataset reduced = dataset;
    double* p = reduced.features.data();
    for (std::size_t i = 0; i < reduced.features.size(); ++i)
        p[i] = 0.5 + contrast_factor * (p[i] - 0.5);
    Dataset out = synthesize_awgn(reduced, snr_db, seed, info);
    out.name = dataset.name + "-rcawgn";
    return out;
}

std::vector<std::size_t> SplitPlan::train_indices(std::size_t repeat, std::size_t fold) const {
    const std::vector<std::size_t>& test = test_indices.at(repeat).at(fold);
    std::vector<bool> is_test(sample_count, false);
    for (std::size_t i : test) is_test[i] = true;
    std::vector<std::size_t> train;
    train.reserve(sample_count - test.size());
    for (std::size_t i = 0; i < is_test.size(); ++i)
        if (!is_test[i]) train.push_back(i);
    return train;
}

SplitPlan kfold_splits(std::size_t m, std::size_t folds, std::size_t repeats,
                       std::uint64_t seed, const std::vector<int>* labels) {
    if (folds < 2) throw ConfigError("kfold: need at least 2 folds");
    if (m < folds) throw ConfigError("kfold: " + std::to_string(m) + " samples for " +
                                     std::to_string(folds) + " folds");
    if (repeats == 0) throw ConfigError("kfold: need at least 1 repeat");
    if (labels && labels->size() != m)
        throw std::invalid_argument("kfold: label count does not match m");

    SplitPlan plan;
    plan.sample_count = m;
    plan.repeats = repeats;
    plan.folds = folds;
    plan.seed = seed;

    bool stratify = labels != nullptr;
    if (stratify) {
        std::vector<std::size_t> class_sizes;
        for (int label : *labels) {
            if (label < 0) throw std::invalid_argument("kfold: negative label");
            if (static_cast<std::size_t>(label) >= class_sizes.size())
                class_sizes.resize(static_cast<std::size_t>(label) + 1, 0);
            ++class_sizes[static_cast<std::size_t>(label)];
        }
        for (std::size_t n : class_sizes)
            if (n > 0 && n < folds) {
                stratify = false;
                plan.fallback_warning = true;
            }
    }
    plan.stratified = stratify;

    plan.test_indices.resize(repeats);
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        Rng rng(derive_seed(seed, rep));
        std::vector<std::vector<std::size_t>> fold_sets(folds);
        if (!stratify) {
            std::vector<std::size_t> perm(m);
            for (std::size_t i = 0; i < m; ++i) perm[i] = i;
            rng.shuffle(perm);
            const std::size_t base = m / folds;
            const std::size_t rem = m % folds;
            std::size_t pos = 0;
            for (std::size_t f = 0; f < folds; ++f) {
                const std::size_t take = base + (f < rem ? 1 : 0);
                fold_sets[f].assign(perm.begin() + pos, perm.begin() + pos + take);
                pos += take;
            }
        } else {
            // Per class, spread a shuffled copy across folds; each class's
            // remainder goes to the currently least-loaded folds, keeping
            // overall fold sizes within one of each other.
            std::size_t class_count = 0;
            for (int label : *labels)
                class_count = std::max(class_count, static_cast<std::size_t>(label) + 1);
            std::vector<std::size_t> fold_loads(folds, 0);
            for (std::size_t c = 0; c < class_count; ++c) {
                std::vector<std::size_t> members;
                for (std::size_t i = 0; i < m; ++i)
                    if (static_cast<std::size_t>((*labels)[i]) == c) members.push_back(i);
                if (members.empty()) continue;
                rng.shuffle(members);
                const std::size_t base = members.size() / folds;
                const std::size_t rem = members.size() % folds;
                std::vector<std::size_t> by_load(folds);
                for (std::size_t f = 0; f < folds; ++f) by_load[f] = f;
                std::stable_sort(by_load.begin(), by_load.end(),
                                 [&](std::size_t a, std::size_t b) {
                                     return fold_loads[a] < fold_loads[b];
                                 });
                std::vector<std::size_t> extra(folds, 0);
                for (std::size_t r = 0; r < rem; ++r) extra[by_load[r]] = 1;
                std::size_t pos = 0;
                for (std::size_t f = 0; f < folds; ++f) {
                    const std::size_t take = base + extra[f];
                    for (std::size_t t = 0; t < take; ++t) fold_sets[f].push_back(members[pos++]);
                    fold_loads[f] += take;
                }
            }
        }
        for (std::vector<std::size_t>& fs : fold_sets) std::sort(fs.begin(), fs.end());
        plan.test_indices[rep] = std::move(fold_sets);
    }
    return plan;
}

BatchIterator::BatchIterator(std::size_t m, std::size_t batch_size, std::uint64_t seed)
    : batch_size_(batch_size), pos_(m), rng_(seed) {
    if (m == 0) throw std::invalid_argument("batch iterator: empty index set");
    if (batch_size == 0) throw std::invalid_argument("batch iterator: batch size must be positive");
    order_.resize(m);
    for (std::size_t i = 0; i < m; ++i) order_[i] = i;
}

const std::vector<std::size_t>& BatchIterator::next() {
    if (pos_ >= order_.size()) {
        rng_.shuffle(order_);
        pos_ = 0;
    }
    const std::size_t take = std::min(batch_size_, order_.size() - pos_);
    batch_.assign(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  order_.begin() + static_cast<std::ptrdiff_t>(pos_ + take));
    pos_ += take;
    return batch_;
}

Matrix gather_rows(const Matrix& x, const std::vector<std::size_t>& indices) {
    Matrix out(indices.size(), x.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= x.rows())
            throw std::invalid_argument("gather_rows: index " + std::to_string(indices[i]) +
                                        " outside " + std::to_string(x.rows()) + " rows");
        const double* src = x.row(indices[i]);
        double* dst = out.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) dst[j] = src[j];
    }
    return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels,
                               const std::vector<std::size_t>& indices) {
    std::vector<int> out(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= labels.size())
            throw std::invalid_argument("gather_labels: index " + std::to_string(indices[i]) +
                                        " outside " + std::to_string(labels.size()) + " labels");
        out[i] = labels[indices[i]];
    }
    return out;
}

Dataset gather_samples(const Dataset& dataset, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.name = dataset.name;
    out.features = gather_rows(dataset.features, indices);
    out.labels = gather_labels(dataset.labels, indices);
    out.class_count = dataset.class_count;
    out.image_rows = dataset.image_rows;
    out.image_cols = dataset.image_cols;
    return out;
}

} // namespace afs
