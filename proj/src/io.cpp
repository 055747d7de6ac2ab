#include "mvml/io.hpp"

#include "mvml/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

namespace fs = std::filesystem;
using nlohmann::json;

namespace mvml {

namespace {

std::string read_file(const fs::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::MissingFile, "cannot open " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        start = end + 1;
    }
    // Trailing blank lines are tolerated.
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    return lines;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::string where(const std::string& file, std::size_t row, std::size_t col)
{
    return file + " row " + std::to_string(row) + " column " + std::to_string(col);
}

// Parses a headerless numeric CSV with exactly `rows` x `cols` cells.
Matrix read_csv(const fs::path& file, const std::string& view_name, Eigen::Index rows, Eigen::Index cols)
{
    const std::string text = read_file(file);
    const auto lines = split_lines(text);
    const std::string label = file.filename().string();
    if (static_cast<Eigen::Index>(lines.size()) != rows) {
        throw Error(ErrorKind::SchemaViolation, "view '" + view_name + "': " + label + " has " +
                                                    std::to_string(lines.size()) + " rows, manifest says " +
                                                    std::to_string(rows));
    }
    Matrix out(rows, cols);
    for (std::size_t r = 0; r < lines.size(); ++r) {
        std::string_view line = lines[r];
        Eigen::Index col = 0;
        std::size_t start = 0;
        for (;;) {
            std::size_t end = line.find(',', start);
            const bool last = end == std::string_view::npos;
            if (last) end = line.size();
            if (col >= cols) {
                throw Error(ErrorKind::SchemaViolation, "view '" + view_name + "': " + label + " row " +
                                                            std::to_string(r) + " has more than " +
                                                            std::to_string(cols) + " columns");
            }
            const std::string_view cell = trim(line.substr(start, end - start));
            double value = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
                const bool non_finite = cell == "nan" || cell == "NaN" || cell == "inf" || cell == "-inf" ||
                                        cell == "Inf" || cell == "-Inf";
                throw Error(non_finite ? ErrorKind::NonFiniteEntry : ErrorKind::SchemaViolation,
                            "view '" + view_name + "': cannot parse '" + std::string(cell) + "' at " +
                                where(label, r, static_cast<std::size_t>(col)));
            }
            if (!std::isfinite(value)) {
                throw Error(ErrorKind::NonFiniteEntry,
                            "view '" + view_name + "': non-finite value at " + where(label, r, static_cast<std::size_t>(col)));
            }
            out(static_cast<Eigen::Index>(r), col) = value;
            ++col;
            if (last) break;
            start = end + 1;
        }
        if (col != cols) {
            throw Error(ErrorKind::SchemaViolation, "view '" + view_name + "': " + label + " row " +
                                                        std::to_string(r) + " has " + std::to_string(col) +
                                                        " columns, manifest says " + std::to_string(cols));
        }
    }
    return out;
}

template <class T>
T require_field(const json& obj, const char* key, const std::string& context)
{
    if (!obj.is_object() || !obj.contains(key)) {
        throw Error(ErrorKind::SchemaViolation, context + ": missing field '" + key + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::SchemaViolation, context + ": field '" + key + "' has the wrong type");
    }
}

} // namespace

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string matrix_to_csv(const Matrix& m)
{
    std::string out;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index q = 0; q < m.cols(); ++q) {
            if (q > 0) out += ',';
            out += format_double(m(r, q));
        }
        out += '\n';
    }
    return out;
}

void write_file_atomic(const fs::path& file, const std::string& contents)
{
    fs::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
        }
        out << contents;
        out.flush();
        if (!out) {
            throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, file, ec);
    if (ec) {
        throw Error(ErrorKind::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
    }
}

void save_matrix_csv(const Matrix& m, const fs::path& file)
{
    write_file_atomic(file, matrix_to_csv(m));
}

MultiViewDataset load_dataset(const fs::path& dir)
{
    const fs::path manifest_path = dir / "manifest.json";
    json manifest;
    try {
        manifest = json::parse(read_file(manifest_path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::SchemaViolation, "manifest.json is not valid JSON: " + std::string(e.what()));
    }
    const std::string ctx = "manifest.json";
    const auto n = require_field<Eigen::Index>(manifest, "n", ctx);
    const auto c = require_field<Eigen::Index>(manifest, "c", ctx);
    const auto v_count = require_field<Eigen::Index>(manifest, "V", ctx);
    const bool aligned = manifest.value("aligned", true);
    if (n < 0 || c < 1 || v_count < 1) {
        throw Error(ErrorKind::SchemaViolation, "manifest.json: need n >= 0, c >= 1, V >= 1");
    }
    if (!manifest.contains("views") || !manifest["views"].is_array() ||
        static_cast<Eigen::Index>(manifest["views"].size()) != v_count) {
        throw Error(ErrorKind::SchemaViolation, "manifest.json: 'views' must list V entries");
    }

    std::vector<ViewData> views;
    for (std::size_t i = 0; i < manifest["views"].size(); ++i) {
        const json& entry = manifest["views"][i];
        const std::string vctx = "manifest.json view " + std::to_string(i);
        const auto name = require_field<std::string>(entry, "name", vctx);
        const auto dim = require_field<Eigen::Index>(entry, "dim", vctx);
        const auto features_file = require_field<std::string>(entry, "features_file", vctx);
        const auto labels_file = require_field<std::string>(entry, "labels_file", vctx);
        if (dim < 1) {
            throw Error(ErrorKind::SchemaViolation, "view '" + name + "': dim must be >= 1");
        }

        ViewData view;
        view.features = read_csv(dir / features_file, name, n, dim);
        view.labels = read_csv(dir / labels_file, name, n, c);
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index k = 0; k < c; ++k) {
                const double y = view.labels(r, k);
                if (y != -1.0 && y != 0.0 && y != 1.0) {
                    throw Error(ErrorKind::LabelDomainViolation,
                                "view '" + name + "': label " + format_double(y) + " at " +
                                    where(labels_file, static_cast<std::size_t>(r), static_cast<std::size_t>(k)) +
                                    " is not in {-1, 0, 1}");
                }
            }
        }
        view.missing.assign(static_cast<std::size_t>(n), 0);
        if (entry.contains("missing_file") && !entry["missing_file"].is_null()) {
            const auto missing_file = require_field<std::string>(entry, "missing_file", vctx);
            const Matrix flags = read_csv(dir / missing_file, name, n, 1);
            for (Eigen::Index r = 0; r < n; ++r) {
                const double f = flags(r, 0);
                if (f != 0.0 && f != 1.0) {
                    throw Error(ErrorKind::SchemaViolation, "view '" + name + "': missing flag at " +
                                                                where(missing_file, static_cast<std::size_t>(r), 0) +
                                                                " is not 0 or 1");
                }
                view.missing[static_cast<std::size_t>(r)] = f == 1.0 ? 1 : 0;
                if (f == 1.0 && (!view.features.row(r).isZero(0.0) || !view.labels.row(r).isZero(0.0))) {
                    throw Error(ErrorKind::SchemaViolation, "view '" + name + "': row " + std::to_string(r) +
                                                                " is flagged missing but is not all-zero");
                }
            }
        }
        views.push_back(std::move(view));
    }
    try {
        return MultiViewDataset(std::move(views), aligned);
    } catch (const Error& e) {
        throw Error(ErrorKind::SchemaViolation, e.what());
    }
}

void save_dataset(const MultiViewDataset& ds, const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
    }
    json manifest;
    manifest["n"] = ds.n();
    manifest["c"] = ds.c();
    manifest["V"] = ds.num_views();
    manifest["aligned"] = ds.aligned();
    manifest["views"] = json::array();
    for (std::size_t i = 0; i < ds.num_views(); ++i) {
        const ViewData& v = ds.view(i);
        const std::string stem = "view" + std::to_string(i);
        json entry;
        entry["name"] = stem;
        entry["dim"] = v.dim();
        entry["features_file"] = stem + "_features.csv";
        entry["labels_file"] = stem + "_labels.csv";
        entry["missing_file"] = stem + "_missing.txt";
        save_matrix_csv(v.features, dir / (stem + "_features.csv"));
        save_matrix_csv(v.labels, dir / (stem + "_labels.csv"));
        std::string flags;
        for (std::uint8_t m : v.missing) {
            flags += m != 0 ? "1\n" : "0\n";
        }
        write_file_atomic(dir / (stem + "_missing.txt"), flags);
        manifest["views"].push_back(entry);
    }
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

void save_weights(const WeightStack& w, const fs::path& file)
{
    json out;
    out["format"] = "mvml-weights";
    out["version"] = 1;
    out["c"] = w.weights.empty() ? 0 : w.weights.front().cols();
    out["views"] = json::array();
    for (const Matrix& m : w.weights) {
        json entry;
        entry["dim"] = m.rows();
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(m.size()));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index q = 0; q < m.cols(); ++q) {
                values.push_back(m(r, q));
            }
        }
        entry["values"] = values;
        out["views"].push_back(entry);
    }
    write_file_atomic(file, out.dump() + "\n");
}

WeightStack load_weights(const fs::path& file)
{
    json in;
    try {
        in = json::parse(read_file(file));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::SchemaViolation, file.string() + " is not valid JSON: " + e.what());
    }
    const std::string ctx = file.filename().string();
    if (require_field<std::string>(in, "format", ctx) != "mvml-weights") {
        throw Error(ErrorKind::SchemaViolation, ctx + ": not a weights file");
    }
    const auto c = require_field<Eigen::Index>(in, "c", ctx);
    WeightStack w;
    for (const json& entry : require_field<json>(in, "views", ctx)) {
        const auto dim = require_field<Eigen::Index>(entry, "dim", ctx);
        const auto values = require_field<std::vector<double>>(entry, "values", ctx);
        if (static_cast<Eigen::Index>(values.size()) != dim * c) {
            throw Error(ErrorKind::SchemaViolation, ctx + ": view weight count does not match dim * c");
        }
        Matrix m(dim, c);
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (Eigen::Index q = 0; q < c; ++q) {
                m(r, q) = values[static_cast<std::size_t>(r * c + q)];
            }
        }
        if (!all_finite(m)) {
            throw Error(ErrorKind::NonFiniteEntry, ctx + ": non-finite weight");
        }
        w.weights.push_back(std::move(m));
    }
    return w;
}

} // namespace mvml
