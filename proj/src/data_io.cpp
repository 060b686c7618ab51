#include "oinfo/data_io.hpp"

#include "oinfo/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace oinfo {

namespace fs = std::filesystem;

const char* to_string(PayloadFormat format) {
    switch (format) {
        case PayloadFormat::Csv: return "csv";
        case PayloadFormat::F32: return "f32";
        case PayloadFormat::F64: return "f64";
    }
    return "f32";
}

PayloadFormat parse_payload_format(const std::string& text) {
    if (text == "csv") return PayloadFormat::Csv;
    if (text == "f32") return PayloadFormat::F32;
    if (text == "f64") return PayloadFormat::F64;
    throw ConfigError("unknown payload format '" + text + "' (expected csv|f32|f64)");
}

namespace {

std::vector<double> to_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_finite(const Matrix& samples, const std::string& source) {
    for (Eigen::Index r = 0; r < samples.rows(); ++r)
        for (Eigen::Index c = 0; c < samples.cols(); ++c)
            if (!std::isfinite(samples(r, c)))
                throw NumericError(source + ": non-finite value at row " + std::to_string(r) + ", column " +
                                   std::to_string(c));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(field);
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    out.push_back(field);
    return out;
}

bool parse_number(const std::string& text, double& out) {
    std::string s = text;
    s.erase(0, s.find_first_not_of(" \t"));
    s.erase(s.find_last_not_of(" \t") + 1);
    if (s.empty()) return false;
    // strtod accepts nan/inf so they can be reported as non-finite rather than malformed.
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

struct CsvTable {
    std::vector<std::string> names;
    Matrix values;
};

CsvTable read_csv(const std::string& path, bool require_header) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open " + path);
    CsvTable table;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t k = 0; k < fields.size() && numeric; ++k) numeric = parse_number(fields[k], row[k]);
        if (table.names.empty() && rows.empty() && (!numeric || require_header)) {
            table.names = fields;
            width = fields.size();
            continue;
        }
        if (!numeric) throw ConfigError(path + ": malformed number on line " + std::to_string(line_no));
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw ConfigError(path + ": line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                              " fields, expected " + std::to_string(width));
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return table;
}

template <typename T>
void write_binary(const std::string& path, const Matrix& samples) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path);
    unsigned char bytes[sizeof(T)];
    for (Eigen::Index r = 0; r < samples.rows(); ++r) {
        for (Eigen::Index c = 0; c < samples.cols(); ++c) {
            const T value = static_cast<T>(samples(r, c));
            std::memcpy(bytes, &value, sizeof(T));
            if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
            os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
        }
    }
    if (!os) throw ConfigError("failed writing " + path);
}

template <typename T>
Matrix read_binary(const std::string& path, std::size_t rows, std::size_t cols) {
    std::ifstream is(path, std::ios::binary | std::ios::ate);
    if (!is) throw ConfigError("cannot open payload " + path);
    const auto size = static_cast<std::uint64_t>(is.tellg());
    const std::uint64_t expected = static_cast<std::uint64_t>(rows) * cols * sizeof(T);
    if (size != expected)
        throw ConfigError(path + ": payload has " + std::to_string(size) + " bytes, header implies " +
                          std::to_string(expected));
    is.seekg(0);
    Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    unsigned char bytes[sizeof(T)];
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            is.read(reinterpret_cast<char*>(bytes), sizeof(T));
            if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
            T value;
            std::memcpy(&value, bytes, sizeof(T));
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = static_cast<double>(value);
        }
    }
    return out;
}

VariablePartition resolve_partition(std::size_t total_dim, const std::optional<std::vector<std::size_t>>& override_dims,
                                    const std::optional<std::vector<std::size_t>>& stored) {
    std::vector<std::size_t> dims;
    if (override_dims) {
        dims = *override_dims;
    } else if (stored) {
        dims = *stored;
    } else {
        dims.assign(total_dim, 1);
    }
    std::size_t sum = 0;
    for (auto d : dims) sum += d;
    if (sum != total_dim)
        throw ConfigError("partition dims sum to " + std::to_string(sum) + " but the data has " +
                          std::to_string(total_dim) + " columns");
    return VariablePartition(dims);
}

}  // namespace

void save_dataset(const std::string& header_path, const Dataset& data, PayloadFormat format,
                  const std::vector<std::string>& column_names) {
    const auto d = static_cast<std::size_t>(data.samples.cols());
    if (data.partition.total_dim() != d) throw ConfigError("dataset partition does not match its columns");
    if (!column_names.empty() && column_names.size() != d) throw ConfigError("column name count does not match");
    check_finite(data.samples, "dataset");

    const fs::path header(header_path);
    const std::string ext = format == PayloadFormat::Csv ? ".csv" : ".bin";
    const fs::path payload = fs::path(header).replace_extension(ext);

    nlohmann::json j;
    j["format"] = "oinfo-dataset";
    j["version"] = 1;
    j["n_samples"] = data.n_samples();
    j["total_dim"] = d;
    j["partition"] = data.partition.dims();
    if (!column_names.empty()) j["columns"] = column_names;
    if (data.standardization) {
        j["standardization"] = {{"mean", to_vector(data.standardization->mean)},
                                {"scale", to_vector(data.standardization->scale)}};
    } else {
        j["standardization"] = nullptr;
    }
    j["payload"] = {{"file", payload.filename().string()}, {"encoding", to_string(format)}};

    switch (format) {
        case PayloadFormat::Csv: {
            std::ofstream os(payload);
            if (!os) throw ConfigError("cannot write " + payload.string());
            for (std::size_t c = 0; c < d; ++c)
                os << (c ? "," : "") << (column_names.empty() ? "x" + std::to_string(c) : column_names[c]);
            os << "\n";
            char buf[32];
            for (Eigen::Index r = 0; r < data.samples.rows(); ++r) {
                for (Eigen::Index c = 0; c < data.samples.cols(); ++c) {
                    const auto res = std::to_chars(buf, buf + sizeof(buf), data.samples(r, c),
                                                   std::chars_format::general, 17);
                    if (c) os << ',';
                    os.write(buf, res.ptr - buf);
                }
                os << '\n';
            }
            if (!os) throw ConfigError("failed writing " + payload.string());
            break;
        }
        case PayloadFormat::F32: write_binary<float>(payload.string(), data.samples); break;
        case PayloadFormat::F64: write_binary<double>(payload.string(), data.samples); break;
    }
    std::ofstream hs(header);
    if (!hs) throw ConfigError("cannot write " + header.string());
    hs << j.dump(2) << "\n";
}

Dataset load_dataset(const std::string& path, const std::optional<std::vector<std::size_t>>& partition) {
    const fs::path p(path);
    if (!fs::exists(p)) throw ConfigError("dataset file not found: " + path);
    Dataset out;
    if (p.extension() != ".json") {
        const CsvTable table = read_csv(path, false);
        check_finite(table.values, path);
        out.samples = table.values;
        out.partition = resolve_partition(static_cast<std::size_t>(table.values.cols()), partition, std::nullopt);
        return out;
    }

    nlohmann::json j;
    try {
        std::ifstream is(p);
        j = nlohmann::json::parse(is);
        const auto m = j.at("n_samples").get<std::size_t>();
        const auto d = j.at("total_dim").get<std::size_t>();
        const auto stored = j.at("partition").get<std::vector<std::size_t>>();
        const auto file = (p.parent_path() / j.at("payload").at("file").get<std::string>()).string();
        const PayloadFormat format = parse_payload_format(j.at("payload").at("encoding").get<std::string>());
        switch (format) {
            case PayloadFormat::Csv: {
                const CsvTable table = read_csv(file, true);
                if (static_cast<std::size_t>(table.values.rows()) != m ||
                    static_cast<std::size_t>(table.values.cols()) != d)
                    throw ConfigError(file + ": payload shape does not match the header");
                out.samples = table.values;
                break;
            }
            case PayloadFormat::F32: out.samples = read_binary<float>(file, m, d); break;
            case PayloadFormat::F64: out.samples = read_binary<double>(file, m, d); break;
        }
        check_finite(out.samples, file);
        out.partition = resolve_partition(d, partition, stored);
        if (j.contains("standardization") && !j["standardization"].is_null()) {
            Standardization rec{from_vector(j["standardization"].at("mean").get<std::vector<double>>()),
                                from_vector(j["standardization"].at("scale").get<std::vector<double>>())};
            if (static_cast<std::size_t>(rec.mean.size()) != d || static_cast<std::size_t>(rec.scale.size()) != d)
                throw ConfigError(path + ": standardization record has the wrong length");
            out.standardization = std::move(rec);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": malformed dataset header (" + e.what() + ")");
    }
    return out;
}

Dataset standardize(const Dataset& data) {
    const auto m = data.samples.rows();
    const auto d = data.samples.cols();
    if (m == 0) throw ConfigError("cannot standardize an empty dataset");
    Standardization rec{Vector(d), Vector(d)};
    for (Eigen::Index c = 0; c < d; ++c) {
        std::vector<double> col(data.samples.col(c).data(), data.samples.col(c).data() + m);
        const double mean = pairwise_sum(col) / static_cast<double>(m);
        for (auto& v : col) v = (v - mean) * (v - mean);
        const double sd = std::sqrt(pairwise_sum(col) / static_cast<double>(m));
        if (!(sd > 1e-12)) throw ConfigError("column " + std::to_string(c) + " is constant (std <= 1e-12)");
        rec.mean(c) = mean;
        rec.scale(c) = sd;
    }
    return apply_standardization(data, rec);
}

Dataset apply_standardization(const Dataset& data, const Standardization& record) {
    if (record.mean.size() != data.samples.cols() || record.scale.size() != data.samples.cols())
        throw ConfigError("standardization record does not match the dataset width");
    Dataset out = data;
    out.samples = ((data.samples.rowwise() - record.mean.transpose()).array().rowwise() /
                   record.scale.transpose().array())
                      .matrix();
    out.standardization = record;
    return out;
}

Dataset unstandardize(const Dataset& data) {
    if (!data.standardization) throw ConfigError("dataset carries no standardization record");
    const auto& rec = *data.standardization;
    Dataset out = data;
    out.samples =
        ((data.samples.array().rowwise() * rec.scale.transpose().array()).rowwise() + rec.mean.transpose().array())
            .matrix();
    out.standardization.reset();
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction, RngStream& rng) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train fraction must lie in (0, 1)");
    const std::size_t m = data.n_samples();
    std::vector<std::size_t> order(m);
    for (std::size_t k = 0; k < m; ++k) order[k] = k;
    for (std::size_t k = m; k > 1; --k) std::swap(order[k - 1], order[rng.uniform_index(k)]);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(m)));
    std::vector<std::size_t> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_rows(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    auto gather = [&](const std::vector<std::size_t>& rows) {
        Dataset out;
        out.partition = data.partition;
        out.standardization = data.standardization;
        out.samples.resize(static_cast<Eigen::Index>(rows.size()), data.samples.cols());
        for (std::size_t k = 0; k < rows.size(); ++k)
            out.samples.row(static_cast<Eigen::Index>(k)) = data.samples.row(static_cast<Eigen::Index>(rows[k]));
        return out;
    };
    return {gather(train_rows), gather(test_rows)};
}

Dataset take_rows(const Dataset& data, std::size_t begin, std::size_t count) {
    if (begin + count > data.n_samples()) throw ConfigError("row range exceeds the dataset");
    Dataset out = data;
    out.samples = data.samples.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count));
    return out;
}

}  // namespace oinfo
