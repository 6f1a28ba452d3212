#include "delayrc/time_series.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace delayrc {

time_series time_series::segment(long start, long count) const {
    if (start < 0 || count < 0 || start + count > n_steps())
        throw std::invalid_argument(fmt::format(
            "time_series::segment: range [{}, {}) outside 0..{}", start, start + count, n_steps()));
    time_series out;
    out.values = values.middleCols(start, count);
    out.dt = dt;
    out.var_names = var_names;
    return out;
}

bool time_series::all_finite() const { return values.allFinite(); }

affine_transform affine_transform::identity(long n_vars) {
    affine_transform t;
    t.shift = Eigen::VectorXd::Zero(n_vars);
    t.scale = Eigen::VectorXd::Ones(n_vars);
    return t;
}

Eigen::MatrixXd affine_transform::apply(const Eigen::MatrixXd& x) const {
    return (x.colwise() - shift).array().colwise() / scale.array();
}

Eigen::MatrixXd affine_transform::invert(const Eigen::MatrixXd& y) const {
    return (y.array().colwise() * scale.array()).colwise() + shift.array();
}

affine_transform fit_normalization(const Eigen::MatrixXd& data) {
    affine_transform t;
    t.shift = data.rowwise().mean();
    Eigen::MatrixXd centered = data.colwise() - t.shift;
    t.scale = (centered.array().square().rowwise().mean()).sqrt();
    for (long i = 0; i < t.scale.size(); ++i)
        if (t.scale[i] <= 0.0) t.scale[i] = 1.0;
    return t;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error(fmt::format("parse_double: bad number '{}'", s));
    return v;
}

namespace {

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote_field(const std::string& field) {
    if (!needs_quoting(field)) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

void write_time_series_csv(const time_series& ts, const std::string& path) {
    nlohmann::json meta;
    write_time_series_csv(ts, path, meta);
}

void write_time_series_csv(const time_series& ts, const std::string& path,
                           const nlohmann::json& metadata) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
    for (long v = 0; v < ts.n_vars(); ++v) {
        if (v) f << ',';
        std::string name =
            v < static_cast<long>(ts.var_names.size()) ? ts.var_names[v] : fmt::format("x{}", v + 1);
        f << quote_field(name);
    }
    f << '\n';
    for (long t = 0; t < ts.n_steps(); ++t) {
        for (long v = 0; v < ts.n_vars(); ++v) {
            if (v) f << ',';
            f << format_double(ts.values(v, t));
        }
        f << '\n';
    }
    if (!f) throw std::runtime_error(fmt::format("write failed on '{}'", path));

    nlohmann::json meta = metadata;
    meta["dt"] = ts.dt;
    meta["n_vars"] = ts.n_vars();
    meta["n_steps"] = ts.n_steps();
    std::ofstream mf(path + ".meta.json", std::ios::binary);
    if (!mf) throw std::runtime_error(fmt::format("cannot open '{}.meta.json' for writing", path));
    mf << meta.dump(2) << '\n';
}

time_series read_time_series_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot open '{}'", path));
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error(fmt::format("'{}' is empty", path));
    if (!line.empty() && line.back() == '\r') line.pop_back();

    time_series ts;
    ts.var_names = split_csv_line(line);
    const long n_vars = static_cast<long>(ts.var_names.size());

    std::vector<double> data;
    long n_steps = 0;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (static_cast<long>(fields.size()) != n_vars)
            throw std::runtime_error(fmt::format("'{}': row {} has {} fields, expected {}", path,
                                                 n_steps + 1, fields.size(), n_vars));
        for (auto& s : fields) data.push_back(parse_double(s));
        ++n_steps;
    }
    ts.values.resize(n_vars, n_steps);
    for (long t = 0; t < n_steps; ++t)
        for (long v = 0; v < n_vars; ++v) ts.values(v, t) = data[t * n_vars + v];

    std::ifstream mf(path + ".meta.json", std::ios::binary);
    if (mf) {
        nlohmann::json meta = nlohmann::json::parse(mf, nullptr, false);
        if (!meta.is_discarded() && meta.contains("dt")) ts.dt = meta["dt"].get<double>();
    }
    return ts;
}

}  // namespace delayrc
