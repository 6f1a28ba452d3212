#include "delayrc/serialize.hpp"

#include <fmt/format.h>

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace delayrc {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (long i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const long rows = static_cast<long>(j.size());
    const long cols = rows ? static_cast<long>(j.at(0).size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (long i = 0; i < rows; ++i) {
        if (static_cast<long>(j.at(i).size()) != cols)
            throw std::runtime_error("matrix_from_json: ragged rows");
        for (long c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
    }
    return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (long i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<long>(i)] = j.at(i).get<double>();
    return v;
}

void check_format(const nlohmann::json& j, const char* expected) {
    if (!j.is_object() || j.value("format", "") != expected)
        throw std::runtime_error(fmt::format("expected a '{}' document", expected));
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot open '{}'", path));
    return nlohmann::json::parse(f);
}

void dump_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
    f << j.dump(2) << '\n';
    if (!f) throw std::runtime_error(fmt::format("write failed on '{}'", path));
}

}  // namespace

nlohmann::json reservoir_to_json(const reservoir& res, bool include_matrices) {
    nlohmann::json j;
    j["format"] = "delay-rc/reservoir";
    j["version"] = 1;
    j["config"] = {{"neurons", res.config.neurons},
                   {"input_dim", res.config.input_dim},
                   {"spectral_radius", res.config.spectral_radius},
                   {"input_scale", res.config.input_scale},
                   {"density", res.config.density},
                   {"leak", res.config.leak},
                   {"seed", res.config.seed}};
    j["achieved_spectral_radius"] = res.achieved_spectral_radius;
    if (include_matrices) {
        j["w_in"] = matrix_to_json(res.w_in);
        nlohmann::json triplets = nlohmann::json::array();
        for (int k = 0; k < res.w_res.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(res.w_res, k); it; ++it)
                triplets.push_back({it.row(), it.col(), it.value()});
        j["w_res"] = {{"triplets", std::move(triplets)}};
    }
    return j;
}

reservoir reservoir_from_json(const nlohmann::json& j) {
    check_format(j, "delay-rc/reservoir");
    const auto& c = j.at("config");
    reservoir_config config;
    config.neurons = c.at("neurons").get<long>();
    config.input_dim = c.at("input_dim").get<long>();
    config.spectral_radius = c.at("spectral_radius").get<double>();
    config.input_scale = c.at("input_scale").get<double>();
    config.density = c.at("density").get<double>();
    config.leak = c.at("leak").get<double>();
    config.seed = c.at("seed").get<std::uint64_t>();

    if (!j.contains("w_in")) return build_reservoir(config);

    reservoir res;
    res.config = config;
    res.achieved_spectral_radius = j.at("achieved_spectral_radius").get<double>();
    res.w_in = matrix_from_json(j.at("w_in"));
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& t : j.at("w_res").at("triplets"))
        triplets.emplace_back(t.at(0).get<long>(), t.at(1).get<long>(), t.at(2).get<double>());
    res.w_res.resize(config.neurons, config.neurons);
    res.w_res.setFromTriplets(triplets.begin(), triplets.end());
    return res;
}

void save_reservoir(const reservoir& res, const std::string& path, bool include_matrices) {
    dump_json(reservoir_to_json(res, include_matrices), path);
}

reservoir load_reservoir(const std::string& path) { return reservoir_from_json(load_json(path)); }

nlohmann::json readout_to_json(const readout_model& model) {
    nlohmann::json j;
    j["format"] = "delay-rc/readout";
    j["version"] = 1;
    j["w_out"] = matrix_to_json(model.w_out);
    j["delay_spec"] = {{"stride", model.spec.stride}, {"lags", model.spec.lags}};
    j["beta"] = model.beta;
    j["normalization"] = {{"shift", vector_to_json(model.normalization.shift)},
                          {"scale", vector_to_json(model.normalization.scale)}};
    j["svd_fallback"] = model.svd_fallback;
    return j;
}

readout_model readout_from_json(const nlohmann::json& j) {
    check_format(j, "delay-rc/readout");
    readout_model model;
    model.w_out = matrix_from_json(j.at("w_out"));
    model.spec.stride = j.at("delay_spec").at("stride").get<long>();
    model.spec.lags = j.at("delay_spec").at("lags").get<std::vector<long>>();
    model.beta = j.at("beta").get<double>();
    model.normalization.shift = vector_from_json(j.at("normalization").at("shift"));
    model.normalization.scale = vector_from_json(j.at("normalization").at("scale"));
    model.svd_fallback = j.value("svd_fallback", false);
    return model;
}

void save_readout(const readout_model& model, const std::string& path) {
    dump_json(readout_to_json(model), path);
}

readout_model load_readout(const std::string& path) { return readout_from_json(load_json(path)); }

}  // namespace delayrc
