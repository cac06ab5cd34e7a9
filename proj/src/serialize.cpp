#include "odenet/serialize.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>

namespace odenet {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    if (!arr.is_array()) throw ConfigError("expected a number array");
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[i] = arr[i].get<double>();
    return v;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
    if (!rows.is_array() || rows.empty())
        throw ConfigError("expected an array of rows");
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows[r].is_array() || rows[r].size() != rows[0].size())
            throw ConfigError("matrix rows must be arrays of equal length");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m(r, c) = rows[r][c].get<double>();
    }
    return m;
}

json activation_to_json(const Activation& a) {
    json j;
    j["kind"] = a.name();
    if (a.name() == "truncated_power") {
        j["power"] = a.power();
        j["valid_radius"] = a.valid_radius();
    }
    return j;
}

Activation activation_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    return activation_from_name(kind, j.value("power", 2),
                                j.value("valid_radius", 1.0));
}

json parse(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("malformed JSON");
    return j;
}

void expect_format(const json& j, const std::string& format) {
    if (j.value("format", "") != format)
        throw ConfigError("expected format \"" + format + "\"");
    if (j.value("version", 0) != 1)
        throw ConfigError("unsupported version for format \"" + format + "\"");
}

}  // namespace

Activation activation_from_name(const std::string& name, int power,
                                double valid_radius) {
    if (name == "tanh") return Activation::tanh();
    if (name == "sigmoid") return Activation::sigmoid();
    if (name == "relu") return Activation::relu();
    if (name == "softplus") return Activation::softplus();
    if (name == "truncated_power")
        return Activation::truncated_power(power, valid_radius);
    throw ConfigError("unknown activation \"" + name + "\"");
}

std::string controls_to_json(const NeuronControls& c) {
    json j;
    j["format"] = "neuron-controls";
    j["version"] = 1;
    j["activation"] = activation_to_json(c.sigma());
    j["representation"] =
        c.representation() == ControlRepresentation::piecewise_constant
            ? "piecewise_constant"
            : "sampled_continuous";
    j["dimension"] = c.dimension();
    j["times"] = json(c.times());
    json alphas = json::array(), betas = json::array(), gammas = json::array();
    for (std::size_t i = 0; i < c.value_count(); ++i) {
        alphas.push_back(vector_to_json(c.alpha_value(i)));
        betas.push_back(matrix_to_json(c.beta_value(i)));
        gammas.push_back(vector_to_json(c.gamma_value(i)));
    }
    j["alpha"] = std::move(alphas);
    j["beta"] = std::move(betas);
    j["gamma"] = std::move(gammas);
    return j.dump(2) + "\n";
}

NeuronControls controls_from_json(const std::string& text) {
    json j = parse(text);
    expect_format(j, "neuron-controls");
    std::string repr = j.at("representation").get<std::string>();
    if (repr != "piecewise_constant" && repr != "sampled_continuous")
        throw ConfigError("unknown control representation \"" + repr + "\"");
    std::vector<double> times = j.at("times").get<std::vector<double>>();
    std::vector<Eigen::VectorXd> alpha, gamma;
    std::vector<Eigen::MatrixXd> beta;
    for (const auto& a : j.at("alpha")) alpha.push_back(vector_from_json(a));
    for (const auto& b : j.at("beta")) beta.push_back(matrix_from_json(b));
    for (const auto& g : j.at("gamma")) gamma.push_back(vector_from_json(g));
    return NeuronControls(activation_from_json(j.at("activation")),
                          repr == "piecewise_constant"
                              ? ControlRepresentation::piecewise_constant
                              : ControlRepresentation::sampled_continuous,
                          std::move(times), std::move(alpha), std::move(beta),
                          std::move(gamma));
}

std::string resnet_to_json(const ResNetModel& m) {
    json j;
    j["format"] = "resnet-layers";
    j["version"] = 1;
    j["activation"] = activation_to_json(m.sigma());
    j["horizon"] = m.horizon();
    j["dimension"] = m.dimension();
    json layers = json::array();
    for (const auto& l : m.layers()) {
        json layer;
        layer["alpha"] = vector_to_json(l.alpha);
        layer["beta"] = matrix_to_json(l.beta);
        layer["gamma"] = vector_to_json(l.gamma);
        layers.push_back(std::move(layer));
    }
    j["layers"] = std::move(layers);
    return j.dump(2) + "\n";
}

ResNetModel resnet_from_json(const std::string& text) {
    json j = parse(text);
    expect_format(j, "resnet-layers");
    std::vector<ResNetLayer> layers;
    for (const auto& l : j.at("layers"))
        layers.push_back({vector_from_json(l.at("alpha")),
                          matrix_from_json(l.at("beta")),
                          vector_from_json(l.at("gamma"))});
    return ResNetModel(activation_from_json(j.at("activation")),
                       j.at("horizon").get<double>(), std::move(layers));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write \"" + path + "\"");
    out << text;
    if (!out) throw ConfigError("short write to \"" + path + "\"");
}

}  // namespace odenet
