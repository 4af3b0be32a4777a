#pragma once

// Flat-file records: the instance record (JSON object, positions written with
// 17 significant digits, histogram as integer counts) and the solve record.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "udgp/instance.hpp"
#include "udgp/solver.hpp"

namespace udgp {

inline constexpr const char* kVersion = "udgp 0.1.0";

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    std::string s = os.str();
    // Keep reals recognisable as reals.
    if (s.find_first_of(".eE") == std::string::npos && s.find("inf") == std::string::npos &&
        s.find("nan") == std::string::npos)
        s += ".0";
    return s;
}

} // namespace detail

inline std::string instance_to_string(const Instance& inst) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"geometry\": \"" << to_string(inst.geometry) << "\",\n";
    os << "  \"n\": " << inst.n << ",\n";
    os << "  \"s\": " << inst.s << ",\n";
    os << "  \"xi\": " << detail::format_real(inst.noise_sigma) << ",\n";
    os << "  \"seed\": " << inst.seed << ",\n";
    os << "  \"true_positions\": [";
    for (std::size_t i = 0; i < inst.true_positions.size(); ++i)
        os << (i ? ", " : "") << detail::format_real(inst.true_positions[i]);
    os << "],\n";
    os << "  \"y\": [";
    for (std::size_t i = 0; i < inst.y.size(); ++i) os << (i ? ", " : "") << std::llround(inst.y[i]);
    os << "]\n}\n";
    return os.str();
}

inline Instance instance_from_string(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("malformed instance record: ") + e.what());
    }
    try {
        Instance inst;
        inst.geometry = parse_geometry(j.at("geometry").get<std::string>());
        inst.n = j.at("n").get<std::size_t>();
        inst.s = j.at("s").get<std::size_t>();
        inst.noise_sigma = j.at("xi").get<double>();
        inst.seed = j.at("seed").get<std::uint64_t>();
        inst.true_positions = j.at("true_positions").get<Vector>();
        inst.y = j.at("y").get<Vector>();
        if (inst.n < 2 || inst.y.size() != inst.n - 1)
            throw IoError("instance record: y must have n - 1 entries");
        if (inst.s < 1 || inst.s > inst.n) throw IoError("instance record: s must lie in [1, n]");
        return inst;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("instance record: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError(std::string("instance record: ") + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out) throw IoError("write to " + path + " failed");
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void save_instance(const Instance& inst, const std::string& path) { write_text(path, instance_to_string(inst)); }

inline Instance load_instance(const std::string& path) { return instance_from_string(read_text(path)); }

inline nlohmann::json config_to_json(const SolverConfig& cfg) {
    return {{"gamma", cfg.gamma},
            {"alpha", cfg.alpha},
            {"delta", cfg.delta},
            {"epsilon", cfg.epsilon},
            {"max_iters", cfg.max_iters},
            {"max_backtracks", cfg.max_backtracks},
            {"restarts", cfg.restarts},
            {"seed", cfg.seed},
            {"normalization", std::string(to_string(cfg.normalization))},
            {"target_objective", cfg.target_objective}};
}

/// Solve record: solver outcome plus recovery score. wall_time_seconds is
/// the only field that varies between identical runs.
inline nlohmann::json solve_record(Method method, const SolverConfig& cfg, const SolveResult& res,
                                   const RecoveryReport& rep) {
    return {{"version", kVersion},
            {"method", std::string(to_string(method))},
            {"config", config_to_json(cfg)},
            {"co_p", rep.co_p},
            {"f_final", res.final_objective()},
            {"iterations", res.iterations()},
            {"wall_time_seconds", res.wall_time_seconds},
            {"stop_reason", std::string(to_string(res.stop_reason))},
            {"estimated_positions", rep.estimated_positions},
            {"stationarity_residual", res.stationarity_residual},
            {"final_step_norm", res.final_step_norm},
            {"start_index", res.start_index},
            {"alignment", std::string(to_string(rep.alignment.kind))},
            {"threshold", rep.threshold}};
}

} // namespace udgp
