// arrowgap: command-line front end.
//
//   arrowgap --command gap --P1 '{"num":[1],"den":[1]}' --P2 '{"num":[1],"den":[1,0]}'
//   arrowgap --config configs/bicycle.json --output csv --plot fig.svg

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "arrowgap/cli.hpp"

namespace {

using arrowgap::cli::json;

// Parses a flag value as JSON, falling back to a bare string (e.g. "f").
json flag_value(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return text;
    }
}

int emit(const arrowgap::cli::RunResult& rr, arrowgap::cli::OutputFormat fmt)
{
    if (fmt == arrowgap::cli::OutputFormat::Csv)
        std::cout << arrowgap::cli::to_csv(rr);
    else
        std::cout << rr.document.dump(2) << "\n";
    return rr.exit_code;
}

int fail(const std::string& field, const std::string& message)
{
    json doc{{"schema", arrowgap::cli::kSchema},
             {"tool_version", arrowgap::cli::kToolVersion},
             {"error", message},
             {"error_field", field}};
    std::cout << doc.dump(2) << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Forward/backward robustness analysis: LQR, b_opt, nu-gap, delay loops"};
    app.set_version_flag("--version", arrowgap::cli::kToolVersion);

    std::string command, config_path, output = "json", plot_path;
    app.add_option("--command,command", command, "lqr-finite | lqr-infinite | bopt | gap | margin | bicycle-sweep | delay | demo-all");
    app.add_option("--config", config_path, "JSON file: {\"command\": ..., \"params\": {...}}");
    app.add_option("--output", output, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--plot", plot_path, "SVG output path (bicycle-sweep)");

    // Every per-command parameter is a JSON value; flags override the config file.
    const std::vector<std::pair<std::string, std::string>> keys{
        {"tau", "delay / predictor time"},
        {"V-min", "sweep start speed"},
        {"V-max", "sweep end speed"},
        {"V-step", "sweep step"},
        {"epsilon", "plant 1 + eps/(s+1) for bopt"},
        {"direction", "f | b"},
        {"A", "state matrix, nested arrays"},
        {"B", "input matrix"},
        {"C", "output matrix"},
        {"D", "feedthrough matrix"},
        {"Q", "state weight"},
        {"R", "input weight"},
        {"H", "terminal weight"},
        {"T", "horizon"},
        {"x0", "initial state"},
        {"P1", "transfer function {\"num\": [...], \"den\": [...]}, descending powers"},
        {"P2", "second transfer function"},
        {"plant", "plant as {A,B,C,D} or {num,den}"},
        {"controller", "controller as {A,B,C,D} or {num,den}"},
        {"alpha", "bicycle alpha"},
        {"beta", "bicycle beta"},
        {"gamma", "bicycle gamma"},
        {"radius", "contour radius for delay analysis"},
    };
    std::map<std::string, std::string> flag_text;
    for (const auto& [key, help] : keys) app.add_option("--" + key, flag_text[key], help);

    CLI11_PARSE(app, argc, argv);

    arrowgap::cli::RunConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) return fail("config", "cannot open '" + config_path + "'");
        json file;
        try {
            file = json::parse(in);
        } catch (const json::parse_error& e) {
            return fail("config", "parse error in '" + config_path + "' at byte " + std::to_string(e.byte) + ": " +
                                      e.what());
        }
        if (!file.is_object()) return fail("config", "top level must be an object");
        if (file.contains("command")) cfg.command = file["command"].get<std::string>();
        cfg.params = file.contains("params") ? file["params"] : json::object();
        if (!cfg.params.is_object()) return fail("params", "must be an object");
    }
    if (!command.empty()) cfg.command = command;
    if (cfg.command.empty()) return fail("command", "no command given");
    for (const auto& [key, help] : keys)
        if (app.count("--" + key) > 0) cfg.params[key] = flag_value(flag_text[key]);

    cfg.output_format = output == "csv" ? arrowgap::cli::OutputFormat::Csv : arrowgap::cli::OutputFormat::Json;
    if (!plot_path.empty()) cfg.plot_path = plot_path;

    const arrowgap::cli::RunResult rr = arrowgap::cli::run(cfg);
    if (cfg.plot_path && !rr.svg.empty()) {
        std::ofstream svg(*cfg.plot_path);
        if (!svg) return fail("plot", "cannot write '" + *cfg.plot_path + "'");
        svg << rr.svg;
    }
    return emit(rr, cfg.output_format);
}
