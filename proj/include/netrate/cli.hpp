#pragma once

#include "netrate/channel.hpp"
#include "netrate/plant.hpp"
#include "netrate/simulator.hpp"
#include "netrate/synthesis.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace netrate {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitProperty = 3 };

struct GridSpec {
    std::vector<double> values;  // explicit list wins when nonempty
    bool auto_min = false;       // start at 1.05 d_inf(h_max)
    double min = 0, max = 50;
    int count = 5;
    bool log_spacing = false;
    bool operator==(const GridSpec&) const = default;
};

struct ExperimentConfig {
    std::string plant_file;  // optional external [plant] section
    GeneralizedPlant plant;
    std::vector<int> h{0};
    DelaySpec::Mode delay_mode = DelaySpec::Mode::constant;
    std::vector<std::pair<int, double>> support;
    GridSpec grid;
    std::uint64_t horizon = 1'010'000, burn_in = 10'000;
    int realizations = 50;
    double margin = 0.05;
    ChannelNoise noise = ChannelNoise::ecdq;
    Seeds seeds;
    PhiOptions solver;
    std::string out_dir = "out";

    bool operator==(const ExperimentConfig& o) const;
};

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& cfg);
GeneralizedPlant benchmark_plant();

std::vector<double> d_grid(const ExperimentConfig& cfg);

struct CommandOptions {
    std::filesystem::path out_dir;
    int jobs = 1;
    std::ostream* log = nullptr;
};

// Each returns an ExitCode and writes <out>/<name>.csv plus a column
// provenance table <out>/<name>.columns.csv.
int cmd_bounds(const ExperimentConfig& cfg, const CommandOptions& opt);
int cmd_simulate(const ExperimentConfig& cfg, const CommandOptions& opt);
int cmd_plot(const std::vector<std::filesystem::path>& csvs, const std::filesystem::path& out_svg);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    int column(const std::string& name) const;  // throws SchemaError
};
CsvTable read_csv(const std::filesystem::path& p);
std::string render_plot(const std::vector<CsvTable>& tables);

struct PropertyCheck {
    std::string name;
    bool pass;
    double residual;
    double tolerance;
};
struct VerifyOptions {
    std::string mutate;  // "h2" perturbs the Lyapunov H2 routine
    bool quick = false;
};
std::vector<PropertyCheck> run_verify(const VerifyOptions& opt);
int cmd_verify(const VerifyOptions& opt, std::ostream& os);

}  // namespace netrate
