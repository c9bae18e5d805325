#pragma once

#include <string>

#include "json.hpp"

#include "declab/lab.hpp"

namespace declab {

// One flat JSON document, sections per module; flags override dot-paths.
class RunConfig {
public:
    static RunConfig defaults();
    static RunConfig from_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);

    // "norms.p=4" style override; the value is parsed as JSON when possible,
    // else taken as a string.
    void override_path(const std::string& dotpath, const std::string& value);

    const nlohmann::json& doc() const { return doc_; }

    Ambient ambient() const;
    BumpSpec bump() const;
    GridSpec grid() const;
    NormParams norm_params() const;
    Constants constants() const;
    Ensemble ensemble() const;
    SweepSpec sweep_spec() const;
    SuiteOptions suite_options() const;

    int workers() const;
    uint64_t seed() const;
    std::string out_dir() const;
    std::string prefix() const;

    // Validates every section against module preconditions.
    void validate() const;

private:
    nlohmann::json doc_;
};

struct RunOutcome {
    int exit_code = 0;   // 0 pass, 1 usage/config error, 2 check failures
    int failures = 0;
    std::vector<std::string> artifacts;
    std::string message;
};

// gen | norm | decompose | verify | sweep | suite
RunOutcome run_subcommand(const std::string& sub, const RunConfig& cfg);

}  // namespace declab
