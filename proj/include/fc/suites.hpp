#ifndef FC_SUITES_HPP
#define FC_SUITES_HPP

#include "fc/complex.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fc {

using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int nmax = 6;
    int lmax = 4;
    Scalar lambda = 1;
    unsigned seed = 0;
    std::vector<std::string> suites;
    std::string out;
    bool printed_signs = false;  // displayed back-term sign in the exceptional coboundary

    VoaContext ctx() const;
    void validate() const;  // throws UsageError
    Json params() const;
};

// delta2, leibniz, shuffle, lproperties, product-closure, gv, oracle
const std::vector<std::string>& suite_names();

struct CaseResult {
    std::string id;
    std::string status;  // pass, fail, error
    std::string detail;
    Json witness;  // null when absent
    long truncation_losses = 0;
};

struct SuiteResult {
    std::string suite;
    std::vector<CaseResult> cases;
    Json extra;  // gv: the class representative record
};

SuiteResult run_suite(const std::string& name, const RunConfig& cfg);

// {suite, params, cases: [...]} for the selection, "all" expanded in order
Json run_selection(const RunConfig& cfg);
bool all_pass(const Json& report);

Json class_json(const ClassRep& c);

}  // namespace fc

#endif
