#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ldgmq/bp_quantizer.hpp"
#include "ldgmq/degree_dist.hpp"
#include "ldgmq/ldgm_code.hpp"
#include "ldgmq/source_problem.hpp"

namespace ldgmq {

using json = nlohmann::json;

json problem_to_json(const symmetric_problem& p);
symmetric_problem problem_from_json(const json& j);

/// {problem, t | R | Iu}; erasure problems given Iu sit at t = infinity.
json channel_to_json(const test_channel& ch);
test_channel channel_from_json(const json& j);

json dd_to_json(const degree_distribution& dd);
degree_distribution dd_from_json(const json& j);

/// Compact code spec {n, K, R, db, w, seed, modulation}; the sample is
/// regenerated bit-exactly from it.
json code_to_json(const ldgm_code& code, const degree_distribution& dd);
ldgm_code code_from_json(const json& j);

json policy_to_json(const decimation_policy& p);
decimation_policy policy_from_json(const json& j);

/// One JSON line per BP iteration: {iter, mean_ext_mi, decimated,
/// contradictions}.
std::string trace_to_jsonl(const quantize_result& r);

/// FNV-1a of the canonical (sorted-key) dump; embedded in every artifact.
std::string config_hash(const json& j);

}  // namespace ldgmq
