#include "ldgmq/serialize.hpp"

#include <cstdio>

#include "ldgmq/errors.hpp"
#include "ldgmq/rng.hpp"

namespace ldgmq {

json problem_to_json(const symmetric_problem& p) {
    json j;
    switch (p.kind) {
        case problem_kind::mse_uniform:
            j["kind"] = "mse";
            j["M"] = p.M;
            break;
        case problem_kind::mary_hamming:
            j["kind"] = "hamming";
            j["M"] = p.M;
            break;
        case problem_kind::mary_erasure:
            j["kind"] = "erasure";
            j["M"] = p.M;
            j["epsilon"] = p.epsilon;
            break;
        case problem_kind::erasure_like_k:
            j["kind"] = "erasure2k";
            j["K"] = p.K;
            if (p.mode == symmetric_problem::subspace_mode::iid_bits)
                j["epsilon"] = p.epsilon;
            else
                j["dim_pmf"] = p.dim_pmf;
            break;
    }
    return j;
}

symmetric_problem problem_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "mse") return symmetric_problem::mse(j.at("M").get<int>());
    if (kind == "hamming") return symmetric_problem::hamming(j.at("M").get<int>());
    if (kind == "erasure")
        return symmetric_problem::erasure(j.at("M").get<int>(), j.at("epsilon").get<double>());
    if (kind == "erasure2k") {
        const int K = j.at("K").get<int>();
        if (j.contains("dim_pmf"))
            return symmetric_problem::erasure_k_pmf(K, j.at("dim_pmf").get<std::vector<double>>());
        return symmetric_problem::erasure_k(K, j.at("epsilon").get<double>());
    }
    throw domain_error("problem_from_json: unknown kind '" + kind + "'");
}

json channel_to_json(const test_channel& ch) {
    json j;
    j["problem"] = problem_to_json(ch.problem());
    if (ch.t_is_infinite())
        j["t"] = "inf";
    else
        j["t"] = ch.t();
    return j;
}

test_channel channel_from_json(const json& j) {
    const symmetric_problem prob = problem_from_json(j.at("problem"));
    if (j.contains("t")) {
        if (j.at("t").is_string()) {
            if (j.at("t").get<std::string>() != "inf")
                throw domain_error("channel_from_json: t must be a number or \"inf\"");
            return test_channel::erasure_limit(prob);
        }
        return test_channel(prob, j.at("t").get<double>());
    }
    if (j.contains("R")) return test_channel(prob, test_channel::solve_t0(prob, j.at("R").get<double>()));
    if (j.contains("Iu")) {
        // erasure problems: Iu = R0 at t = infinity fixes epsilon outside;
        // here Iu is only accepted as a consistency alias for them
        if (!prob.is_erasure_kind())
            throw domain_error("channel_from_json: Iu form is for erasure problems");
        return test_channel::erasure_limit(prob);
    }
    throw domain_error("channel_from_json: need one of t, R, Iu");
}

json dd_to_json(const degree_distribution& dd) {
    json w = json::object();
    for (auto& [d, wd] : dd.w()) w[std::to_string(d)] = wd;
    json v = json::object();
    for (auto& [d, vd] : dd.v()) v[std::to_string(d)] = vd;
    return json{{"db", dd.db()}, {"K", dd.K()}, {"w", w}, {"R", dd.rate()}, {"v", v}};
}

degree_distribution dd_from_json(const json& j) {
    std::map<int, double> w;
    for (auto& [key, val] : j.at("w").items()) w[std::stoi(key)] = val.get<double>();
    const int K = j.contains("K") ? j.at("K").get<int>() : 1;
    degree_distribution dd(j.at("db").get<int>(), std::move(w), K);
    if (j.contains("R") && std::abs(dd.rate() - j.at("R").get<double>()) > 1e-9)
        throw domain_error("dd_from_json: R inconsistent with (db, w, K)");
    return dd;
}

json code_to_json(const ldgm_code& code, const degree_distribution& dd) {
    json j = dd_to_json(dd);
    j["n"] = code.n;
    j["seed"] = code.seed;
    switch (code.modulation) {
        case modulation_kind::binary:
            j["modulation"] = "binary";
            break;
        case modulation_kind::gray_zm:
            j["modulation"] = "gray";
            break;
        case modulation_kind::identity_z2k:
            j["modulation"] = "identity";
            break;
    }
    return j;
}

ldgm_code code_from_json(const json& j) {
    const degree_distribution dd = dd_from_json(j);
    const std::string mod = j.contains("modulation") ? j.at("modulation").get<std::string>()
                                                     : (dd.K() == 1 ? "binary" : "gray");
    modulation_kind mk = modulation_kind::binary;
    if (mod == "gray") mk = modulation_kind::gray_zm;
    else if (mod == "identity") mk = modulation_kind::identity_z2k;
    else if (mod != "binary") throw domain_error("code_from_json: unknown modulation");
    return sample_code(dd, j.at("n").get<int>(), j.at("seed").get<std::uint64_t>(), mk);
}

json policy_to_json(const decimation_policy& p) {
    return json{{"decimator", p.decimator == decimator_kind::pd ? "pd" : "gd"},
                {"warmup", p.warmup},
                {"max_iterations", p.max_iterations},
                {"pace", p.pace},
                {"reinit_per_step", p.reinit_per_step},
                {"on_contradiction",
                 p.on_contradiction == decimation_policy::contradiction_policy::abort ? "abort"
                                                                                      : "resolve"}};
}

decimation_policy policy_from_json(const json& j) {
    decimation_policy p;
    if (j.contains("decimator")) {
        const std::string d = j.at("decimator").get<std::string>();
        if (d == "pd") p.decimator = decimator_kind::pd;
        else if (d == "gd") p.decimator = decimator_kind::gd;
        else throw domain_error("policy_from_json: decimator must be pd or gd");
    }
    if (j.contains("warmup")) p.warmup = j.at("warmup").get<int>();
    if (j.contains("max_iterations")) p.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("pace")) p.pace = j.at("pace").get<double>();
    if (j.contains("reinit_per_step")) p.reinit_per_step = j.at("reinit_per_step").get<bool>();
    if (j.contains("on_contradiction")) {
        const std::string c = j.at("on_contradiction").get<std::string>();
        if (c == "abort") p.on_contradiction = decimation_policy::contradiction_policy::abort;
        else if (c == "resolve") p.on_contradiction = decimation_policy::contradiction_policy::resolve;
        else throw domain_error("policy_from_json: on_contradiction must be abort or resolve");
    }
    if (p.warmup < 0 || p.max_iterations < std::max(1, p.warmup) || p.pace < 0 || p.pace > 1)
        throw domain_error("policy_from_json: invalid pacing");
    return p;
}

std::string trace_to_jsonl(const quantize_result& r) {
    std::string out;
    for (const trace_row& row : r.trace) {
        json j{{"iter", row.iteration},
               {"mean_ext_mi", row.mean_ext_mi},
               {"decimated", row.decimated},
               {"contradictions", row.contradictions}};
        out += j.dump();
        out += '\n';
    }
    json tail{{"recovery", r.recovery}};
    out += tail.dump();
    out += '\n';
    return out;
}

std::string config_hash(const json& j) {
    const std::string canon = j.dump();  // nlohmann keeps object keys sorted
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(canon)));
    return std::string(buf);
}

}  // namespace ldgmq
