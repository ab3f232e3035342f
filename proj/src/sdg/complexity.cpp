#include "toolforge/sdg/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "toolforge/util.hpp"

namespace toolforge::sdg {

llm::ScoreRequest scoring_request(const DataSample& sample) {
    std::size_t last = sample.final_assistant_index();
    if (last == std::string::npos) throw ContractError("sample " + sample.sample_id + " has no assistant turn");
    Json tools = Json::array();
    for (const auto& t : sample.tool_list) tools.push_back(api_to_json(t));
    llm::ScoreRequest req;
    req.prompt = "System: " + sample.system_prompt + "\nTools: " + tools.dump() + "\n";
    std::size_t begin = !sample.turns.empty() && sample.turns[0].role == Role::System ? 1 : 0;
    std::string history = render_transcript(sample.turns, begin, last);
    if (!history.empty()) req.prompt += history + "\n";
    req.prompt += "Assistant: ";
    const auto& y = sample.turns[last];
    req.target = y.has_calls() ? render_call_string(y.calls) : y.content;
    return req;
}

ComplexityScore loss_from_logprobs(const std::vector<double>& logprobs) {
    if (logprobs.empty()) throw TokenizationEmpty("target scored to zero tokens");
    double sum = 0.0;
    for (double lp : logprobs) sum += lp;
    return {-sum / static_cast<double>(logprobs.size()), logprobs.size()};
}

ComplexityScore evaluate_complexity(const DataSample& sample, llm::LlmBackend& scorer) {
    auto req = scoring_request(sample);
    if (req.target.empty()) throw TokenizationEmpty("final assistant turn is empty");
    auto res = scorer.score(req);
    for (double lp : res.token_logprobs) {
        if (!(lp <= 0.0)) throw BackendError("scorer returned a log-probability above zero");
    }
    return loss_from_logprobs(res.token_logprobs);
}

ComplexityRange calibrate_from_losses(const std::vector<double>& mastered, const std::vector<double>& unlearned) {
    if (mastered.empty() || unlearned.empty()) throw EmptyCalibrationSet("calibration needs both sample sets");
    ComplexityRange r{*std::max_element(mastered.begin(), mastered.end()),
                      *std::min_element(unlearned.begin(), unlearned.end())};
    if (r.lower > r.upper) {
        double mean = 0.0;
        for (double m : mastered) mean += m;
        mean /= static_cast<double>(mastered.size());
        double var = 0.0;
        for (double m : mastered) var += (m - mean) * (m - mean);
        double half = std::sqrt(var / static_cast<double>(mastered.size())) / 2.0;
        double mid = (r.lower + r.upper) / 2.0;
        r = {mid - half, mid + half};
    }
    return r;
}

ComplexityRange calibrate_range(const std::vector<DataSample>& mastered, const std::vector<DataSample>& unlearned,
                                llm::LlmBackend& scorer) {
    if (mastered.empty() || unlearned.empty()) throw EmptyCalibrationSet("calibration needs both sample sets");
    std::vector<double> a, b;
    for (const auto& s : mastered) a.push_back(evaluate_complexity(s, scorer).loss);
    for (const auto& s : unlearned) b.push_back(evaluate_complexity(s, scorer).loss);
    return calibrate_from_losses(a, b);
}

std::string_view guidance_name(Guidance g) {
    switch (g) {
        case Guidance::Complicate: return "complicate";
        case Guidance::Simplify: return "simplify";
        case Guidance::Keep: return "keep";
    }
    return "keep";
}

Guidance guidance_for(const ComplexityScore& score, const ComplexityRange& range) {
    if (score.loss < range.lower) return Guidance::Complicate;
    if (score.loss > range.upper) return Guidance::Simplify;
    return Guidance::Keep;
}

double query_api_dissimilarity(std::string_view query, const std::vector<ApiDefinition>& tools) {
    auto q = word_tokens(query);
    std::set<std::string> a(q.begin(), q.end()), b;
    for (const auto& t : tools) {
        for (auto& w : word_tokens(t.name)) b.insert(w);
        for (auto& w : word_tokens(t.description)) b.insert(w);
    }
    if (a.empty() && b.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& w : a) inter += b.count(w);
    double uni = static_cast<double>(a.size() + b.size() - inter);
    return 1.0 - static_cast<double>(inter) / uni;
}

}  // namespace toolforge::sdg
