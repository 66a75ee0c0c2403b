#pragma once

// Sends prompts to a chat-completion endpoint and records raw generations
// with provenance. Two deterministic mocks ship for offline runs:
//   mock://oracle - answers with the canonical serialization of the gold
//                   output (requires a gold lookup)
//   mock://copy   - answers with the example block's response verbatim,
//                   simulating the copy shortcut

#include <atomic>
#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ramie/core.hpp"
#include "ramie/detail/hash.hpp"
#include "ramie/detail/http.hpp"
#include "ramie/prompting.hpp"

namespace ramie {

struct EndpointError : Error {
    using Error::Error;
};

struct ModelEndpointSpec {
    std::string base_url;  // http(s)://host[:port][/path] or mock://oracle|copy
    std::string model;
    double temperature = 0.0;  // exact-match evaluation presumes greedy decoding
    int max_tokens = 512;
    int timeout_ms = 30000;
    int retries = 2;
    std::string api_key_env;
    int max_in_flight = 4;
};

struct GenerationRecord {
    std::string record_id;
    TaskKind task = TaskKind::NER;
    std::string prompt_hash;
    std::string raw_generation;
    double latency_ms = 0.0;
    std::string endpoint_id;
    std::optional<std::string> error;  // permanent failure, never dropped
};

inline bool is_mock_endpoint(const ModelEndpointSpec& spec) {
    return spec.base_url.rfind("mock://", 0) == 0;
}

/// The example block's response line, or empty when the prompt has none.
inline std::string example_response_of_prompt(const std::string& prompt_text) {
    const std::string marker = "\nResponse: ";
    const auto pos = prompt_text.find(marker);
    if (pos == std::string::npos) return "";
    const auto start = pos + marker.size();
    const auto end = prompt_text.find('\n', start);
    return prompt_text.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

namespace detail {

inline GenerationRecord base_record(const Prompt& prompt, const ModelEndpointSpec& spec) {
    GenerationRecord rec;
    rec.record_id = prompt.record_id;
    rec.task = prompt.task;
    rec.prompt_hash = content_hash(prompt.rendered_text);
    rec.endpoint_id = spec.base_url + "#" + spec.model;
    return rec;
}

inline std::string chat_completion_body(const ModelEndpointSpec& spec, const Prompt& prompt) {
    nlohmann::json body{
        {"model", spec.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt.rendered_text}}})},
        {"temperature", spec.temperature},
        {"max_tokens", spec.max_tokens}};
    return body.dump();
}

}  // namespace detail

/// One GenerationRecord per prompt, order preserved. Transient failures are
/// retried up to the budget; permanent failures become error-tagged records.
/// The oracle mock needs gold outputs keyed by record id.
inline std::vector<GenerationRecord> generate(
    const ModelEndpointSpec& spec, const std::vector<Prompt>& prompts,
    const std::map<std::string, GoldOutput>* oracle_gold = nullptr) {
    std::vector<GenerationRecord> records(prompts.size());

    if (spec.base_url == "mock://oracle") {
        if (!oracle_gold)
            throw ConfigError("mock://oracle requires gold outputs for the prompted records");
        for (std::size_t i = 0; i < prompts.size(); ++i) {
            records[i] = detail::base_record(prompts[i], spec);
            auto it = oracle_gold->find(prompts[i].record_id);
            if (it == oracle_gold->end())
                throw ConfigError("mock://oracle has no gold for record " +
                                  prompts[i].record_id);
            records[i].raw_generation = serialize_gold(it->second);
        }
        return records;
    }
    if (spec.base_url == "mock://copy") {
        for (std::size_t i = 0; i < prompts.size(); ++i) {
            records[i] = detail::base_record(prompts[i], spec);
            records[i].raw_generation = example_response_of_prompt(prompts[i].rendered_text);
        }
        return records;
    }
    if (is_mock_endpoint(spec))
        throw ConfigError("unknown mock endpoint: " + spec.base_url);

    if (!spec.api_key_env.empty() && detail::api_key_from_env(spec.api_key_env).empty())
        throw ConfigError("API key environment variable " + spec.api_key_env + " is not set");

    const auto url = detail::split_url(spec.base_url);
    const std::string path = url.path == "/" ? "/v1/chat/completions" : url.path;
    const std::string api_key = detail::api_key_from_env(spec.api_key_env);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        httplib::Client client(url.base);
        client.set_connection_timeout(0, spec.timeout_ms * 1000);
        client.set_read_timeout(spec.timeout_ms / 1000, (spec.timeout_ms % 1000) * 1000);
        if (!api_key.empty()) client.set_bearer_token_auth(api_key);
        for (std::size_t i = next.fetch_add(1); i < prompts.size(); i = next.fetch_add(1)) {
            GenerationRecord rec = detail::base_record(prompts[i], spec);
            const std::string body = detail::chat_completion_body(spec, prompts[i]);
            const auto started = std::chrono::steady_clock::now();
            std::string error;
            for (int attempt = 0; attempt <= spec.retries; ++attempt) {
                auto res = client.Post(path, body, "application/json");
                if (!res) {
                    error = "transport error: " + httplib::to_string(res.error());
                    continue;
                }
                if (res->status != 200) {
                    error = "HTTP " + std::to_string(res->status);
                    continue;
                }
                try {
                    const auto parsed = nlohmann::json::parse(res->body);
                    rec.raw_generation =
                        parsed.at("choices").at(0).at("message").at("content").get<std::string>();
                    error.clear();
                    break;
                } catch (const std::exception& e) {
                    error = std::string("bad response: ") + e.what();
                }
            }
            rec.latency_ms = std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();
            if (!error.empty()) rec.error = error;
            records[i] = std::move(rec);
        }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(std::max(1, spec.max_in_flight), prompts.size());
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < n_workers; ++i) workers.emplace_back(worker);
    for (auto& w : workers) w.join();
    return records;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json generation_to_json(const GenerationRecord& rec) {
    nlohmann::json obj{{"id", rec.record_id},
                       {"task", std::string(task_name(rec.task))},
                       {"prompt_hash", rec.prompt_hash},
                       {"generation", rec.raw_generation},
                       {"latency_ms", rec.latency_ms},
                       {"endpoint", rec.endpoint_id}};
    if (rec.error) obj["error"] = *rec.error;
    return obj;
}

inline GenerationRecord generation_from_json(const nlohmann::json& obj) {
    GenerationRecord rec;
    rec.record_id = obj.at("id").get<std::string>();
    rec.task = parse_task(obj.at("task").get<std::string>());
    rec.prompt_hash = obj.value("prompt_hash", "");
    rec.raw_generation = obj.value("generation", "");
    rec.latency_ms = obj.value("latency_ms", 0.0);
    rec.endpoint_id = obj.value("endpoint", "");
    if (obj.contains("error")) rec.error = obj.at("error").get<std::string>();
    return rec;
}

}  // namespace ramie
