#include <thread>

#include <nlohmann/json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "csqe/llm.hpp"
#include "csqe/log.hpp"

namespace csqe {
namespace {

bool retriable_status(int status) { return status == 408 || status == 409 || status == 429 || status >= 500; }

}  // namespace

std::string chat_request_body(const GenerationRequest& req, std::size_t n) {
    nlohmann::json body = {
        {"model", req.model_id},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", req.prompt}}})},
        {"temperature", req.temperature},
        {"n", n},
    };
    return body.dump();
}

std::vector<std::string> parse_chat_response(std::string_view body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw BackendError(std::string("malformed chat-completion response: ") + e.what(), 0, false);
    }
    auto choices = doc.find("choices");
    if (choices == doc.end() || !choices->is_array())
        throw BackendError("chat-completion response has no \"choices\" array", 0, false);

    std::vector<std::string> texts;
    for (const auto& choice : *choices) {
        const auto* content = &choice;
        for (const char* key : {"message", "content"}) {
            if (!content->is_object() || !content->contains(key))
                throw BackendError("chat-completion choice lacks message.content", 0, false);
            content = &(*content)[key];
        }
        // A null content is an empty completion.
        texts.push_back(content->is_string() ? content->get<std::string>() : std::string());
    }
    return texts;
}

RemoteBackend::RemoteBackend(RemoteConfig cfg) : cfg_(std::move(cfg)) {
    const auto& url = cfg_.endpoint;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    base_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

std::string RemoteBackend::identity() const { return "remote:" + cfg_.endpoint; }

std::vector<std::string> RemoteBackend::post_once(const GenerationRequest& req, std::size_t n) {
    httplib::Client client(base_);
    client.set_connection_timeout(cfg_.timeout);
    client.set_read_timeout(cfg_.timeout);
    client.set_write_timeout(cfg_.timeout);

    httplib::Headers headers;
    if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

    auto res = client.Post(path_, headers, chat_request_body(req, n), "application/json");
    if (!res) throw BackendError("request to " + cfg_.endpoint + " failed: " + httplib::to_string(res.error()), 0, true);
    if (res->status != 200) {
        throw BackendError("HTTP " + std::to_string(res->status) + " from " + cfg_.endpoint + ": " +
                               res->body.substr(0, 200),
                           res->status, retriable_status(res->status));
    }
    return parse_chat_response(res->body);
}

std::vector<std::string> RemoteBackend::post(const GenerationRequest& req, std::size_t n) {
    auto delay = cfg_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
        try {
            return post_once(req, n);
        } catch (const BackendError& e) {
            if (!e.retriable() || attempt >= cfg_.max_retries) throw;
            log::warn("{} (retry {}/{} in {} ms)", e.what(), attempt + 1, cfg_.max_retries, delay.count());
            std::this_thread::sleep_for(delay);
            delay *= 2;
        }
    }
}

std::vector<std::string> RemoteBackend::generate(const GenerationRequest& req) {
    req.validate();
    count_call();
    std::vector<std::string> texts;
    if (cfg_.multi_choice) {
        texts = post(req, req.n_samples);
        if (texts.size() > req.n_samples) texts.resize(req.n_samples);
    }
    while (texts.size() < req.n_samples) {
        auto one = post(req, 1);
        if (one.empty()) throw BackendError("chat-completion response has no choices", 0, false);
        texts.push_back(std::move(one.front()));
    }
    return texts;
}

std::string RemoteBackend::generate_sample(const GenerationRequest& req, std::size_t /*ordinal*/) {
    req.validate();
    count_call();
    auto texts = post(req, 1);
    if (texts.empty()) throw BackendError("chat-completion response has no choices", 0, false);
    return std::move(texts.front());
}

}  // namespace csqe
