#include "flpadv/llm.hpp"

#include <algorithm>
#include <memory>

namespace flpadv {

ScriptedLlmProvider ScriptedLlmProvider::sequence(std::vector<std::string> responses) {
    auto shared = std::make_shared<const std::vector<std::string>>(std::move(responses));
    return ScriptedLlmProvider([shared](const std::string&, std::size_t call) {
        if (shared->empty()) return std::string();
        return (*shared)[std::min(call, shared->size() - 1)];
    });
}

ScriptedLlmProvider ScriptedLlmProvider::constant(std::string response) {
    return ScriptedLlmProvider([response = std::move(response)](const std::string&, std::size_t) {
        return response;
    });
}

std::string ScriptedLlmProvider::complete(const std::string& prompt) {
    std::size_t call = 0;
    {
        std::lock_guard lock(mutex_);
        call = prompts_.size();
        prompts_.push_back(prompt);
    }
    return responder_(prompt, call);
}

std::vector<std::string> ScriptedLlmProvider::prompts() const {
    std::lock_guard lock(mutex_);
    return prompts_;
}

std::size_t ScriptedLlmProvider::call_count() const {
    std::lock_guard lock(mutex_);
    return prompts_.size();
}

}  // namespace flpadv
