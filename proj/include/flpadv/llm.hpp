#pragma once

#include <cstddef>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

namespace flpadv {

class LlmProvider {
public:
    virtual ~LlmProvider() = default;

    // Transport or provider failures are reported as ProviderError.
    virtual std::string complete(const std::string& prompt) = 0;
};

// Test double driven by a script. Every prompt is recorded; the responder
// sees the prompt and the zero-based call index.
class ScriptedLlmProvider final : public LlmProvider {
public:
    using Responder = std::function<std::string(const std::string& prompt, std::size_t call)>;

    explicit ScriptedLlmProvider(Responder responder) : responder_(std::move(responder)) {}

    // Replies with responses[i] on call i, repeating the last one afterwards.
    static ScriptedLlmProvider sequence(std::vector<std::string> responses);
    static ScriptedLlmProvider constant(std::string response);

    std::string complete(const std::string& prompt) override;

    std::vector<std::string> prompts() const;
    std::size_t call_count() const;

private:
    Responder responder_;
    mutable std::mutex mutex_;
    std::vector<std::string> prompts_;
};

}  // namespace flpadv
