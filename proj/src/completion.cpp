#include "tae/completion.hpp"

#include <sstream>

#include "json.hpp"
#include "tae/error.hpp"
#include "tae/http.hpp"
#include "tae/util.hpp"

namespace tae {
namespace {

// Document segment of a prompt: between the first "Input: " and the final
// output marker.
std::string prompt_input(std::string_view prompt) {
  auto start = prompt.find("Input: ");
  start = start == std::string_view::npos ? 0 : start + 7;
  auto end = prompt.rfind("Output:");
  if (end == std::string_view::npos || end < start) end = prompt.size();
  return util::trim(prompt.substr(start, end - start));
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string clean;
    for (char c : line)
      if (c != '{' && c != '}' && c != '[' && c != ']' && c != '"') clean.push_back(c);
    clean = util::trim(clean);
    while (!clean.empty() && clean.back() == ',') clean.pop_back();
    if (clean.rfind("title:", 0) == 0 || clean.rfind("heading:", 0) == 0) clean = util::trim(clean.substr(clean.find(':') + 1));
    if (clean.empty() || clean.back() == ':') continue;
    out.push_back(clean);
  }
  return out;
}

std::vector<std::string> sentences_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < text.size(); ++i) {
    cur.push_back(text[i]);
    const bool end = (text[i] == '.' || text[i] == '?' || text[i] == '!') &&
                     (i + 1 == text.size() || text[i + 1] == ' ');
    if (end) {
      if (auto s = util::trim(cur); !s.empty()) out.push_back(s);
      cur.clear();
    }
  }
  if (auto s = util::trim(cur); !s.empty()) out.push_back(s);
  return out;
}

// Deterministic pseudo-random choice driven by prompt, temperature and salt.
bool drop(const std::string& prompt, double temperature, std::size_t salt) {
  if (temperature <= 0.0) return false;
  const auto h = util::fnv1a64(prompt + "#" + std::to_string(salt) + "#" + std::to_string(temperature));
  return static_cast<double>(h % 1000) / 1000.0 < 0.3 * temperature;
}

std::string synthetic_ir(const std::string& prompt, double temperature) {
  const auto doc = prompt_input(prompt);
  std::vector<std::string> paragraphs;
  std::string cur;
  std::istringstream in(doc);
  std::string line;
  while (std::getline(in, line)) {
    if (util::trim(line).empty()) {
      if (!cur.empty()) paragraphs.push_back(cur);
      cur.clear();
    } else {
      cur += (cur.empty() ? "" : " ") + util::trim(line);
    }
  }
  if (!cur.empty()) paragraphs.push_back(cur);

  nlohmann::ordered_json j;
  j["title"] = paragraphs.empty() ? "" : paragraphs.front();
  j["authors"] = nlohmann::json::array();
  auto& secs = j["sections"] = nlohmann::ordered_json::array();
  for (std::size_t p = 1; p < paragraphs.size(); ++p) {
    auto sents = sentences_of(paragraphs[p]);
    nlohmann::ordered_json s;
    s["heading"] = "Part " + std::to_string(p);
    auto& kept = s["sentences"] = nlohmann::json::array();
    for (std::size_t k = 0; k < sents.size() && kept.size() < 2; ++k)
      if (!drop(prompt, temperature, p * 100 + k)) kept.push_back(sents[k]);
    secs.push_back(std::move(s));
  }
  return "```json\n" + j.dump(2) + "\n```\n";
}

std::string synthetic_view(const std::string& prompt, double temperature) {
  const auto type = [&] {
    const auto a = prompt.find(" in a ");
    const auto b = prompt.find(" style.");
    return a == std::string::npos || b == std::string::npos ? std::string("document")
                                                            : prompt.substr(a + 6, b - a - 6);
  }();
  auto items = lines_of(prompt_input(prompt));
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (i == 0 || !drop(prompt, temperature, i)) kept.push_back(items[i]);
  const std::string title = kept.empty() ? "Untitled" : kept.front();

  std::ostringstream os;
  if (type == "slide deck") {
    os << "\\documentclass{beamer}\n\\title{" << title << "}\n\\begin{document}\n"
       << "\\begin{frame}\n\\titlepage\n\\end{frame}\n";
    for (std::size_t i = 1; i < kept.size(); i += 3) {
      os << "\\begin{frame}{Slide " << (i / 3 + 1) << "}\n\\begin{itemize}\n";
      for (std::size_t k = i; k < std::min(kept.size(), i + 3); ++k) os << "\\item " << kept[k] << "\n";
      os << "\\end{itemize}\n\\end{frame}\n";
    }
  } else if (type == "poster") {
    os << "\\documentclass{article}\n\\title{" << title << "}\n\\begin{document}\n\\maketitle\n";
    for (std::size_t i = 1; i < kept.size(); i += 2) {
      os << "\\section{Panel " << (i / 2 + 1) << "}\n";
      for (std::size_t k = i; k < std::min(kept.size(), i + 2); ++k) os << kept[k] << "\n";
    }
  } else {
    os << "\\documentclass{article}\n\\begin{document}\n\\section*{" << title << "}\n";
    for (std::size_t i = 1; i < kept.size(); ++i) os << kept[i] << "\n\n";
  }
  os << "\\end{document}\n";
  return os.str();
}

}  // namespace

HttpCompletionClient::HttpCompletionClient(CompletionEndpointConfig cfg) : cfg_(std::move(cfg)) {
  (void)http::Endpoint::parse(cfg_.url);
}

std::string HttpCompletionClient::complete(const CompletionRequest& request) {
  nlohmann::ordered_json body;
  body["model"] = request.model;
  body["prompt"] = request.prompt;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  const auto resp = http::post_json(cfg_.url, body.dump(), http::token_from_env(cfg_.auth_env), cfg_.timeout);
  auto j = nlohmann::json::parse(resp.body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string())
    throw ProviderError("completion endpoint returned a malformed response", false);
  return j["text"].get<std::string>();
}

std::filesystem::path StubCompletionClient::file_for(const std::filesystem::path& dir, const std::string& prompt) {
  return dir / (util::hash_hex(prompt) + ".txt");
}

std::string StubCompletionClient::complete(const CompletionRequest& request) {
  const auto path = file_for(dir_, request.prompt);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec))
    throw ProviderError("no canned completion " + path.string() + " for prompt hash " +
                            util::hash_hex(request.prompt),
                        false);
  return util::read_file(path);
}

std::string SyntheticCompletionClient::complete(const CompletionRequest& request) {
  if (request.prompt.rfind("Given the input text", 0) == 0) return synthetic_ir(request.prompt, request.temperature);
  return synthetic_view(request.prompt, request.temperature);
}

std::shared_ptr<CompletionClient> make_completion_client(const std::string& endpoint) {
  if (endpoint == "synthetic") return std::make_shared<SyntheticCompletionClient>();
  if (endpoint.rfind("stub:", 0) == 0) {
    const std::filesystem::path dir = endpoint.substr(5);
    if (!std::filesystem::is_directory(dir))
      throw ValidationError("endpoint: stub directory '" + dir.string() + "' does not exist");
    return std::make_shared<StubCompletionClient>(dir);
  }
  if (endpoint.rfind("http://", 0) == 0 || endpoint.rfind("https://", 0) == 0)
    return std::make_shared<HttpCompletionClient>(CompletionEndpointConfig{endpoint});
  throw ValidationError("endpoint: expected stub:<dir>, synthetic or an http(s) URL, got '" + endpoint + "'");
}

}  // namespace tae
