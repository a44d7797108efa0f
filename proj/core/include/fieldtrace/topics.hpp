#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fieldtrace {

/// The bundled 50-topic list; topic_id indexes into it (0-based).
const std::vector<std::string>& default_topics();

/// One topic per line; blank lines ignored.
std::vector<std::string> load_topics(const std::filesystem::path& path);
void write_topics(const std::filesystem::path& path, const std::vector<std::string>& topics);

}  // namespace fieldtrace
