#include "fieldtrace/topics.hpp"

#include <fstream>

#include "fieldtrace/error.hpp"
#include "fieldtrace/text.hpp"

namespace fieldtrace {

const std::vector<std::string>& default_topics() {
  static const std::vector<std::string> topics = {
      "Causal inference and treatment effect estimation",
      "Bayesian optimization and probabilistic modeling",
      "Reinforcement learning and policy optimization",
      "Robustness and adversarial machine learning",
      "Explainable AI and interpretability methods",
      "Representation learning and self-supervised learning",
      "Graph neural networks and graph learning",
      "Federated learning and distributed ML",
      "Fairness and bias mitigation in ML",
      "ML evaluation, benchmarks, and reproducibility",
      "Information extraction and relation extraction",
      "Question answering and retrieval-augmented generation",
      "Machine translation and multilingual NLP",
      "Summarization and factual consistency",
      "Dialogue systems and conversational agents",
      "Prompting and instruction tuning methods",
      "NLP robustness, safety, and alignment",
      "Text generation evaluation and metrics",
      "Knowledge grounding and entity linking",
      "Long-context modeling and efficient attention",
      "Image classification and representation learning",
      "Object detection and instance segmentation",
      "Vision transformers and efficient vision models",
      "3D vision and point cloud understanding",
      "Visual question answering and vision-language models",
      "Video understanding and temporal action recognition",
      "Generative vision models and diffusion",
      "Self-supervised learning for vision",
      "Vision robustness and adversarial attacks",
      "Medical imaging and computer-aided diagnosis",
      "Distributed systems and consensus protocols",
      "Cloud computing and serverless architectures",
      "Storage systems and key-value stores",
      "Operating systems scheduling and resource management",
      "Compilers and code optimization",
      "Systems performance modeling and profiling",
      "Datacenter networking and traffic engineering",
      "GPU systems and ML systems optimization",
      "Fault tolerance and reliability engineering",
      "Observability and telemetry systems",
      "Network security and intrusion detection",
      "Cryptography and secure computation",
      "Privacy-preserving data analysis and differential privacy",
      "Malware analysis and reverse engineering",
      "Web security and authentication protocols",
      "Database query optimization and indexing",
      "Data integration and entity resolution",
      "Human-computer interaction and usability studies",
      "Program analysis and static/dynamic analysis",
      "Approximation algorithms and randomized algorithms",
  };
  return topics;
}

std::vector<std::string> load_topics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open topic list " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

void write_topics(const std::filesystem::path& path, const std::vector<std::string>& topics) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  for (const auto& t : topics) out << t << '\n';
}

}  // namespace fieldtrace
