// Scores a prediction and locates the question's most similar sentence.
#include <iostream>

#include "mrcsplit.hpp"

int main() {
  using namespace mrcsplit;

  CanonicalItem item;
  item.id = "fig1";
  item.style = QuestionStyle::Extraction;
  item.context =
      "The Jacksonville Jaguars and the Carolina Panthers entered the league in 1995 as expansion "
      "teams. Both teams reached their conference championship games in their second season. "
      "Neither advanced to the Super Bowl that year.";
  item.question = "Which teams entered the league as expansion teams in 1995?";
  item.answers = {"The Jacksonville Jaguars and the Carolina Panthers"};

  const auto sentences = segment_sentences(item.context);
  const SimilarityProfile profile = build_profile(item);
  std::cout << "sentences: " << sentences.size() << "\n";
  for (std::size_t i = 0; i < sentences.size(); ++i)
    std::cout << "  s" << i + 1 << " overlap " << profile.per_sentence_overlap[i] << "\n";
  std::cout << "most similar: s" << profile.most_similar_index + 1
            << (profile.answer_in_most_similar ? " (contains the answer)" : "") << "\n";

  const ItemScore score = score_item(item, std::string("Jacksonville Jaguars and Carolina Panthers"));
  std::cout << "F1 " << score.primary.value << ", EM " << score.em.value_or(0) << "\n";

  const CanonicalItem k2 = truncate_question(item, {2});
  std::cout << "k=2 question: \"" << k2.question << "\"\n";
}
