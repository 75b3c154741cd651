#ifndef ABSA_TOOLS_CLI_H_
#define ABSA_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "absa/gbn.h"
#include "absa/subjectivity.h"

namespace absa::cli {

// Runs the absa command line. args excludes the program name. Returns the
// process exit code; failures print one diagnostic line to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SubjPipelineOptions {
  std::size_t top_clues = 50;
  std::size_t top_motifs = 10;
  double tau = -1e300;
  StructureOptions structure;
  SubjectivityConfig model;
};

struct SubjPipelineResult {
  std::vector<std::string> clue_words;
  GaussianNet gbn;
  MotifSet motifs;
};

// Clue selection, structure learning and motif extraction over the sentence
// sequence of a labeled corpus. With no clue word in the corpus the network
// and the motif set are empty.
SubjPipelineResult learn_motifs(std::span<const LabeledSentence> corpus, const Lexicon& clues,
                                const SubjPipelineOptions& options);

}  // namespace absa::cli

#endif  // ABSA_TOOLS_CLI_H_
