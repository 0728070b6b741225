#include "pmfgn/corpus/types.hpp"

#include "pmfgn/error.hpp"

namespace pmfgn::corpus {

void validate(const AssignmentRecord& r) {
  const std::string where = "record '" + r.id + "': ";
  if (r.id.empty()) throw ValidationError("record with empty id");
  if (r.teacher_id.empty()) throw ValidationError(where + "empty teacher_id");
  if (r.speech_tokens.empty()) throw ValidationError(where + "speech_tokens must be nonempty");
  if (r.question_tokens.empty()) throw ValidationError(where + "question_tokens must be nonempty");
  if (r.feedback_tokens.empty()) throw ValidationError(where + "feedback_tokens must be nonempty");
  if (r.modality_labels.size() != r.feedback_tokens.size()) {
    throw ValidationError(where + "modality_labels length differs from feedback_tokens");
  }
  for (int label : r.modality_labels) {
    if (label < 0 || label >= kNumModalities) throw ValidationError(where + "modality label outside {0,1,2,3}");
  }
  if (r.references.empty()) throw ValidationError(where + "references must be nonempty");
  if (r.image.width != kImageSize || r.image.height != kImageSize ||
      r.image.data.size() != static_cast<std::size_t>(r.image.width) * r.image.height) {
    throw ValidationError(where + "image must be 64x64");
  }
  if (r.audio.sample_rate != kSampleRate) throw ValidationError(where + "audio must be 16000 Hz");
}

}  // namespace pmfgn::corpus
