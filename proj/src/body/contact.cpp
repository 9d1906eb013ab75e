#include "whamkit/body/contact.h"

#include "whamkit/core/error.h"

#include <cmath>

namespace whamkit::body {

double contact_probability(double speed, const ContactLabelParams& params) {
  return 1.0 / (1.0 + std::exp(params.alpha * (speed - params.threshold) / params.threshold));
}

std::vector<Contact> contact_speeds(const MotionSequence& seq) {
  const int n = seq.length();
  if (n < 2) throw InvalidInput("contact labels: need at least two frames");
  std::vector<Contact> speed(static_cast<std::size_t>(n));
  Landmarks prev = world_landmarks(seq, 0);
  for (int t = 1; t < n; ++t) {
    const Landmarks cur = world_landmarks(seq, t);
    for (std::size_t k = 0; k < kContactLandmarks.size(); ++k) {
      const int lm = kContactLandmarks[k];
      speed[static_cast<std::size_t>(t)][k] = (cur.row(lm) - prev.row(lm)).norm();
    }
    prev = cur;
  }
  speed[0] = speed[1];
  return speed;
}

std::vector<Contact> generate_contact_labels(const MotionSequence& seq,
                                             const ContactLabelParams& params) {
  std::vector<Contact> out = contact_speeds(seq);
  for (auto& frame : out) {
    for (double& v : frame) v = contact_probability(v, params);
  }
  return out;
}

}  // namespace whamkit::body
