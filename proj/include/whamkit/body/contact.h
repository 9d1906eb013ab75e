#pragma once

#include "whamkit/body/motion.h"

#include <vector>

namespace whamkit::body {

// Velocity-only contact label: p = 1 / (1 + exp(alpha * (v - v_t) / v_t)),
// v and v_t in meters per frame.
struct ContactLabelParams {
  double threshold = 0.01;  // 1 cm/frame
  double alpha = 5.0;
};

double contact_probability(double speed, const ContactLabelParams& params = {});

// Per-frame displacement magnitude of each contact landmark in world
// coordinates; frame 0 copies frame 1.
std::vector<Contact> contact_speeds(const MotionSequence& seq);

std::vector<Contact> generate_contact_labels(const MotionSequence& seq,
                                             const ContactLabelParams& params = {});

}  // namespace whamkit::body
