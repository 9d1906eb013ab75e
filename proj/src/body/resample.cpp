#include "whamkit/body/resample.h"

#include "whamkit/body/contact.h"
#include "whamkit/core/error.h"
#include "whamkit/geom/so3.h"

#include <algorithm>
#include <cmath>

namespace whamkit::body {

MotionSequence resample_speed(const MotionSequence& seq, double factor) {
  if (!(factor >= kMinSpeedFactor && factor <= kMaxSpeedFactor)) {
    throw InvalidInput("resample_speed: factor must lie in [0.5, 1.5]");
  }
  seq.validate();
  if (factor == 1.0) return seq;

  const int src_len = seq.length();
  const int len = std::max(2, static_cast<int>(std::lround(src_len / factor)));
  MotionSequence out;
  out.fps = seq.fps;
  const auto n = static_cast<std::size_t>(len);
  out.local.resize(n);
  out.gamma.resize(n);
  out.tau.resize(n);
  for (int i = 0; i < len; ++i) {
    const double s = std::min(i * factor, static_cast<double>(src_len - 1));
    const int a = std::min(static_cast<int>(std::floor(s)), src_len - 2);
    const double w = s - a;
    const auto ia = static_cast<std::size_t>(a);
    const auto ib = ia + 1;
    const auto o = static_cast<std::size_t>(i);
    out.tau[o] = (1.0 - w) * seq.tau[ia] + w * seq.tau[ib];
    out.gamma[o] = geom::slerp(seq.gamma[ia], seq.gamma[ib], w);
    const Landmarks pos = (1.0 - w) * seq.local[ia].positions + w * seq.local[ib].positions;
    out.local[o] = LocalPose::from_positions(pos);
  }
  out.contact.assign(n, Contact{});
  out.contact = generate_contact_labels(out);
  return out;
}

}  // namespace whamkit::body
