#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace inspect {

/// Philox4x32-10 block function (Salmon et al., Random123).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

std::uint64_t fnv1a64(std::string_view text);
std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based generator. A stream is identified by (key, stream index);
/// the block counter advances as values are consumed, so any stream can be
/// recreated from its identity alone.
///
/// Gaussian variates use the Box-Muller transform on two 53-bit uniforms in
/// the open interval (0, 1); both outputs of a pair are used, in order.
class Rng {
 public:
  Rng(std::uint64_t key, std::uint64_t stream);

  /// Stream for (global seed, purpose tag, index).
  static Rng derive(std::uint64_t seed, std::string_view purpose,
                    std::uint64_t index = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform double in the open interval (0, 1).
  double uniform();
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal();

  [[nodiscard]] std::uint64_t key() const { return key_; }
  [[nodiscard]] std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace inspect
