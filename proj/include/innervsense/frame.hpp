#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace innervsense {

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no xorout.
std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) noexcept;

enum class MsgType : std::uint8_t { data = 0x01, meta = 0x02, event = 0x03 };

// Wire layout, little-endian:
//   A5 5A | version u8 | msg_type u8 | device_id u16 | seq u16 | timestamp_us u64 | n_ch u8 |
//   data:        n_ch x i16 counts
//   meta/event:  n_ch = 0, text length u16, UTF-8 text
//   | crc u16 over version..payload
struct Frame {
  MsgType type = MsgType::data;
  std::uint16_t device_id = 0;
  std::uint16_t seq = 0;
  std::uint64_t timestamp_us = 0;
  std::vector<std::int16_t> channels;  // data frames
  std::string text;                    // meta / event frames

  friend bool operator==(const Frame&, const Frame&) = default;
};

inline constexpr std::uint8_t kMagic0 = 0xA5;
inline constexpr std::uint8_t kMagic1 = 0x5A;
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kHeaderSize = 17;  // magic through n_ch
inline constexpr std::size_t kMaxChannels = 64;
inline constexpr std::size_t kMaxTextBytes = 8192;

constexpr std::size_t data_frame_size(std::size_t n_ch) { return kHeaderSize + 2 * n_ch + 2; }

// Throws Errc::invalid_frame when payload and type disagree.
std::vector<std::uint8_t> encode_frame(const Frame& frame);
void append_frame(std::vector<std::uint8_t>& out, const Frame& frame);

// Decodes exactly one frame occupying all of `bytes`. Throws
// Errc::invalid_frame or Errc::crc_mismatch.
Frame decode_frame(std::span<const std::uint8_t> bytes);

struct StreamHealth {
  std::uint64_t frames_ok = 0;
  std::uint64_t frames_crc_fail = 0;
  std::uint64_t frames_resync = 0;
  std::uint64_t gaps = 0;           // seq discontinuities
  std::uint64_t missing_frames = 0; // frames skipped over by all gaps
  std::uint64_t last_gap = 0;       // size of the most recent gap
  std::uint64_t bytes_discarded = 0;
  std::uint64_t truncated_bytes = 0; // incomplete tail at finish()
  std::int32_t last_seq = -1;

  friend bool operator==(const StreamHealth&, const StreamHealth&) = default;
};

// Incremental decoder for an arbitrary (possibly corrupted) byte stream. It
// scans for the magic, validates the header and CRC, and on any failure drops
// one byte and rescans. Health counters are atomics and may be read from any
// thread while another thread feeds.
class FrameDecoder {
 public:
  FrameDecoder() = default;
  FrameDecoder(const FrameDecoder&) = delete;
  FrameDecoder& operator=(const FrameDecoder&) = delete;

  // Appends decoded frames to `out`; returns how many were added.
  std::size_t feed(std::span<const std::uint8_t> bytes, std::vector<Frame>& out);
  std::vector<Frame> feed(std::span<const std::uint8_t> bytes);

  // Declares end of stream. A buffered header claiming more bytes than remain
  // cannot be a frame, so the tail is rescanned and any frames in it are
  // appended to `out`. Bytes left over are counted as truncated.
  std::size_t finish(std::vector<Frame>& out);

  StreamHealth health() const;
  std::size_t buffered() const noexcept { return buf_.size() - head_; }

 private:
  std::size_t scan(std::vector<Frame>& out, bool at_end);
  void discard(std::size_t n);
  void note_seq(std::uint16_t seq);

  std::vector<std::uint8_t> buf_;
  std::size_t head_ = 0;
  bool in_sync_ = true;

  std::atomic<std::uint64_t> ok_{0}, crc_fail_{0}, resync_{0}, gaps_{0}, missing_{0}, last_gap_{0}, discarded_{0},
      truncated_{0};
  std::atomic<std::int32_t> last_seq_{-1};
};

// Decodes a complete byte buffer (e.g. a raw.bin log).
std::vector<Frame> decode_all(std::span<const std::uint8_t> bytes, StreamHealth* health = nullptr);

}  // namespace innervsense
