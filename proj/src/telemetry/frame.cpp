#include "innervsense/frame.hpp"

#include <algorithm>
#include <array>
#include <cstring>

#include "innervsense/error.hpp"

namespace innervsense {

namespace {

constexpr std::array<std::uint16_t, 256> make_crc_table() {
  std::array<std::uint16_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint16_t c = static_cast<std::uint16_t>(i << 8);
    for (int bit = 0; bit < 8; ++bit) {
      c = static_cast<std::uint16_t>((c & 0x8000) ? (c << 1) ^ 0x1021 : c << 1);
    }
    table[i] = c;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

bool valid_type(std::uint8_t t) { return t >= 0x01 && t <= 0x03; }

// Total frame length implied by a header, or 0 when the header is invalid.
// Needs kHeaderSize bytes, plus two more for text frames (returns
// kHeaderSize + 2 as a request for more when they are missing).
std::size_t frame_length(const std::uint8_t* p, std::size_t available, bool* need_more) {
  *need_more = false;
  if (p[2] != kProtocolVersion || !valid_type(p[3])) return 0;
  const auto type = static_cast<MsgType>(p[3]);
  const std::size_t n_ch = p[16];
  if (type == MsgType::data) {
    if (n_ch == 0 || n_ch > kMaxChannels) return 0;
    return data_frame_size(n_ch);
  }
  if (n_ch != 0) return 0;
  if (available < kHeaderSize + 2) {
    *need_more = true;
    return 0;
  }
  const std::size_t len = get_u16(p + kHeaderSize);
  if (len > kMaxTextBytes) return 0;
  return kHeaderSize + 2 + len + 2;
}

Frame parse_body(const std::uint8_t* p) {
  Frame f;
  f.type = static_cast<MsgType>(p[3]);
  f.device_id = get_u16(p + 4);
  f.seq = get_u16(p + 6);
  f.timestamp_us = get_u64(p + 8);
  const std::size_t n_ch = p[16];
  if (f.type == MsgType::data) {
    f.channels.resize(n_ch);
    for (std::size_t i = 0; i < n_ch; ++i) {
      f.channels[i] = static_cast<std::int16_t>(get_u16(p + kHeaderSize + 2 * i));
    }
  } else {
    const std::size_t len = get_u16(p + kHeaderSize);
    f.text.assign(reinterpret_cast<const char*>(p + kHeaderSize + 2), len);
  }
  return f;
}

bool crc_ok(const std::uint8_t* p, std::size_t size) {
  const std::uint16_t stored = get_u16(p + size - 2);
  return crc16_ccitt_false({p + 2, size - 4}) == stored;
}

}  // namespace

std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) noexcept {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : bytes) {
    crc = static_cast<std::uint16_t>((crc << 8) ^ kCrcTable[((crc >> 8) ^ b) & 0xFF]);
  }
  return crc;
}

void append_frame(std::vector<std::uint8_t>& out, const Frame& frame) {
  if (frame.type == MsgType::data) {
    if (frame.channels.empty() || frame.channels.size() > kMaxChannels) {
      throw Error(Errc::invalid_frame, "data frames carry 1.." + std::to_string(kMaxChannels) + " channels");
    }
    if (!frame.text.empty()) throw Error(Errc::invalid_frame, "data frames carry no text");
  } else if (frame.type == MsgType::meta || frame.type == MsgType::event) {
    if (!frame.channels.empty()) throw Error(Errc::invalid_frame, "text frames carry no channels");
    if (frame.text.size() > kMaxTextBytes) throw Error(Errc::invalid_frame, "text payload too long");
  } else {
    throw Error(Errc::invalid_frame, "unknown message type");
  }

  const std::size_t start = out.size();
  out.push_back(kMagic0);
  out.push_back(kMagic1);
  out.push_back(kProtocolVersion);
  out.push_back(static_cast<std::uint8_t>(frame.type));
  put_u16(out, frame.device_id);
  put_u16(out, frame.seq);
  put_u64(out, frame.timestamp_us);
  if (frame.type == MsgType::data) {
    out.push_back(static_cast<std::uint8_t>(frame.channels.size()));
    for (std::int16_t c : frame.channels) put_u16(out, static_cast<std::uint16_t>(c));
  } else {
    out.push_back(0);
    put_u16(out, static_cast<std::uint16_t>(frame.text.size()));
    out.insert(out.end(), frame.text.begin(), frame.text.end());
  }
  put_u16(out, crc16_ccitt_false({out.data() + start + 2, out.size() - start - 2}));
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  std::vector<std::uint8_t> out;
  out.reserve(data_frame_size(std::max<std::size_t>(1, frame.channels.size())) + frame.text.size() + 2);
  append_frame(out, frame);
  return out;
}

Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize + 2 || bytes[0] != kMagic0 || bytes[1] != kMagic1) {
    throw Error(Errc::invalid_frame, "missing magic or short frame");
  }
  bool need_more = false;
  const std::size_t len = frame_length(bytes.data(), bytes.size(), &need_more);
  if (len == 0 || len != bytes.size()) throw Error(Errc::invalid_frame, "frame length inconsistent with header");
  if (!crc_ok(bytes.data(), len)) throw Error(Errc::crc_mismatch, "CRC does not match");
  return parse_body(bytes.data());
}

void FrameDecoder::discard(std::size_t n) {
  head_ += n;
  discarded_.fetch_add(n, std::memory_order_relaxed);
  if (in_sync_) {
    resync_.fetch_add(1, std::memory_order_relaxed);
    in_sync_ = false;
  }
}

void FrameDecoder::note_seq(std::uint16_t seq) {
  const std::int32_t last = last_seq_.load(std::memory_order_relaxed);
  if (last >= 0) {
    const auto expected = static_cast<std::uint16_t>(last + 1);
    if (seq != expected) {
      const auto gap = static_cast<std::uint16_t>(seq - expected);
      gaps_.fetch_add(1, std::memory_order_relaxed);
      missing_.fetch_add(gap, std::memory_order_relaxed);
      last_gap_.store(gap, std::memory_order_relaxed);
    }
  }
  last_seq_.store(seq, std::memory_order_relaxed);
}

std::size_t FrameDecoder::feed(std::span<const std::uint8_t> bytes, std::vector<Frame>& out) {
  if (head_ > 0 && head_ >= buf_.size() / 2) {
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(head_));
    head_ = 0;
  }
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  return scan(out, false);
}

std::size_t FrameDecoder::scan(std::vector<Frame>& out, bool at_end) {
  const std::size_t before = out.size();
  for (;;) {
    const std::size_t avail = buf_.size() - head_;
    const std::uint8_t* p = buf_.data() + head_;
    // Locate the next magic.
    std::size_t pos = 0;
    while (pos + 1 < avail && !(p[pos] == kMagic0 && p[pos + 1] == kMagic1)) ++pos;
    if (pos + 1 >= avail) {
      // Keep a trailing 0xA5: it may start the next magic.
      const std::size_t keep = (avail > 0 && p[avail - 1] == kMagic0) ? 1 : 0;
      if (avail - keep > 0) discard(avail - keep);
      break;
    }
    if (pos > 0) {
      discard(pos);
      continue;
    }
    if (avail < kHeaderSize) break;
    bool need_more = false;
    const std::size_t len = frame_length(p, avail, &need_more);
    if (need_more && !at_end) break;
    if (len == 0) {
      discard(1);
      continue;
    }
    if (avail < len) {
      if (!at_end) break;
      discard(1);
      continue;
    }
    if (!crc_ok(p, len)) {
      crc_fail_.fetch_add(1, std::memory_order_relaxed);
      discard(1);
      continue;
    }
    Frame f = parse_body(p);
    head_ += len;
    in_sync_ = true;
    note_seq(f.seq);
    ok_.fetch_add(1, std::memory_order_relaxed);
    out.push_back(std::move(f));
  }
  return out.size() - before;
}

std::vector<Frame> FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  std::vector<Frame> out;
  feed(bytes, out);
  return out;
}

std::size_t FrameDecoder::finish(std::vector<Frame>& out) {
  const std::size_t head = head_;
  const std::uint64_t crc_fail = crc_fail_.load(), resync = resync_.load(), discarded = discarded_.load();
  const bool in_sync = in_sync_;
  const std::size_t n = scan(out, true);
  if (n == 0) {
    // Nothing recovered: the whole tail is one truncated frame.
    head_ = head;
    crc_fail_.store(crc_fail);
    resync_.store(resync);
    discarded_.store(discarded);
    in_sync_ = in_sync;
  }
  const std::size_t rest = buf_.size() - head_;
  truncated_.fetch_add(rest, std::memory_order_relaxed);
  buf_.clear();
  head_ = 0;
  return n;
}

StreamHealth FrameDecoder::health() const {
  StreamHealth h;
  h.frames_ok = ok_.load(std::memory_order_relaxed);
  h.frames_crc_fail = crc_fail_.load(std::memory_order_relaxed);
  h.frames_resync = resync_.load(std::memory_order_relaxed);
  h.gaps = gaps_.load(std::memory_order_relaxed);
  h.missing_frames = missing_.load(std::memory_order_relaxed);
  h.last_gap = last_gap_.load(std::memory_order_relaxed);
  h.bytes_discarded = discarded_.load(std::memory_order_relaxed);
  h.truncated_bytes = truncated_.load(std::memory_order_relaxed);
  h.last_seq = last_seq_.load(std::memory_order_relaxed);
  return h;
}

std::vector<Frame> decode_all(std::span<const std::uint8_t> bytes, StreamHealth* health) {
  FrameDecoder dec;
  std::vector<Frame> frames;
  dec.feed(bytes, frames);
  dec.finish(frames);
  if (health) *health = dec.health();
  return frames;
}

}  // namespace innervsense
