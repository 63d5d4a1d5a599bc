#pragma once

#include "rtcx/descriptor.hpp"

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtcx::rtsim {

class ChannelError : public std::runtime_error {
 public:
  enum class Code { SizeMismatch };
  ChannelError(Code code, const std::string& what);
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Single-slot last-value data channel. A write atomically replaces the
/// whole slot and bumps the version; readers always observe one complete
/// write. One writer, any number of readers.
class ShmChannel {
 public:
  ShmChannel(std::string name, PortDataType type, std::uint32_t size_elems);

  const std::string& name() const { return name_; }
  PortDataType data_type() const { return type_; }
  std::uint32_t size_elems() const { return size_elems_; }
  std::size_t byte_size() const { return slot_capacity_; }

  void write(std::span<const std::byte> data);  // data.size() must equal byte_size()
  void write_i32(std::span<const std::int32_t> values);

  struct Snapshot {
    std::vector<std::byte> data;
    std::uint64_t version = 0;
  };
  /// Current slot, or nullopt before the first write.
  std::optional<Snapshot> read() const;
  std::optional<std::vector<std::int32_t>> read_i32() const;

  std::uint64_t version() const;  // 0 until first write

 private:
  std::string name_;
  PortDataType type_;
  std::uint32_t size_elems_;
  std::size_t slot_capacity_;

  mutable std::shared_mutex mu_;
  std::vector<std::byte> slot_;
  std::uint64_t version_ = 0;
};

enum class SendResult { Ok, Overflow };

/// Bounded FIFO message channel with fixed-size messages. A send on a full
/// queue is rejected (the queue is left unchanged) so overload is visible to
/// the producer. Any number of writers, one reader.
class MailboxChannel {
 public:
  static constexpr std::size_t kDefaultCapacity = 16;

  MailboxChannel(std::string name, PortDataType type, std::uint32_t size_elems,
                 std::size_t capacity = kDefaultCapacity);

  const std::string& name() const { return name_; }
  PortDataType data_type() const { return type_; }
  std::uint32_t size_elems() const { return size_elems_; }
  std::size_t message_bytes() const { return message_bytes_; }
  std::size_t capacity() const { return capacity_; }

  SendResult send(std::span<const std::byte> message);  // size checked
  SendResult send_i32(std::span<const std::int32_t> values);

  std::optional<std::vector<std::byte>> recv();  // non-blocking, nullopt when empty
  std::size_t pending() const;

  /// Blocks until a message is queued or `cancelled` returns true. Used by
  /// aperiodic task workers in wall-clock mode.
  bool wait_for_message(const std::function<bool()>& cancelled);
  void notify_waiters();

 private:
  std::string name_;
  PortDataType type_;
  std::uint32_t size_elems_;
  std::size_t message_bytes_;
  std::size_t capacity_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::vector<std::byte>> queue_;
};

}  // namespace rtcx::rtsim
