#include "rtcx/rtsim/channel.hpp"

#include <cstring>

namespace rtcx::rtsim {

ChannelError::ChannelError(Code code, const std::string& what)
    : std::runtime_error(what), code_(code) {}

ShmChannel::ShmChannel(std::string name, PortDataType type, std::uint32_t size_elems)
    : name_(std::move(name)),
      type_(type),
      size_elems_(size_elems),
      slot_capacity_(std::size_t{size_elems} * (type == PortDataType::Integer ? 4 : 1)) {}

void ShmChannel::write(std::span<const std::byte> data) {
  if (data.size() != slot_capacity_)
    throw ChannelError(ChannelError::Code::SizeMismatch,
                       "shm '" + name_ + "': wrote " + std::to_string(data.size()) +
                           " bytes, slot is " + std::to_string(slot_capacity_));
  std::unique_lock lock(mu_);
  slot_.assign(data.begin(), data.end());
  ++version_;
}

void ShmChannel::write_i32(std::span<const std::int32_t> values) {
  write(std::as_bytes(values));
}

std::optional<ShmChannel::Snapshot> ShmChannel::read() const {
  std::shared_lock lock(mu_);
  if (version_ == 0) return std::nullopt;
  return Snapshot{slot_, version_};
}

std::optional<std::vector<std::int32_t>> ShmChannel::read_i32() const {
  auto snap = read();
  if (!snap) return std::nullopt;
  std::vector<std::int32_t> values(snap->data.size() / 4);
  std::memcpy(values.data(), snap->data.data(), snap->data.size());
  return values;
}

std::uint64_t ShmChannel::version() const {
  std::shared_lock lock(mu_);
  return version_;
}

MailboxChannel::MailboxChannel(std::string name, PortDataType type, std::uint32_t size_elems,
                               std::size_t capacity)
    : name_(std::move(name)),
      type_(type),
      size_elems_(size_elems),
      message_bytes_(std::size_t{size_elems} * (type == PortDataType::Integer ? 4 : 1)),
      capacity_(capacity) {}

SendResult MailboxChannel::send(std::span<const std::byte> message) {
  if (message.size() != message_bytes_)
    throw ChannelError(ChannelError::Code::SizeMismatch,
                       "mailbox '" + name_ + "': message of " + std::to_string(message.size()) +
                           " bytes, expected " + std::to_string(message_bytes_));
  {
    std::lock_guard lock(mu_);
    if (queue_.size() >= capacity_) return SendResult::Overflow;
    queue_.emplace_back(message.begin(), message.end());
  }
  cv_.notify_all();
  return SendResult::Ok;
}

SendResult MailboxChannel::send_i32(std::span<const std::int32_t> values) {
  return send(std::as_bytes(values));
}

std::optional<std::vector<std::byte>> MailboxChannel::recv() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  auto msg = std::move(queue_.front());
  queue_.pop_front();
  return msg;
}

std::size_t MailboxChannel::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

bool MailboxChannel::wait_for_message(const std::function<bool()>& cancelled) {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return !queue_.empty() || cancelled(); });
  return !queue_.empty();
}

void MailboxChannel::notify_waiters() { cv_.notify_all(); }

}  // namespace rtcx::rtsim
