#include "faultlab/uarch.hpp"

#include "faultlab/error.hpp"

#include <string>

namespace faultlab {

bool DataCache::access(Address addr, AccessKind kind, EventCounts& delta) {
  auto& line = lines_[index_of(addr)];
  const auto tag = tag_of(addr);
  const bool hit = line.valid && line.tag == tag;
  if (!hit) {
    line.valid = true;
    line.tag = tag;
  }
  ++delta[event_index(kind == AccessKind::Read ? EventKind::MemRead : EventKind::MemWrite)];
  ++delta[event_index(hit ? EventKind::L1dHit : EventKind::L1dMiss)];
  return hit;
}

void DataCache::reset() { lines_.fill(Line{}); }

BranchResolution BranchPredictor::predict_and_resolve(Address pc, bool taken, EventCounts& delta) {
  auto& ctr = table_[slot(pc)];
  BranchResolution r;
  r.predicted = ctr >= 0b10;
  r.mispredicted = r.predicted != taken;
  if (taken && ctr < 0b11) ++ctr;
  if (!taken && ctr > 0b00) --ctr;
  ++delta[event_index(EventKind::BrExec)];
  if (taken) ++delta[event_index(EventKind::BrTaken)];
  if (r.mispredicted) ++delta[event_index(EventKind::BrMispred)];
  return r;
}

void PmuBank::configure(unsigned slot, EventKind event) {
  if (slot >= slots_.size())
    throw Error(ErrorCode::SlotOutOfRange, "slot " + std::to_string(slot) + " >= " + std::to_string(slots_.size()));
  if (enabled_) throw Error(ErrorCode::BankEnabled, "cannot reconfigure an enabled bank");
  slots_[slot] = Slot{event, 0};
}

std::uint64_t PmuBank::read(unsigned slot) const {
  if (slot >= slots_.size())
    throw Error(ErrorCode::SlotOutOfRange, "slot " + std::to_string(slot) + " >= " + std::to_string(slots_.size()));
  if (!slots_[slot].selected)
    throw Error(ErrorCode::SlotUnconfigured, "slot " + std::to_string(slot) + " has no event selected");
  return slots_[slot].count;
}

std::optional<EventKind> PmuBank::selected(unsigned slot) const {
  if (slot >= slots_.size()) return std::nullopt;
  return slots_[slot].selected;
}

void PmuBank::reset() {
  for (auto& s : slots_) s = Slot{};
  enabled_ = false;
}

}  // namespace faultlab
