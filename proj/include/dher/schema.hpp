#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dher {

using SlotId = int;
using ValueId = int;

// Sentinel value ids shared by every slot. Concrete values occupy
// [0, num_values); the two sentinels sit just past them.
struct SlotSpec {
  std::string name;
  int num_values = 0;      // concrete values only
  bool informable = false; // user may constrain it
  bool requestable = false;

  ValueId dontcare_id() const { return num_values; }
  ValueId unknown_id() const { return num_values + 1; }
  int belief_dim() const { return num_values + 2; }
};

// Slot layout for one booking domain. The booking slot is the one whose
// fulfilment closes the deal (ticket); it is requestable-only and its single
// concrete value means "granted".
class SlotSchema {
public:
  SlotSchema(std::vector<SlotSpec> slots, SlotId booking_slot)
      : slots_(std::move(slots)), booking_slot_(booking_slot) {
    if (booking_slot_ < 0 || booking_slot_ >= static_cast<SlotId>(slots_.size()))
      throw std::invalid_argument("booking slot out of range");
    for (const auto& s : slots_)
      if (s.num_values <= 0) throw std::invalid_argument("slot needs at least one value: " + s.name);
    if (slots_[booking_slot_].informable)
      throw std::invalid_argument("booking slot must not be informable");
    for (SlotId i = 0; i < size(); ++i) {
      if (i == booking_slot_) continue;
      if (slots_[i].informable) informable_.push_back(i);
      if (slots_[i].requestable) requestable_extra_.push_back(i);
    }
  }

  SlotId size() const { return static_cast<SlotId>(slots_.size()); }
  const SlotSpec& slot(SlotId s) const { return slots_.at(s); }
  SlotId booking_slot() const { return booking_slot_; }
  const std::vector<SlotId>& informable_slots() const { return informable_; }
  // requestable slots other than the booking slot
  const std::vector<SlotId>& extra_requestable_slots() const { return requestable_extra_; }

  SlotId find(const std::string& name) const {
    for (SlotId i = 0; i < size(); ++i)
      if (slots_[i].name == name) return i;
    throw std::out_of_range("no such slot: " + name);
  }

  // Total belief vector width when all slots are concatenated.
  int belief_dim() const {
    int d = 0;
    for (const auto& s : slots_) d += s.belief_dim();
    return d;
  }

private:
  std::vector<SlotSpec> slots_;
  SlotId booking_slot_;
  std::vector<SlotId> informable_;
  std::vector<SlotId> requestable_extra_;
};

// Eight-slot movie domain used for desk-scale experiments.
SlotSchema desk_schema();

// Wide variant: 29 slots, used with --paper-scale.
SlotSchema full_schema();

}  // namespace dher
